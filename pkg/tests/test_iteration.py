from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import formulas
from ruitenburg.evaluation import EvaluationError, equiv_n, forces, kripke
from ruitenburg.experiments import random_combined_model
from ruitenburg.formula import BOT, And, Implies, Not, Or, Var, iterate_formula, parse, variables
from ruitenburg.iteration import (TWO, CombinedModel, PositivityError, b_index, check_lemma_period,
                                  check_minrank, chi, format_trace, is_periodic_point, iterate_psi,
                                  rank, ruitenburg_index, type_class_counts, type_pairs)
from ruitenburg.poset import chain, one_point
from ruitenburg.prover import Prover, equiv_ipc

x, y, z = Var("x"), Var("y"), Var("z")
PLAIN = Prover(classical_filter=False, refute_points=None)


def single(x_bit, ys=()):
    return CombinedModel.build(one_point(), [set(ys)], [x_bit], ["y"])


def _states_oracle(a, m, steps):
    """x-sets by forcing A on the Kripke model with the current x-set."""
    bits = [m.u.values[p] == TWO.index(1) for p in range(m.n)]
    out = []
    for _ in range(steps):
        out.append(tuple(bits))
        sets = [set(m.v.name(p)) | ({"x"} if bits[p] else set()) for p in range(m.n)]
        k = kripke(m.poset, sets, set(m.y_vars) | {"x"})
        bits = [forces(k, a, p) for p in range(m.n)]
    return out


# ---------------------------------------------------------------------- chi

def test_chi_examples():
    m = CombinedModel.build(chain(3), [{"y"}, {"y"}, set()], [1, 0, 0], ["y"])
    assert chi(x, m).values == m.u.values
    one = single(0, ["y"])
    assert chi(y, one).names() == [1]
    assert chi(y, single(1, ["y"])).names() == [1]
    m1 = single(1)
    m2 = m1.with_u(chi(Not(x), m1).values[0] == TWO.index(1))
    assert chi(Not(x), m1).names() == [0]
    assert chi(Not(x), m2).names() == [1]


def test_chi_variable_mismatch():
    with pytest.raises(EvaluationError):
        chi(z, single(0))


def test_combined_model_checks():
    with pytest.raises(EvaluationError):
        CombinedModel.build(chain(2), [set(), set()], [0, 1], ["y"])  # x-set not downward closed
    m = CombinedModel.build(chain(2), [{"y"}, set()], [1, 0], ["y"])
    e = m.as_evaluation()
    assert e.names() == [(frozenset({"y"}), 1), (frozenset(), 0)]
    assert m.kripke().names() == [frozenset({"x", "y"}), frozenset()]


# ------------------------------------------------------------------ traces

def test_trace_examples():
    m = CombinedModel.build(chain(2), [set(), set()], [1, 0], ["y"])
    t = iterate_psi(x, m)
    assert (t.index, t.period) == (0, 1)
    t = iterate_psi(Not(x), single(1))
    assert (t.index, t.period) == (0, 2)
    assert [t.state(s) for s in range(4)] == [1, 0, 1, 0]
    t = iterate_psi(parse("~x | y"), m)
    assert t.period <= 2
    assert t.states == [1, 0, 3, 0]
    assert (t.index, t.period) == (1, 2)
    assert format_trace(t) == "10\n00\n11\n00\nindex 1 period 2\n"


def test_incomplete_trace():
    m = CombinedModel.build(chain(3), [set()] * 3, [1, 1, 0], ["y"])
    t = iterate_psi(Not(x), m, t_max=1)
    if not t.complete:
        assert format_trace(t).endswith("trace incomplete\n")
        with pytest.raises(IndexError):
            t.state(10)
    with pytest.raises(ValueError):
        iterate_psi(x, m, t_max=0)


@given(formulas(("x", "y1", "y2"), max_leaves=10), st.integers(0, 10 ** 6))
def test_trace_against_forcing_oracle(a, seed):
    m = random_combined_model(random.Random(seed), sorted(variables(a) - {"x"}), 6)
    t = iterate_psi(a, m)
    oracle = _states_oracle(a, m, t.index + t.period + 3)
    for s, bits in enumerate(oracle):
        assert tuple(bool(t.state(s) >> p & 1) for p in range(m.n)) == bits
    # (index, period) is the least pair
    seq = [t.state(s) for s in range(len(oracle))]
    for i in range(t.index + 1):
        for k in range(1, t.period + 1 if i == t.index else t.period + 3):
            if (i, k) < (t.index, t.period):
                assert any(seq[s] != seq[s + k] for s in range(i, len(seq) - k))


@given(formulas(("x", "y1", "y2"), max_leaves=10), st.integers(0, 10 ** 6))
def test_height_bound_and_period(a, seed):
    m = random_combined_model(random.Random(seed), sorted(variables(a) - {"x"}), 8)
    t = iterate_psi(a, m)
    h = m.poset.height()
    assert t.state(h) == t.state(h + 2)
    assert t.period in (1, 2)
    assert t.index <= h


@given(formulas(("x", "y"), max_leaves=8), st.integers(0, 10 ** 6), st.integers(1, 5))
def test_bridge_forcing_of_iterates(a, seed, i):
    m = random_combined_model(random.Random(seed), sorted(variables(a) - {"x"}), 5)
    # start from the true x-set: the i-th state is the truth set of A^i
    k = m.kripke()
    t = iterate_psi(a, m)
    ai = iterate_formula(a, "x", i)
    for p in range(m.n):
        assert bool(t.state(i) >> p & 1) == forces(k, ai, p)


# ------------------------------------------------------------- periodicity

def test_periodic_point_examples():
    m = CombinedModel.build(chain(3), [{"y"}, {"y"}, set()], [1, 0, 0], ["y"])
    t = iterate_psi(x, m)
    assert all(is_periodic_point(t, p, 0) for p in range(3))
    t = iterate_psi(Not(x), single(1))
    assert is_periodic_point(t, 0, 0)


def test_lemma_period_examples():
    m = CombinedModel.build(chain(3), [{"y"}, {"y"}, set()], [1, 0, 0], ["y"])
    assert check_lemma_period(x, m).ok
    r = check_lemma_period(Not(x), single(1))
    assert r.ok and r.checked >= 1


def test_non_periodic_fixture_exists():
    """Some random model has a non-periodic point whose strict downset is periodic."""
    rng = random.Random(2)
    found = 0
    for _ in range(400):
        a = rng.choice([parse(s) for s in ["~x | y", "(x -> y) -> x", "~~x -> y", "x | ~x"]])
        m = random_combined_model(rng, sorted(variables(a) - {"x"}), 6)
        t = iterate_psi(a, m)
        lt = m.poset.lt
        for p in range(m.n):
            below_ok = all(is_periodic_point(t, q, 0) for q in range(m.n) if lt[q, p])
            if below_ok and not is_periodic_point(t, p, 0):
                found += 1
                assert is_periodic_point(t, p, 1)
    assert found > 0


@given(formulas(("x", "y1", "y2"), max_leaves=10), st.integers(0, 10 ** 6))
def test_lemma_period_property(a, seed):
    m = random_combined_model(random.Random(seed), sorted(variables(a) - {"x"}), 8)
    assert check_lemma_period(a, m).ok


# ------------------------------------------------------------------- ranks

def test_rank_examples():
    m = CombinedModel.build(chain(3), [set()] * 3, [0, 0, 0], ["y"])
    t = iterate_psi(x, m)
    assert [rank(t, p) for p in range(3)] == [1, 1, 1]
    assert b_index(x) == 1 and b_index(parse("(x -> y) -> y")) == 2
    pairs = type_pairs(t, 0)
    assert len(set(pairs)) == 1


def test_rank_zero_without_periodic_points():
    # x | ~x on a 2-chain starting from "x nowhere": every step changes the root
    rng = random.Random(4)
    zero = 0
    for _ in range(300):
        a = rng.choice([parse("~x"), parse("~x | y"), parse("~~x -> x")])
        m = random_combined_model(rng, sorted(variables(a) - {"x"}), 5)
        t = iterate_psi(a, m)
        for p in range(m.n):
            if not any(is_periodic_point(t, q, 0) for q in m.poset.below(p)):
                assert rank(t, p) == 0
                zero += 1
    assert zero > 0


@given(formulas(("x", "y1", "y2"), max_leaves=10), st.integers(0, 10 ** 6))
def test_rank_monotone(a, seed):
    m = random_combined_model(random.Random(seed), sorted(variables(a) - {"x"}), 7)
    t = iterate_psi(a, m)
    for s in range(2):
        ranks = [rank(t, p, s) for p in range(m.n)]
        for p in range(m.n):
            for q in m.poset.below(p):
                assert ranks[p] >= ranks[q]


@given(formulas(("x", "y1", "y2"), max_leaves=10), st.integers(0, 10 ** 6))
def test_minimal_rank_lemma(a, seed):
    m = random_combined_model(random.Random(seed), sorted(variables(a) - {"x"}), 8)
    assert check_minrank(iterate_psi(a, m)).ok


def test_minimal_rank_fixtures_occur():
    rng = random.Random(8)
    fixtures = 0
    for _ in range(200):
        a = rng.choice([parse("~x | y1"), parse("(x -> y1) -> x"), parse("~~x -> y2 | x")])
        m = random_combined_model(rng, sorted(variables(a) - {"x"}), 7)
        fixtures += check_minrank(iterate_psi(a, m)).fixtures
    assert fixtures > 0


def test_type_class_counts():
    assert type_class_counts([], 2) == [2, 3, 4]
    assert type_class_counts(["y"], 1) == [4, 13]


# ------------------------------------------------------- bounded bisimulation

@given(formulas(("x", "y"), max_leaves=8), st.integers(0, 10 ** 6))
@settings(max_examples=60)
def test_b_index_decides_root_value(a, seed):
    rng = random.Random(seed)
    n = b_index(a)
    ms = [random_combined_model(rng, ["y"], 4) for _ in range(25)]
    for i, m1 in enumerate(ms):
        for m2 in ms[i + 1:]:
            if equiv_n(m1.as_evaluation(), m2.as_evaluation(), n):
                c1, c2 = chi(a, m1), chi(a, m2)
                assert equiv_n(c1, c2, 0)


# ----------------------------------------------------------- Ruitenburg index

def _index_oracle(a):
    for n in range(1, 20):
        if equiv_ipc(iterate_formula(a, "x", n + 2), iterate_formula(a, "x", n), PLAIN):
            return n, 1 if equiv_ipc(iterate_formula(a, "x", n + 1),
                                     iterate_formula(a, "x", n), PLAIN) else 2
    raise AssertionError("no index")


def test_index_examples():
    assert ruitenburg_index(x) == (1, 1)
    assert ruitenburg_index(Not(x)) == (1, 2)
    assert ruitenburg_index(Or(x, y)) == (1, 1)


@pytest.mark.parametrize("text", ["~x", "x -> y", "(x -> y) -> y", "~~x -> x", "x | ~x",
                                  "(y -> x) -> x", "((x -> y) -> x) -> x", "x & y | ~x",
                                  "~x | y & (y -> x)", "(x -> y) | (y -> x)", "~(x & ~y)"])
def test_index_against_plain_oracle(text):
    a = parse(text)
    assert ruitenburg_index(a) == _index_oracle(a)
    assert ruitenburg_index(a, screen_points=None, prover=PLAIN) == _index_oracle(a)


@given(formulas(("x", "y"), max_leaves=6))
@settings(max_examples=40)
def test_index_property(a):
    n, k = ruitenburg_index(a)
    assert k in (1, 2)
    assert ruitenburg_index(a, screen_points=None) == (n, k)


def test_fixpoint_examples():
    from ruitenburg.iteration import fixpoint_check
    assert equiv_ipc(fixpoint_check(Or(x, y)), y)
    assert fixpoint_check(x) is BOT
    a = And(Implies(y, x), z)
    f = fixpoint_check(a)
    from ruitenburg.formula import substitute
    assert equiv_ipc(substitute(a, {"x": f}), f)
    with pytest.raises(PositivityError):
        fixpoint_check(Not(x))
