from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings

from conftest import formulas
from ruitenburg.evaluation import forces
from ruitenburg.formula import BOT, And, Iff, Implies, Not, Or, Var, parse, variables
from ruitenburg.poset import format_model
from ruitenburg.prover import (CPCBudgetExceeded, Prover, ProverBudgetExceeded, countermodel,
                               equiv_ipc, prove_cpc, prove_ipc)

x, y = Var("x"), Var("y")

THEOREMS = [
    "x -> x", "x -> y -> x", "x & y -> y & x", "x | y -> y | x", "_|_ -> x",
    "~~~x <-> ~x", "x -> ~~x", "~(x | y) <-> ~x & ~y", "(x -> y) -> ~y -> ~x",
    "~~(x | ~x)", "~~(~~x -> x)", "((x -> y) -> x) -> ~~x", "(x | ~x) -> ~~x -> x",
    "(x -> y) & (y -> z) -> x -> z", "~x | y -> x -> y",
    "x & (y | z) <-> x & y | x & z", "~~(x -> y) <-> (~~x -> ~~y)",
]

NON_THEOREMS = [
    "x | ~x", "~~x -> x", "((x -> y) -> x) -> x", "(x -> y) | (y -> x)", "~x | ~~x",
    "(~x -> y | z) -> (~x -> y) | (~x -> z)", "(x -> y) -> ~x | y", "~(x & y) -> ~x | ~y",
    "x", "_|_", "(~~x -> x) -> x | ~x", "((x -> y) -> y) -> (y -> x) -> x",
]


@pytest.mark.parametrize("text", THEOREMS)
def test_theorems(text):
    a = parse(text)
    assert prove_ipc(a)
    assert countermodel(a, 4) is None


@pytest.mark.parametrize("text", NON_THEOREMS)
def test_non_theorems(text):
    a = parse(text)
    assert not prove_ipc(a)
    cm = countermodel(a, 6)
    assert cm is not None
    assert not forces(cm.valuation, a)


def test_prove_examples():
    assert prove_ipc(parse("x -> x"))
    assert not prove_ipc(parse("x | ~x"))
    assert prove_ipc(parse("~~~x <-> ~x"))


def test_equiv_examples():
    assert equiv_ipc(x, And(x, x))
    assert not equiv_ipc(x, Not(Not(x)))
    assert equiv_ipc(Not(x), Not(Not(Not(x))))


def test_cpc_examples():
    assert prove_cpc(parse("x | ~x"))
    assert not prove_cpc(x)
    assert prove_cpc(parse("((x -> y) -> x) -> x"))
    many = Var("v0")
    for i in range(1, 25):
        many = Or(many, Var(f"v{i}"))
    with pytest.raises(CPCBudgetExceeded):
        prove_cpc(many)


def test_countermodel_examples():
    cm = countermodel(parse("x | ~x"), 2)
    assert cm.poset.n == 2
    labels = cm.labels()
    root = cm.poset.root()
    bottom = 1 - root
    assert labels[root] == frozenset() and labels[bottom] == frozenset({"x"})
    assert countermodel(parse("x -> x"), 8) is None
    cm2 = countermodel(parse("~~x -> x"), 2)
    assert cm2.labels() == labels
    assert format_model(cm.poset, labels) == "poset 2\nle 1 0\nlabel 0\nlabel 1 x\n"


def test_countermodel_is_minimal():
    # x | ~x has no one-point countermodel
    assert countermodel(parse("x | ~x"), 1) is None
    # (x -> y) | (y -> x) needs a fork: three points
    cm = countermodel(parse("(x -> y) | (y -> x)"), 8)
    assert cm.poset.n == 3


def test_budget_is_an_error_not_a_verdict():
    p = Prover(budget=3, refute_points=None, classical_filter=False)
    with pytest.raises(ProverBudgetExceeded):
        p.prove(parse("((x -> y) -> x) -> ~~x & (x | ~x -> x | ~x)"))


def test_hypotheses_and_cache_limit():
    p = Prover(cache_limit=5)
    assert p.prove(y, [x, Implies(x, y)])
    assert p.entails([Or(x, y), Not(x)], y)
    assert not p.prove(y, [Or(x, y)])
    for text in THEOREMS:
        assert p.prove(parse(text))


def _classical_oracle(a):
    vs = sorted(variables(a))
    for bits in itertools.product((False, True), repeat=len(vs)):
        env = dict(zip(vs, bits))

        def ev(f):
            if f is BOT:
                return False
            if isinstance(f, Var):
                return env[f.name]
            if isinstance(f, And):
                return ev(f.left) and ev(f.right)
            if isinstance(f, Or):
                return ev(f.left) or ev(f.right)
            return (not ev(f.left)) or ev(f.right)
        if not ev(a):
            return False
    return True


@given(formulas(("x", "y", "z")))
def test_cpc_against_oracle(a):
    assert prove_cpc(a) == _classical_oracle(a)


PLAIN = Prover(classical_filter=False, refute_points=None)


@given(formulas(("x", "y"), max_leaves=10))
@settings(max_examples=300)
def test_pruned_prover_matches_plain_search(a):
    assert prove_ipc(a) == PLAIN.prove(a)


@given(formulas(("x", "y"), max_leaves=7))
@settings(max_examples=200)
def test_oracle_agreement(a):
    if prove_ipc(a):
        assert countermodel(a, 5) is None
    else:
        cm = countermodel(a, 6)
        assert cm is not None
        assert not forces(cm.valuation, a)


@given(formulas(("x", "y"), max_leaves=8))
def test_glivenko(a):
    assert prove_cpc(a) == prove_ipc(Not(Not(a)))


@given(formulas(("x", "y"), max_leaves=6), formulas(("x", "y"), max_leaves=6))
def test_modus_ponens_closure(a, b):
    if prove_ipc(Implies(a, b)) and prove_ipc(a):
        assert prove_ipc(b)
    assert prove_ipc(Implies(And(a, Implies(a, b)), b))


@given(formulas(("x", "y"), max_leaves=8))
def test_intuitionistic_implies_classical(a):
    if prove_ipc(a):
        assert prove_cpc(a)
    assert equiv_ipc(a, a)
    assert prove_ipc(Iff(a, And(a, a)))
