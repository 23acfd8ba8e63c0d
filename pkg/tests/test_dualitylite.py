from __future__ import annotations

import itertools
import random

import pytest

from ruitenburg import dualitylite as dl
from ruitenburg.evaluation import Evaluation, all_evaluations, equiv_n, reduced_trees
from ruitenburg.iteration import TWO
from ruitenburg.poset import PosetError, chain, one_point

POOL3 = list(all_evaluations(TWO, 3))
POOL4 = list(all_evaluations(TWO, 4))


def ev(poset, values):
    return Evaluation.from_names(poset, TWO, values)


# ----------------------------------------------------------------- iota

def test_iota_examples():
    u = ev(one_point(), [0])
    assert dl.iota_member(TWO, [0, 1], u)
    assert not dl.iota_member(TWO, [], u)
    assert not dl.iota_member(TWO, [1], u)
    assert dl.iota_member(TWO, [1], ev(one_point(), [1]))
    with pytest.raises(PosetError):
        dl.iota_member(TWO, [0], u)  # {0} is not downward closed since 1 <= 0


# --------------------------------------------------------------- down_n

def test_down_n_examples():
    u = ev(one_point(), [1])
    assert all(dl.down_n_member(e, n, e) for e in POOL3 for n in range(3))
    for v in POOL3:
        root_le = TWO.le[v.values[v.root], u.values[u.root]]
        assert dl.down_n_member(u, 0, v) == bool(root_le)
    v = ev(chain(2), [1, 0])
    assert not dl.down_n_member(u, 1, v)


# ------------------------------------------------------ restriction closure

def _family():
    rng = random.Random(3)
    fam = [dl.everything(TWO), dl.nothing(TWO), dl.iota(TWO, []), dl.iota(TWO, [1]),
           dl.iota(TWO, [0, 1])]
    fam += [dl.down_n(u, n) for n in (0, 1) for u in rng.sample(POOL3, 4)]
    fam += [dl.from_generators(rng.sample(POOL3, 2), 1)]
    fam += [dl.heyting_implies(fam[3], fam[6]), dl.heyting_join(fam[5], fam[7]),
            dl.heyting_meet(fam[6], fam[9])]
    return fam


@pytest.mark.parametrize("s", _family(), ids=lambda s: s.name)
def test_restriction_closed_and_invariant(s):
    for u in POOL4:
        if u in s:
            assert all(u.restrict(p) in s for p in range(u.domain.n))
    rng = random.Random(5)
    for _ in range(300):
        u, v = rng.choice(POOL4), rng.choice(POOL4)
        if equiv_n(u, v, s.b_index):
            assert (u in s) == (v in s)


# --------------------------------------------------------------- Heyting

def test_implication_examples():
    s = dl.down_n(ev(one_point(), [1]), 0)
    assert all(u in dl.heyting_implies(s, s) for u in POOL3)
    assert all(u in dl.heyting_implies(dl.nothing(TWO), s) for u in POOL3)
    imp = dl.heyting_implies(dl.down_n(ev(one_point(), [1]), 0), dl.nothing(TWO))
    for u in POOL3:
        never_one = all(TWO.names[u.values[p]] != 1 for p in range(u.domain.n))
        assert (u in imp) == never_one
    assert imp.b_index == 1


def test_b_indices():
    s, t = dl.down_n(POOL3[0], 1), dl.down_n(POOL3[1], 2)
    assert dl.heyting_implies(s, t).b_index == 3
    assert dl.heyting_meet(s, t).b_index == 2
    assert dl.heyting_join(s, t).b_index == 2


def test_from_generators_needs_one():
    with pytest.raises(ValueError):
        dl.from_generators([], 1)


# ------------------------------------------------------------------- ev

def test_ev_everything_and_iota():
    for f in POOL4:
        assert dl.ev_map(dl.everything(TWO), f) == frozenset(range(f.domain.n))
        for d in ([], [1], [0, 1]):
            expect = frozenset(p for p in range(f.domain.n) if TWO.names[f.values[p]] in d)
            assert dl.ev_map(dl.iota(TWO, d), f) == expect


def test_ev_is_lattice_morphism():
    fam = _family()
    rng = random.Random(9)
    for s, t in itertools.islice(itertools.product(fam, fam), 0, None, 3):
        for f in rng.sample(POOL4, 15):
            m = f.domain
            es, et = dl.ev_map(s, f), dl.ev_map(t, f)
            assert m.is_downset(es)
            assert dl.ev_map(dl.heyting_implies(s, t), f) == dl.downset_implies(m, es, et)
            assert dl.ev_map(dl.heyting_meet(s, t), f) == dl.downset_meet(es, et)
            assert dl.ev_map(dl.heyting_join(s, t), f) == dl.downset_join(es, et)


# ------------------------------------------------------------ normal form

def test_nform_one_point_labels():
    from ruitenburg.poset import Poset
    import numpy as np
    lab = Poset(np.ones((1, 1), dtype=bool), ["*"])
    pool = list(all_evaluations(lab, 3))
    r = dl.check_nform(pool[0], 0, pool)
    assert r.ok and r.checked == len(pool)


@pytest.mark.parametrize("n", [0, 1])
def test_nform_two(n):
    universe = list(reduced_trees(TWO, n)) + POOL3
    for u in POOL3:
        r = dl.check_nform(u, n, universe, POOL3)
        assert r.ok, r.mismatches[:1]
    assert "universe" in dl.NFormReport(n).caveat
