from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ruitenburg.poset import (NotOrderPreservingError, Poset, PosetError, PosetMap, RootedPoset,
                              all_rooted_posets, antichain_with_root, canonical_form, chain,
                              downset, downsets, format_model, height, is_open, one_point,
                              parse_model, powerset, product_labels, rooted_posets, two)


def _all_posets_brute(n):
    """Posets on n points up to isomorphism, by trying every relation and permutation."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    seen = set()
    for bits in itertools.product((False, True), repeat=len(pairs)):
        le = np.eye(n, dtype=bool)
        for (i, j), b in zip(pairs, bits):
            le[i, j] = b
        if (le & le.T & ~np.eye(n, dtype=bool)).any():
            continue
        if ((le.astype(int) @ le.astype(int) > 0) & ~le).any():
            continue
        code = min(le[np.ix_(p, p)].tobytes() for p in itertools.permutations(range(n)))
        seen.add(code)
    return len(seen)


def test_rooted_poset_counts_against_brute_force():
    brute = [1] + [_all_posets_brute(k) for k in range(1, 5)]
    assert [len(rooted_posets(n)) for n in range(1, 6)] == brute


def test_rooted_poset_counts_frozen():
    # posets on n - 1 points: 1, 1, 2, 5, 16, 63, 318, 2045
    assert [len(rooted_posets(n)) for n in range(1, 9)] == [1, 1, 2, 5, 16, 63, 318, 2045]


def test_rooted_posets_distinct_and_rooted_at_zero():
    for n in range(1, 7):
        codes = {canonical_form(p.le)[1] for p in rooted_posets(n)}
        assert len(codes) == len(rooted_posets(n))
        assert all(p.root() == 0 for p in rooted_posets(n))


def test_axioms_checked():
    with pytest.raises(PosetError):
        Poset(np.array([[True, True], [True, True]]))
    with pytest.raises(PosetError):
        Poset(np.array([[False]]))
    with pytest.raises(PosetError):
        Poset(np.array([[1, 1, 0], [0, 1, 1], [0, 0, 1]], dtype=bool))
    with pytest.raises(PosetError):
        RootedPoset(np.eye(2, dtype=bool))


def test_height_examples():
    assert height(one_point()) == 1
    assert height(chain(3)) == 3
    assert height(antichain_with_root(2)) == 2


def test_downset_examples():
    c = chain(3)
    assert downset(c, c.root()).n == 3
    assert downset(c, 0).n == 1
    d = downset(c, 1)
    assert d.n == 2 and d.height() == 2 and d.names == [0, 1]


@pytest.mark.parametrize("p", all_rooted_posets(5))
def test_downset_laws(p):
    whole = downset(p, p.root())
    assert np.array_equal(whole.le, p.le)
    for q in range(p.n):
        d = downset(p, q)
        assert d.height() == p.heights[q]
        again = downset(d, d.root())
        assert np.array_equal(again.le, d.le)


def test_is_open_examples():
    c = chain(2)
    assert is_open(PosetMap(c, c, (0, 1)))
    assert not is_open(PosetMap(c, c, (1, 1)))
    with pytest.raises(NotOrderPreservingError):
        is_open(PosetMap(c, c, (1, 0)))


def _open_brute(f):
    src, tgt = f.source, f.target
    for q in range(src.n):
        for p in range(tgt.n):
            if tgt.le[p, f.images[q]]:
                if not any(src.le[r, q] and f.images[r] == p for r in range(src.n)):
                    return False
    return True


def _maps(src, tgt):
    for images in itertools.product(range(tgt.n), repeat=src.n):
        f = PosetMap(src, tgt, images)
        if f.is_order_preserving():
            yield f


def test_is_open_against_definition():
    ps = all_rooted_posets(4)
    for src in ps:
        for tgt in ps:
            for f in _maps(src, tgt):
                assert is_open(f) == _open_brute(f)


def test_composition_of_open_maps_is_open():
    rng = random.Random(3)
    ps = all_rooted_posets(4)
    checked = 0
    for _ in range(300):
        a, b, c = (rng.choice(ps) for _ in range(3))
        fs = [f for f in _maps(a, b) if is_open(f)]
        gs = [g for g in _maps(b, c) if is_open(g)]
        if fs and gs:
            f, g = rng.choice(fs), rng.choice(gs)
            assert is_open(f.compose(g))
            checked += 1
    assert checked > 50


def test_product_labels_examples():
    t = two()
    tt = product_labels(t, t)
    assert tt.n == 4
    least = tt.index((1, 1))
    greatest = tt.index((0, 0))
    assert all(tt.le[least, j] for j in range(4))
    assert all(tt.le[j, greatest] for j in range(4))
    single = Poset(np.ones((1, 1), dtype=bool), ["*"])
    lt = product_labels(t, single)
    assert np.array_equal(lt.le, t.le)
    assert product_labels(powerset(["y"]), t).n == 4


def test_two_and_powerset_order():
    t = two()
    assert t.le[t.index(1), t.index(0)] and not t.le[t.index(0), t.index(1)]
    p = powerset(["x", "y"])
    assert p.le[p.index(frozenset("xy")), p.index(frozenset())]
    assert not p.le[p.index(frozenset()), p.index(frozenset("x"))]


def test_downsets_of_chain_and_antichain():
    assert len(downsets(chain(4))) == 5
    assert len(downsets(antichain_with_root(3))) == 9
    for p in all_rooted_posets(4):
        for row in downsets(p):
            assert p.is_downset(np.flatnonzero(row))


def test_model_text_roundtrip():
    p = rooted_posets(4)[3]
    labels = [frozenset(), frozenset("x"), frozenset("xy"), frozenset("y")]
    q, got = parse_model(format_model(p, labels))
    assert np.array_equal(q.le, p.le)
    assert got == labels
    q, bits = parse_model("poset 2\nle 1 0\nlabel2 1 1\n")
    assert bits == [0, 1] and q.root() == 0


@pytest.mark.parametrize("text", ["le 0 1", "poset 2\nle 0 5", "poset 2\nfoo 1",
                                  "poset 2\nlabel2 0 7", "poset 2"])
def test_model_text_errors(text):
    with pytest.raises(PosetError):
        parse_model(text)


@given(st.integers(1, 5), st.integers(0, 10 ** 6))
def test_canonical_form_is_invariant(n, seed):
    rng = random.Random(seed)
    p = rng.choice(rooted_posets(n))
    perm = list(range(n))
    rng.shuffle(perm)
    shuffled = p.le[np.ix_(perm, perm)]
    assert canonical_form(shuffled)[1] == canonical_form(p.le)[1]
