from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from conftest import formulas
from ruitenburg.corpus import count_formulas, enumerate_formulas, random_formula
from ruitenburg.formula import (BOT, TOP, And, Bottom, Iff, Implies, Not, Or, ParseError, Var,
                                dag_size, degree, iterate_formula, iterates, occurs_only_positively,
                                parse, parse_many, substitute, subformulas, to_text, tree_size,
                                variables)

x, y, z = Var("x"), Var("y"), Var("z")


def test_parse_example():
    assert parse("x -> (y | ~x)") is Implies(x, Or(y, Implies(x, BOT)))


def test_parse_error_offset():
    with pytest.raises(ParseError) as err:
        parse("(")
    assert err.value.offset == 1


@pytest.mark.parametrize("text", ["x &", "x y", "x -> ", "X", "(x", "x)", "x <- y", "~"])
def test_malformed(text):
    with pytest.raises(ParseError):
        parse(text)


def test_print_parse_example():
    a = parse("x & y -> z")
    assert a is Implies(And(x, y), z)
    assert parse(to_text(a)) is a


def test_precedence_and_associativity():
    assert parse("x -> y -> z") is Implies(x, Implies(y, z))
    assert parse("x | y & z") is Or(x, And(y, z))
    assert parse("~x & y") is And(Not(x), y)
    assert parse("x & y | z -> x") is Implies(Or(And(x, y), z), x)
    assert parse("x & y & z") is And(And(x, y), z)


def test_sugar_is_desugared():
    assert parse("~x") is Implies(x, BOT)
    assert parse("x <-> y") is And(Implies(x, y), Implies(y, x))
    assert parse("_|_") is BOT
    assert TOP is Implies(BOT, BOT)
    assert Iff(x, y) is parse("x <-> y")


def test_hash_consing():
    assert And(x, y) is And(Var("x"), Var("y"))
    assert And(x, y) is not And(y, x)
    assert Bottom() is BOT
    assert dag_size(And(And(x, y), And(x, y))) == 4
    assert tree_size(And(And(x, y), And(x, y))) == 7


def test_parse_many():
    assert parse_many(["x", "~y"]) == [x, Not(y)]


def test_substitute_examples():
    assert substitute(Implies(x, y), {"x": BOT}) is Implies(BOT, y)
    assert substitute(x, {}) is x
    assert substitute(And(x, y), {"x": y, "y": x}) is And(y, x)


def test_iterate_examples():
    assert iterate_formula(Not(x), "x", 2) is Not(Not(x))
    for i in range(1, 6):
        assert iterate_formula(x, "x", i) is x
    assert iterate_formula(And(x, y), "x", 3) is And(And(And(x, y), y), y)
    with pytest.raises(ValueError):
        iterate_formula(x, "x", 0)
    gen = iterates(Not(x), "x")
    assert [next(gen) for _ in range(3)] == [iterate_formula(Not(x), "x", i) for i in (1, 2, 3)]


def test_degree_examples():
    assert degree(x) == 0
    assert degree(BOT) == 0
    assert degree(Implies(x, y)) == 1
    assert degree(Implies(Implies(x, y), z)) == 2
    assert degree(Not(Implies(x, y))) == 2
    assert degree(And(Implies(x, y), Or(x, Not(z)))) == 1


def test_variables_and_positivity():
    a = parse("(y -> x) & z")
    assert variables(a) == {"x", "y", "z"}
    assert occurs_only_positively(a, "x")
    assert not occurs_only_positively(parse("x -> y"), "x")
    assert occurs_only_positively(parse("(x -> y) -> x"), "x")  # x is under two antecedents
    assert occurs_only_positively(parse("((x -> y) -> y) -> y"), "x") is False
    assert occurs_only_positively(parse("(x -> y) -> y"), "x")


def test_subformulas_children_first():
    a = parse("(x -> y) & x")
    subs = subformulas(a)
    assert subs[-1] is a
    pos = {s.uid: i for i, s in enumerate(subs)}
    for s in subs:
        for c in s.children:
            assert pos[c.uid] < pos[s.uid]


@given(formulas(("x", "y", "y1")))
def test_print_parse_roundtrip(a):
    assert parse(to_text(a)) is a


def test_roundtrip_corpus_10000():
    rng = random.Random(7)
    for _ in range(10_000):
        a = random_formula(rng, ["x", "y1", "y2"], 12)
        text = to_text(a)
        assert parse(text) is a
        # the printer is a normal form: printing again changes nothing
        assert to_text(parse(text)) == text


@given(st.text(alphabet="xy~&|-> ()_", max_size=20))
def test_parser_total(text):
    try:
        a = parse(text)
    except ParseError:
        return
    assert parse(to_text(a)) is a


@given(formulas(), st.integers(1, 4))
def test_iterate_recursion(a, i):
    assert iterate_formula(a, "x", i + 1) is substitute(a, {"x": iterate_formula(a, "x", i)})


@given(formulas(), st.integers(1, 3), st.integers(1, 3))
def test_iterate_composition(a, i, j):
    lhs = iterate_formula(a, "x", i + j)
    rhs = substitute(iterate_formula(a, "x", i), {"x": iterate_formula(a, "x", j)})
    assert lhs is rhs


@given(formulas(), st.integers(1, 5))
def test_degree_bound(a, i):
    assert degree(iterate_formula(a, "x", i)) <= i * degree(a)


# ---------------------------------------------------------------- corpus

def _count_by_brute_force(names, k):
    leaves = [Var(n) for n in names] + [BOT]
    levels = [leaves]
    for size in range(1, k + 1):
        level = []
        for i in range(size):
            for a in levels[i]:
                for b in levels[size - 1 - i]:
                    level += [And(a, b), Or(a, b), Implies(a, b)]
        levels.append(level)
    return [len(level) for level in levels]


def test_formula_counts():
    assert [count_formulas(["x", "y"], k) for k in range(5)] == _count_by_brute_force(["x", "y"], 4)
    # 3 leaves, 3 connectives: Catalan numbers times 3^k times 3^(k+1)
    assert [count_formulas(["x", "y"], k) for k in range(4)] == [3, 27, 486, 10935]


def test_enumeration_is_exhaustive():
    got = list(enumerate_formulas(["x", "y"], 2))
    assert len(got) == len(set(f.uid for f in got)) == 3 + 27 + 486


@given(st.integers(0, 2 ** 32))
def test_random_formula_in_bounds(seed):
    a = random_formula(random.Random(seed), ["x", "y1", "y2"], 9)
    assert tree_size(a) <= 2 * 9 + 1
    assert variables(a) <= {"x", "y1", "y2"}
