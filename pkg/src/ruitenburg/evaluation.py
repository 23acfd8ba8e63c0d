"""L-evaluations, Kripke forcing and bounded bisimulation types.

An evaluation is an order-preserving map from a finite rooted poset to a
finite label poset ``L``.  With ``L = powerset(vars)`` ordered by reverse
inclusion it is a Kripke model: lower points carry more variables, so the
set of points forcing a formula is always downward closed.

The relation ``u ~n v`` is decided by comparing hash-consed types::

    T_0(u)     = u(root)
    T_(n+1)(u) = (u(root), { T_n(u_p) : p in P })

Equality of ``T_(n+1)`` is the back-and-forth condition "every point of one
side has a ``~n`` partner on the other side" plus equal root labels; the
latter is implied by the former for order-preserving maps, so the type is a
complete invariant for ``~n``.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np

from .formula import And, Bottom, Formula, Implies, Or, Var, subformulas, variables
from .poset import Poset, RootedPoset, all_rooted_posets, downset, powerset

__all__ = [
    "EvaluationError", "Evaluation", "kripke", "graft",
    "eval_masks", "truth_set", "forces",
    "BisimType", "types_from", "point_types", "bisim_type", "type_set", "equiv_n", "leq_n",
    "all_evaluations", "reduced_trees",
]


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Evaluation:
    """An order-preserving map ``domain -> labels`` (values are label indices)."""

    domain: RootedPoset
    labels: Poset
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.domain.n:
            raise EvaluationError("one label per point required")
        if not self.domain.is_order_preserving(self.values, self.labels):
            raise EvaluationError("evaluation is not order-preserving")

    @classmethod
    def from_names(cls, domain: RootedPoset, labels: Poset,
                   names: Sequence[Hashable]) -> "Evaluation":
        return cls(domain, labels, tuple(labels.index(nm) for nm in names))

    def name(self, p: int) -> Hashable:
        return self.labels.names[self.values[p]]

    def names(self) -> list[Hashable]:
        return [self.labels.names[v] for v in self.values]

    @property
    def root(self) -> int:
        return self.domain.root()

    def restrict(self, p: int) -> "Evaluation":
        """``u_p``: the restriction to the downset of ``p``."""
        idx = self.domain.below(p)
        sub = downset(self.domain, p)
        return Evaluation(sub, self.labels, tuple(self.values[i] for i in idx))

    def __eq__(self, other) -> bool:
        return (isinstance(other, Evaluation) and self.domain == other.domain
                and self.labels == other.labels and self.values == other.values)

    def __hash__(self) -> int:
        return hash((self.domain, self.values))

    def __repr__(self) -> str:
        return f"Evaluation(covers={self.domain.covers()}, labels={self.names()})"

    @cached_property
    def down_masks(self) -> tuple[int, ...]:
        """Bitmask of the points below each point."""
        return tuple(sum(1 << q for q in self.domain.below(p)) for p in range(self.domain.n))


def kripke(domain: RootedPoset, sets: Sequence[Iterable[str]],
           variables: Iterable[str] | None = None) -> Evaluation:
    """Kripke model from per-point sets of true variables."""
    sets = [frozenset(s) for s in sets]
    vs = set(variables) if variables is not None else set().union(*sets)
    return Evaluation.from_names(domain, powerset(vs), sets)


def graft(labels: Poset, root_label: int, children: Sequence[Evaluation]) -> Evaluation:
    """New root labelled ``root_label`` placed above disjoint copies of ``children``."""
    n = 1 + sum(c.domain.n for c in children)
    le = np.zeros((n, n), dtype=bool)
    le[:, 0] = True
    values = [root_label]
    offset = 1
    for c in children:
        m = c.domain.n
        le[offset:offset + m, offset:offset + m] = c.domain.le
        values.extend(c.values)
        offset += m
    return Evaluation(RootedPoset(le, check=False), labels, tuple(values))


# ----------------------------------------------------------------- forcing

def _kripke_vars(u: Evaluation) -> frozenset[str]:
    names = u.labels.names
    if not all(isinstance(nm, frozenset) for nm in names):
        raise EvaluationError("forcing needs a Kripke model (powerset labels)")
    return frozenset().union(*names)


def eval_masks(a: Formula, down: Sequence[int], atoms: dict[str, int]) -> int:
    """Truth set of ``a`` as a bitmask, given the downset mask of every point
    and the truth-set mask of every variable."""
    n = len(down)
    full = (1 << n) - 1
    val: dict[int, int] = {}
    for node in subformulas(a):
        if isinstance(node, Bottom):
            v = 0
        elif isinstance(node, Var):
            v = atoms[node.name]
        elif isinstance(node, And):
            v = val[node.left.uid] & val[node.right.uid]
        elif isinstance(node, Or):
            v = val[node.left.uid] | val[node.right.uid]
        elif isinstance(node, Implies):
            bad = val[node.left.uid] & ~val[node.right.uid] & full
            v = 0
            for p in range(n):
                if not down[p] & bad:
                    v |= 1 << p
        else:  # pragma: no cover
            raise TypeError(node)
        val[node.uid] = v
    return val[a.uid]


def truth_set(u: Evaluation, a: Formula) -> int:
    """Bitmask of the points of ``u`` that force ``a``."""
    universe = _kripke_vars(u)
    missing = variables(a) - universe
    if missing:
        raise EvaluationError(f"unknown variables {sorted(missing)}")
    names = u.names()
    atoms = {v: sum(1 << p for p in range(u.domain.n) if v in names[p]) for v in variables(a)}
    return eval_masks(a, u.down_masks, atoms)


def forces(u: Evaluation, a: Formula, p: int | None = None) -> bool:
    """Whether the restriction ``u_p`` forces ``a`` (default: at the root)."""
    if p is None:
        p = u.root
    return bool(truth_set(u, a) >> p & 1)


# ------------------------------------------------------------ bisim types

class BisimType:
    """Canonical, hash-consed representative of a ``~n`` class."""

    __slots__ = ("depth", "label", "children", "_hash", "_key")
    _table: dict[tuple, "BisimType"] = {}
    _lock = threading.Lock()

    def __new__(cls, depth: int, label: Hashable,
                children: frozenset["BisimType"] = frozenset()):
        if depth == 0:
            children = frozenset()
        key = (depth, label, children)
        node = cls._table.get(key)
        if node is None:
            with cls._lock:
                node = cls._table.get(key)
                if node is None:
                    node = object.__new__(cls)
                    node.depth = depth
                    node.label = label
                    node.children = children
                    node._hash = hash(key)
                    node._key = None
                    cls._table[key] = node
        return node

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __reduce__(self):
        return (BisimType, (self.depth, self.label, self.children))

    def truncate(self, m: int) -> "BisimType":
        """The depth-``m`` type of the same evaluation (``m <= depth``)."""
        if m > self.depth:
            raise ValueError("cannot deepen a type")
        if m == self.depth:
            return self
        if m == 0:
            return BisimType(0, self.label)
        # the depth-(m-1) truncations of the children give Type_(m-1)
        return BisimType(m, self.label, frozenset(c.truncate(m - 1) for c in self.children))

    def sort_key(self) -> tuple:
        if self._key is None:
            self._key = (self.depth, repr(self.label),
                         tuple(sorted(c.sort_key() for c in self.children)))
        return self._key

    def __repr__(self) -> str:
        if self.depth == 0:
            return f"T0({self.label!r})"
        return f"T{self.depth}({self.label!r}, {len(self.children)} subtypes)"


def types_from(names: Sequence[Hashable], below: Sequence[Sequence[int]],
               n: int) -> list[BisimType]:
    """Depth-``n`` types of every point, from point labels and downsets."""
    cur = [BisimType(0, nm) for nm in names]
    for k in range(1, n + 1):
        cur = [BisimType(k, names[p], frozenset(cur[q] for q in below[p]))
               for p in range(len(names))]
    return cur


def point_types(u: Evaluation, n: int) -> list[BisimType]:
    """``T_n(u_p)`` for every point ``p``."""
    return types_from(u.names(), [u.domain.below(p) for p in range(u.domain.n)], n)


def bisim_type(u: Evaluation, n: int) -> BisimType:
    return point_types(u, n)[u.root]


def type_set(u: Evaluation, n: int) -> frozenset[BisimType]:
    """``Type_n(u)``: the classes of all restrictions of ``u``."""
    return frozenset(point_types(u, n))


def _check_same_labels(u: Evaluation, v: Evaluation) -> None:
    if u.labels != v.labels:
        raise EvaluationError("evaluations over different label posets")


def equiv_n(u: Evaluation, v: Evaluation, n: int) -> bool:
    _check_same_labels(u, v)
    return bisim_type(u, n) is bisim_type(v, n)


def leq_n(v: Evaluation, u: Evaluation, n: int) -> bool:
    """``v <=n u``: root labels compared in ``L`` at 0, else ``Type_(n-1)`` inclusion."""
    _check_same_labels(u, v)
    if n == 0:
        return v.labels.leq(v.values[v.root], u.values[u.root])
    return type_set(v, n - 1) <= type_set(u, n - 1)


# ------------------------------------------------------------- enumeration

def _order_preserving_maps(p: Poset, labels: Poset) -> Iterator[tuple[int, ...]]:
    order = sorted(range(p.n), key=lambda q: int(p.le[:, q].sum()))
    below = [p.strictly_below(q) for q in range(p.n)]
    values = [0] * p.n

    def rec(k: int):
        if k == p.n:
            yield tuple(values)
            return
        q = order[k]
        for lab in range(labels.n):
            if all(labels.le[values[r], lab] for r in below[q]):
                values[q] = lab
                yield from rec(k + 1)

    yield from rec(0)


def all_evaluations(labels: Poset, max_points: int) -> Iterator[Evaluation]:
    """Every evaluation on every rooted poset with at most ``max_points`` points."""
    for poset in all_rooted_posets(max_points):
        for vals in _order_preserving_maps(poset, labels):
            yield Evaluation(poset, labels, vals)


def reduced_trees(labels: Poset, n: int, max_width: int | None = None,
                  budget: int = 200_000) -> list[Evaluation]:
    """Tree-shaped candidate representatives of the ``~n`` classes.

    Trees of height at most ``n + 1``; the children of a node are drawn from
    the representatives one level down, pairwise non-equivalent, at most
    ``max_width`` of them.  One tree is kept per ``T_n`` class.
    """
    reps: dict[BisimType, Evaluation] = {}
    for lab in range(labels.n):
        e = Evaluation(RootedPoset(np.ones((1, 1), dtype=bool), check=False), labels, (lab,))
        reps.setdefault(bisim_type(e, 0), e)
    built = 0
    for k in range(1, n + 1):
        prev = sorted(reps.items(), key=lambda kv: kv[0].sort_key())
        level: dict[BisimType, Evaluation] = {}
        for lab in range(labels.n):
            pool = [e for _, e in prev if labels.le[e.values[e.root], lab]]
            width = len(pool) if max_width is None else min(max_width, len(pool))
            for r in range(width + 1):
                for kids in itertools.combinations(pool, r):
                    built += 1
                    if built > budget:
                        raise EvaluationError("reduced_trees budget exceeded")
                    tree = graft(labels, lab, kids)
                    level.setdefault(bisim_type(tree, k), tree)
        reps = level
    return [reps[t] for t in sorted(reps, key=lambda t: t.sort_key())]
