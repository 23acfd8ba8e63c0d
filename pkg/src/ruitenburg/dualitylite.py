"""Finite shadows of the duality between evaluations and free algebras.

Subpresheaves of ``h_L`` are families of ``L``-evaluations closed under
restriction.  They are represented intensionally: a membership test plus a
declared b-index ``n`` (membership only depends on the ``~n`` class).
Implication follows the pointwise description

    u in (S -> T)  iff  for all p: u_p in S implies u_p in T

and ``ev_f`` pulls a subpresheaf back to a downset of the domain of ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .evaluation import (BisimType, Evaluation, EvaluationError, bisim_type, leq_n,
                         point_types)
from .poset import Poset, PosetError

__all__ = [
    "Subpresheaf", "everything", "nothing", "iota", "iota_member", "down_n",
    "down_n_member", "from_generators", "heyting_implies", "heyting_meet",
    "heyting_join", "ev_map", "downset_implies", "downset_meet", "downset_join",
    "type_leq", "NFormReport", "check_nform",
]


@dataclass(frozen=True)
class Subpresheaf:
    labels: Poset
    member: Callable[[Evaluation], bool]
    b_index: int
    generators: tuple[Evaluation, ...] | None = None
    name: str = ""

    def __contains__(self, u: Evaluation) -> bool:
        if u.labels != self.labels:
            raise EvaluationError("evaluation over a different label poset")
        return self.member(u)


def everything(labels: Poset) -> Subpresheaf:
    return Subpresheaf(labels, lambda u: True, 0, name="top")


def nothing(labels: Poset) -> Subpresheaf:
    return Subpresheaf(labels, lambda u: False, 0, name="bottom")


def _label_indices(labels: Poset, d: Iterable[Hashable]) -> frozenset[int]:
    idx = frozenset(labels.index(x) for x in d)
    if not labels.is_downset(idx):
        raise PosetError("label set is not downward closed")
    return idx


def iota_member(labels: Poset, d: Iterable[Hashable], u: Evaluation) -> bool:
    """Whether the root label of ``u`` lies in the downset ``d`` (label names)."""
    return u.values[u.root] in _label_indices(labels, d)


def iota(labels: Poset, d: Iterable[Hashable]) -> Subpresheaf:
    """``iota_L(d)``: evaluations whose root label lies in ``d``."""
    idx = _label_indices(labels, d)
    return Subpresheaf(labels, lambda u: u.values[u.root] in idx, 0,
                       name=f"iota{sorted(map(repr, (labels.names[i] for i in idx)))}")


def down_n_member(u: Evaluation, n: int, v: Evaluation) -> bool:
    """``v in down_n(u)``, that is ``v <=n u``."""
    return leq_n(v, u, n)


def down_n(u: Evaluation, n: int) -> Subpresheaf:
    return Subpresheaf(u.labels, lambda v: leq_n(v, u, n), n, (u,), name=f"down{n}")


def from_generators(gens: Sequence[Evaluation], n: int) -> Subpresheaf:
    """Finite union of ``down_n`` of the generators."""
    gens = tuple(gens)
    if not gens:
        raise ValueError("at least one generator is needed (use nothing())")
    labels = gens[0].labels
    return Subpresheaf(labels, lambda v: any(leq_n(v, g, n) for g in gens), n, gens,
                       name=f"union{len(gens)}")


def _restrictions(u: Evaluation) -> list[Evaluation]:
    return [u.restrict(p) for p in range(u.domain.n)]


def heyting_implies(s: Subpresheaf, t: Subpresheaf) -> Subpresheaf:
    def member(u: Evaluation) -> bool:
        return all(not s.member(r) or t.member(r) for r in _restrictions(u))
    return Subpresheaf(s.labels, member, max(s.b_index, t.b_index) + 1,
                       name=f"({s.name} -> {t.name})")


def heyting_meet(s: Subpresheaf, t: Subpresheaf) -> Subpresheaf:
    return Subpresheaf(s.labels, lambda u: s.member(u) and t.member(u),
                       max(s.b_index, t.b_index), name=f"({s.name} & {t.name})")


def heyting_join(s: Subpresheaf, t: Subpresheaf) -> Subpresheaf:
    return Subpresheaf(s.labels, lambda u: s.member(u) or t.member(u),
                       max(s.b_index, t.b_index), name=f"({s.name} | {t.name})")


def ev_map(x: Subpresheaf, f: Evaluation) -> frozenset[int]:
    """``ev_f(X)``: points ``p`` of the domain of ``f`` with ``f_p in X``."""
    if f.labels != x.labels:
        raise EvaluationError("evaluation over a different label poset")
    return frozenset(p for p in range(f.domain.n) if x.member(f.restrict(p)))


# --------------------------------------------- downset algebra of a poset

def downset_implies(m: Poset, s: Iterable[int], t: Iterable[int]) -> frozenset[int]:
    s, t = frozenset(s), frozenset(t)
    return frozenset(p for p in range(m.n)
                     if all(q not in s or q in t for q in m.below(p)))


def downset_meet(s: Iterable[int], t: Iterable[int]) -> frozenset[int]:
    return frozenset(s) & frozenset(t)


def downset_join(s: Iterable[int], t: Iterable[int]) -> frozenset[int]:
    return frozenset(s) | frozenset(t)


# ------------------------------------------------------- normal form check

def type_leq(labels: Poset, a: BisimType, b: BisimType, n: int) -> bool:
    """``<=n`` on depth-``n`` types of evaluations.

    At ``n = 0`` root labels are compared in ``L``; above, the depth-``n``
    type carries ``Type_(n-1)`` as its set of children.
    """
    if n == 0:
        return bool(labels.le[labels.index(a.label), labels.index(b.label)])
    return a.children <= b.children


@dataclass
class NFormReport:
    n: int
    checked: int = 0
    universe_classes: int = 0
    mismatches: list[tuple[Evaluation, bool, bool]] = field(default_factory=list)
    caveat: str = ("the intersection and the unions range over the given universe only; "
                   "agreement is conditional on that universe containing every needed class")

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_nform(u: Evaluation, n: int, universe: Iterable[Evaluation],
                pool: Iterable[Evaluation] | None = None) -> NFormReport:
    """Compare ``down_(n+1) u`` with its normal form over a finite universe.

    The right-hand side is the intersection, over universe classes ``v``
    not ``~n`` to any restriction of ``u``, of
    ``down_n v -> union{down_n w : not v <=n w}``.
    Every ``z`` in ``pool`` (default: the universe) is tested on both sides.
    """
    universe = list(universe)
    pool = universe if pool is None else list(pool)
    labels = u.labels
    classes = sorted({bisim_type(e, n) for e in universe}, key=BisimType.sort_key)
    u_types = set(point_types(u, n))
    outside = [v for v in classes if v not in u_types]
    # for each v: the classes w with not v <=n w
    not_above = {v: [w for w in classes if not type_leq(labels, v, w, n)] for v in outside}
    report = NFormReport(n, universe_classes=len(classes))
    for z in pool:
        zt = point_types(z, n)
        lhs = set(zt) <= u_types
        rhs = True
        for v in outside:
            for t in zt:
                if type_leq(labels, t, v, n) and not any(
                        type_leq(labels, t, w, n) for w in not_above[v]):
                    rhs = False
                    break
            if not rhs:
                break
        report.checked += 1
        if lhs != rhs:
            report.mismatches.append((z, lhs, rhs))
    return report
