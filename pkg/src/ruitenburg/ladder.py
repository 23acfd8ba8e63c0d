"""A ladder poset whose downset algebra carries a non-periodic endomorphism.

Points are ``-1, 0, 1, ...`` with ``n <= m`` iff ``n = -1`` or
(``n >= 0`` and (``n <= m - 2`` or ``n = m``)).  The infinite poset is
handled through the truncation to ``-1..k``, which is itself a downset, so
forcing and downset implication (which only look downwards) agree with the
infinite ladder on it.  Point ``n`` sits at matrix index ``n + 1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cache
from typing import Iterable

import numpy as np

from .evaluation import Evaluation, EvaluationError, eval_masks, forces, kripke
from .formula import And, Formula, Iff, Implies, Not, Or, Var, substitute
from .poset import Poset, PosetMap, is_open, rooted_posets
from .prover import Prover, default_prover

__all__ = [
    "LadderError", "TruncationError", "ladder_leq", "LadderPoset", "LadderDownset",
    "generator_formula", "eval_downset", "eval_generator", "vee_vee", "ladder_endo",
    "inverse_image", "inverse_image_iterates", "star_construction", "PRESENTATION",
    "SIGMA", "projectivity_conditions", "projectivity_check", "random_presentation_model",
]

A, B = Var("a"), Var("b")
PRESENTATION = And(Not(Not(A)), Implies(A, B))
SIGMA = {"a": Implies(Not(Not(A)), A),
         "b": Implies(Implies(Implies(Not(Not(A)), A), B), B)}


class LadderError(ValueError):
    pass


class TruncationError(LadderError):
    """The result would leave the truncated ladder."""


def ladder_leq(n: int, m: int) -> bool:
    return n == -1 or (n >= 0 and (n <= m - 2 or n == m))


@cache
def LadderPoset(k: int) -> Poset:
    """The ladder truncated to the points ``-1..k`` (names are the integers)."""
    if k < 3:
        raise LadderError("truncation level must be at least 3")
    pts = list(range(-1, k + 1))
    le = np.array([[ladder_leq(a, b) for b in pts] for a in pts], dtype=bool)
    return Poset(le, pts)


def _down(n: int, k: int) -> frozenset[int]:
    return frozenset(m for m in range(-1, k + 1) if ladder_leq(m, n))


@dataclass(frozen=True)
class LadderDownset:
    """A downset of the infinite ladder in normal form.

    ``kind`` is ``"empty"``, ``"full"`` (the whole ladder), ``"down"``
    (``down(n)``) or ``"pair"`` (``down(n) | down(n+1)``, ``n >= 0``).
    """

    kind: str
    n: int | None = None

    def points(self, k: int) -> frozenset[int]:
        """The intersection with ``-1..k``."""
        if self.kind == "empty":
            return frozenset()
        if self.kind == "full":
            return frozenset(range(-1, k + 1))
        if self.kind == "down":
            return _down(self.n, k)
        return _down(self.n, k) | _down(self.n + 1, k)

    def top(self) -> int | None:
        """Largest point, or ``None`` for empty and full."""
        if self.kind == "down":
            return self.n
        if self.kind == "pair":
            return self.n + 1
        return None

    @classmethod
    def classify(cls, pts: Iterable[int], k: int) -> "LadderDownset":
        """Normal form of a downset of the truncation that is below its top two levels."""
        pts = frozenset(pts)
        if not pts:
            return cls("empty")
        lp = LadderPoset(k)
        if not lp.is_downset(lp.index(p) for p in pts):
            raise LadderError("not a downset")
        maximal = sorted(p for p in pts if not any(q != p and ladder_leq(p, q) for q in pts))
        if len(maximal) == 1 and _down(maximal[0], k) == pts:
            return cls("down", maximal[0])
        if (len(maximal) == 2 and maximal[1] == maximal[0] + 1
                and _down(maximal[0], k) | _down(maximal[1], k) == pts):
            return cls("pair", maximal[0])
        raise LadderError(f"downset {sorted(pts)} has no normal form")

    def __str__(self) -> str:
        if self.kind == "down":
            return f"v{self.n}"
        if self.kind == "pair":
            return f"v{self.n}+v{self.n + 1}"
        return self.kind


@cache
def generator_formula(n: int) -> Formula:
    """The formula over ``a, b`` denoting ``down(n)``."""
    if n < -1:
        raise LadderError("ladder points start at -1")
    base = {-1: A, 0: B, 1: Implies(B, A)}
    if n in base:
        return base[n]
    if n == 2:
        return Implies(generator_formula(1), B)
    if n == 3:
        return Implies(generator_formula(2), B)
    m = n - 4
    return Implies(generator_formula(m + 3), Or(generator_formula(m), generator_formula(m + 1)))


def eval_downset(k: int, a: Formula) -> frozenset[int]:
    """Value of ``a`` in the downset algebra of the truncation, ``a = {-1}``, ``b = {-1, 0}``."""
    lp = LadderPoset(k)
    down = [sum(1 << q for q in lp.below(p)) for p in range(lp.n)]
    atoms = {"a": 1 << lp.index(-1), "b": (1 << lp.index(-1)) | (1 << lp.index(0))}
    mask = eval_masks(a, down, atoms)
    return frozenset(lp.names[p] for p in range(lp.n) if mask >> p & 1)


def eval_generator(k: int, n: int) -> LadderDownset:
    if n > k:
        raise TruncationError(f"point {n} is outside the truncation at {k}")
    pts = eval_downset(k, generator_formula(n))
    if pts != _down(n, k):
        raise LadderError(f"generator {n} evaluates to {sorted(pts)}")
    return LadderDownset("down", n)


def vee_vee(d: LadderDownset) -> int:
    """``down(n) -> n`` and ``down(n) | down(n+1) -> n + 3``."""
    if d.kind == "down":
        return d.n
    if d.kind == "pair":
        return d.n + 3
    raise LadderError(f"vee_vee is undefined on the {d.kind} downset")


def ladder_endo(k: int) -> PosetMap:
    """``f(n) = -1`` for ``n < 2`` and ``n - 2`` otherwise; checked to be open."""
    lp = LadderPoset(k)
    images = tuple(lp.index(-1 if n < 2 else n - 2) for n in lp.names)
    f = PosetMap(lp, lp, images)
    if not is_open(f):
        raise LadderError("ladder endomorphism is not open")
    return f


def inverse_image(k: int, d: LadderDownset) -> LadderDownset:
    if d.kind in ("empty", "full"):
        return d
    if d.top() + 2 > k:
        raise TruncationError(f"inverse image of {d} needs points above {k}")
    f = ladder_endo(k)
    lp = f.source
    pts = d.points(k)
    return LadderDownset.classify((lp.names[p] for p in range(lp.n)
                                   if lp.names[f.images[p]] in pts), k)


def inverse_image_iterates(k: int, d: LadderDownset, t: int) -> list[LadderDownset]:
    """``f^-1(d), ..., f^-t(d)``, checked pairwise distinct."""
    out = []
    cur = d
    for _ in range(t):
        cur = inverse_image(k, cur)
        out.append(cur)
    if cur.kind not in ("empty", "full") and len(set(out)) != len(out):
        raise LadderError("inverse-image iterates repeat")
    return out


# ------------------------------------------------------------- open maps

def star_construction(m: Evaluation, k: int | None = None) -> PosetMap:
    """Open map from a model of the presentation into the ladder.

    ``m`` is a Kripke model over ``a, b`` in which every point forces
    ``~~a & (a -> b)``.  Points are mapped by height; the result is checked
    to be open and to preserve ``a`` and ``b``.
    """
    poset = m.domain
    for p in range(poset.n):
        if not forces(m, PRESENTATION, p):
            raise EvaluationError(f"point {p} does not force ~~a & (a -> b)")
    if k is None:
        k = max(3, 3 * poset.height() + 3)
    names = m.names()
    has_a = [("a" in names[p]) for p in range(poset.n)]
    has_b = [("b" in names[p]) for p in range(poset.n)]
    image: dict[int, int] = {}
    for p in sorted(range(poset.n), key=lambda p: poset.heights[p]):
        below = poset.strictly_below(p)
        if has_a[p]:
            image[p] = -1
        elif has_b[p]:
            image[p] = 0
        elif all(has_a[q] for q in below):
            image[p] = 1
        elif all(has_b[q] for q in below):
            image[p] = 2
        else:
            seen = set()
            for q in below:
                seen |= _down(image[q], k)
            image[p] = vee_vee(LadderDownset.classify(seen, k))
        if image[p] > k:
            raise TruncationError(f"image {image[p]} exceeds the truncation at {k}")
    lp = LadderPoset(k)
    f = PosetMap(poset, lp, tuple(lp.index(image[p]) for p in range(poset.n)))
    if not is_open(f):
        raise LadderError("constructed map is not open")
    for p in range(poset.n):
        if (image[p] == -1) != has_a[p] or (image[p] in (-1, 0)) != has_b[p]:
            raise LadderError(f"evaluation not preserved at point {p}")
    return f


def random_presentation_model(rng: random.Random, max_points: int) -> Evaluation:
    """A random model over ``a, b`` forcing ``~~a & (a -> b)`` everywhere.

    Every minimal point forces ``a`` (so ``~~a`` holds) and ``a`` implies ``b``.
    """
    n = rng.randint(1, max_points)
    poset = rng.choice(rooted_posets(n))
    minimal = poset.minimal()
    seed_a = minimal + [p for p in range(n) if rng.random() < 0.3]
    a_set = poset.down_closure(seed_a)
    b_set = poset.down_closure(list(a_set) + [p for p in range(n) if rng.random() < 0.4])
    sets = [{v for v, s in (("a", a_set), ("b", b_set)) if p in s} for p in range(n)]
    return kripke(poset, sets, ["a", "b"])


# ---------------------------------------------------------- projectivity

def projectivity_conditions(sigma: dict[str, Formula] | None = None,
                            presentation: Formula = PRESENTATION,
                            prover: Prover | None = None) -> tuple[bool, bool, bool]:
    """Provability of the three retraction conditions for ``sigma``."""
    sigma = SIGMA if sigma is None else sigma
    prover = prover or default_prover
    return (prover.prove(substitute(presentation, sigma)),
            prover.prove(Implies(presentation, Iff(A, sigma["a"]))),
            prover.prove(Implies(presentation, Iff(B, sigma["b"]))))


def projectivity_check(sigma: dict[str, Formula] | None = None,
                       presentation: Formula = PRESENTATION,
                       prover: Prover | None = None) -> bool:
    return all(projectivity_conditions(sigma, presentation, prover))
