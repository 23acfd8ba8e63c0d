"""Decision procedures for IPC and CPC, and a finite countermodel oracle.

IPC provability uses Dyckhoff's contraction-free sequent calculus (LJT /
G4ip).  The left implication rule is split on the shape of the antecedent
so every backward step shrinks the sequent in a well-founded multiset order;
no loop check is needed.  Antecedents are sets of hash-consed formulas and
every visited sequent is cached.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .evaluation import Evaluation, kripke
from .formula import And, Bottom, Formula, Implies, Or, Var, subformulas, variables
from .models import ModelPool
from .poset import RootedPoset

__all__ = [
    "ProverBudgetExceeded", "CPCBudgetExceeded", "Sequent", "Prover", "default_prover",
    "prove_ipc", "equiv_ipc", "prove_cpc", "Countermodel", "countermodel",
]


class ProverBudgetExceeded(RuntimeError):
    """Search hit the node budget; the answer is unknown, not "unprovable"."""


class CPCBudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Sequent:
    antecedent: frozenset[Formula]
    succedent: Formula


class Prover:
    """Memoising G4ip proof search.

    ``budget`` bounds the number of sequents expanded per top-level call;
    ``cache_limit`` caps the number of cached results (the cache is cleared
    when it fills up).
    """

    def __init__(self, budget: int | None = 2_000_000, cache_limit: int | None = None,
                 classical_filter: bool = True, refute_points: int | None = 3):
        self.budget = budget
        self.cache_limit = cache_limit
        self.classical_filter = classical_filter
        self.refute_points = refute_points
        self._cache: dict[tuple[frozenset[Formula], Formula], bool] = {}
        self._lock = threading.Lock()
        self._refuters: dict[frozenset[str], _Refuter] = {}
        self._refuter: _Refuter | None = None
        self.nodes = 0
        self.calls = 0

    def clear(self) -> None:
        self._cache.clear()
        self._refuters.clear()

    def prove(self, goal: Formula, hypotheses: Iterable[Formula] = ()) -> bool:
        hyps = frozenset(hypotheses)
        self.calls += 1
        if self.classical_filter and not hyps and not _classically_valid(goal):
            return False
        with self._lock:
            self._expanded = 0
            self._refuter = None
            if self.refute_points:
                vs = frozenset(variables(goal)).union(*(variables(h) for h in hyps))
                self._refuter = self._refuters.get(vs)
                if self._refuter is None:
                    self._refuter = self._refuters[vs] = _Refuter(vs, self.refute_points)
            old = sys.getrecursionlimit()
            sys.setrecursionlimit(max(old, 100_000))
            try:
                return self._prove(hyps, goal)
            finally:
                sys.setrecursionlimit(old)

    def entails(self, hyps: Iterable[Formula], goal: Formula) -> bool:
        return self.prove(goal, hyps)

    # -- search ------------------------------------------------------------

    def _prove(self, gamma: frozenset[Formula], goal: Formula) -> bool:
        key = (gamma, goal)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self._expanded += 1
        self.nodes += 1
        if self.budget is not None and self._expanded > self.budget:
            raise ProverBudgetExceeded(f"proof search exceeded {self.budget} sequents")
        if self._refuter is not None and self._refuter.refutes(gamma, goal):
            result = False
        else:
            result = self._search(gamma, goal)
        if self.cache_limit is not None and len(self._cache) >= self.cache_limit:
            self._cache.clear()
        self._cache[key] = result
        return result

    def _search(self, gamma: frozenset[Formula], goal: Formula) -> bool:
        gamma = _saturate(gamma)
        if gamma is None or goal in gamma:
            return True
        # invertible right rules
        if isinstance(goal, Implies):
            return self._prove(gamma | {goal.left}, goal.right)
        if isinstance(goal, And):
            return self._prove(gamma, goal.left) and self._prove(gamma, goal.right)
        # invertible left disjunction
        for h in gamma:
            if isinstance(h, Or):
                rest = gamma - {h}
                return (self._prove(rest | {h.left}, goal)
                        and self._prove(rest | {h.right}, goal))
        # non-invertible choices
        if isinstance(goal, Or):
            if self._prove(gamma, goal.left) or self._prove(gamma, goal.right):
                return True
        for h in sorted(gamma):
            if isinstance(h, Implies) and isinstance(h.left, Implies):
                c, d, b = h.left.left, h.left.right, h.right
                rest = gamma - {h}
                if (self._prove(rest | {Implies(d, b), c}, d)
                        and self._prove(rest | {b}, goal)):
                    return True
        return False


class _Refuter:
    """Sound pruning: a sequent is unprovable if some point of some small
    Kripke model forces every hypothesis but not the goal."""

    def __init__(self, vs: frozenset[str], max_points: int, memo_limit: int = 200_000):
        self.pool = ModelPool.exhaustive(sorted(vs), max_points)
        self.memo_limit = memo_limit
        self.memo: dict[int, list[np.ndarray]] = {}

    def mask(self, a: Formula) -> list[np.ndarray]:
        got = self.memo.get(a.uid)
        if got is not None:
            return got
        if len(self.memo) > self.memo_limit:
            self.memo.clear()
        bs = self.pool.batches
        if isinstance(a, Bottom):
            out = [np.zeros(len(b), dtype=b.dtype) for b in bs]
        elif isinstance(a, Var):
            out = [b.atoms[a.name] for b in bs]
        else:
            left, right = self.mask(a.left), self.mask(a.right)
            if isinstance(a, And):
                out = [l & r for l, r in zip(left, right)]
            elif isinstance(a, Or):
                out = [l | r for l, r in zip(left, right)]
            else:
                out = []
                for b, l, r in zip(bs, left, right):
                    bad = l & ~r
                    v = np.zeros(len(b), dtype=b.dtype)
                    for p in range(b.n):
                        v |= ((b.down[:, p] & bad) == 0).astype(b.dtype) << b.dtype.type(p)
                    out.append(v)
        self.memo[a.uid] = out
        return out

    def refutes(self, gamma: frozenset[Formula], goal: Formula) -> bool:
        hs = [self.mask(h) for h in gamma]
        for i, g in enumerate(self.mask(goal)):
            acc = ~g
            for h in hs:
                acc = acc & h[i]
            if (acc & self.pool.batches[i].full).any():
                return True
        return False


def _saturate(gamma: frozenset[Formula]) -> frozenset[Formula] | None:
    """Apply the invertible left rules except disjunction; ``None`` means ⊥ in Γ.

    Besides the G4ip rules this replaces ``B -> C`` by ``C`` when ``B`` is
    present, and drops ``B -> C`` or ``B | C`` when ``C`` (or a disjunct)
    is present.  Each replacement yields an equivalent context.
    """
    todo = list(gamma)
    out: set[Formula] = set()
    while True:
        if _close(todo, out) is None:
            return None
        todo = []
        for h in list(out):
            if isinstance(h, Implies):
                if h.left in out:
                    out.discard(h)
                    todo.append(h.right)
                elif h.right in out:
                    out.discard(h)
            elif isinstance(h, Or) and (h.left in out or h.right in out):
                out.discard(h)
        if not todo:
            return frozenset(out)


def _close(todo: list[Formula], out: set[Formula]) -> set[Formula] | None:
    while todo:
        h = todo.pop()
        if h in out:
            continue
        if isinstance(h, Bottom):
            return None
        if isinstance(h, And):
            todo.append(h.left)
            todo.append(h.right)
            continue
        if isinstance(h, Implies):
            a, b = h.left, h.right
            if isinstance(a, Bottom):
                continue
            if isinstance(a, And):
                todo.append(Implies(a.left, Implies(a.right, b)))
                continue
            if isinstance(a, Or):
                todo.append(Implies(a.left, b))
                todo.append(Implies(a.right, b))
                continue
        out.add(h)
    return out


def _classically_valid(a: Formula) -> bool:
    vs = sorted(variables(a))
    if len(vs) > 20:
        return True  # filter only; skip when the table is too large
    return _truth_table(a, vs).all()


def _truth_table(a: Formula, vs: list[str]) -> np.ndarray:
    k = len(vs)
    rows = np.arange(1 << k, dtype=np.int64)
    val: dict[int, np.ndarray] = {}
    for node in subformulas(a):
        if isinstance(node, Bottom):
            v = np.zeros(1 << k, dtype=bool)
        elif isinstance(node, Var):
            v = (rows >> vs.index(node.name)) & 1 == 1
        elif isinstance(node, And):
            v = val[node.left.uid] & val[node.right.uid]
        elif isinstance(node, Or):
            v = val[node.left.uid] | val[node.right.uid]
        else:
            v = ~val[node.left.uid] | val[node.right.uid]
        val[node.uid] = v
    return val[a.uid]


default_prover = Prover()


def prove_ipc(a: Formula, prover: Prover | None = None) -> bool:
    """Whether ``a`` is an intuitionistic theorem."""
    return (prover or default_prover).prove(a)


def equiv_ipc(a: Formula, b: Formula, prover: Prover | None = None) -> bool:
    if a is b:
        return True
    p = prover or default_prover
    return p.prove(Implies(a, b)) and p.prove(Implies(b, a))


MAX_CPC_VARIABLES = 24


def prove_cpc(a: Formula) -> bool:
    """Classical validity by truth table (at most 24 variables)."""
    vs = sorted(variables(a))
    if len(vs) > MAX_CPC_VARIABLES:
        raise CPCBudgetExceeded(f"{len(vs)} variables exceed the truth-table cap")
    return bool(_truth_table(a, vs).all())


# ------------------------------------------------------------ countermodel

@dataclass(frozen=True)
class Countermodel:
    poset: RootedPoset
    valuation: Evaluation
    target: Formula

    def labels(self) -> list[frozenset[str]]:
        return self.valuation.names()


def countermodel(a: Formula, max_points: int) -> Countermodel | None:
    """Smallest Kripke model whose root does not force ``a``.

    Searches rooted posets by size, then models by total number of true
    variable occurrences, then canonical poset order and valuation order.
    ``None`` only means no refutation exists up to ``max_points`` points.
    """
    vs = sorted(variables(a))
    for n in range(1, max_points + 1):
        best = None
        for batch in ModelPool.iter_exhaustive(vs, n):
            ok = batch.root_values(batch.evaluate(a))
            bad = np.flatnonzero(~ok)
            if len(bad) == 0:
                continue
            counts = batch.label_counts()[bad]
            m = int(bad[np.argmin(counts)])  # argmin keeps the first minimum
            cand = (int(counts.min()), batch, m)
            if best is None or cand[0] < best[0]:
                best = cand
        if best is not None:
            _, batch, m = best
            poset, labels = batch.model(m)
            return Countermodel(poset, kripke(poset, labels, vs), a)
    return None
