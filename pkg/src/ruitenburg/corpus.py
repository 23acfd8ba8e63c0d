"""Formula corpora: exhaustive enumeration, random sampling, IPC classes.

Connectives are counted as binary nodes (``~A`` is ``A -> _|_`` and counts
one).  Leaves are the given variables and ``_|_``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cache
from typing import Iterator, Sequence

from .formula import BOT, And, Formula, Implies, Or, Var, degree
from .models import ModelPool
from .prover import Prover, equiv_ipc

__all__ = [
    "CONNECTIVES", "count_formulas", "enumerate_formulas", "random_formula",
    "random_corpus", "IPCClasses", "ipc_classes", "SemanticClasses", "semantic_classes",
]

CONNECTIVES = (And, Or, Implies)


def _leaves(variables: Sequence[str], bottom: bool) -> list[Formula]:
    out: list[Formula] = [Var(v) for v in variables]
    if bottom:
        out.append(BOT)
    return out


@cache
def _count(n_leaves: int, k: int) -> int:
    if k == 0:
        return n_leaves
    return len(CONNECTIVES) * sum(_count(n_leaves, i) * _count(n_leaves, k - 1 - i)
                                  for i in range(k))


def count_formulas(variables: Sequence[str], connectives: int, bottom: bool = True) -> int:
    """Number of distinct ASTs with exactly ``connectives`` binary nodes."""
    return _count(len(variables) + bottom, connectives)


def enumerate_formulas(variables: Sequence[str], max_connectives: int,
                       bottom: bool = True) -> Iterator[Formula]:
    """Every AST with at most ``max_connectives`` connectives, smallest first."""
    levels: list[list[Formula]] = [_leaves(variables, bottom)]
    yield from levels[0]
    for k in range(1, max_connectives + 1):
        level = []
        for op in CONNECTIVES:
            for i in range(k):
                for a in levels[i]:
                    for b in levels[k - 1 - i]:
                        level.append(op(a, b))
        levels.append(level)
        yield from level


def _sample(rng: random.Random, leaves: list[Formula], k: int) -> Formula:
    if k == 0:
        return rng.choice(leaves)
    n = len(leaves)
    # split point weighted by the number of trees on each side
    weights = [_count(n, i) * _count(n, k - 1 - i) for i in range(k)]
    i = rng.choices(range(k), weights=weights)[0]
    op = rng.choice(CONNECTIVES)
    return op(_sample(rng, leaves, i), _sample(rng, leaves, k - 1 - i))


def random_formula(rng: random.Random, variables: Sequence[str], max_connectives: int,
                   bottom: bool = True) -> Formula:
    """Uniform connective count in ``[0, max]``, then a uniform AST of that size."""
    k = rng.randint(0, max_connectives)
    return _sample(rng, _leaves(variables, bottom), k)


def random_corpus(seed: int, size: int, variables: Sequence[str],
                  max_connectives: int) -> list[Formula]:
    rng = random.Random(seed)
    return [random_formula(rng, variables, max_connectives) for _ in range(size)]


@dataclass
class IPCClasses:
    """One minimal-size representative per IPC-equivalence class."""

    representatives: list[Formula]
    by_size: list[list[Formula]]
    candidates: int = 0
    proofs: int = 0
    raw_count: int = 0
    stats: dict = field(default_factory=dict)


def ipc_classes(variables: Sequence[str], max_connectives: int,
                prover: Prover | None = None, fingerprint_points: int = 4,
                bottom: bool = True) -> IPCClasses:
    """Enumerate all formulas up to ``max_connectives`` modulo IPC equivalence.

    Level ``k`` is built only from representatives of lower levels: replacing
    a subformula by an equivalent one of no larger size gives an equivalent
    formula of no larger size, so every formula of the raw enumeration has
    its class represented.  Candidates are bucketed by their truth values
    on all small Kripke models and merged only after the prover confirms
    equivalence.  Commuted conjunctions and disjunctions are skipped.
    """
    prover = prover or Prover()
    pool = ModelPool.exhaustive(variables, fingerprint_points)
    memos = [dict() for _ in pool.batches]
    buckets: dict[bytes, list[Formula]] = {}

    def fingerprint(a: Formula) -> bytes:
        parts = [b.root_values(b.evaluate(a, memo=m)).tobytes()
                 for b, m in zip(pool.batches, memos)]
        return b"".join(parts)

    result = IPCClasses([], [])
    levels: list[list[Formula]] = []
    for k in range(max_connectives + 1):
        if k == 0:
            cands = _leaves(variables, bottom)
        else:
            cands = []
            for op in CONNECTIVES:
                for i in range(k):
                    j = k - 1 - i
                    if op is not Implies and i > j:
                        continue
                    for a in levels[i]:
                        for b in levels[j]:
                            if op is not Implies and i == j and b.uid < a.uid:
                                continue
                            cands.append(op(a, b))
        level = []
        for c in cands:
            result.candidates += 1
            fp = fingerprint(c)
            bucket = buckets.setdefault(fp, [])
            found = False
            for r in bucket:
                result.proofs += 1
                if c is r or equiv_ipc(c, r, prover):
                    found = True
                    break
            if not found:
                bucket.append(c)
                level.append(c)
        levels.append(level)
        result.raw_count += count_formulas(variables, k, bottom)
    result.by_size = levels
    result.representatives = [f for lvl in levels for f in lvl]
    return result


@dataclass
class SemanticClasses:
    """Formulas deduplicated by their truth sets on a fixed model pool.

    Each class keeps its smallest implicational degree among enumerated
    members, with a witness formula of that degree.
    """

    witnesses: dict[bytes, Formula]
    min_degree: dict[bytes, int]
    candidates: int = 0


def semantic_classes(pool: ModelPool, variables: Sequence[str], max_connectives: int,
                     max_degree: int | None = None, bottom: bool = True) -> SemanticClasses:
    """Enumerate formulas modulo "same truth set at every point of ``pool``".

    Any formula within the caps has a class member of no larger size and no
    larger degree among the witnesses, because both size and degree are
    monotone under replacing a subformula by one with the same truth sets.
    Formulas above ``max_degree`` are pruned.
    """
    def key(masks) -> bytes:
        return b"".join(m.tobytes() for m in masks)

    memos = [dict() for _ in pool.batches]
    witnesses: dict[bytes, Formula] = {}
    mindeg: dict[bytes, int] = {}
    levels: list[list[Formula]] = []
    out = SemanticClasses(witnesses, mindeg)

    def consider(c: Formula, level: list[Formula]) -> None:
        out.candidates += 1
        d = degree(c)
        if max_degree is not None and d > max_degree:
            return
        masks = [b.evaluate(c, memo=m) for b, m in zip(pool.batches, memos)]
        k = key(masks)
        if k not in mindeg:
            mindeg[k] = d
            witnesses[k] = c
            level.append(c)
        elif d < mindeg[k]:
            mindeg[k] = d
            witnesses[k] = c
            level.append(c)

    for k in range(max_connectives + 1):
        level: list[Formula] = []
        if k == 0:
            for leaf in _leaves(variables, bottom):
                consider(leaf, level)
        else:
            for op in CONNECTIVES:
                for i in range(k):
                    j = k - 1 - i
                    if op is not Implies and i > j:
                        continue
                    for a in levels[i]:
                        for b in levels[j]:
                            if op is not Implies and i == j and b.uid < a.uid:
                                continue
                            consider(op(a, b), level)
        levels.append(level)
    return out
