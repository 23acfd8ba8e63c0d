"""Batched forcing over many finite Kripke models at once.

A batch holds ``M`` models with the same number of points ``n``.  The truth
set of a formula in a model is an ``n``-bit mask, so a formula evaluates to
one integer array of shape ``(M,)``.  Conjunction and disjunction are single
bitwise operations; implication costs one vectorised test per point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .evaluation import Evaluation, EvaluationError
from .formula import And, Bottom, Formula, Implies, Or, Var, subformulas
from .poset import RootedPoset, downsets, rooted_posets

__all__ = ["Batch", "ModelPool", "dtype_for"]


def dtype_for(n: int):
    for dt, bits in ((np.uint8, 8), (np.uint16, 16), (np.uint32, 32), (np.uint64, 64)):
        if n <= bits:
            return dt
    raise ValueError("models with more than 64 points are not supported")


def _masks(rows: np.ndarray, dt) -> np.ndarray:
    """Pack boolean rows (M, n) into bitmasks (M,)."""
    weights = (np.ones(1, dtype=dt) << np.arange(rows.shape[1], dtype=dt)).astype(dt)
    return (rows.astype(dt) * weights).sum(axis=1, dtype=dt)


@dataclass
class Batch:
    """``M`` Kripke models on ``n`` points each."""

    n: int
    down: np.ndarray                 # (M, n): bitmask of points below p
    root: np.ndarray                 # (M,): index of the root point
    atoms: dict[str, np.ndarray]     # var -> (M,) truth-set bitmask
    posets: list[RootedPoset] = field(default_factory=list)
    poset_index: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.root)

    @property
    def dtype(self):
        return self.down.dtype

    @property
    def full(self):
        return self.dtype.type((1 << self.n) - 1)

    @property
    def root_bit(self) -> np.ndarray:
        return (np.ones(1, dtype=self.dtype) << self.root.astype(self.dtype)).astype(self.dtype)

    def evaluate(self, a: Formula, env: Mapping[str, np.ndarray] | None = None,
                 memo: dict[int, np.ndarray] | None = None) -> np.ndarray:
        """Truth-set bitmasks of ``a`` in every model.

        ``env`` overrides the truth sets of some variables (they must be
        downward closed for the result to be meaningful).
        """
        env = env or {}
        memo = {} if memo is None else memo
        dt = self.dtype
        zero = np.zeros(len(self), dtype=dt)
        for node in subformulas(a):
            if node.uid in memo:
                continue
            if isinstance(node, Bottom):
                v = zero
            elif isinstance(node, Var):
                if node.name in env:
                    v = env[node.name]
                elif node.name in self.atoms:
                    v = self.atoms[node.name]
                else:
                    raise EvaluationError(f"unknown variable {node.name!r}")
            elif isinstance(node, And):
                v = memo[node.left.uid] & memo[node.right.uid]
            elif isinstance(node, Or):
                v = memo[node.left.uid] | memo[node.right.uid]
            elif isinstance(node, Implies):
                bad = memo[node.left.uid] & ~memo[node.right.uid]
                v = zero.copy()
                for p in range(self.n):
                    ok = (self.down[:, p] & bad) == 0
                    v |= ok.astype(dt) << dt.type(p)
                v &= self.full
            else:  # pragma: no cover
                raise TypeError(node)
            memo[node.uid] = v
        return memo[a.uid]

    def root_values(self, masks: np.ndarray) -> np.ndarray:
        return (masks & self.root_bit) != 0

    def label_counts(self) -> np.ndarray:
        total = np.zeros(len(self), dtype=np.int64)
        for arr in self.atoms.values():
            total += np.bitwise_count(arr)
        return total

    def model(self, m: int) -> tuple[RootedPoset, list[frozenset[str]]]:
        """The poset and per-point variable sets of model ``m``."""
        poset = self.posets[int(self.poset_index[m])]
        labels = [frozenset(v for v, arr in self.atoms.items() if int(arr[m]) >> p & 1)
                  for p in range(self.n)]
        return poset, labels


def _batch_from_rows(n: int, posets: list[RootedPoset], pidx: list[int],
                     atom_rows: dict[str, list[np.ndarray]]) -> Batch:
    dt = dtype_for(n)
    poset_down = np.array([_masks(p.le.T, dt) for p in posets], dtype=dt).reshape(len(posets), n)
    pidx_arr = np.array(pidx, dtype=np.int64)
    atoms = {v: _masks(np.array(rows, dtype=bool).reshape(len(pidx), n), dt)
             for v, rows in atom_rows.items()}
    roots = np.array([posets[i].root() for i in pidx], dtype=np.int64)
    return Batch(n, poset_down[pidx_arr], roots, atoms, posets, pidx_arr)


class ModelPool:
    """A collection of batches, possibly produced lazily."""

    def __init__(self, batches: Iterable[Batch], variables: Sequence[str]):
        self.batches = list(batches)
        self.variables = tuple(variables)

    def __len__(self) -> int:
        return sum(len(b) for b in self.batches)

    @staticmethod
    def iter_exhaustive(variables: Sequence[str], n: int,
                        chunk: int = 400_000) -> Iterator[Batch]:
        """All Kripke models on ``n``-point rooted posets, in batches.

        Models come ordered by poset (canonical order), then by the
        valuation index.
        """
        vs = sorted(variables)
        dt = dtype_for(n)
        posets = list(rooted_posets(n))
        down_by_poset = [_masks(p.le.T, dt) for p in posets]
        buf_p: list[int] = []
        buf_atoms: dict[str, list[np.ndarray]] = {v: [] for v in vs}
        size = 0
        for i, p in enumerate(posets):
            ds = _masks(downsets(p), dt)
            if vs:
                grids = np.meshgrid(*([np.arange(len(ds))] * len(vs)), indexing="ij")
                combos = [g.ravel() for g in grids]
                count = len(combos[0])
            else:
                combos, count = [], 1
            buf_p.append((i, count))
            for v, c in zip(vs, combos):
                buf_atoms[v].append(ds[c])
            size += count
            if size >= chunk:
                yield _assemble(n, posets, down_by_poset, buf_p, buf_atoms, dt)
                buf_p, buf_atoms, size = [], {v: [] for v in vs}, 0
        if size:
            yield _assemble(n, posets, down_by_poset, buf_p, buf_atoms, dt)

    @classmethod
    def exhaustive(cls, variables: Sequence[str], max_points: int,
                   min_points: int = 1) -> "ModelPool":
        batches = [b for n in range(min_points, max_points + 1)
                   for b in cls.iter_exhaustive(variables, n)]
        return cls(batches, sorted(variables))

    @classmethod
    def from_models(cls, models: Sequence[tuple[RootedPoset, Sequence[Iterable[str]]]],
                    variables: Sequence[str]) -> "ModelPool":
        """Pool from explicit ``(poset, per-point variable sets)`` pairs.

        Order within each size is preserved; use ``locate`` to map a global
        model index to its batch position.
        """
        vs = sorted(variables)
        groups: dict[int, list[int]] = {}
        for i, (p, _) in enumerate(models):
            groups.setdefault(p.n, []).append(i)
        batches = []
        order = []
        for n in sorted(groups):
            idx = groups[n]
            posets = [models[i][0] for i in idx]
            rows = {v: [np.array([v in set(s) for s in models[i][1]], dtype=bool) for i in idx]
                    for v in vs}
            batches.append(_batch_from_rows(n, posets, list(range(len(idx))), rows))
            order.extend(idx)
        pool = cls(batches, vs)
        pool.order = order
        return pool

    @classmethod
    def from_evaluations(cls, evals: Sequence[Evaluation]) -> "ModelPool":
        vs = sorted(frozenset().union(*(frozenset().union(*e.labels.names) for e in evals)))
        return cls.from_models([(e.domain, e.names()) for e in evals], vs)

    def evaluate(self, a: Formula, env: Sequence[Mapping[str, np.ndarray]] | None = None
                 ) -> list[np.ndarray]:
        if env is None:
            return [b.evaluate(a) for b in self.batches]
        return [b.evaluate(a, e) for b, e in zip(self.batches, env)]

    def root_values(self, a: Formula) -> np.ndarray:
        """Root truth value of ``a`` in every model, concatenated over batches."""
        parts = [b.root_values(b.evaluate(a)) for b in self.batches]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=bool)

    def fingerprint(self, a: Formula) -> bytes:
        return np.packbits(self.root_values(a)).tobytes()


def _assemble(n, posets, down_by_poset, buf_p, buf_atoms, dt) -> Batch:
    pidx = np.concatenate([np.full(c, i, dtype=np.int64) for i, c in buf_p])
    down = np.stack([down_by_poset[i] for i in range(len(posets))])[pidx] if len(pidx) else \
        np.zeros((0, n), dtype=dt)
    atoms = {v: (np.concatenate(parts).astype(dt) if parts else np.zeros(len(pidx), dtype=dt))
             for v, parts in buf_atoms.items()}
    roots = np.array([posets[i].root() for i in range(len(posets))], dtype=np.int64)[pidx]
    return Batch(n, down, roots, atoms, posets, pidx)
