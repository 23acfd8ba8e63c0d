"""Period bounds: view sets, factorial bounds and the Boolean comparison."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .iteration import IterationTrace

__all__ = [
    "ViewSet", "view_set", "model_view_set", "PeriodBoundReport", "check_period_bound",
    "factorial_inequality", "index_period", "index_period_bruteforce",
    "nonmonotone_counterexample", "ClassicalReport", "classical_f3", "three_component_fixture",
    "BooleanReport", "boolean_endo_experiment",
]


@dataclass(frozen=True)
class ViewSet:
    point: int
    labels: frozenset[Hashable]

    def __len__(self) -> int:
        return len(self.labels)


def _labels_at(trace: IterationTrace, p: int) -> frozenset:
    v = trace.model.v.name(p)
    last = trace.index + trace.period if trace.complete else len(trace.states) - 1
    return frozenset((v, trace.state(s) >> p & 1) for s in range(last + 1))


def view_set(trace: IterationTrace, p: int) -> ViewSet:
    """Labels ``(v(p), x-bit)`` taken by ``p`` along the whole iteration."""
    return ViewSet(p, _labels_at(trace, p))


def model_view_set(trace: IterationTrace) -> frozenset:
    """Union of the view sets of all points."""
    return frozenset().union(*(_labels_at(trace, p) for p in range(trace.model.n)))


@dataclass
class PeriodBoundReport:
    period: int
    view_size: int
    label_count: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_period_bound(trace: IterationTrace) -> PeriodBoundReport:
    """``period <= K!`` (``K`` = view-set size) and ``period <= l!`` (``l = |L|``)."""
    if not trace.complete:
        raise ValueError("trace is incomplete")
    k = len(model_view_set(trace))
    ell = trace.model.v.labels.n * 2
    rep = PeriodBoundReport(trace.period, k, ell)
    if trace.period > math.factorial(k):
        rep.violations.append(f"period {trace.period} > {k}!")
    if trace.period > math.factorial(ell):
        rep.violations.append(f"period {trace.period} > {ell}!")
    return rep


def factorial_inequality(m: int, n: int) -> bool:
    """``n * m! <= (m + n - 1)!``."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    return n * math.factorial(m) <= math.factorial(m + n - 1)


# ----------------------------------------------------- function iteration

def index_period(f: Sequence[int]) -> tuple[int, int]:
    """Least ``(i, p)`` with ``f^(i+p) = f^i`` for a self-map of ``range(len(f))``.

    The index is the longest tail into a cycle and the period is the lcm of
    the cycle lengths.
    """
    n = len(f)
    on_cycle = [False] * n
    period = 1
    state = [0] * n  # 0 new, 1 on current path, 2 done
    for s in range(n):
        if state[s]:
            continue
        path = []
        p = s
        while state[p] == 0:
            state[p] = 1
            path.append(p)
            p = f[p]
        if state[p] == 1:
            cyc = path[path.index(p):]
            for q in cyc:
                on_cycle[q] = True
            period = math.lcm(period, len(cyc))
        for q in path:
            state[q] = 2
    index = 0
    for s in range(n):
        t, p = 0, s
        while not on_cycle[p]:
            p = f[p]
            t += 1
        index = max(index, t)
    return index, period


def index_period_bruteforce(f: Sequence[int], limit: int = 100_000) -> tuple[int, int]:
    """Same as ``index_period`` by iterating ``f`` as a whole function."""
    seen: dict[tuple[int, ...], int] = {}
    cur = tuple(range(len(f)))
    for i in range(limit):
        if cur in seen:
            return seen[cur], i - seen[cur]
        seen[cur] = i
        cur = tuple(f[c] for c in cur)
    raise RuntimeError("no repetition within the limit")


def _orbit_period(step, start) -> tuple[int, int]:
    seen = {}
    cur, i = start, 0
    while cur not in seen:
        seen[cur] = i
        cur = step(cur)
        i += 1
    return seen[cur], i - seen[cur]


def nonmonotone_counterexample(n: int) -> tuple[list[int], int]:
    """Self-map of ``{0,1}^n`` built bit by bit, with its period from ``0...0``.

    Words are integers with bit ``i`` holding coordinate ``i``.  The first
    map flips one bit; each next map applies the previous one to the old
    bits and flips the new bit exactly at the last word of the previous
    orbit of ``0...0``.
    """
    if not 1 <= n <= 16:
        raise ValueError("n must be between 1 and 16")
    table = [1, 0]
    for i in range(1, n):
        # order the words by the orbit of zero under the current map
        orbit, w = [], 0
        for _ in range(1 << i):
            orbit.append(w)
            w = table[w]
        last = orbit[-1]
        new = [0] * (1 << (i + 1))
        for w in range(1 << i):
            for x in (0, 1):
                nx = 1 - x if w == last else x
                new[w | x << i] = table[w] | nx << i
        table = new
    _, period = _orbit_period(lambda w: table[w], 0)
    return table, period


@dataclass
class ClassicalReport:
    t_size: int
    maps: int = 0
    violations: int = 0
    fixture: tuple[int, int] | None = None
    components: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.fixture == (1, 2)


def _pair_map(g: Sequence[int], t: int) -> list[int]:
    """``f = <pi_0, g>`` on ``T x 2`` encoded as ``2 * a + b``."""
    return [2 * a + g[2 * a + b] for a in range(t) for b in (0, 1)]


def three_component_fixture() -> tuple[list[int], list[list[int]]]:
    """A fixed point, a 2-cycle and a one-step tail into a fixed point."""
    g = [0, 1,   # component 0: identity on the bit
         1, 0,   # component 1: swap
         1, 1]   # component 2: always 1
    return _pair_map(g, 3), [[0, 1], [2, 3], [4, 5]]


def classical_f3(t_size: int) -> ClassicalReport:
    """``f^3 = f`` for every ``f = <pi_0, g>`` on ``T x 2``, plus the fixture."""
    if not 1 <= t_size <= 6:
        raise ValueError("t_size must be between 1 and 6")
    rep = ClassicalReport(t_size)
    for g in itertools.product((0, 1), repeat=2 * t_size):
        f = _pair_map(g, t_size)
        rep.maps += 1
        if any(f[f[f[s]]] != f[s] for s in range(2 * t_size)):
            rep.violations += 1
    f, comps = three_component_fixture()
    for comp in comps:
        base = comp[0]
        rep.components.append(index_period([f[s] - base for s in comp]))
    rep.fixture = index_period(f)
    combined = (max(i for i, _ in rep.components),
                math.lcm(*(p for _, p in rep.components)))
    if combined != rep.fixture:
        rep.violations += 1
    return rep


@dataclass
class BooleanReport:
    n: int
    k: int
    maps: int = 0
    max_period: int = 0
    max_index: int = 0
    lcm_bound: int = 0
    factorial_bound: int = 0
    violations: int = 0
    exhaustive: bool = True

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.lcm_bound <= self.factorial_bound


def boolean_endo_experiment(n: int, samples: int = 0, seed: int = 0) -> BooleanReport:
    """Index and period of self-maps of a ``2^n``-element set.

    Exhaustive when ``samples`` is 0 (only sensible for ``n <= 2``),
    otherwise ``samples`` uniform random maps.
    """
    k = 1 << n
    rep = BooleanReport(n, k, lcm_bound=math.lcm(*range(1, k + 1)),
                        factorial_bound=math.factorial(k), exhaustive=samples == 0)
    if samples == 0:
        if n > 2:
            raise ValueError("exhaustive run only for n <= 2")
        maps = itertools.product(range(k), repeat=k)
    else:
        rng = random.Random(seed)
        maps = ([rng.randrange(k) for _ in range(k)] for _ in range(samples))
    for f in maps:
        i, p = index_period(f)
        rep.maps += 1
        rep.max_period = max(rep.max_period, p)
        rep.max_index = max(rep.max_index, i)
        if p > rep.lcm_bound or p > rep.factorial_bound:
            rep.violations += 1
    return rep
