"""The dual map ``psi = <pi_0, chi_A>`` on finite models and its iteration.

A combined model is a Kripke model over ``y1..yk`` (the part ``v`` that
``psi`` never changes) together with an up-to-date truth set for ``x``
(the part ``u``, valued in TWO where 1 means "forces x").  ``chi_A`` keeps
the poset and ``v`` and recomputes the x-bit of every point as "forces A".
Because ``A^(i+1) = A(A^i / x)``, the ``i``-th iterate of ``chi_A`` started
from the true x-set is the truth set of ``A^i``.

Internally the x-part of a model is a bitmask over the points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .evaluation import (BisimType, Evaluation, EvaluationError, eval_masks, kripke,
                         reduced_trees, types_from)
from .formula import BOT, Formula, degree, iterate_formula, occurs_only_positively, \
    substitute, variables
from .models import ModelPool
from .poset import Poset, RootedPoset, powerset as _powerset, product_labels, two
from .prover import Prover, default_prover, equiv_ipc

__all__ = [
    "CombinedModel", "IterationTrace", "chi", "chi_mask", "iterate_psi",
    "is_periodic_point", "LemmaPeriodReport", "check_lemma_period",
    "b_index", "type_pairs", "rank", "RuitenburgIndexError", "ruitenburg_index",
    "screening_pool", "PositivityError", "fixpoint_check",
    "format_trace", "TWO", "MinRankReport", "check_minrank", "type_class_counts",
]

TWO = two()


def _mask(bits: Sequence[int]) -> int:
    return sum(1 << p for p, b in enumerate(bits) if b)


@dataclass(frozen=True, eq=False)
class CombinedModel:
    """A pair ``(v, u)`` of evaluations on one rooted poset.

    ``v`` is a Kripke model over the fixed variables and ``u`` maps into
    TWO; ``{p : u(p) = 1}`` is downward closed.
    """

    poset: RootedPoset
    v: Evaluation
    u: Evaluation

    def __post_init__(self):
        if self.v.domain is not self.poset or self.u.domain is not self.poset:
            if self.v.domain != self.poset or self.u.domain != self.poset:
                raise EvaluationError("v and u must live on the same poset")
        if self.u.labels != TWO:
            raise EvaluationError("u must be valued in TWO")

    @classmethod
    def build(cls, poset: RootedPoset, y_sets: Sequence[frozenset[str] | set[str]],
              x_bits: Sequence[int], y_vars: Sequence[str] | None = None) -> "CombinedModel":
        v = kripke(poset, y_sets, y_vars)
        u = Evaluation.from_names(poset, TWO, [int(b) for b in x_bits])
        return cls(poset, v, u)

    @property
    def n(self) -> int:
        return self.poset.n

    @cached_property
    def y_vars(self) -> frozenset[str]:
        return frozenset().union(*self.v.labels.names)

    @cached_property
    def down(self) -> tuple[int, ...]:
        return self.v.down_masks

    @cached_property
    def y_masks(self) -> dict[str, int]:
        names = self.v.names()
        return {y: _mask([y in names[p] for p in range(self.n)]) for y in self.y_vars}

    @cached_property
    def u_mask(self) -> int:
        return _mask(self.u.names())

    def with_u(self, mask: int) -> "CombinedModel":
        bits = [mask >> p & 1 for p in range(self.n)]
        return CombinedModel(self.poset, self.v, Evaluation.from_names(self.poset, TWO, bits))

    def as_evaluation(self) -> Evaluation:
        """The pair as one evaluation into ``POWERSET(y) x TWO``."""
        labels = _product_labels(self.v.labels)
        names = [(a, b) for a, b in zip(self.v.names(), self.u.names())]
        return Evaluation.from_names(self.poset, labels, names)

    def kripke(self, x: str = "x") -> Evaluation:
        """The Kripke model over ``y`` plus ``x``."""
        sets = [s | {x} if b else s for s, b in zip(self.v.names(), self.u.names())]
        return kripke(self.poset, sets, set(self.y_vars) | {x})


_product_cache: dict[Poset, Poset] = {}


def _product_labels(lv: Poset) -> Poset:
    got = _product_cache.get(lv)
    if got is None:
        got = _product_cache[lv] = product_labels(lv, TWO)
    return got


def _check_vars(a: Formula, m: CombinedModel, x: str) -> None:
    extra = variables(a) - m.y_vars - {x}
    if extra:
        raise EvaluationError(f"formula variables {sorted(extra)} are not in the model")


def chi_mask(a: Formula, down: Sequence[int], y_masks: dict[str, int], u: int,
             x: str = "x") -> int:
    """``chi_A`` on bitmasks: the set of points forcing ``A`` when ``x`` holds on ``u``."""
    atoms = dict(y_masks)
    atoms[x] = u
    return eval_masks(a, down, atoms)


def chi(a: Formula, m: CombinedModel, x: str = "x") -> Evaluation:
    """The TWO-valued evaluation ``p -> [p forces A]``."""
    _check_vars(a, m, x)
    out = chi_mask(a, m.down, m.y_masks, m.u_mask, x)
    return Evaluation.from_names(m.poset, TWO, [out >> p & 1 for p in range(m.n)])


# ----------------------------------------------------------------- traces

@dataclass
class IterationTrace:
    """States ``u_0, u_1, ...`` of the x-part under ``chi_A``.

    When ``complete`` the last state repeats ``states[index]`` and the
    sequence is ``period``-periodic from ``index`` on.
    """

    formula: Formula
    model: CombinedModel
    states: list[int]
    index: int | None
    period: int | None
    b_index: int
    x: str = "x"
    complete: bool = True
    first_periodic: list[int | None] = field(default_factory=list)

    def state(self, s: int) -> int:
        """``u_s``, extended periodically past the stored prefix."""
        if s < len(self.states):
            return self.states[s]
        if not self.complete:
            raise IndexError(f"step {s} not recorded in an incomplete trace")
        return self.states[self.index + (s - self.index) % self.period]

    def model_at(self, s: int) -> CombinedModel:
        return self.model.with_u(self.state(s))

    def bits(self, s: int) -> str:
        u = self.state(s)
        return "".join("1" if u >> p & 1 else "0" for p in range(self.model.n))


def iterate_psi(a: Formula, m: CombinedModel, t_max: int = 10_000,
                x: str = "x") -> IterationTrace:
    """Iterate ``chi_A`` from ``m`` until the x-part repeats.

    ``(index, period)`` come from the first repeated state, which is the
    lexicographically least pair for a deterministic iteration.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    _check_vars(a, m, x)
    seen: dict[int, int] = {}
    states: list[int] = []
    u = m.u_mask
    down, ym = m.down, m.y_masks
    for s in range(t_max + 1):
        if u in seen:
            states.append(u)
            first = seen[u]
            trace = IterationTrace(a, m, states, first, s - first, b_index(a), x)
            trace.first_periodic = [_first_periodic(trace, p) for p in range(m.n)]
            return trace
        seen[u] = s
        states.append(u)
        if s < t_max:
            u = chi_mask(a, down, ym, u, x)
    return IterationTrace(a, m, states, None, None, b_index(a), x, complete=False,
                          first_periodic=[None] * m.n)


def _first_periodic(trace: IterationTrace, p: int) -> int | None:
    for s in range(trace.index + trace.period + 1):
        if is_periodic_point(trace, p, s):
            return s
    return None  # the restriction has a period other than 1 or 2


def is_periodic_point(trace: IterationTrace, p: int, s: int) -> bool:
    """Whether ``psi^s(v, u)`` restricted to ``p`` is 2-periodic."""
    down = trace.model.down[p]
    return (trace.state(s) ^ trace.state(s + 2)) & down == 0


def format_trace(trace: IterationTrace) -> str:
    lines = [trace.bits(s) for s in range(len(trace.states))]
    if trace.complete:
        lines.append(f"index {trace.index} period {trace.period}")
    else:
        lines.append("trace incomplete")
    return "\n".join(lines) + "\n"


@dataclass
class LemmaPeriodReport:
    checked: int = 0
    violations: list[tuple[int, int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_lemma_period(a: Formula, m: CombinedModel, x: str = "x",
                       steps: int | None = None) -> LemmaPeriodReport:
    """Check the one-step periodicity lemma at every point and step.

    At step ``s``, a point whose strict downset is 2-periodic must be
    2-periodic at step ``s`` or ``s + 1``; if it is not periodic at ``s``
    and forces ``x`` there, it must not force ``x`` at ``s + 1``.  Steps
    cover the whole transient and one period (or ``steps`` if given).
    """
    trace = iterate_psi(a, m, x=x)
    report = LemmaPeriodReport()
    last = trace.index + trace.period if steps is None else steps
    lt = trace.model.poset.lt
    for s in range(last + 1):
        periodic = [is_periodic_point(trace, p, s) for p in range(m.n)]
        u0, u1 = trace.state(s), trace.state(s + 1)
        for p in range(m.n):
            if not all(periodic[q] for q in range(m.n) if lt[q, p]):
                continue
            report.checked += 1
            if periodic[p]:
                continue
            if not is_periodic_point(trace, p, s + 1):
                report.violations.append((s, p, "neither step s nor s+1 is periodic"))
            if u0 >> p & 1 and u1 >> p & 1:
                report.violations.append((s, p, "non-periodic point keeps x"))
    return report


# ------------------------------------------------------------------ ranks

def b_index(a: Formula) -> int:
    """A b-index for ``psi_A``: ``max(1, degree(A))``."""
    return max(1, degree(a))


def _pair_types(trace: IterationTrace, s: int, depth: int) -> list[BisimType]:
    m = trace.model
    vnames = m.v.names()
    below = [m.poset.below(p) for p in range(m.n)]
    out = []
    for step in (s, s + 1):
        u = trace.state(step)
        names = [(vnames[p], u >> p & 1) for p in range(m.n)]
        out.append(types_from(names, below, depth))
    return [(t0, t1) for t0, t1 in zip(*out)]


def type_pairs(trace: IterationTrace, s: int) -> list[tuple[BisimType, BisimType]]:
    """For every point: the depth ``n-1`` types of ``psi^s`` and ``psi^(s+1)``."""
    return _pair_types(trace, s, trace.b_index - 1)


def rank(trace: IterationTrace, p: int, s: int = 0) -> int:
    """Number of distinct type pairs among 2-periodic points ``q <= p`` at step ``s``."""
    pairs = type_pairs(trace, s)
    below = trace.model.poset.below(p)
    return len({pairs[q] for q in below if is_periodic_point(trace, q, s)})


@dataclass
class MinRankReport:
    fixtures: int = 0
    violations: list[tuple[int, int, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_minrank(trace: IterationTrace, m_max: int = 4) -> MinRankReport:
    """Spot check of the minimal-rank lemma at step 0.

    For every non-periodic ``p`` of minimal rank on whose non-periodic
    downset ``(v, u)`` is constant, all non-periodic ``q0, q1 <= p`` must
    have ``~n``-equivalent restrictions after ``m`` steps, ``m <= m_max``.
    Violations are ``(p, q0, q1, m)``.
    """
    m = trace.model
    n = trace.b_index
    periodic = [is_periodic_point(trace, q, 0) for q in range(m.n)]
    ranks = [rank(trace, q, 0) for q in range(m.n)]
    vnames = m.v.names()
    below = [m.poset.below(q) for q in range(m.n)]
    u0 = trace.state(0)
    types = []
    for step in range(m_max + 1):
        u = trace.state(step)
        types.append(types_from([(vnames[q], u >> q & 1) for q in range(m.n)], below, n))
    report = MinRankReport()
    for p in range(m.n):
        if periodic[p]:
            continue
        rest = [q for q in below[p] if not periodic[q]]
        if any(ranks[q] != ranks[p] for q in rest):
            continue
        if len({(vnames[q], u0 >> q & 1) for q in rest}) != 1:
            continue
        report.fixtures += 1
        for step in range(m_max + 1):
            t0 = types[step][rest[0]]
            for q in rest[1:]:
                if types[step][q] is not t0:
                    report.violations.append((p, rest[0], q, step))
    return report


def type_class_counts(y_vars: Sequence[str], max_depth: int,
                      budget: int = 200_000) -> list[int]:
    """Number of ``~d`` classes of combined models over ``y_vars``, ``d <= max_depth``.

    Counted from ``reduced_trees`` over ``POWERSET(y) x TWO``; these are the
    empirical stand-ins for the class counts in the index bound.
    """
    labels = product_labels(_powerset(y_vars), TWO)
    return [len(reduced_trees(labels, d, budget=budget)) for d in range(max_depth + 1)]


# ---------------------------------------------------------- index via IPC

class RuitenburgIndexError(RuntimeError):
    """No ``N <= n_cap`` was found; raise the cap or the prover budget."""


_pools: dict[tuple, ModelPool] = {}


def screening_pool(vs: Sequence[str], max_points: int) -> ModelPool:
    key = (tuple(sorted(vs)), max_points)
    pool = _pools.get(key)
    if pool is None:
        pool = _pools[key] = ModelPool.exhaustive(vs, max_points)
    return pool


def _pool_iterates(a: Formula, x: str, pool: ModelPool, count: int) -> list[list[bytes]]:
    """Truth sets of ``A^1..A^count`` on every pool model, via ``chi`` iteration."""
    out: list[list[bytes]] = []
    cur = [b.atoms[x] for b in pool.batches]
    for _ in range(count):
        cur = [b.evaluate(a, env={x: c}) for b, c in zip(pool.batches, cur)]
        out.append([c.tobytes() for c in cur])
    return out


def ruitenburg_index(a: Formula, x: str = "x", n_cap: int = 64,
                     prover: Prover | None = None,
                     screen_points: int | None = 4) -> tuple[int, int]:
    """Least ``N >= 1`` with ``A^(N+2) <-> A^N`` provable, and the period.

    The period is 1 when also ``A^(N+1) <-> A^N`` is provable, else 2.
    Candidates are screened on all Kripke models up to ``screen_points``
    points first; a difference there is a genuine countermodel, so only
    surviving candidates reach the prover.
    """
    prover = prover or default_prover
    vs = sorted(variables(a) | {x})
    pool = screening_pool(vs, screen_points) if screen_points else None
    sem = _pool_iterates(a, x, pool, n_cap + 2) if pool else None
    iters: dict[int, Formula] = {}

    def it(i: int) -> Formula:
        if i not in iters:
            iters[i] = a if i == 1 else substitute(a, {x: it(i - 1)})
        return iters[i]

    # A^(N+1) <-> A^N already gives A^(N+2) <-> A^N by substitution, and is
    # usually far cheaper to prove than the two-step equivalence.
    for n in range(1, n_cap + 1):
        if (sem is None or sem[n] == sem[n - 1]) and equiv_ipc(it(n + 1), it(n), prover):
            return n, 1
        if (sem is None or sem[n + 1] == sem[n - 1]) and equiv_ipc(it(n + 2), it(n), prover):
            return n, 2
    raise RuitenburgIndexError(f"no index found up to N = {n_cap}")


class PositivityError(ValueError):
    pass


def fixpoint_check(a: Formula, x: str = "x", n_cap: int = 64,
                   prover: Prover | None = None) -> Formula:
    """The least fixpoint ``A^N(_|_ / x)`` of a formula positive in ``x``.

    Returns the formula after verifying ``A(F / x) <-> F`` with the prover.
    """
    if not occurs_only_positively(a, x):
        raise PositivityError(f"{x} occurs negatively")
    prover = prover or default_prover
    n, _ = ruitenburg_index(a, x, n_cap, prover)
    f = substitute(iterate_formula(a, x, n), {x: BOT})
    if not equiv_ipc(substitute(a, {x: f}), f, prover):
        raise RuitenburgIndexError("fixpoint equation not provable")
    return f
