"""Seeded experiment runners, one per checked property.

Each runner returns a ``Result`` with a pass flag and a short detail line.
All randomness comes from ``Config.seed``.
"""

from __future__ import annotations

import collections
import random
import time
from dataclasses import dataclass, field
from functools import cache
from typing import Callable, Sequence

import numpy as np

from . import bounds, dualitylite, ladder
from .corpus import ipc_classes, random_corpus, semantic_classes
from .evaluation import all_evaluations, reduced_trees, types_from
from .formula import Formula, Iff, Not, Var, degree, iterate_formula, variables
from .iteration import (CombinedModel, IterationTrace, b_index, check_lemma_period, chi_mask,
                        iterate_psi, ruitenburg_index, RuitenburgIndexError)
from .models import ModelPool
from .poset import downsets, rooted_posets, two
from .prover import Prover, ProverBudgetExceeded, countermodel, equiv_ipc, prove_cpc

__all__ = ["Config", "Result", "Corpus", "build_corpus", "random_combined_model",
           "combined_pairs", "CRITERIA", "run_criterion", "run_all"]

X = "x"


@dataclass(frozen=True)
class Config:
    seed: int = 20240611
    corpus_size: int = 200
    random_connectives: int = 9
    exhaustive_connectives: int = 5
    variables: tuple[str, ...] = ("x", "y")
    random_variables: tuple[str, ...] = ("x", "y1", "y2")
    pairs: int = 500
    max_points: int = 8
    budget: int = 2_000_000
    index_cap: int = 12


@dataclass
class Result:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    notes: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


@dataclass
class Corpus:
    representatives: list[Formula]
    random: list[Formula]
    raw_count: int

    @property
    def formulas(self) -> list[Formula]:
        return self.representatives + self.random


@cache
def build_corpus(cfg: Config) -> Corpus:
    """IPC class representatives of the exhaustive corpus, plus random formulas."""
    classes = ipc_classes(list(cfg.variables), cfg.exhaustive_connectives,
                          Prover(budget=cfg.budget))
    rnd = random_corpus(cfg.seed, cfg.corpus_size, list(cfg.random_variables),
                        cfg.random_connectives)
    return Corpus(classes.representatives, rnd, classes.raw_count)


@cache
def _prover(cfg: Config) -> Prover:
    return Prover(budget=cfg.budget)


def random_combined_model(rng: random.Random, y_vars: Sequence[str],
                          max_points: int) -> CombinedModel:
    """Uniform poset size, uniform poset of that size, uniform downsets."""
    n = rng.randint(1, max_points)
    poset = rng.choice(rooted_posets(n))
    ds = downsets(poset)
    ys = {y: ds[rng.randrange(len(ds))] for y in y_vars}
    xs = ds[rng.randrange(len(ds))]
    sets = [{y for y in y_vars if ys[y][p]} for p in range(n)]
    return CombinedModel.build(poset, sets, [int(b) for b in xs], y_vars)


@cache
def _pairs(cfg: Config) -> list[tuple[Formula, CombinedModel]]:
    rng = random.Random(cfg.seed + 4)
    forms = build_corpus(cfg).formulas
    out = []
    for _ in range(cfg.pairs):
        a = rng.choice(forms)
        ys = sorted(variables(a) - {X})
        out.append((a, random_combined_model(rng, ys, cfg.max_points)))
    return out


@cache
def _traces(cfg: Config) -> list[IterationTrace]:
    return [iterate_psi(a, m) for a, m in _pairs(cfg)]


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, str, list[str]]]) -> Result:
    t = time.perf_counter()
    passed, detail, notes = fn()
    return Result(number, name, passed, detail, time.perf_counter() - t, notes)


# -------------------------------------------------------------- criteria

def crit_ruitenburg(cfg: Config) -> tuple[bool, str, list[str]]:
    corpus = build_corpus(cfg)
    prover = _prover(cfg)
    hist: collections.Counter = collections.Counter()
    failures = []
    for a in corpus.formulas:
        try:
            n, p = ruitenburg_index(a, X, cfg.index_cap, prover)
        except (RuitenburgIndexError, ProverBudgetExceeded) as e:
            failures.append(f"{a}: {e}")
            continue
        hist[(n, p)] += 1
        if p not in (1, 2) or n > cfg.index_cap:
            failures.append(f"{a}: N={n} period={p}")
    dist = " ".join(f"(N={n},k={p}):{c}" for (n, p), c in sorted(hist.items()))
    detail = (f"{len(corpus.representatives)} class representatives of {corpus.raw_count} "
              f"formulas + {len(corpus.random)} random; {dist}; failures={len(failures)}")
    return not failures, detail, failures[:20]


def crit_classical(cfg: Config) -> tuple[bool, str, list[str]]:
    corpus = build_corpus(cfg)
    bad = [a for a in corpus.formulas
           if not prove_cpc(Iff(iterate_formula(a, X, 3), a))]
    reps = [bounds.classical_f3(t) for t in range(1, 5)]
    viol = sum(r.violations for r in reps)
    fixture = reps[0].fixture
    ok = not bad and viol == 0 and fixture == (1, 2)
    detail = (f"A^3<->A classical on {len(corpus.formulas)} formulas, failures={len(bad)}; "
              f"f^3=f on {sum(r.maps for r in reps)} maps (t<=4), violations={viol}; "
              f"fixture (index,period)={fixture}")
    return ok, detail, [str(a) for a in bad[:20]]


def crit_glivenko(cfg: Config) -> tuple[bool, str, list[str]]:
    x = Var(X)
    prover = _prover(cfg)
    tn = equiv_ipc(Not(x), Not(Not(Not(x))), prover)
    dn = equiv_ipc(x, Not(Not(x)), prover)
    cm = countermodel(Iff(x, Not(Not(x))), 2)
    cm_ok = cm is not None and cm.poset.n == 2
    bad = [a for a in build_corpus(cfg).formulas
           if prove_cpc(a) != prover.prove(Not(Not(a)))]
    ok = tn and not dn and cm_ok and not bad
    detail = (f"~x<->~~~x {tn}; x<->~~x {dn}; 2-point countermodel {cm_ok}; "
              f"Glivenko mismatches={len(bad)}")
    return ok, detail, [str(a) for a in bad[:20]]


def crit_height(cfg: Config) -> tuple[bool, str, list[str]]:
    bad = []
    for tr in _traces(cfg):
        h = tr.model.poset.height()
        if tr.state(h) != tr.state(h + 2):
            bad.append(f"{tr.formula} on {tr.model.poset.covers()}")
    return not bad, f"{len(_traces(cfg))} pairs, violations={len(bad)}", bad[:20]


def crit_lemma_period(cfg: Config) -> tuple[bool, str, list[str]]:
    bad, checked = [], 0
    for a, m in _pairs(cfg):
        rep = check_lemma_period(a, m)
        checked += rep.checked
        bad.extend(f"{a}: step {s} point {p}: {why}" for s, p, why in rep.violations)
    return not bad, f"{len(_pairs(cfg))} pairs, {checked} point checks, violations={len(bad)}", bad[:20]


# ---- bounded bisimulation and chi

@dataclass
class _Combo:
    below: list[list[int]]
    down: tuple[int, ...]
    vnames: list[frozenset[str]]
    ymasks: dict[str, int]
    u: int
    root: int


@cache
def _combos(y_vars: tuple[str, ...], max_points: int) -> list[_Combo]:
    """All combined models up to ``max_points`` points (posets up to isomorphism)."""
    out = []
    for n in range(1, max_points + 1):
        for poset in rooted_posets(n):
            ds = downsets(poset)
            below = [poset.below(p) for p in range(n)]
            down = tuple(sum(1 << q for q in b) for b in below)
            masks = [sum(1 << p for p in range(n) if row[p]) for row in ds]
            for choice in np.ndindex(*([len(ds)] * (len(y_vars) + 1))):
                ym = {y: masks[c] for y, c in zip(y_vars, choice)}
                vn = [frozenset(y for y in y_vars if ym[y] >> p & 1) for p in range(n)]
                out.append(_Combo(below, down, vn, ym, masks[choice[-1]], poset.root()))
    return out


def _combo_types(c: _Combo, u: int, depth: int):
    names = [(c.vnames[p], u >> p & 1) for p in range(len(c.below))]
    return types_from(names, c.below, depth)[c.root]


def combined_pairs(y_vars: tuple[str, ...], depth: int, count: int, rng: random.Random,
                   max_points: int = 4) -> list[tuple[_Combo, _Combo]]:
    """Up to ``count`` pairs of distinct combined models with equal depth-``depth`` types."""
    buckets: dict = collections.defaultdict(list)
    for c in _combos(y_vars, max_points):
        buckets[_combo_types(c, c.u, depth)].append(c)
    pairs = [(a, b) for group in buckets.values() for i, a in enumerate(group)
             for b in group[i + 1:]]
    rng.shuffle(pairs)
    return pairs[:count]


def crit_index_decreases(cfg: Config) -> tuple[bool, str, list[str]]:
    rng = random.Random(cfg.seed + 6)
    corpus = build_corpus(cfg)
    forms = rng.sample(corpus.representatives, 15) + rng.sample(corpus.random, 15)
    bad, total, short = [], 0, 0
    for a in forms:
        ys = tuple(sorted(variables(a) - {X}))
        n = b_index(a)
        for k in range(3):
            pairs = combined_pairs(ys, n + k, 200, rng)
            if len(pairs) < 200:
                short += 1
            for c1, c2 in pairs:
                total += 1
                u1 = chi_mask(a, c1.down, c1.ymasks, c1.u)
                u2 = chi_mask(a, c2.down, c2.ymasks, c2.u)
                if _combo_types(c1, u1, k) is not _combo_types(c2, u2, k):
                    bad.append(f"{a}: k={k}")
    ok = not bad and short == 0
    return ok, (f"{len(forms)} formulas x k<=2, {total} equivalent pairs, "
                f"short samples={short}, violations={len(bad)}"), bad[:20]


def crit_degree(cfg: Config) -> tuple[bool, str, list[str]]:
    """Within a depth-n type class every formula of degree <= n has one root value."""
    corpus = build_corpus(cfg)
    notes = []
    checked, bad = 0, 0
    groups: list[tuple[tuple[str, ...], list[tuple[Formula, int]]]] = []
    vs = tuple(sorted(cfg.variables))
    # formulas up to the connective cap, modulo truth sets on the pool
    pool = ModelPool.exhaustive(vs, 4)
    sem = semantic_classes(pool, vs, cfg.exhaustive_connectives, max_degree=2)
    groups.append((vs, [(f, sem.min_degree[k]) for k, f in sem.witnesses.items()]))
    by_vars: dict = collections.defaultdict(list)
    for a in corpus.formulas:
        v = variables(a) | {X}
        if degree(a) <= 2 and len(v) <= 2:
            if len(v) == 1:
                v = v | {"y"}
            by_vars[tuple(sorted(v))].append((a, degree(a)))
    groups.extend(by_vars.items())
    for vs, forms in groups:
        pool = ModelPool.exhaustive(vs, 4)
        models = [b.model(m) for b in pool.batches for m in range(len(b))]
        types = {}
        for n in range(3):
            keys = []
            for poset, labels in models:
                below = [poset.below(p) for p in range(poset.n)]
                keys.append(types_from(labels, below, n)[poset.root()])
            types[n] = keys
        for f, d in forms:
            roots = pool.root_values(f)
            for n in range(d, 3):
                seen: dict = {}
                for key, r in zip(types[n], roots):
                    checked += 1
                    if seen.setdefault(key, r) != r:
                        bad += 1
                        notes.append(f"{f} at n={n}")
    return bad == 0, (f"{sum(len(f) for _, f in groups)} formulas (classes), "
                      f"{checked} model checks, violations={bad}"), notes[:20]


def crit_bridge(cfg: Config) -> tuple[bool, str, list[str]]:
    corpus = build_corpus(cfg)
    bad, checked = [], 0
    by_vars: dict = collections.defaultdict(list)
    for a in corpus.formulas:
        by_vars[tuple(sorted(set(cfg.variables) | variables(a) | {X}))].append(a)
    for vs, forms in by_vars.items():
        pool = ModelPool.exhaustive(vs, 6)
        for a in forms:
            memos = [dict() for _ in pool.batches]
            cur = [b.atoms[X] for b in pool.batches]
            for i in range(1, 7):
                cur = [b.evaluate(a, env={X: c}) for b, c in zip(pool.batches, cur)]
                ai = iterate_formula(a, X, i)
                for b, c, memo in zip(pool.batches, cur, memos):
                    direct = b.evaluate(ai, memo=memo)
                    checked += len(b)
                    if not np.array_equal(b.root_values(direct), b.root_values(c)):
                        bad.append(f"{a} i={i}")
    return not bad, f"{len(corpus.formulas)} formulas x i<=6 x models<=6 points, {checked} checks, violations={len(bad)}", bad[:20]


def crit_ladder(cfg: Config) -> tuple[bool, str, list[str]]:
    k = 12
    notes = []
    gens = all(ladder.eval_generator(k, n) == ladder.LadderDownset("down", n)
               for n in range(-1, 11))
    # every downset of the truncation is empty, full, down(n) or a pair
    lp = ladder.LadderPoset(k)
    vv = True
    for row in downsets(lp):
        pts = frozenset(lp.names[i] for i in np.flatnonzero(row))
        d = ladder.LadderDownset.classify(pts, k)
        if d.kind == "down":
            vv &= ladder.vee_vee(d) == max(pts)
        elif d.kind == "pair":
            vv &= ladder.vee_vee(d) == d.n + 3
            # n + 3 may lie above the truncation, so count in a taller ladder
            vv &= len(ladder._down(d.n + 3, d.n + 3)) == len(pts) + 1
            vv &= pts < ladder._down(d.n + 3, d.n + 3)
    opened = True
    try:
        ladder.ladder_endo(k)
    except ladder.LadderError:
        opened = False
    its = ladder.inverse_image_iterates(k, ladder.LadderDownset("down", 0), 4)
    distinct = len(set(its)) == 4
    rng = random.Random(cfg.seed + 9)
    star_ok = 0
    for _ in range(300):
        m = ladder.random_presentation_model(rng, 7)
        try:
            ladder.star_construction(m)
            star_ok += 1
        except ladder.LadderError as e:
            notes.append(str(e))
    proj = ladder.projectivity_check(prover=_prover(cfg))
    ok = gens and vv and opened and distinct and star_ok == 300 and proj
    detail = (f"generators {gens}; vee_vee {vv}; endo open {opened}; "
              f"iterates {[str(d) for d in its]} distinct {distinct}; "
              f"star maps {star_ok}/300; projectivity {proj}")
    return ok, detail, notes[:20]


def crit_bounds(cfg: Config) -> tuple[bool, str, list[str]]:
    notes = []
    viol = 0
    for tr in _traces(cfg):
        rep = bounds.check_period_bound(tr)
        if tr.period > 2:
            rep.violations.append(f"formula-induced period {tr.period} > 2")
        viol += len(rep.violations)
        notes.extend(f"{tr.formula}: {v}" for v in rep.violations)
    fact = all(bounds.factorial_inequality(m, n) for m in range(1, 13) for n in range(1, 13))
    periods = [bounds.nonmonotone_counterexample(n)[1] for n in range(1, 13)]
    nm = periods == [2 ** n for n in range(1, 13)]
    boole = [bounds.boolean_endo_experiment(n) for n in (1, 2)]
    bo = all(r.ok and r.max_period <= r.lcm_bound <= r.factorial_bound for r in boole)
    ok = viol == 0 and fact and nm and bo
    detail = (f"trace bound violations={viol}; factorial lemma {fact}; "
              f"non-monotone periods 2^n {nm}; Boolean max periods "
              f"{[(r.k, r.max_period, r.lcm_bound) for r in boole]}")
    return ok, detail, notes[:20]


def crit_duality(cfg: Config) -> tuple[bool, str, list[str]]:
    L = two()
    evals = list(all_evaluations(L, 3))
    downs_L = [frozenset(), frozenset([1]), frozenset([0, 1])]
    notes = []
    tri = 0
    for f in evals:
        for d in downs_L:
            lhs = dualitylite.ev_map(dualitylite.iota(L, d), f)
            rhs = frozenset(p for p in range(f.domain.n) if f.name(p) in d)
            if lhs != rhs:
                tri += 1
                notes.append(f"triangle {f} {sorted(d)}")
    family = [dualitylite.everything(L), dualitylite.nothing(L)]
    family += [dualitylite.iota(L, d) for d in downs_L]
    for n in (0, 1):
        family += [dualitylite.down_n(u, n) for u in reduced_trees(L, n)]
    hom = 0
    for f in evals:
        evs = [dualitylite.ev_map(s, f) for s in family]
        full = frozenset(range(f.domain.n))
        if evs[0] != full or evs[1]:
            hom += 1
        for i, s in enumerate(family):
            for j, t in enumerate(family):
                imp = dualitylite.ev_map(dualitylite.heyting_implies(s, t), f)
                if imp != dualitylite.downset_implies(f.domain, evs[i], evs[j]):
                    hom += 1
                if dualitylite.ev_map(dualitylite.heyting_meet(s, t), f) != evs[i] & evs[j]:
                    hom += 1
                if dualitylite.ev_map(dualitylite.heyting_join(s, t), f) != evs[i] | evs[j]:
                    hom += 1
    nform = 0
    checked = 0
    for n in (0, 1):
        universe = list(reduced_trees(L, n)) + evals
        for u in evals:
            rep = dualitylite.check_nform(u, n, universe, evals)
            checked += rep.checked
            nform += len(rep.mismatches)
    ok = tri == 0 and hom == 0 and nform == 0
    detail = (f"{len(evals)} evaluations; triangle mismatches={tri}; "
              f"Heyting morphism mismatches={hom} over {len(family)} subpresheaves; "
              f"normal form mismatches={nform} in {checked} checks")
    return ok, detail, notes[:20]


def crit_oracle(cfg: Config) -> tuple[bool, str, list[str]]:
    # Countermodels are shared by IPC-equivalent formulas but degree is not,
    # so every unprovable representative is searched, whatever its degree.
    prover = _prover(cfg)
    disagreements, escapes, notes = 0, 0, []
    proved = refuted = deep_escapes = 0
    for a in build_corpus(cfg).formulas:
        if prover.prove(a):
            proved += 1
            if countermodel(a, cfg.max_points) is not None:
                disagreements += 1
                notes.append(f"provable but refuted: {a}")
        elif countermodel(a, cfg.max_points) is not None:
            refuted += 1
        elif degree(a) <= 3:
            escapes += 1
            notes.append(f"size-limit escape: {a}")
        else:
            deep_escapes += 1
            notes.append(f"size-limit escape (degree {degree(a)}): {a}")
    return disagreements == 0 and escapes == 0, (
        f"provable={proved} (no countermodel <= {cfg.max_points} points), "
        f"unprovable with countermodel={refuted}, escapes at degree<=3={escapes}, "
        f"escapes above degree 3={deep_escapes}, disagreements={disagreements}"), notes[:20]


CRITERIA: list[tuple[int, str, Callable[[Config], tuple[bool, str, list[str]]]]] = [
    (1, "Ruitenburg index and period", crit_ruitenburg),
    (2, "classical A^3 = A and f^3 = f", crit_classical),
    (3, "triple negation and Glivenko", crit_glivenko),
    (4, "2-periodic after height steps", crit_height),
    (5, "one-step periodicity lemma", crit_lemma_period),
    (6, "index decreases under chi", crit_index_decreases),
    (7, "degree correspondence", crit_degree),
    (8, "forcing of A^i equals i-th chi iterate", crit_bridge),
    (9, "ladder counterexample", crit_ladder),
    (10, "period bounds", crit_bounds),
    (11, "duality shadows and normal form", crit_duality),
    (12, "prover and countermodel agreement", crit_oracle),
]


def run_criterion(number: int, cfg: Config = Config()) -> Result:
    for num, name, fn in CRITERIA:
        if num == number:
            return _timed(num, name, lambda: fn(cfg))
    raise KeyError(number)


def run_all(cfg: Config = Config()) -> list[Result]:
    return [run_criterion(num, cfg) for num, _, _ in CRITERIA]
