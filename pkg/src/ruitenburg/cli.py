"""Command line front end.

Every subcommand writes a line-oriented report to stdout (and to ``--out``
when given).  The exit code is 0 iff no checked property was violated;
usage and input errors exit with 2.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import bounds, dualitylite, experiments, ladder
from .evaluation import Evaluation, EvaluationError, all_evaluations, equiv_n, kripke, reduced_trees
from .formula import Iff, ParseError, dag_size, iterate_formula, parse, to_text, variables
from .iteration import (CombinedModel, RuitenburgIndexError, TWO, format_trace, iterate_psi,
                        ruitenburg_index)
from .poset import PosetError, format_model, parse_model
from .prover import Prover, ProverBudgetExceeded, countermodel

__all__ = ["build_parser", "main"]


class _Report:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.violations = 0

    def add(self, text: str) -> None:
        self.lines.extend(text.rstrip("\n").split("\n"))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _load_model(path: str) -> tuple:
    return parse_model(Path(path).read_text())


def _kripke_from_file(path: str, extra_vars=()) -> Evaluation:
    poset, labels = _load_model(path)
    if labels and isinstance(labels[0], int):
        return Evaluation.from_names(poset, TWO, labels)
    return kripke(poset, labels, set().union(*labels, extra_vars))


def _combined_from_file(path: str, a, x: str) -> CombinedModel:
    poset, labels = _load_model(path)
    ys = sorted(variables(a) - {x})
    sets = [frozenset(s) - {x} for s in labels]
    bits = [int(x in s) for s in labels]
    return CombinedModel.build(poset, sets, bits, ys)


def _countermodel_text(a, max_points: int) -> str:
    cm = countermodel(a, max_points)
    if cm is None:
        return f"no countermodel with at most {max_points} points"
    return format_model(cm.poset, cm.labels())


# ------------------------------------------------------------ subcommands

def cmd_prove(args, rep: _Report) -> None:
    a = parse(args.formula)
    rep.add(f"provable: {str(Prover(budget=args.budget).prove(a)).lower()}")


def cmd_equiv(args, rep: _Report) -> None:
    a, b = parse(args.left), parse(args.right)
    ok = Prover(budget=args.budget).prove(Iff(a, b))
    rep.add(f"equivalent: {str(ok).lower()}")
    if not ok:
        rep.add(_countermodel_text(Iff(a, b), args.max_points))


def cmd_countermodel(args, rep: _Report) -> None:
    rep.add(_countermodel_text(parse(args.formula), args.max_points))


def cmd_ruitenburg(args, rep: _Report) -> None:
    a = parse(args.formula)
    n, p = ruitenburg_index(a, args.x, args.n_cap, Prover(budget=args.budget))
    rep.add(f"N={n} period={p}")


def cmd_iterate(args, rep: _Report) -> None:
    a = parse(args.formula)
    if args.model is None:
        for i in range(1, args.steps + 1):
            rep.add(f"A^{i} = {to_text(iterate_formula(a, args.x, i))}")
        return
    trace = iterate_psi(a, _combined_from_file(args.model, a, args.x), x=args.x)
    rep.add(format_trace(trace))
    if not trace.complete:
        rep.violations += 1


def cmd_bisim(args, rep: _Report) -> None:
    p1, l1 = _load_model(args.model)
    p2, l2 = _load_model(args.other)
    vs = set().union(*l1, *l2)
    u, v = kripke(p1, l1, vs), kripke(p2, l2, vs)
    for n in range(args.n + 1):
        rep.add(f"equiv_{n}: {str(equiv_n(u, v, n)).lower()}")


def cmd_nform(args, rep: _Report) -> None:
    if args.model is not None:
        targets = [_kripke_from_file(args.model)]
    else:
        targets = list(all_evaluations(TWO, args.max_points))
    labels = targets[0].labels
    pool = list(all_evaluations(labels, args.max_points))
    universe = list(reduced_trees(labels, args.n)) + pool
    total = mism = 0
    for u in targets:
        r = dualitylite.check_nform(u, args.n, universe, pool)
        total += r.checked
        mism += len(r.mismatches)
    rep.add(f"n={args.n} targets={len(targets)} checks={total} mismatches={mism}")
    rep.add(f"note: {dualitylite.NFormReport(args.n).caveat}")
    rep.violations += mism


def cmd_ladder(args, rep: _Report) -> None:
    its, cur = [], ladder.LadderDownset("down", 0)
    while True:
        try:
            cur = ladder.inverse_image(args.k, cur)
        except ladder.TruncationError:
            break
        its.append(cur)
    if len(set(its)) != len(its):
        rep.violations += 1
    rep.add("inverse images of ↓0: " + " ".join(map(str, its)))
    for n in range(-1, args.n + 1):
        a = ladder.generator_formula(n)
        pts = ladder.eval_downset(args.k, a)
        ok = pts == ladder.LadderDownset("down", n).points(args.k)
        text = to_text(a)
        shown = text if len(text) <= 60 else f"<{dag_size(a)} shared nodes>"
        rep.add(f"{n}\t{shown}\t{{{', '.join(map(str, sorted(pts)))}}}")
        rep.add(f"↓{n} {'match' if ok else 'MISMATCH'}")
        rep.violations += not ok


def cmd_bounds(args, rep: _Report) -> None:
    if args.which == "view":
        if args.formula is None or args.model is None:
            raise ValueError("bounds view needs a formula and --model")
        a = parse(args.formula)
        trace = iterate_psi(a, _combined_from_file(args.model, a, args.x), x=args.x)
        r = bounds.check_period_bound(trace)
        rep.add(f"period={r.period} K={r.view_size} l={r.label_count}")
        rep.add(f"period <= K!: {str(r.period <= math.factorial(r.view_size)).lower()}")
        rep.add(f"period <= l!: {str(r.period <= math.factorial(r.label_count)).lower()}")
        rep.violations += len(r.violations)
    elif args.which == "counterexample":
        for n in range(1, args.n + 1):
            _, period = bounds.nonmonotone_counterexample(n)
            rep.add(f"n={n} period={period}")
            rep.violations += period != 2 ** n
    elif args.which == "classical":
        r = bounds.classical_f3(args.t)
        rep.add(f"t={args.t} maps={r.maps} violations={r.violations}")
        rep.add(f"fixture index={r.fixture[0]} period={r.fixture[1]} components={r.components}")
        rep.violations += not r.ok
    else:
        r = bounds.boolean_endo_experiment(args.n, args.samples, args.seed)
        mode = "exhaustive" if r.exhaustive else f"{args.samples} samples"
        rep.add(f"n={r.n} k={r.k} maps={r.maps} ({mode})")
        rep.add(f"max_index={r.max_index} max_period={r.max_period} "
                f"lcm={r.lcm_bound} factorial={r.factorial_bound}")
        rep.violations += not r.ok


def _run_one(args_tuple) -> experiments.Result:
    number, cfg = args_tuple
    return experiments.run_criterion(number, cfg)


def cmd_suite(args, rep: _Report) -> None:
    cfg = experiments.Config(seed=args.seed, corpus_size=args.corpus_size,
                             max_points=args.max_points, budget=args.budget)
    numbers = args.only or [n for n, _, _ in experiments.CRITERIA]
    jobs = [(n, cfg) for n in numbers]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    rep.add(f"seed={cfg.seed} corpus_size={cfg.corpus_size} max_points={cfg.max_points} "
            f"budget={cfg.budget}")
    for r in results:
        rep.add(r.line() if args.timings else r.line().rsplit(" (", 1)[0])
        for note in r.notes:
            rep.add(f"    {note}")
        rep.violations += not r.passed
    rep.add(f"passed {sum(r.passed for r in results)}/{len(results)}")


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=experiments.Config.seed)
    common.add_argument("--max-points", type=int, default=8)
    common.add_argument("--budget", type=int, default=2_000_000, help="prover node budget")
    common.add_argument("--corpus-size", type=int, default=200)
    common.add_argument("--out", help="also write the report to this file")

    p = argparse.ArgumentParser(prog="ruitenburg",
                                description="Iterated substitution in intuitionistic logic.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("prove", parents=[common], help="IPC provability")
    s.add_argument("formula")
    s.set_defaults(fn=cmd_prove)

    s = sub.add_parser("equiv", parents=[common], help="IPC equivalence")
    s.add_argument("left")
    s.add_argument("right")
    s.set_defaults(fn=cmd_equiv)

    s = sub.add_parser("countermodel", parents=[common], help="smallest Kripke countermodel")
    s.add_argument("formula")
    s.set_defaults(fn=cmd_countermodel)

    s = sub.add_parser("ruitenburg", parents=[common], help="index and period of A^i")
    s.add_argument("formula")
    s.add_argument("--x", default="x")
    s.add_argument("--n-cap", type=int, default=64)
    s.set_defaults(fn=cmd_ruitenburg)

    s = sub.add_parser("iterate", parents=[common],
                       help="print iterates, or the psi trace on --model")
    s.add_argument("formula")
    s.add_argument("--x", default="x")
    s.add_argument("--model")
    s.add_argument("--steps", type=int, default=4)
    s.set_defaults(fn=cmd_iterate)

    s = sub.add_parser("bisim", parents=[common], help="bounded bisimilarity of two models")
    s.add_argument("--model", required=True)
    s.add_argument("other", help="second model file")
    s.add_argument("--n", type=int, default=2)
    s.set_defaults(fn=cmd_bisim)

    s = sub.add_parser("nform", parents=[common], help="normal form check for down_(n+1)")
    s.add_argument("--model")
    s.add_argument("--n", type=int, default=1)
    s.set_defaults(fn=cmd_nform, max_points=3)

    s = sub.add_parser("ladder", parents=[common], help="generator formulas on the ladder")
    s.add_argument("--k", type=int, default=12)
    s.add_argument("--n", type=int, default=10)
    s.set_defaults(fn=cmd_ladder)

    s = sub.add_parser("bounds", parents=[common], help="period bound experiments")
    s.add_argument("which", choices=["view", "counterexample", "classical", "boolean"])
    s.add_argument("formula", nargs="?")
    s.add_argument("--x", default="x")
    s.add_argument("--model")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--t", type=int, default=4)
    s.add_argument("--samples", type=int, default=0)
    s.set_defaults(fn=cmd_bounds)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance experiments")
    s.add_argument("--only", type=int, nargs="*", help="criterion numbers")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--timings", action="store_true", help="append wall-clock times")
    s.set_defaults(fn=cmd_suite)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    rep = _Report()
    try:
        args.fn(args, rep)
    except (ParseError, PosetError, EvaluationError, ValueError, OSError,
            ProverBudgetExceeded, RuitenburgIndexError, ladder.LadderError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = rep.text()
    sys.stdout.write(out)
    if args.out:
        Path(args.out).write_text(out)
    return 0 if rep.violations == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
