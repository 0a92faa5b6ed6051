"""Command-line entry point: ``prodmaint {solve,reproduce,validate,export}``.

Exit codes: 0 success (optimal), 1 bad input, 2 infeasible, 3 stopped on a
limit.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments
from .builder import build
from .evaluator import CSV_HEADER, csv_row, plan_to_text
from .instance import FIXTURES, PRESETS, InstanceError, ProblemInstance, fixture, load, validate
from .lpformat import export
from .milp import SolveConfig, write_solution

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _add_profile_flags(p: argparse.ArgumentParser, default_preset: str | None):
    p.add_argument("--preset", choices=sorted(PRESETS), default=default_preset,
                   help="named option set (paper_tables halves expected failures)")
    p.add_argument("--age-convention", choices=("start_of_period", "paper_literal"))
    p.add_argument("--periodic", action="store_true", help="restrict PMs to a single cycle")
    p.add_argument("--relax-quantities", action="store_true",
                   help="treat x, I, B as continuous")


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--gap", type=float, default=0.0, help="relative optimality gap (default 0)")
    p.add_argument("--node-limit", type=int)
    p.add_argument("--time-limit", type=float, help="seconds")
    p.add_argument("--branching", choices=("pseudocost", "most_fractional", "kind_priority"),
                   default="pseudocost")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prodmaint", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one instance and write plan, costs and stats")
    s.add_argument("instance", nargs="?", help="instance file (JSON)")
    s.add_argument("--fixture", help=f"built-in instance: {', '.join(FIXTURES)}")
    _add_profile_flags(s, None)
    _add_solver_flags(s)
    s.add_argument("--seed", type=int, default=0, help="accepted for symmetry; solves are deterministic")
    s.add_argument("--out", default="out", help="report directory")

    r = sub.add_parser("reproduce", help="re-run a published experiment side by side")
    r.add_argument("experiment", choices=experiments.EXPERIMENTS + ("all",))
    _add_profile_flags(r, "paper_tables")
    _add_solver_flags(r)
    r.add_argument("--seed", type=int, default=0, help="seed of the Monte-Carlo check (nhpp)")
    r.add_argument("--jobs", type=int, default=1, help="parallel scenario solves")
    r.add_argument("--out", default="reports", help="report directory")

    v = sub.add_parser("validate", help="list instance violations")
    v.add_argument("instance", nargs="?")
    v.add_argument("--fixture")

    e = sub.add_parser("export", help="write the MILP in LP text format")
    e.add_argument("instance", nargs="?")
    e.add_argument("--fixture")
    _add_profile_flags(e, None)
    e.add_argument("--out", default="-", help="file, or - for stdout")
    return ap


def _load(args) -> tuple[ProblemInstance, str, list[Path]]:
    """Instance, a label, and the input paths (never to be overwritten)."""
    if bool(args.instance) == bool(args.fixture):
        raise UsageError("give exactly one of an instance file or --fixture")
    if args.fixture:
        if args.fixture not in FIXTURES:
            raise UsageError(f"unknown fixture {args.fixture!r}; available: {', '.join(FIXTURES)}")
        return fixture(args.fixture), args.fixture, []
    path = Path(args.instance)
    try:
        inst = load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return inst, path.stem, [path.resolve()]


def _profile(args, instance: ProblemInstance) -> tuple[ProblemInstance, str]:
    opts = PRESETS[args.preset] if args.preset else instance.options
    changes = {}
    if args.age_convention:
        changes["age_convention"] = args.age_convention
    if args.periodic:
        changes["periodic"] = True
    if args.relax_quantities:
        changes["integral_quantities"] = False
    opts = replace(opts, **changes)
    preset = args.preset or "instance"
    return replace(instance, options=opts), preset


def _config(args) -> SolveConfig:
    return SolveConfig(gap=args.gap, node_limit=args.node_limit, time_limit=args.time_limit,
                       branching=args.branching)


def _write(path: Path, text: str, inputs: list[Path]):
    if path.resolve() in inputs:
        raise UsageError(f"refusing to overwrite input {path}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_solve(args) -> int:
    inst, label, inputs = _load(args)
    inst, preset = _profile(args, inst)
    problems = validate(inst)
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return EXIT_INPUT
    sc = experiments.solve_scenario(label, inst, _config(args))
    out = Path(args.out)
    prof = experiments.Profile(preset, inst.options).describe()
    _write(out / f"{label}.solution.txt", write_solution(sc.result), inputs)
    status = sc.result.status
    print(f"{label}: {status}", end="")
    if sc.breakdown is not None:
        _write(out / f"{label}.plan.txt", plan_to_text(sc.plan), inputs)
        _write(out / f"{label}.cost.csv", f"# {prof}\n{CSV_HEADER}\n{csv_row(sc.breakdown)}\n", inputs)
        print(f" objective={sc.result.objective:.6g} gap={sc.result.gap:.3g} "
              f"nodes={sc.result.stats['nodes']} pm_periods={list(sc.plan.pm_periods)}")
        print(CSV_HEADER)
        print(csv_row(sc.breakdown))
    else:
        print()
    for v in sc.violations:
        print(f"violation: {v}", file=sys.stderr)
    if status == "optimal":
        return EXIT_OK
    if status in ("infeasible", "unbounded"):
        return EXIT_INFEASIBLE
    return EXIT_LIMIT


def cmd_reproduce(args) -> int:
    names = experiments.EXPERIMENTS if args.experiment == "all" else (args.experiment,)
    base = PRESETS[args.preset]
    changes = {}
    if args.age_convention:
        changes["age_convention"] = args.age_convention
    if args.relax_quantities:
        changes["integral_quantities"] = False
    if args.periodic:
        print("note: --periodic is ignored by reproduce; table10 runs both variants", file=sys.stderr)
    profile = experiments.Profile(args.preset, replace(base, **changes))
    out = Path(args.out)
    limited = False
    for name in names:
        rep = experiments.reproduce(name, profile, _config(args), jobs=args.jobs, seed=args.seed)
        _write(out / f"{name}.csv", rep.to_csv(), [])
        if rep.svg is not None:
            _write(out / f"{name}.svg", rep.svg, [])
        bad = {k: sc.violations for k, sc in rep.scenarios.items() if sc.violations}
        if bad:
            print(json.dumps(bad, indent=1), file=sys.stderr)
        limited |= rep.limited
        print(f"{name}: wrote {out / (name + '.csv')}")
        sys.stdout.write(rep.to_csv())
    return EXIT_LIMIT if limited else EXIT_OK


def cmd_validate(args) -> int:
    # loading already validates; the listing comes from the error text
    try:
        _load(args)
    except InstanceError as exc:
        print(exc)
        return EXIT_INPUT
    return EXIT_OK


def cmd_export(args) -> int:
    inst, _, inputs = _load(args)
    inst, _ = _profile(args, inst)
    text = export(build(inst))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        _write(Path(args.out), text, inputs)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    handler = {"solve": cmd_solve, "reproduce": cmd_reproduce,
               "validate": cmd_validate, "export": cmd_export}[args.command]
    try:
        return handler(args)
    except (UsageError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
