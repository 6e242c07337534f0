"""Command-line front end: ``sfsat <subcommand> ...``.

Every subcommand echoes its resolved configuration as comment lines before
its output (``c`` lines for DIMACS-style output, ``#`` lines otherwise).
``solve`` exits 10 (SAT), 20 (UNSAT) or 30 (UNKNOWN); bad flags exit 2 and
unreadable or malformed files exit 1.
"""

from __future__ import annotations

import argparse
import math
import os
import sys


from . import __version__
from .analysis import (
    FitError,
    criteria_csv,
    criteria_row,
    empirical_profile,
    fit_beta,
    fit_delta_tail,
    histogram_csv,
    occurrence_counts,
    pooled_stats,
)
from .formula import DimacsError, read_dimacs, write_dimacs
from .generator import GeneratorParams, generate_formula
from .harness import SolverSpec, SweepSpec, crossings_csv, find_crossing, fit_scaling_exponent, run_sweep
from .sampler import APPROX
from .solver import Status, solve_2sat, solve_dpll
from .theory import build_report

SEED_ENV = "SFSAT_SEED"
EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN = 10, 20, 30


class UsageError(Exception):
    pass


def _number_list(text, cast=float):
    """Comma list ``a,b,c`` or inclusive range ``start:stop:step``."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            vals = [start + i * step for i in range(count)]
            vals = [round(v, 10) for v in vals]
        else:
            vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list or start:stop:step range: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    if cast is int:
        return [int(round(v)) for v in vals]
    return vals


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed, "flag"
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env), SEED_ENV
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")
    return 0, "default"


def _echo(config, prefix="#", stream=None):
    stream = sys.stdout if stream is None else stream
    for k, v in config.items():
        print(f"{prefix} {k} = {v}", file=stream)


def _solver_from(args, k):
    kind = args.solver or ("two_sat" if k == 2 else "dpll")
    try:
        return SolverSpec(kind, budget=args.budget, command=args.command)
    except ValueError as exc:
        raise UsageError(str(exc))


# -- subcommands --------------------------------------------------------

def cmd_generate(args):
    seed, source = _resolve_seed(args)
    try:
        params = GeneratorParams(
            args.vars, args.clauses, args.k, args.beta, seed, APPROX if args.approx_sampler else None
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    formula = generate_formula(params)
    meta = dict(formula.metadata)
    if source == SEED_ENV:
        meta["seed_source"] = SEED_ENV
    if args.out is None or args.out == "-":
        write_dimacs(formula, sys.stdout.buffer, meta)
        sys.stdout.flush()
    else:
        with open(args.out, "wb") as fh:
            write_dimacs(formula, fh, meta)
    return 0


def cmd_solve(args):
    formula = _read(args.file)
    _echo({"file": args.file, "mode": args.mode, "budget": args.budget, "n": formula.n, "m": formula.m}, "c")
    if args.mode == "2sat":
        try:
            res = solve_2sat(formula)
        except ValueError as exc:
            raise DimacsError(f"{args.file}: {exc}") from exc
    else:
        res = solve_dpll(formula, args.budget)
    names = {Status.SAT: "SATISFIABLE", Status.UNSAT: "UNSATISFIABLE", Status.UNKNOWN: "UNKNOWN"}
    print(f"s {names[res.status]}")
    if res.witness is not None:
        lits = [(i + 1) if v else -(i + 1) for i, v in enumerate(res.witness.tolist())]
        print("v " + " ".join(map(str, lits + [0])))
    return {Status.SAT: EXIT_SAT, Status.UNSAT: EXIT_UNSAT, Status.UNKNOWN: EXIT_UNKNOWN}[res.status]


def _read(path):
    try:
        return read_dimacs(path)
    except DimacsError as exc:
        raise DimacsError(f"{path}: {exc}") from exc


def _meta_value(formula, key, cast):
    v = formula.metadata.get(key)
    try:
        return cast(v) if v is not None else None
    except ValueError:
        return None


def cmd_analyze(args):
    formulas = [_read(p) for p in args.files]
    _echo({"files": " ".join(args.files), "pooled": args.pooled, "histogram": args.histogram})
    stats = [occurrence_counts(f, distinct=False) for f in formulas]
    if args.pooled:
        stats = [pooled_stats(stats)]
        formulas = formulas[:1]
    if args.histogram:
        for s in stats:
            sys.stdout.write(histogram_csv(s))
        return 0
    rows = [criteria_row(s, _meta_value(f, "k", int), _meta_value(f, "beta", float)) for s, f in zip(stats, formulas)]
    sys.stdout.write(criteria_csv(rows))
    return 0


def cmd_fit_beta(args):
    formulas = [_read(p) for p in args.files]
    pooled = not args.per_file
    _echo({"files": " ".join(args.files), "pooled": pooled, "x_min": args.x_min, "k_min": args.k_min})
    stats = [occurrence_counts(f, distinct=False) for f in formulas]
    labels = list(args.files)
    if pooled:
        stats, labels = [pooled_stats(stats)], ["pooled"]
    print("file,n,beta_hat,delta_from_beta,delta_tail,beta_from_delta")
    for label, s in zip(labels, stats):
        fb = fit_beta(empirical_profile(s), args.x_min)
        try:
            fd = fit_delta_tail(s, args.k_min)
            dt, bd = fd.delta_hat, fd.beta_hat
        except FitError:
            dt = bd = float("nan")
        print(f"{label},{s.n},{fb.beta_hat:.6g},{fb.delta_hat:.6g},{dt:.6g},{bd:.6g}")
    return 0


def cmd_thresholds(args):
    try:
        report = build_report(args.n, args.k, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.format == "csv":
        sys.stdout.write(report.to_csv())
    else:
        sys.stdout.write(report.to_text())
    return 0


def cmd_sweep(args):
    seed, source = _resolve_seed(args)
    solver = _solver_from(args, args.k)
    try:
        if args.clauses is not None:
            spec = SweepSpec(args.n, args.k, args.betas, args.clauses, args.trials, solver, seed)
        else:
            spec = SweepSpec.from_ratios(args.n, args.k, args.betas, args.ratios, trials=args.trials, solver=solver, base_seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    config = {
        "n": spec.n, "k": spec.k, "betas": ",".join(map(str, spec.beta_grid)),
        "m_grid": ",".join(map(str, spec.m_grid)), "trials": spec.trials, "solver": solver.kind,
        "budget": solver.budget, "command": solver.command, "base_seed": seed, "seed_source": source,
        "jobs": args.jobs,
    }
    out = _open_out(args.out)
    _echo(config, stream=out)
    out.write(run_sweep(spec, jobs=args.jobs).to_csv())
    _close_out(out)
    return 0


def cmd_crossing(args):
    seed, source = _resolve_seed(args)
    solver = _solver_from(args, args.k)
    if args.trials < 20:
        print(f"warning: trials={args.trials} is below the 20 needed for a reliable crossing", file=sys.stderr)
    config = {
        "n": ",".join(map(str, args.n)), "k": args.k, "beta": args.beta, "trials_per_probe": args.trials,
        "solver": solver.kind, "budget": solver.budget, "base_seed": seed, "seed_source": source,
        "m_start": args.m_start, "rel_tol": args.rel_tol, "method": "exponential bracketing + bisection",
        "jobs": args.jobs,
    }
    out = _open_out(args.out)
    _echo(config, stream=out)
    results = []
    for n in args.n:
        try:
            results.append(
                find_crossing(n, args.k, args.beta, args.trials, solver, seed, args.m_start, args.rel_tol, args.jobs)
            )
        except ValueError as exc:
            raise UsageError(str(exc))
    for c in results:
        if not c.valid:
            print(f"# n = {c.n}: INVALID, {c.unknown_fraction:.1%} of probe formulas undecided", file=out)
    out.write(crossings_csv(results))
    if len(results) >= 4:
        try:
            print(f"# scaling_exponent = {fit_scaling_exponent(results):.4f}", file=out)
        except ValueError:
            pass
    _close_out(out)
    return 0


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w")


def _close_out(out):
    if out is not sys.stdout:
        out.close()


# -- parser ---------------------------------------------------------------

def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _add_solver_flags(p):
    p.add_argument("--solver", choices=["two_sat", "dpll", "external"], help="default: two_sat for k=2, else dpll")
    p.add_argument("--budget", type=_positive_int, default=10**5, help="DPLL branch budget (default 1e5)")
    p.add_argument("--command", help="external solver template containing {cnf}")
    p.add_argument("--seed", type=int, help=f"base seed (default 0, or ${SEED_ENV})")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", help="output CSV path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="sfsat", description="Scale-free random k-SAT toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command_name", required=True)

    p = sub.add_parser("generate", help="write a random scale-free formula in DIMACS")
    p.add_argument("--vars", type=_positive_int, required=True)
    p.add_argument("--clauses", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--approx-sampler", action="store_true", help="closed-form inverse sampler (large n)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="decide a DIMACS formula (exit 10/20/30)")
    p.add_argument("--mode", choices=["2sat", "dpll"], default="dpll")
    p.add_argument("--budget", type=_positive_int, default=10**6)
    p.add_argument("file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("analyze", help="occurrence moments and percolation criteria as CSV")
    p.add_argument("--pooled", action="store_true", help="treat all files as one variable population")
    p.add_argument("--histogram", action="store_true", help="print the K histogram instead")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit-beta", help="estimate beta from the rank profile and delta from the tail")
    p.add_argument("--per-file", action="store_true", help="fit each file separately (default: pool all files)")
    p.add_argument("--x-min", type=float)
    p.add_argument("--k-min", type=float)
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_fit_beta)

    p = sub.add_parser("thresholds", help="closed-form threshold report")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("sweep", help="satisfiable fraction over a (beta, m) grid")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--betas", type=_number_list, required=True, help="list a,b or range start:stop:step")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ratios", type=_number_list, help="clause/variable ratios")
    g.add_argument("--clauses", type=lambda s: _number_list(s, int), help="clause counts")
    p.add_argument("--trials", type=_positive_int, default=10)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crossing", help="clause count where half the formulas are UNSAT")
    p.add_argument("--n", type=lambda s: _number_list(s, int), required=True, help="one or more n")
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--trials", type=_positive_int, default=20)
    p.add_argument("--m-start", type=_positive_int)
    p.add_argument("--rel-tol", type=float, default=0.05)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_crossing)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sfsat {args.command_name}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, DimacsError) as exc:
        name = getattr(exc, "filename", None)
        where = f"{name}: " if name else ""
        print(f"sfsat {args.command_name}: {where}{exc.strerror if isinstance(exc, OSError) and exc.strerror else exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
