"""Command-line front end: ``nalscp solve | gen | condscan | bench``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import diagnostics
from .errors import NalError, ParseError
from .nal import MAX_OUTER, NUMERICAL_FAILURE, OPTIMAL, IterRecord, SolverConfig, solve
from .probio import GeneratorSpec
from .probio.mps import read_mps
from .probio.nalp import read_nalp, save_nalp, write_nalp

EXIT_OK = 0
EXIT_MAX_OUTER = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4

SCHEMA = 1

_STATUS_EXIT = {OPTIMAL: EXIT_OK, MAX_OUTER: EXIT_MAX_OUTER, NUMERICAL_FAILURE: EXIT_NUMERICAL}

# CLI family names and the parameter aliases each accepts
_FAMILIES = {
    "meb": ("meb", {"n": "N", "N": "N", "d": "d"}),
    "lasso": ("sqrt_lasso", {"m": "m", "n": "n", "lam": "lam_reg", "lam_reg": "lam_reg"}),
    "maxcut": ("maxcut_sdp", {"p": "p", "n": "p"}),
    "lp": ("random_lp", {"m": "m", "n": "n", "basic": "basic"}),
}

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v) -> str:
    return diagnostics._fmt(v)


def load_problem(path):
    """Read a ``.mps`` file as an LP, anything else as NALP."""
    p = Path(path)
    if p.suffix.lower() == ".mps":
        prob = read_mps(p)
    else:
        prob = read_nalp(p)
    if not prob.name:
        prob.name = p.stem
    return prob


def _config(args) -> SolverConfig:
    return SolverConfig(
        mu0=args.mu0, rho0=args.rho0, sigma=args.sigma, rho_min=args.rho_min,
        kappa=args.kappa, tol=args.tol, max_outer=args.max_outer,
        max_inner_per_outer=args.max_inner, primal_stop=args.primal_stop,
    )


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def result_json(res, problem) -> dict:
    return {
        "schema": SCHEMA,
        "problem": problem.name,
        "status": res.status,
        "message": res.message,
        "objective_primal": _num(res.objective_primal),
        "objective_dual": _num(res.objective_dual),
        "objective_constant": float(problem.metadata.get("objective_constant", 0.0)),
        "gap": _num(res.gap),
        "pinfeas": _num(res.pinfeas),
        "pinfeas_unscaled": _num(res.pinfeas_unscaled),
        "dinfeas": _num(res.dinfeas),
        "comp": _num(res.comp),
        "outer_iters": res.outer_iters,
        "newton_iters": res.newton_iters,
        "seconds": res.seconds,
        "x": [_num(v) for v in res.x],
        "lam": [_num(v) for v in res.lam],
    }


def write_log(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(IterRecord.FIELDS)
        for r in records:
            w.writerow([_fmt(v) for v in r.as_row()])


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    cfg = _config(args)
    res = solve(problem, cfg)
    if args.log:
        write_log(res.records, args.log)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(result_json(res, problem), fh, indent=2, sort_keys=True)
            fh.write("\n")
    status_line(
        f"{res.status} problem={problem.name} objective={res.objective_primal:.10g} "
        f"outer={res.outer_iters} newton={res.newton_iters} seconds={res.seconds:.3f}"
        + (f" ({res.message})" if res.message else "")
    )
    return _STATUS_EXIT[res.status]


def _parse_params(text: str, family: str) -> dict:
    aliases = _FAMILIES[family][1]
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"--params entry {item!r} is not key=value")
        k, v = (t.strip() for t in item.split("=", 1))
        if k not in aliases:
            raise UsageError(f"unknown parameter {k!r} for family {family}; expected one of {sorted(aliases)}")
        try:
            out[aliases[k]] = float(v) if aliases[k] == "lam_reg" else int(v)
        except ValueError:
            raise UsageError(f"parameter {k} needs a number, got {v!r}") from None
    return out


def cmd_gen(args) -> int:
    params = _parse_params(args.params, args.family)
    spec = GeneratorSpec(_FAMILIES[args.family][0], params, args.seed)
    try:
        problem = spec.build()
    except KeyError as exc:
        raise UsageError(f"family {args.family} needs parameter {exc.args[0]}") from None
    if args.out:
        save_nalp(problem, args.out)
        status_line(f"wrote {problem.name} (m={problem.m}, n={problem.n}) to {args.out}")
    else:
        sys.stdout.write(write_nalp(problem))
        status_line(f"generated {problem.name} (m={problem.m}, n={problem.n})")
    return EXIT_OK


def cmd_condscan(args) -> int:
    problem = load_problem(args.problem)
    res = diagnostics.cond_scan(problem, _config(args), mu_max=args.mu_max, mu_min=args.mu_min,
                                compare_ipm=args.compare_ipm)
    diagnostics.write_condscan_csv([res], args.out)
    if args.heatmap:
        diagnostics.write_heatmap_csv([res], args.heatmap)
    msg = f"condscan problem={problem.name} rows={len(res.rows)} slope_nal={res.slope_nal:.4g}"
    if args.compare_ipm and problem.cone.is_lp:
        msg += f" slope_ipm={res.slope_ipm:.4g}"
    status_line(msg)
    return EXIT_OK


def _bench_one(path: str, cfg: SolverConfig):
    problem = load_problem(path)
    res = solve(problem, cfg)
    return problem.name, res.seconds, res.status == OPTIMAL


def _read_times(paths, problems):
    """External timings: CSV with columns solver,problem,seconds[,solved]."""
    table = {}
    for path in paths:
        with open(path, newline="") as fh:
            rd = csv.DictReader(fh)
            missing = {"solver", "problem", "seconds"} - set(rd.fieldnames or [])
            if missing:
                raise ParseError(f"{path}: missing columns {sorted(missing)}", 1, 1)
            for ln, row in enumerate(rd, start=2):
                try:
                    t = float(row["seconds"])
                except ValueError:
                    raise ParseError(f"{path}: bad seconds value {row['seconds']!r}", ln, 1) from None
                ok = str(row.get("solved", "1")).strip().lower() not in ("0", "false", "no", "")
                table.setdefault(row["solver"], {})[row["problem"]] = (t, ok)
    out = []
    for solver, entries in sorted(table.items()):
        got = [entries.get(p, (math.inf, False)) for p in problems]
        out.append((solver, [t for t, _ in got], [ok and math.isfinite(t) for t, ok in got]))
    return out


def cmd_bench(args) -> int:
    d = Path(args.dir)
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    files = sorted(str(p) for p in d.iterdir() if p.suffix.lower() in (".nalp", ".mps"))
    if not files:
        raise UsageError(f"no .nalp or .mps files in {d}")
    cfg = _config(args)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_bench_one, files, [cfg] * len(files)))
    else:
        rows = [_bench_one(f, cfg) for f in files]
    names = [r[0] for r in rows]
    solvers = ["nal"]
    secs = [[r[1] for r in rows]]
    solved = [[r[2] for r in rows]]
    for solver, s_secs, s_solved in _read_times(args.times_from or [], names):
        solvers.append(solver)
        secs.append(s_secs)
        solved.append(s_solved)
    table = diagnostics.BenchTable(
        names, solvers, np.array(secs, dtype=float), np.array(solved, dtype=bool), cls=args.cls
    )
    prefix = args.out_prefix
    diagnostics.write_sgm_csv(table, prefix + "sgm.csv")
    diagnostics.write_profile_csv(table.profile(), prefix + "profile.csv")
    frac = table.solved_fraction()["nal"]
    status_line(f"bench class={args.cls} problems={len(files)} solved={frac:.3f} "
                f"sgm={table.sgm()['nal']:.6g}")
    return EXIT_OK


def status_line(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _solver_flags(p):
    g = p.add_argument_group("solver settings")
    g.add_argument("--tol", type=float, default=1e-6)
    g.add_argument("--mu0", type=float, default=0.1)
    g.add_argument("--rho0", type=float, default=1.0)
    g.add_argument("--sigma", type=float, default=0.5)
    g.add_argument("--rho-min", type=float, default=1e-2)
    g.add_argument("--kappa", type=float, default=0.25)
    g.add_argument("--max-outer", type=int, default=100)
    g.add_argument("--max-inner", type=int, default=200)
    g.add_argument("--primal-stop", choices=("both", "scaled"), default="both",
                   help="primal residual(s) used in the stopping test")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nalscp", description="Newton augmented Lagrangian solver for symmetric cone programs")
    ap.add_argument("-v", "--verbose", action="store_true", help="log per-iteration progress")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a .nalp or .mps problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--log", help="per-Newton-step CSV")
    p.add_argument("--json", help="result JSON")
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    p.add_argument("--family", required=True, choices=sorted(_FAMILIES))
    p.add_argument("--params", default="", help="comma separated key=value sizes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output .nalp (default: standard output)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("condscan", help="condition numbers along the barrier schedule")
    p.add_argument("--problem", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--compare-ipm", action="store_true")
    p.add_argument("--mu-max", type=float, default=1e-1)
    p.add_argument("--mu-min", type=float, default=1e-5)
    p.add_argument("--heatmap", help="also write log10 geometric-mean condition numbers")
    _solver_flags(p)
    p.set_defaults(func=cmd_condscan)

    p = sub.add_parser("bench", help="solve a directory of problems and summarize runtimes")
    p.add_argument("--dir", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--class", dest="cls", required=True, choices=("lp", "socp", "sdp"))
    p.add_argument("--times-from", action="append", help="CSV solver,problem,seconds[,solved]")
    p.add_argument("--jobs", type=int, default=1)
    _solver_flags(p)
    p.set_defaults(func=cmd_bench)
    return ap


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        return args.func(args)
    except (UsageError, NalError, ValueError, OSError) as exc:
        # parse errors, rank deficiency and unsupported input all land here
        status_line(f"error: {exc}")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
