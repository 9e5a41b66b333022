"""Experiment driver CLI.

Subcommands produce plot-ready CSV/JSON artifacts: geometry tables,
analytic cost sweeps, optimal-parameter curves, Monte Carlo points,
operator-gain sweeps, savings tables, and the acceptance verification
suite. All outputs are deterministic given a seed; sweep rows are sorted
by (sigma, omega, method) so parallelism never changes bytes.

Exit codes: 0 ok, 1 config error, 2 numerical/solver failure,
3 acceptance-verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import acceptance
from .codes import FeasibilityError, Scheme, make_code
from .cost_model import (
    CostBreakdown,
    SystemConfig,
    operator_gain,
    simple_caching_cost,
)
from .geometry import build_geometry_table
from .markov import SolverError
from .optimizer import (
    SearchRanges,
    best_method,
    optimize_regenerating,
    optimize_replication,
)
from .simulator import COUNTER_NAMES, SimConfig, replicate, simulate

ALL_METHODS = ("simple", "replication", "msr", "mbr")

CONFIG_FIELDS = ("m", "lam", "omega", "r", "v", "gamma_d2d", "gamma_bs", "sigma", "theta")


class ConfigError(ValueError):
    pass


def _parse_grid(spec: str) -> np.ndarray:
    """Parse LO:HI:N (log10 endpoints) into an omega grid."""
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {spec!r}, expected LO:HI:N") from exc
    if n < 1:
        raise ConfigError(f"grid needs at least one point, got {n}")
    return 10.0 ** np.linspace(lo, hi, n)


def _parse_range(spec: str) -> tuple[int, int]:
    try:
        lo, hi = (int(s) for s in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad range spec {spec!r}, expected LO:HI") from exc
    return lo, hi


def _base_config(args) -> dict:
    base = {f: getattr(SystemConfig(), f) for f in CONFIG_FIELDS}
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        unknown = set(doc) - set(CONFIG_FIELDS)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        base.update({k: float(v) for k, v in doc.items()})
    for f in ("m", "lam", "r", "gamma_d2d", "gamma_bs", "theta"):
        val = getattr(args, f, None)
        if val is not None:
            base[f] = val
    return base


def _make_cfg(base: dict, **overrides) -> SystemConfig:
    import warnings

    merged = {**base, **overrides}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SystemConfig(**merged)


def _sigmas(args, base: dict) -> list[float]:
    return args.sigma if args.sigma else [base["sigma"]]


def _vs(args, base: dict) -> list[float]:
    return args.v if args.v else [base["v"]]


def _methods(args) -> list[str]:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ConfigError("no methods selected")
    for m in methods:
        if m not in ALL_METHODS:
            raise ConfigError(f"unknown method {m!r}, expected one of {ALL_METHODS}")
    return methods


def _ranges(args) -> SearchRanges:
    return SearchRanges(
        replication_n=_parse_range(args.rep_n), coded_n=_parse_range(args.coded_n)
    )


def _optimized(cfg: SystemConfig, method: str, ranges: SearchRanges, geom) -> CostBreakdown:
    if method == "simple":
        return simple_caching_cost(cfg, geom)
    if method == "replication":
        return optimize_replication(cfg, ranges, geom).cost
    scheme = Scheme.MSR if method == "msr" else Scheme.MBR
    return optimize_regenerating(cfg, scheme, ranges, geom).cost


def _write(args, name: str, lines: list[str]) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text("\n".join(lines) + "\n")
    print(path)
    return path


def cmd_geometry(args) -> int:
    base = _base_config(args)
    cfg = _make_cfg(base, sigma=_sigmas(args, base)[0], v=_vs(args, base)[0])
    table = build_geometry_table(cfg, args.n_max)
    _write(args, "geometry_table.json", [table.to_json()])
    return 0


def cmd_cost(args) -> int:
    base = _base_config(args)
    methods = _methods(args)
    ranges = _ranges(args)
    omegas = _parse_grid(args.omega_grid)
    n_max = max(ranges.replication_n[1], ranges.coded_n[1])
    geom = build_geometry_table(_make_cfg(base), n_max)
    rows = []
    for sigma in _sigmas(args, base):
        for omega in omegas:
            cfg = _make_cfg(base, sigma=sigma, omega=float(omega))
            for method in methods:
                cost = _optimized(cfg, method, ranges, geom)
                c = cost.method
                rows.append(
                    (sigma, float(omega), method,
                     f"{method},{c.n},{c.k},{c.d},{omega!r},{sigma!r},"
                     f"{cost.reconstruction!r},{cost.repair!r},{cost.storage!r},{cost.total!r}")
                )
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    header = "method,n,k,d,omega,sigma,reconstruction,repair,storage,total"
    _write(args, "cost_sweep.csv", [header] + [r[3] for r in rows])
    return 0


def cmd_optimize(args) -> int:
    base = _base_config(args)
    ranges = _ranges(args)
    omegas = _parse_grid(args.omega_grid)
    n_max = max(ranges.replication_n[1], ranges.coded_n[1])
    geom = build_geometry_table(_make_cfg(base), n_max)
    rows = []
    for sigma in _sigmas(args, base):
        for omega in omegas:
            cfg = _make_cfg(base, sigma=sigma, omega=float(omega))
            for method in ("replication", "msr", "mbr"):
                if method == "replication":
                    res = optimize_replication(cfg, ranges, geom)
                else:
                    scheme = Scheme.MSR if method == "msr" else Scheme.MBR
                    res = optimize_regenerating(cfg, scheme, ranges, geom)
                b = res.best
                rows.append(
                    (sigma, float(omega), method,
                     f"{omega!r},{sigma!r},{method},{b.n},{b.k},{b.d},"
                     f"{res.cost.total!r},{100.0 * res.savings_vs_simple!r}")
                )
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    header = "omega,sigma,method,n,k,d,total,savings_pct"
    _write(args, "optimize_sweep.csv", [header] + [r[3] for r in rows])
    return 0


def _sim_job(job: tuple[SimConfig, int]) -> str:
    cfg, reps = job
    result = replicate(cfg, reps) if reps > 1 else simulate(cfg)
    c = cfg.method
    sys_cfg = cfg.system
    rec, rep, sto = result.mean_components
    counters = ",".join(str(result.counters[n]) for n in COUNTER_NAMES)
    ci = result.ci95_halfwidth
    return (
        f"{c.scheme.value},{c.n},{c.k},{c.d},{sys_cfg.omega!r},{sys_cfg.sigma!r},"
        f"{rec!r},{rep!r},{sto!r},{result.mean_total!r},"
        f"{ci!r},{cfg.seed},{cfg.horizon!r},{cfg.fidelity},{counters}"
    )


def cmd_simulate(args) -> int:
    base = _base_config(args)
    methods = _methods(args)
    ranges = _ranges(args)
    omegas = _parse_grid(args.omega_grid)
    n_max = max(ranges.replication_n[1], ranges.coded_n[1])
    geom = build_geometry_table(_make_cfg(base), n_max)

    jobs = []
    keys = []
    for sigma in _sigmas(args, base):
        for omega in omegas:
            cfg = _make_cfg(base, sigma=sigma, omega=float(omega))
            for method in methods:
                code = _optimized(cfg, method, ranges, geom).method
                keys.append((sigma, float(omega), method))
                jobs.append((cfg, code))
    sim_jobs = []
    order = sorted(range(len(jobs)), key=lambda i: keys[i])
    for rank, i in enumerate(order):
        cfg, code = jobs[i]
        sim_jobs.append(
            (
                SimConfig(
                    system=cfg,
                    method=code,
                    horizon=args.horizon,
                    seed=args.seed + rank,
                    fidelity=args.fidelity,
                    warmup=args.warmup,
                ),
                args.reps,
            )
        )

    workers = int(os.environ.get("D2DCACHE_THREADS", "0")) or 1
    if workers > 1 and len(sim_jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            lines = list(pool.map(_sim_job, sim_jobs))
    else:
        lines = [_sim_job(j) for j in sim_jobs]

    header = (
        "method,n,k,d,omega,sigma,reconstruction,repair,storage,total,"
        "ci95,seed,horizon,fidelity," + ",".join(f"counters.{n}" for n in COUNTER_NAMES)
    )
    _write(args, "simulate_sweep.csv", [header] + lines)
    return 0


def cmd_gain(args) -> int:
    base = _base_config(args)
    methods = _methods(args)
    ranges = _ranges(args)
    omegas = _parse_grid(args.omega_grid)
    rows = []
    for v in _vs(args, base):
        n_max = max(ranges.replication_n[1], ranges.coded_n[1])
        geom = build_geometry_table(_make_cfg(base, v=v), n_max)
        for sigma in _sigmas(args, base):
            for omega in omegas:
                cfg = _make_cfg(base, sigma=sigma, omega=float(omega), v=v)
                for method in methods:
                    cost = _optimized(cfg, method, ranges, geom)
                    gain = operator_gain(cfg, cost, geom)
                    rows.append(
                        (sigma, float(omega), method, v,
                         f"{omega!r},{v!r},{sigma!r},{method},{gain!r},{math.log10(gain)!r}")
                    )
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    header = "omega,v,sigma,method,gain,log10_gain"
    _write(args, "gain_sweep.csv", [header] + [r[4] for r in rows])
    return 0


def cmd_tables(args) -> int:
    base = _base_config(args)
    ranges = _ranges(args)
    omegas = _parse_grid(args.omega_grid)
    n_max = max(ranges.replication_n[1], ranges.coded_n[1])
    geom = build_geometry_table(_make_cfg(base), n_max)
    rows = []
    for sigma in _sigmas(args, base):
        for omega in omegas:
            cfg = _make_cfg(base, sigma=sigma, omega=float(omega))
            cmp = best_method(cfg, ranges, geom)
            msr_vs_rep = 100.0 * (1.0 - cmp.msr.cost.total / cmp.replication.cost.total)
            b = {
                Scheme.SIMPLE: cmp.simple.method,
                Scheme.REPLICATION: cmp.replication.best,
                Scheme.MSR: cmp.msr.best,
                Scheme.MBR: cmp.mbr.best,
            }[cmp.winner]
            rows.append(
                (sigma, float(omega),
                 f"{math.log10(omega)!r},{sigma!r},{cmp.winner.value},{b.n},{b.k},{b.d},"
                 f"{100.0 * cmp.savings_vs_simple!r},{msr_vs_rep!r}")
            )
    rows.sort(key=lambda r: (r[0], r[1]))
    header = "log10_omega,sigma,best_method,n,k,d,savings_vs_simple_pct,msr_vs_replication_pct"
    _write(args, "savings_tables.csv", [header] + [r[2] for r in rows])
    return 0


def cmd_verify(args) -> int:
    numbers = None
    if args.criteria:
        numbers = sorted({int(s) for s in args.criteria.split(",")})
        unknown = [n for n in numbers if n not in acceptance.CRITERIA]
        if unknown:
            raise ConfigError(f"unknown criteria: {unknown}")
    ok = True
    for number in numbers or sorted(acceptance.CRITERIA):
        result = acceptance.run_criterion(number)
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.criterion} {result.name}: {result.detail}")
        ok = ok and result.passed
    return 0 if ok else 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--sigma", type=float, action="append", help="storage cost (repeatable)")
    common.add_argument("--v", type=float, action="append", help="base-station distance (repeatable)")
    common.add_argument("--theta", type=float, default=None)
    common.add_argument("--m", type=float, default=None)
    common.add_argument("--lam", type=float, default=None)
    common.add_argument("--r", type=float, default=None)
    common.add_argument("--gamma-d2d", dest="gamma_d2d", type=float, default=None)
    common.add_argument("--gamma-bs", dest="gamma_bs", type=float, default=None)
    common.add_argument("--omega-grid", default="-4:0:33", help="LO:HI:N, log10 endpoints")
    common.add_argument("--methods", default=",".join(ALL_METHODS))
    common.add_argument("--rep-n", dest="rep_n", default="2:6")
    common.add_argument("--coded-n", dest="coded_n", default="3:6")

    parser = argparse.ArgumentParser(prog="d2dcache", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("geometry", parents=[common], help="emit the geometry table")
    p.add_argument("--n-max", dest="n_max", type=int, default=6)
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("cost", parents=[common], help="analytic cost sweep")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("optimize", parents=[common], help="optimal-parameter curves")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo sweep")
    p.add_argument("--fidelity", choices=("chain", "spatial"), default="chain")
    p.add_argument("--horizon", type=float, default=1e4)
    p.add_argument("--warmup", type=float, default=0.1)
    p.add_argument("--reps", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gain", parents=[common], help="operator-gain sweep")
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("tables", parents=[common], help="savings tables")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    raw = list(argv) if argv is not None else sys.argv[1:]
    args = parser.parse_args(raw)
    # tables defaults to the published rows rather than the full grid
    if args.command == "tables" and not any(a.startswith("--omega-grid") for a in raw):
        args.omega_grid = "-3.5:0:8"
    try:
        return args.func(args)
    except (ConfigError, FeasibilityError, ValueError, OSError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    except (SolverError, ArithmeticError) as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
