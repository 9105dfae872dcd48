"""Command-line entry point: single runs, figure-preset sweeps, solver verification.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 infeasibility abort (the traffic trace cannot support the requested windows).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .errors import InfeasibleWindowError, ProblemTooLargeError
from .experiments import (
    ExperimentConfig,
    config_from_mapping,
    emit_results,
    emit_rows,
    parse_config_file,
    resolved_config,
    run_experiment,
    stat_rows,
    summarize,
    trial_rows,
)
from .measurements import MeasurementSystem
from .model import TWO_PI, wrap_phase
from .solver import (
    IlsProblem,
    objective,
    solve_exact,
    solve_grid_refined,
    solve_integer_enum_oracle,
)

# Preset sweep grids: band-2 carriers and the per-figure series.
F2_GRID = (5e9, 7e9, 14e9, 28e9, 60e9)
PANELS = (("a", 10.0), ("b", 20.0))
FIG2_TMAX = (1e-4, 1e-3, 1e-2, 57e-3)
FIG3_PACKETS = (4, 8, 12)
FIG4_SHARES = (0.9, 0.8, 0.7, 0.6)
FIG5_METHODS = ("multiband", "iml", "singleband")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doppler-unwrap",
        description="Velocity estimation experiments over multiband packet phases",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment configuration")
    run.add_argument("--config", help="flat key = value configuration file")
    run.add_argument("--f2", help="band-2 carrier in Hz (e.g. 60e9)")
    run.add_argument("--noise-deg", dest="noise_std_deg", help="packet phase noise std, degrees")
    run.add_argument("--tmax", dest="t_max", help="window span bound, seconds")
    run.add_argument("--tmin", dest="t_min", help="minimum packet gap, seconds")
    run.add_argument("--packets", dest="packets_per_band",
                     help="packets per band, one count or 'N1,N2'")
    run.add_argument("--trials", help="number of Monte-Carlo trials")
    run.add_argument("--seed", help="rng seed")
    run.add_argument("--methods", help="comma-separated subset of multiband,iml,singleband")
    run.add_argument("--components", help="comma-separated component shares, e.g. '0.9,0.1'")
    run.add_argument("--workers", help="parallel worker processes")
    source = run.add_mutually_exclusive_group()
    source.add_argument("--trace", dest="trace_path", help="recorded packet-arrival trace file")
    source.add_argument("--traffic", help="synthetic traffic spec, e.g. poisson:1000")
    run.add_argument("--out", default="results", help="output directory (default: results)")

    sweep = sub.add_parser("sweep", help="run a figure preset grid")
    sweep.add_argument("--figure", type=int, choices=(2, 3, 4, 5), required=True)
    sweep.add_argument("--trials", type=int, default=1000)
    sweep.add_argument("--seed", type=int, default=42)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--out", default="results")

    verify = sub.add_parser("verify", help="cross-check the exact solver against its oracles")
    verify.add_argument("--instances", type=int, default=50)
    verify.add_argument("--seed", type=int, default=20260814)
    return parser


# -- run ----------------------------------------------------------------------

_RUN_OVERRIDES = ("f2", "noise_std_deg", "t_max", "t_min", "packets_per_band",
                  "trials", "seed", "methods", "components", "workers",
                  "trace_path", "traffic")


def cmd_run(args) -> int:
    mapping: dict = {}
    if args.config:
        mapping.update(parse_config_file(args.config))
    for key in _RUN_OVERRIDES:
        value = getattr(args, key, None)
        if value is not None:
            mapping[key] = value
    config = config_from_mapping(mapping)
    records = run_experiment(config)
    stats = summarize(records)
    paths = emit_results(records, stats, args.out, config)
    for s in stats:
        print(f"{s.group}: median rel_error {s.median:.3e} over {s.count} trials")
    print(f"wrote {paths['trials']}, {paths['stats']}, {paths['run']}")
    return 0


# -- sweep --------------------------------------------------------------------


def _figure_points(figure: int):
    """(series label, config overrides) pairs for one panel of a figure."""
    if figure == 2:
        return [(f"Tmax={t * 1e3:g}ms", {"t_max": t}) for t in FIG2_TMAX]
    if figure == 3:
        return [(f"N={n}", {"packets_per_band": (n, n)}) for n in FIG3_PACKETS]
    if figure == 4:
        return [(f"b1={b:g}", {"components": (b, round(1.0 - b, 12))}) for b in FIG4_SHARES]
    return [("", {"methods": FIG5_METHODS})]


def cmd_sweep(args) -> int:
    base = {"trials": args.trials, "seed": args.seed, "workers": args.workers}
    for panel, noise_deg in PANELS:
        t_rows: list[dict] = []
        s_rows: list[dict] = []
        configs = []
        for series, overrides in _figure_points(args.figure):
            for f2 in F2_GRID:
                config = ExperimentConfig(f2=f2, noise_std_deg=noise_deg,
                                          **base, **overrides)
                records = run_experiment(config)
                t_rows.extend(trial_rows(config, records, series=series))
                s_rows.extend(stat_rows(config, summarize(records), series=series))
                configs.append(resolved_config(config))
                label = series or "all methods"
                print(f"fig{args.figure}{panel} f2={f2 / 1e9:g} GHz {label}: "
                      f"{len(records)} trials", flush=True)
        out = f"{args.out}/fig{args.figure}{panel}"
        info = {"figure": args.figure, "panel": panel, "noise_std_deg": noise_deg,
                "seed": args.seed, "configs": configs}
        paths = emit_rows(t_rows, s_rows, out, info)
        print(f"wrote {paths['trials']}, {paths['stats']}, {paths['run']}")
    return 0


# -- verify -------------------------------------------------------------------


def _random_problem(rng, n_extra: int, v_search: float = 60.0) -> IlsProblem:
    """A noisy synthetic instance with an unambiguous anchor coordinate."""
    coeffs = np.empty(1 + n_extra)
    coeffs[0] = rng.uniform(0.2, 0.9) * math.pi / v_search
    coeffs[1:] = rng.uniform(0.5, 150.0, size=n_extra)
    v = rng.uniform(0.5, 50.0) * rng.choice([-1.0, 1.0])
    noise = rng.normal(0.0, math.radians(20.0) * math.sqrt(2.0), size=coeffs.size)
    y = wrap_phase(coeffs * v + noise)
    system = MeasurementSystem(y=y, coeffs=coeffs,
                               band_of=np.zeros(coeffs.size, dtype=int), anchor_index=0)
    return IlsProblem(system, v_search=v_search)


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures: list[str] = []

    noiseless_bad = 0
    for _ in range(args.instances):
        coeffs = np.concatenate([[rng.uniform(0.2, 0.9) * math.pi / 60.0],
                                 rng.uniform(0.5, 150.0, size=6)])
        v = rng.uniform(0.5, 50.0) * rng.choice([-1.0, 1.0])
        system = MeasurementSystem(y=wrap_phase(coeffs * v), coeffs=coeffs,
                                   band_of=np.zeros(7, dtype=int), anchor_index=0)
        sol = solve_exact(IlsProblem(system, v_search=60.0))
        if abs(sol.v_hat - v) > 1e-9 * abs(v):
            noiseless_bad += 1
    _report("noiseless exactness", args.instances - noiseless_bad, args.instances, failures)

    grid_bad = 0
    for _ in range(args.instances):
        problem = _random_problem(rng, n_extra=int(rng.integers(3, 12)))
        exact = solve_exact(problem)
        oracle = solve_grid_refined(problem, step=1e-4)
        if abs(exact.v_hat - oracle.v_hat) > 1e-6 or exact.residual > oracle.residual + 1e-9:
            grid_bad += 1
    _report("dense-grid oracle", args.instances - grid_bad, args.instances, failures)

    enum_bad = 0
    enum_total = max(10, args.instances // 2)
    for _ in range(enum_total):
        problem = _random_problem(rng, n_extra=3, v_search=10.0)
        exact = solve_exact(problem)
        r_bound = int(np.ceil(problem.coeffs.max() * 10.0 / TWO_PI)) + 1
        try:
            oracle = solve_integer_enum_oracle(problem, r_bound=r_bound)
        except ProblemTooLargeError:
            continue
        if not np.array_equal(exact.r_hat, oracle.r_hat) or abs(exact.v_hat - oracle.v_hat) > 1e-9:
            enum_bad += 1
    _report("integer-enum oracle", enum_total - enum_bad, enum_total, failures)

    consistency_bad = 0
    for _ in range(args.instances):
        problem = _random_problem(rng, n_extra=6)
        sol = solve_exact(problem)
        if abs(objective(sol.v_hat, sol.r_hat, problem) - sol.residual) > 1e-9:
            consistency_bad += 1
    _report("solution self-consistency", args.instances - consistency_bad,
            args.instances, failures)

    if failures:
        print(f"FAILED: {'; '.join(failures)}")
        return 1
    print("all solver verification checks passed")
    return 0


def _report(name: str, good: int, total: int, failures: list[str]) -> None:
    status = "PASS" if good == total else "FAIL"
    print(f"{name}: {good}/{total} {status}")
    if good != total:
        failures.append(name)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify}[args.command]
    try:
        return handler(args)
    except InfeasibleWindowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
