"""End-to-end acceptance checks for the advertised accuracy envelope.

Each test verifies one released claim at its stated tolerance and records a
single summary line through conftest.record_criterion, replayed after the
pytest report. Monte-Carlo runs are cached per config so checks that share a
configuration (reference medians, error band, trend suite) compute it once;
the trend-suite budget sums the true compute time of every config it uses,
cached or not.

Method-comparison checks use a paired-bootstrap noninferiority rule rather
than a strict median inequality: at moderate carrier separation the exact
solver and the iterative-ML benchmark disagree on a handful of trials per
thousand and the median gap sits inside sampling noise, flipping sign across
seeds. The check therefore requires the multiband median to not exceed the
benchmark median by more than three bootstrap standard errors of the paired
median difference, with a fixed bootstrap seed for reproducibility. Where the
advantage is real (wide separation, single band) the strict inequality holds
with large margins and the allowance never engages.
"""

from __future__ import annotations

import dataclasses
import math
import time

import numpy as np
import pytest

from conftest import record_criterion
from doppler_unwrap.errors import ProblemTooLargeError
from doppler_unwrap.experiments import (
    ExperimentConfig,
    build_trace,
    emit_results,
    run_experiment,
    run_trial,
    summarize,
)
from doppler_unwrap.measurements import MeasurementSystem
from doppler_unwrap.model import max_anchor_tdoa, max_unambiguous_velocity, wrap_phase
from doppler_unwrap.solver import (
    IlsProblem,
    solve_exact,
    solve_grid_refined,
    solve_integer_enum_oracle,
)

F2_SET = (5e9, 7e9, 14e9, 28e9, 60e9)
TMAX_SET = (1e-4, 1e-3, 1e-2, 57e-3)

# config -> (records, compute seconds); shared across criteria in this module
_CACHE: dict[ExperimentConfig, tuple[list, float]] = {}


def _run_cached(config: ExperimentConfig) -> tuple[list, float]:
    if config not in _CACHE:
        start = time.perf_counter()
        records = run_experiment(config)
        _CACHE[config] = (records, time.perf_counter() - start)
    return _CACHE[config]


def _median(records, method: str) -> float:
    return float(np.median([r.rel_error[method] for r in records]))


def _check(num: int, name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    record_criterion(f"[{status}] criterion {num} ({name}): {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def _random_system(rng: np.random.Generator, n_extra: int, v_search: float,
                   coeff_hi: float, noise_std: float) -> tuple[MeasurementSystem, float]:
    """Anchored instance with an unambiguous first coefficient."""
    anchor = rng.uniform(0.2, 0.9) * math.pi / v_search
    coeffs = np.concatenate([[anchor], rng.uniform(0.5, coeff_hi, size=n_extra)])
    v = rng.uniform(0.5, 0.95 * v_search) * rng.choice([-1.0, 1.0])
    y = wrap_phase(coeffs * v + rng.normal(0.0, noise_std, size=coeffs.size))
    system = MeasurementSystem(y=y, coeffs=coeffs, band_of=np.zeros(coeffs.size, dtype=int))
    return system, v


def test_noiseless_exactness():
    rng = np.random.default_rng(314159)
    start = time.perf_counter()
    worst = 0.0
    good = 0
    for i in range(100):
        cfg = ExperimentConfig(
            f2=float(rng.choice(F2_SET)),
            t_max=float(rng.choice(TMAX_SET)),
            noise_std_deg=0.0,
            trials=1,
            seed=int(rng.integers(0, 2**31)),
        )
        rec = run_trial(cfg, 0, trace=build_trace(cfg))
        assert abs(rec.v_true) >= cfg.min_speed
        err = rec.rel_error["multiband"]
        worst = max(worst, err)
        good += err < 1e-9
    elapsed = time.perf_counter() - start
    _check(1, "noiseless exactness", good == 100 and elapsed < 5.0,
           f"{good}/100 configs rel_error < 1e-9, worst {worst:.2e}, "
           f"{elapsed:.1f}s [limit 5s]")


def test_exact_solver_matches_dense_grid():
    rng = np.random.default_rng(271828)
    start = time.perf_counter()
    worst_dv = 0.0
    worst_dres = 0.0
    good = 0
    for _ in range(200):
        n_extra = int(rng.integers(1, 12))  # up to 12 measurements total
        noise = math.radians(rng.uniform(0.0, 20.0))
        system, _ = _random_system(rng, n_extra, 60.0, 150.0, noise)
        problem = IlsProblem(system, v_search=60.0)
        exact = solve_exact(problem)
        grid = solve_grid_refined(problem, step=1e-4)
        dv = abs(exact.v_hat - grid.v_hat)
        dres = exact.residual - grid.residual  # exact must not be worse
        worst_dv = max(worst_dv, dv)
        worst_dres = max(worst_dres, dres)
        good += dv <= 1e-6 and dres <= 1e-9
    elapsed = time.perf_counter() - start
    _check(2, "dense-grid oracle", good == 200 and elapsed < 30.0,
           f"{good}/200 instances |dv| <= 1e-6 (worst {worst_dv:.1e}), "
           f"residual excess <= 1e-9 (worst {worst_dres:.1e}), "
           f"{elapsed:.1f}s [limit 30s]")


def test_exact_solver_matches_integer_enumeration():
    rng = np.random.default_rng(161803)
    start = time.perf_counter()
    good = 0
    total = 0
    worst_dv = 0.0
    for _ in range(100):
        n_extra = int(rng.integers(1, 4))  # up to 4 measurements total
        noise = math.radians(rng.uniform(0.0, 20.0))
        system, _ = _random_system(rng, n_extra, 10.0, 3.0, noise)
        problem = IlsProblem(system, v_search=10.0)
        r_bound = math.ceil(float(system.coeffs.max()) * 10.0 / (2 * math.pi)) + 1
        exact = solve_exact(problem)
        try:
            enum = solve_integer_enum_oracle(problem, r_bound=r_bound)
        except ProblemTooLargeError:
            continue
        total += 1
        dv = abs(exact.v_hat - enum.v_hat)
        worst_dv = max(worst_dv, dv)
        good += bool(np.array_equal(exact.r_hat, enum.r_hat)) and dv < 1e-9
    elapsed = time.perf_counter() - start
    _check(3, "integer-enumeration oracle", good == total == 100 and elapsed < 60.0,
           f"{good}/{total} instances identical rotations and |dv| < 1e-9 "
           f"(worst {worst_dv:.1e}), {elapsed:.1f}s [limit 60s]")


def test_reference_median_low_noise():
    # 60 GHz, sigma 10 deg, T_max 57 ms, N=4: defaults
    cfg = ExperimentConfig()
    records, elapsed = _run_cached(cfg)
    med = _median(records, "multiband")
    target = 1.66e-4
    ok = target / 3.0 <= med <= target * 3.0 and elapsed < 60.0
    _check(4, "reference median, low noise", ok,
           f"median {med:.3e} vs {target:.2e} (ratio {med / target:.2f}, "
           f"factor-3 band), {elapsed:.1f}s [limit 60s]")


def test_reference_median_high_noise_dense_packets():
    cfg = ExperimentConfig(noise_std_deg=20.0, packets_per_band=(12, 12))
    records, elapsed = _run_cached(cfg)
    med = _median(records, "multiband")
    target = 8.63e-5
    ok = target / 3.0 <= med <= target * 3.0 and elapsed < 120.0
    _check(5, "reference median, high noise dense packets", ok,
           f"median {med:.3e} vs {target:.2e} (ratio {med / target:.2f}, "
           f"factor-3 band), {elapsed:.1f}s [limit 120s]")


def test_error_band_across_carriers():
    medians = {}
    for f2 in F2_SET:
        records, _ = _run_cached(ExperimentConfig(f2=f2))
        medians[f2] = _median(records, "multiband")
    ok = all(1e-5 <= m <= 1e-2 for m in medians.values())
    listing = ", ".join(f"{f2 / 1e9:g}GHz {m:.1e}" for f2, m in medians.items())
    _check(6, "median error band across carriers", ok,
           f"all medians in [1e-5, 1e-2]: {listing}")


def _noninferior(mb: np.ndarray, bench: np.ndarray,
                 n_boot: int = 4000, seed: int = 7) -> tuple[bool, float]:
    """mb median <= bench median + 3*SE of the paired bootstrap median gap."""
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, mb.size, size=(n_boot, mb.size))
    gaps = np.median(mb[idx], axis=1) - np.median(bench[idx], axis=1)
    excess = float(np.median(mb) - np.median(bench))
    return excess <= 3.0 * float(gaps.std()), excess


def test_trend_suite():
    lines = []
    suite_elapsed = 0.0

    def run(cfg):
        nonlocal suite_elapsed
        records, _ = _run_cached(cfg)
        suite_elapsed += _CACHE[cfg][1]
        return records

    # trend 1: error non-increasing in carrier separation
    meds1 = [_median(run(ExperimentConfig(f2=f2)), "multiband") for f2 in F2_SET]
    trend1 = all(a >= b for a, b in zip(meds1, meds1[1:]))
    lines.append(f"separation {'ok' if trend1 else 'VIOLATED'} "
                 + "->".join(f"{m:.1e}" for m in meds1))

    # trend 2: wider observation window beats the narrowest one
    med_narrow = _median(run(ExperimentConfig(t_max=1e-4)), "multiband")
    med_wide = meds1[-1]
    trend2 = med_wide < med_narrow
    lines.append(f"window {'ok' if trend2 else 'VIOLATED'} "
                 f"57ms {med_wide:.1e} < 0.1ms {med_narrow:.1e}")

    # trend 3: more packets per band reduce error at sigma 20 deg
    meds3 = [
        _median(run(ExperimentConfig(noise_std_deg=20.0, packets_per_band=(n, n))),
                "multiband")
        for n in (4, 8, 12)
    ]
    trend3 = meds3[0] > meds3[1] > meds3[2]
    lines.append(f"packets {'ok' if trend3 else 'VIOLATED'} "
                 + ">".join(f"{m:.1e}" for m in meds3))

    # trend 4: error grows as the dominant component's share shrinks
    meds4 = [
        _median(run(ExperimentConfig(components=(b, round(1.0 - b, 12)))), "multiband")
        for b in (0.9, 0.8, 0.7, 0.6)
    ]
    trend4 = all(a < b for a, b in zip(meds4, meds4[1:]))
    lines.append(f"mixing {'ok' if trend4 else 'VIOLATED'} "
                 + "<".join(f"{m:.1e}" for m in meds4))

    # trend 5: multiband noninferior to both benchmarks at every carrier pair
    trend5 = True
    worst = ""
    worst_excess = -math.inf
    for noise in (10.0, 20.0):
        for f2 in F2_SET:
            cfg = ExperimentConfig(f2=f2, noise_std_deg=noise,
                                   methods=("multiband", "iml", "singleband"))
            records = run(cfg)
            mb = np.array([r.rel_error["multiband"] for r in records])
            for bench_name in ("iml", "singleband"):
                bench = np.array([r.rel_error[bench_name] for r in records])
                ok, excess = _noninferior(mb, bench)
                trend5 &= ok
                if excess > worst_excess:
                    worst_excess = excess
                    worst = (f"{bench_name}@{f2 / 1e9:g}GHz/s{noise:g} "
                             f"excess {excess:+.1e}")
    lines.append(f"comparison {'ok' if trend5 else 'VIOLATED'} worst {worst}")

    ok = trend1 and trend2 and trend3 and trend4 and trend5 and suite_elapsed < 900.0
    _check(7, "trend suite", ok,
           "; ".join(lines) + f"; compute {suite_elapsed:.0f}s [limit 900s]")


def test_anchor_bound_value():
    bound = max_anchor_tdoa(2.4e9, 62.5, 0.0)
    exact = abs(bound - 0.5e-3) <= 1e-12
    # the same bound read the other way: 0.5 ms at 2.4 GHz supports ~220 km/h
    v_kmh = max_unambiguous_velocity(2.4e9, 0.5e-3) * 3.6
    round_trip = abs(v_kmh - 220.0) / 220.0 < 0.05
    _check(8, "anchor ambiguity bound", exact and round_trip,
           f"max_anchor_tdoa(2.4 GHz, 62.5 m/s, 0) = {bound:.15e} "
           f"(|err| <= 1e-12), reverse {v_kmh:.0f} km/h ~ 220 km/h")


def test_byte_determinism_across_workers(tmp_path):
    cfg = ExperimentConfig(trials=80, seed=7, t_max=10e-3)
    blobs = {}
    for tag, workers in (("one-a", 1), ("one-b", 1), ("two", 2)):
        records = run_experiment(dataclasses.replace(cfg, workers=workers))
        stats = summarize(records)
        paths = emit_results(records, stats, tmp_path / tag,
                             dataclasses.replace(cfg, workers=workers))
        blobs[tag] = paths["trials"].read_bytes()
    ok = blobs["one-a"] == blobs["one-b"] == blobs["two"]
    _check(9, "byte determinism", ok,
           f"trials.csv identical across repeat runs and worker counts "
           f"({len(blobs['one-a'])} bytes)")
