"""Monte-Carlo harness: seeded trials, boxplot statistics, CSV/JSON emission.

A trial draws a target velocity, picks packet TOAs from a traffic trace under
the anchor constraint, synthesizes noisy packet phases, and runs each
configured estimation method. Every random draw comes from a per-trial
stream derived as default_rng([seed, 1, trial_index]) (the trace itself uses
[seed, 0]), so results are bit-identical regardless of execution order or
worker count. Draw order within a trial is part of that contract:
velocities, scatter coefficient, TOA selection (with anchor resampling),
band gains, then per-band phase noise.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .benchmarks import ImlOptions, solve_iml, solve_single_band
from .channel import AmplitudeModel, NoiseModel, TargetComponent, add_phase_noise, \
    draw_band_gains, extract_phase, synth_peak_value
from .errors import DegenerateSampleError, InfeasibleWindowError
from .measurements import build_system
from .model import BandSet, max_anchor_tdoa
from .solver import IlsProblem, solve_exact
from .traffic import LogUniformArrivals, SamplingWindow, TrafficTrace, gen_synthetic_trace, \
    load_trace, parse_traffic_spec, select_toas, validate_anchor

METHOD_NAMES = ("multiband", "iml", "singleband")

# Synthetic stand-in for the recorded indoor traffic the protocol samples
# from: inter-arrival gaps log-uniform over the trace's reported TDOA range.
AUTO_GAP_MIN = 3.85e-5
AUTO_GAP_MAX = 0.15

_MAX_VELOCITY_REDRAWS = 10_000


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved settings for one Monte-Carlo run (one boxplot group).

    components holds the per-component scattering-coefficient shares (summing
    to 1); the estimand is always component 0's velocity. With a single
    component the share is ignored and the scattering coefficient is drawn
    uniformly from (0, 1] per trial. Secondary component velocities are drawn
    independently from velocity_range, redrawn while within
    min_component_separation of component 0's.

    t_min is clipped to t_max / (2 * (max packets - 1)) so that dense windows
    stay feasible; the effective value appears in window().
    """

    f1: float = 2.4e9
    f2: float = 60e9
    packets_per_band: tuple[int, int] = (4, 4)
    noise_std_deg: float = 10.0
    t_min: float = 3.85e-5
    t_max: float = 57e-3
    trials: int = 1000
    seed: int = 42
    velocity_range: tuple[float, float] = (-50.0, 50.0)
    min_speed: float = 0.5
    components: tuple[float, ...] = (1.0,)
    min_component_separation: float = 1.0
    methods: tuple[str, ...] = ("multiband",)
    traffic: str = "auto"
    trace_path: str | None = None
    trace_duration: float = 300.0
    amp_std: float = 0.05
    v_search_margin: float = 1.2
    workers: int = 1
    max_resamples: int = 1000

    def __post_init__(self):
        if not (0 < self.f1 < self.f2):
            raise ValueError(f"need 0 < f1 < f2, got f1={self.f1}, f2={self.f2}")
        packets = tuple(int(n) for n in self.packets_per_band)
        object.__setattr__(self, "packets_per_band", packets)
        if len(packets) != 2 or any(n < 2 for n in packets):
            raise ValueError(f"packets_per_band needs two counts >= 2, got {packets}")
        if not 0.0 <= self.noise_std_deg < 60.0:
            # past 60 deg the pairwise 3-sigma band exceeds pi and no anchor exists
            raise ValueError(f"noise_std_deg must lie in [0, 60), got {self.noise_std_deg}")
        if not 0.0 < self.t_min <= self.t_max:
            raise ValueError(f"need 0 < t_min <= t_max, got {self.t_min}, {self.t_max}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        lo, hi = self.velocity_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"velocity_range must be an ordered finite pair, got {self.velocity_range}")
        if not 0.0 <= self.min_speed < max(abs(lo), abs(hi)):
            raise ValueError(f"min_speed must lie in [0, max speed), got {self.min_speed}")
        shares = tuple(float(b) for b in self.components)
        object.__setattr__(self, "components", shares)
        if len(shares) == 0 or any(not 0.0 < b <= 1.0 for b in shares):
            raise ValueError(f"component shares must lie in (0, 1], got {shares}")
        if len(shares) > 1 and abs(sum(shares) - 1.0) > 1e-9:
            raise ValueError(f"component shares must sum to 1, got {shares}")
        if self.min_component_separation < 0:
            raise ValueError("min_component_separation must be >= 0")
        methods = tuple(self.methods)
        object.__setattr__(self, "methods", methods)
        if len(methods) == 0 or len(set(methods)) != len(methods):
            raise ValueError(f"methods must be a non-empty set, got {methods}")
        unknown = [m for m in methods if m not in METHOD_NAMES]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHOD_NAMES}")
        if self.traffic != "auto":
            parse_traffic_spec(self.traffic)  # raises on a malformed spec
        if not self.trace_duration > 0:
            raise ValueError(f"trace_duration must be > 0, got {self.trace_duration}")
        if not self.amp_std >= 0:
            raise ValueError(f"amp_std must be >= 0, got {self.amp_std}")
        if not self.v_search_margin >= 1.0:
            raise ValueError(f"v_search_margin must be >= 1, got {self.v_search_margin}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.max_resamples < 1:
            raise ValueError(f"max_resamples must be >= 1, got {self.max_resamples}")

    # -- derived quantities ---------------------------------------------

    def bands(self) -> BandSet:
        return BandSet.from_carriers([self.f1, self.f2])

    def noise_std_rad(self) -> float:
        return math.radians(self.noise_std_deg)

    def pair_noise_std(self) -> float:
        """Phase noise std of a pairwise difference (two independent packets)."""
        return self.noise_std_rad() * math.sqrt(2.0)

    def window(self) -> SamplingWindow:
        t_min = min(self.t_min, self.t_max / (2.0 * (max(self.packets_per_band) - 1)))
        return SamplingWindow(t_min=t_min, t_max=self.t_max)

    def anchor_bound(self) -> float:
        lo, hi = self.velocity_range
        return max_anchor_tdoa(self.f1, max(abs(lo), abs(hi)), self.pair_noise_std())

    def search_limit(self) -> float:
        lo, hi = self.velocity_range
        return max(abs(lo), abs(hi)) * self.v_search_margin


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial: per-method estimates and relative errors."""

    trial_index: int
    v_true: float
    v_hat: dict[str, float]
    rel_error: dict[str, float]
    anchor_tdoa: float
    resample_count: int
    rng_stream: str


@dataclass(frozen=True)
class BoxplotStats:
    """Five-number summary: quartiles plus 1.5*IQR whiskers clipped to data."""

    group: str
    median: float
    lower_quartile: float
    upper_quartile: float
    lower_whisker: float
    upper_whisker: float
    count: int

    def __post_init__(self):
        ordered = (self.lower_whisker, self.lower_quartile, self.median,
                   self.upper_quartile, self.upper_whisker)
        if any(a > b for a, b in zip(ordered, ordered[1:])):
            raise ValueError(f"boxplot stats out of order: {ordered}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")


# -- traffic ----------------------------------------------------------------


def build_trace(config: ExperimentConfig) -> TrafficTrace:
    """The run's traffic trace: loaded from trace_path, or synthesized from
    the traffic spec with the dedicated rng stream [seed, 0]."""
    if config.trace_path is not None:
        return load_trace(config.trace_path)
    if config.traffic == "auto":
        gap_min = min(AUTO_GAP_MIN, config.window().t_min)
        model = LogUniformArrivals(gap_min=gap_min, gap_max=AUTO_GAP_MAX)
    else:
        model = parse_traffic_spec(config.traffic)
    rng = np.random.default_rng([int(config.seed), 0])
    return gen_synthetic_trace(model, config.trace_duration, rng)


# -- single trial -------------------------------------------------------------


def _draw_velocities(config: ExperimentConfig, rng) -> list[float]:
    lo, hi = config.velocity_range
    velocities: list[float] = []
    for _ in range(_MAX_VELOCITY_REDRAWS):
        v = float(rng.uniform(lo, hi))
        if abs(v) >= config.min_speed:
            velocities.append(v)
            break
    else:
        raise RuntimeError("velocity redraw limit hit; velocity_range is degenerate")
    for _ in config.components[1:]:
        for _ in range(_MAX_VELOCITY_REDRAWS):
            v = float(rng.uniform(lo, hi))
            if abs(v - velocities[0]) >= config.min_component_separation:
                velocities.append(v)
                break
        else:
            raise RuntimeError("component separation redraw limit hit")
    return velocities


def _draw_components(config: ExperimentConfig, rng) -> list[TargetComponent]:
    velocities = _draw_velocities(config, rng)
    if len(config.components) == 1:
        shares = [1.0 - float(rng.random())]  # scattering coefficient in (0, 1]
    else:
        shares = list(config.components)
    return [TargetComponent(scatter_coeff=b, radial_velocity=v, delay=0.0)
            for b, v in zip(shares, velocities)]


def _select_with_anchor(config: ExperimentConfig, trace: TrafficTrace, rng):
    """TOA selection honoring the anchor bound; returns (selection, resamples)."""
    window = config.window()
    bound = config.anchor_bound()
    for resamples in range(config.max_resamples + 1):
        selection = select_toas(trace, window, config.packets_per_band, rng)
        if validate_anchor(selection, bound):
            return selection, resamples
    raise InfeasibleWindowError(
        f"anchor bound {bound:.3e} s unmet after {config.max_resamples} selection draws"
    )


def _estimate(method: str, system, config: ExperimentConfig) -> float:
    limit = config.search_limit()
    if method == "multiband":
        return solve_exact(IlsProblem(system, v_search=limit)).v_hat
    if method == "iml":
        sigma = max(config.pair_noise_std(), 1e-9)
        return solve_iml(system, sigma, ImlOptions(grid_half_width=limit))
    if method == "singleband":
        return solve_single_band(system, band_index=1, v_search=limit).v_hat
    raise ValueError(f"unknown method {method!r}")


def run_trial(config: ExperimentConfig, trial_index: int,
              trace: TrafficTrace | None = None) -> TrialRecord:
    """Execute one seeded trial; trace defaults to build_trace(config).

    Raises InfeasibleWindowError when no anchor-valid selection exists within
    the resample budget (the caller decides whether to tolerate it).
    """
    if trace is None:
        trace = build_trace(config)
    rng = np.random.default_rng([int(config.seed), 1, int(trial_index)])

    components = _draw_components(config, rng)
    selection, resamples = _select_with_anchor(config, trace, rng)

    bands = config.bands()
    gains = draw_band_gains(len(components), len(bands), AmplitudeModel(std=config.amp_std), rng)
    noise = NoiseModel(kind="phase", std=config.noise_std_rad())
    psis_per_band = []
    for q, band in enumerate(bands):
        psis = np.array([
            extract_phase(synth_peak_value(components, band, t, noise, rng, gains=gains[:, q]))
            for t in selection.per_band[q]
        ])
        psis_per_band.append(add_phase_noise(psis, noise, rng))
    system = build_system(bands, selection, psis_per_band)

    v_true = components[0].radial_velocity
    v_hat = {m: _estimate(m, system, config) for m in config.methods}
    rel_error = {m: abs(v - v_true) / abs(v_true) for m, v in v_hat.items()}
    anchor_toas = selection.per_band[0]
    return TrialRecord(
        trial_index=int(trial_index),
        v_true=v_true,
        v_hat=v_hat,
        rel_error=rel_error,
        anchor_tdoa=float(anchor_toas[1] - anchor_toas[0]),
        resample_count=resamples,
        rng_stream=f"{config.seed}:1:{trial_index}",
    )


# -- the Monte-Carlo loop -----------------------------------------------------

_WORKER_CTX: tuple[ExperimentConfig, TrafficTrace] | None = None


def _worker_init(config: ExperimentConfig) -> None:
    global _WORKER_CTX
    _WORKER_CTX = (config, build_trace(config))


def _worker_run(trial_index: int):
    config, trace = _WORKER_CTX
    try:
        return run_trial(config, trial_index, trace)
    except (InfeasibleWindowError, DegenerateSampleError):
        return None


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    """All trials of a config, ordered by trial_index; infeasible trials are
    dropped, and the run aborts once they exceed 10% of the requested count."""
    limit = 0.10 * config.trials
    records: list[TrialRecord] = []
    failures = 0

    def consume(outcome) -> None:
        nonlocal failures
        if outcome is None:
            failures += 1
            if failures > limit:
                raise InfeasibleWindowError(
                    f"{failures} of {config.trials} trials infeasible (> 10%); "
                    f"the traffic trace cannot support this window/anchor configuration"
                )
        else:
            records.append(outcome)

    if config.workers == 1:
        _worker_init(config)
        for i in range(config.trials):
            consume(_worker_run(i))
    else:
        executor = ProcessPoolExecutor(max_workers=config.workers,
                                       initializer=_worker_init, initargs=(config,))
        try:
            chunk = max(1, config.trials // (config.workers * 8))
            for outcome in executor.map(_worker_run, range(config.trials), chunksize=chunk):
                consume(outcome)
        finally:
            executor.shutdown(wait=True, cancel_futures=True)
    if failures:
        warnings.warn(f"{failures} of {config.trials} trials were infeasible and dropped")
    return records


# -- statistics ---------------------------------------------------------------


def boxplot_stats(group: str, values) -> BoxplotStats:
    """Five-number summary of one group; quartiles use linear interpolation."""
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise ValueError(f"group {group!r} has no values")
    q1, med, q3 = np.percentile(data, [25.0, 50.0, 75.0])
    reach = 1.5 * (q3 - q1)
    # whiskers sit on the most extreme data within reach of the box, but never
    # inside it (small samples can put every in-reach datum inside the
    # interpolated quartiles)
    lower = min(float(q1), float(data[data >= q1 - reach].min()))
    upper = max(float(q3), float(data[data <= q3 + reach].max()))
    return BoxplotStats(
        group=str(group),
        median=float(med),
        lower_quartile=float(q1),
        upper_quartile=float(q3),
        lower_whisker=lower,
        upper_whisker=upper,
        count=int(data.size),
    )


def summarize(records, group_by: str = "method") -> list[BoxplotStats]:
    """Boxplot statistics per group.

    records is either a list of TrialRecords (grouped per configured method
    when group_by == "method") or a mapping {group_key: error values} for
    caller-defined groupings (sweeps group by figure axis). Empty groups are
    skipped with a warning.
    """
    if isinstance(records, dict):
        groups = {str(k): np.asarray(v, dtype=float) for k, v in records.items()}
    elif group_by == "method":
        records = list(records)
        methods = list(records[0].rel_error) if records else []
        groups = {m: np.array([r.rel_error[m] for r in records]) for m in methods}
    else:
        raise ValueError(f"unsupported group_by {group_by!r}; pass a mapping instead")
    out = []
    for key, values in groups.items():
        if values.size == 0:
            warnings.warn(f"group {key!r} has no records; skipped")
            continue
        out.append(boxplot_stats(key, values))
    return out


# -- emission -----------------------------------------------------------------

TRIAL_COLUMNS = ("config_hash", "group", "series", "method", "trial_index", "v_true",
                 "v_hat", "rel_error", "anchor_tdoa", "resample_count", "rng_stream")
STAT_COLUMNS = ("config_hash", "group", "series", "method", "median", "lower_quartile",
                "upper_quartile", "lower_whisker", "upper_whisker", "count")


def resolved_config(config: ExperimentConfig) -> dict:
    return dataclasses.asdict(config)


def config_hash(config: ExperimentConfig) -> str:
    """Short digest of the statistical experiment.

    Runtime plumbing (worker count) is excluded: it must not change any
    emitted byte, and the hash is written into every trials.csv row.
    """
    fields = resolved_config(config)
    fields.pop("workers")
    payload = json.dumps(fields, sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:12]


def group_label(config: ExperimentConfig) -> str:
    """Figure group key: band-2 carrier in GHz."""
    return f"{config.f2 / 1e9:g}"


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trial_rows(config: ExperimentConfig, records, series: str = "") -> list[dict]:
    """trials.csv rows: one per trial per method."""
    digest = config_hash(config)
    group = group_label(config)
    rows = []
    for r in records:
        for method in config.methods:
            rows.append({
                "config_hash": digest,
                "group": group,
                "series": series,
                "method": method,
                "trial_index": r.trial_index,
                "v_true": r.v_true,
                "v_hat": r.v_hat[method],
                "rel_error": r.rel_error[method],
                "anchor_tdoa": r.anchor_tdoa,
                "resample_count": r.resample_count,
                "rng_stream": r.rng_stream,
            })
    return rows


def stat_rows(config: ExperimentConfig, stats, series: str = "") -> list[dict]:
    """stats.csv rows from per-method BoxplotStats."""
    digest = config_hash(config)
    group = group_label(config)
    return [{
        "config_hash": digest,
        "group": group,
        "series": series,
        "method": s.group,
        "median": s.median,
        "lower_quartile": s.lower_quartile,
        "upper_quartile": s.upper_quartile,
        "lower_whisker": s.lower_whisker,
        "upper_whisker": s.upper_whisker,
        "count": s.count,
    } for s in stats]


def _write_csv(path: Path, columns, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(columns))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _format(row[k]) for k in columns})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def version_block() -> dict[str, str]:
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "doppler_unwrap": __version__,
    }


def emit_rows(t_rows, s_rows, out_dir, info: dict) -> dict[str, Path]:
    """Write trials.csv/stats.csv from prebuilt row dicts plus run.json from
    info (versions and a generated_at timestamp are appended to it)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trials": out / "trials.csv",
        "stats": out / "stats.csv",
        "run": out / "run.json",
    }
    _write_csv(paths["trials"], TRIAL_COLUMNS, t_rows)
    _write_csv(paths["stats"], STAT_COLUMNS, s_rows)
    info = dict(info)
    info["versions"] = version_block()
    info["generated_at"] = datetime.now(timezone.utc).isoformat()
    try:
        paths["run"].write_text(json.dumps(info, indent=2, sort_keys=True) + "\n",
                                encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {paths['run']}: {exc}") from exc
    return paths


def emit_results(records, stats, out_dir, config: ExperimentConfig,
                 series: str = "") -> dict[str, Path]:
    """Write trials.csv, stats.csv, and run.json for a single-config run.

    records/stats may be TrialRecord/BoxplotStats lists or prebuilt row dicts
    (the sweep path aggregates rows from several configs before emitting).
    Every emitted byte is determined by (config, records) except the
    generated_at timestamp in run.json.
    """
    t_rows = list(records)
    if t_rows and isinstance(t_rows[0], TrialRecord):
        t_rows = trial_rows(config, t_rows, series)
    s_rows = list(stats)
    if s_rows and isinstance(s_rows[0], BoxplotStats):
        s_rows = stat_rows(config, s_rows, series)
    info = {
        "config": resolved_config(config),
        "config_hash": config_hash(config),
        "seed": int(config.seed),
    }
    return emit_rows(t_rows, s_rows, out_dir, info)


# -- flat config files ---------------------------------------------------------

_LIST_FIELDS = {"packets_per_band", "velocity_range", "components", "methods"}
_INT_FIELDS = {"trials", "seed", "workers", "max_resamples"}
_STR_FIELDS = {"traffic", "trace_path"}


def parse_config_file(path) -> dict[str, str]:
    """Read a flat key = value config file; '#' comments and blanks ignored."""
    mapping: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        mapping[key.strip()] = value.strip()
    return mapping


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from string (or already-typed) values."""
    field_names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(mapping) - field_names)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {}
    for key, value in mapping.items():
        if not isinstance(value, str):
            kwargs[key] = value
            continue
        if key in _STR_FIELDS:
            kwargs[key] = None if value.lower() == "none" else value
        elif key in _LIST_FIELDS:
            parts = [p.strip() for p in value.split(",") if p.strip()]
            if key == "methods":
                kwargs[key] = tuple(parts)
            elif key == "packets_per_band":
                counts = [int(p) for p in parts]
                kwargs[key] = tuple(counts * 2 if len(counts) == 1 else counts)
            else:
                kwargs[key] = tuple(float(p) for p in parts)
        elif key in _INT_FIELDS:
            kwargs[key] = int(value)
        else:
            kwargs[key] = float(value)
    return ExperimentConfig(**kwargs)
