"""Packet-arrival traces and windowed TOA selection.

Traces come from measurement files (one timestamp per line) or synthetic
arrival models. Selection draws, per band, a fixed number of TOAs from a
random window of the trace, subject to a minimum pairwise gap and a maximum
window span, then re-zeroes time at the earliest selected packet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InfeasibleWindowError, InsufficientTraceError, TraceParseError


@dataclass(frozen=True)
class TrafficTrace:
    """Strictly increasing packet arrival timestamps in seconds."""

    timestamps: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float)
        object.__setattr__(self, "timestamps", ts)
        if ts.ndim != 1 or ts.size < 2:
            raise InsufficientTraceError(f"a trace needs at least 2 timestamps, got {ts.size}")
        if not np.all(np.isfinite(ts)):
            raise ValueError("trace timestamps must be finite")
        if ts[0] < 0:
            raise ValueError("trace timestamps must be non-negative")
        if not np.all(np.diff(ts) > 0):
            raise ValueError("trace timestamps must be strictly increasing")

    def __len__(self) -> int:
        return int(self.timestamps.size)

    @property
    def duration(self) -> float:
        return float(self.timestamps[-1] - self.timestamps[0])

    @property
    def min_gap(self) -> float:
        return float(np.min(np.diff(self.timestamps)))


@dataclass(frozen=True)
class SamplingWindow:
    """Selection constraints: minimum pairwise gap t_min, maximum span t_max."""

    t_min: float
    t_max: float

    def __post_init__(self):
        if not (0.0 < self.t_min < self.t_max and math.isfinite(self.t_max)):
            raise ValueError(f"need 0 < t_min < t_max, got t_min={self.t_min}, t_max={self.t_max}")


@dataclass(frozen=True)
class ToaSelection:
    """Selected TOAs per band, re-zeroed so the earliest packet overall is at 0."""

    per_band: tuple
    window: SamplingWindow

    def __post_init__(self):
        if len(self.per_band) < 1:
            raise ValueError("selection needs at least one band")
        per_band = tuple(np.asarray(b, dtype=float) for b in self.per_band)
        object.__setattr__(self, "per_band", per_band)
        eps = 1e-12
        for q, toas in enumerate(per_band):
            if toas.size < 2:
                raise ValueError(f"band {q} needs at least 2 TOAs")
            gaps = np.diff(toas)
            if not np.all(gaps > 0):
                raise ValueError(f"band {q} TOAs must be strictly increasing")
            if np.min(gaps) < self.window.t_min - eps:
                raise ValueError(f"band {q} violates the minimum gap {self.window.t_min}")
            if toas[-1] - toas[0] > self.window.t_max + eps:
                raise ValueError(f"band {q} span exceeds the window length {self.window.t_max}")
        earliest = min(float(b[0]) for b in per_band)
        if abs(earliest) > eps:
            raise ValueError("selection must be re-zeroed to the earliest TOA")


# -- arrival models ----------------------------------------------------------


@dataclass(frozen=True)
class PoissonArrivals:
    """Memoryless arrivals at a fixed mean rate (Hz)."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be > 0, got {self.rate}")


@dataclass(frozen=True)
class GridArrivals:
    """Evenly spaced arrivals with a fixed step (s)."""

    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")


@dataclass(frozen=True)
class ResampleArrivals:
    """Bootstrap of the inter-arrival gaps of a recorded base trace."""

    base: TrafficTrace


@dataclass(frozen=True)
class LogUniformArrivals:
    """Gaps drawn log-uniformly from [gap_min, gap_max]; heavy-tailed like indoor traffic."""

    gap_min: float
    gap_max: float

    def __post_init__(self):
        if not (0 < self.gap_min < self.gap_max):
            raise ValueError(f"need 0 < gap_min < gap_max, got {self.gap_min}, {self.gap_max}")


def load_trace(path) -> TrafficTrace:
    """Read a trace file: one timestamp per line, '#' comments and blanks ignored."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                value = float(line)
            except ValueError:
                raise TraceParseError(f"not a timestamp: {line!r}", lineno) from None
            if not math.isfinite(value) or value < 0:
                raise TraceParseError(f"timestamp must be finite and >= 0: {line!r}", lineno)
            values.append(value)
    unique = np.unique(np.asarray(values, dtype=float))
    if unique.size < 2:
        raise InsufficientTraceError(f"{path}: needs at least 2 distinct timestamps, got {unique.size}")
    return TrafficTrace(unique)


def save_trace(trace: TrafficTrace, path, header: str | None = None) -> None:
    """Write a trace in the one-timestamp-per-line format."""
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for t in trace.timestamps:
            fh.write(f"{float(t)!r}\n")


def _gaps_to_trace(first: float, gaps: np.ndarray, duration: float) -> TrafficTrace:
    toas = first + np.concatenate(([0.0], np.cumsum(gaps)))
    toas = toas[toas <= duration]
    if toas.size < 2:
        raise InsufficientTraceError("synthetic trace held fewer than 2 arrivals; increase duration")
    return TrafficTrace(toas)


def gen_synthetic_trace(model, duration: float, rng) -> TrafficTrace:
    """Generate arrivals on [0, duration] from one of the arrival models."""
    if not duration > 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    if isinstance(model, GridArrivals):
        n = int(math.floor(duration / model.step)) + 1
        toas = model.step * np.arange(n)
        if n < 2:
            raise InsufficientTraceError("grid step exceeds duration")
        return TrafficTrace(toas)
    if isinstance(model, PoissonArrivals):
        n_expect = int(duration * model.rate * 1.25) + 16
        gaps = rng.exponential(1.0 / model.rate, size=n_expect)
        while gaps.sum() < duration:
            gaps = np.concatenate([gaps, rng.exponential(1.0 / model.rate, size=n_expect)])
        return _gaps_to_trace(float(rng.exponential(1.0 / model.rate)), gaps, duration)
    if isinstance(model, ResampleArrivals):
        base_gaps = np.diff(model.base.timestamps)
        mean_gap = float(base_gaps.mean())
        n_expect = int(duration / mean_gap * 1.25) + 16
        gaps = rng.choice(base_gaps, size=n_expect, replace=True)
        while gaps.sum() < duration:
            gaps = np.concatenate([gaps, rng.choice(base_gaps, size=n_expect, replace=True)])
        return _gaps_to_trace(0.0, gaps, duration)
    if isinstance(model, LogUniformArrivals):
        mean_gap = (model.gap_max - model.gap_min) / math.log(model.gap_max / model.gap_min)
        n_expect = int(duration / mean_gap * 1.25) + 16
        draw = lambda n: np.exp(rng.uniform(math.log(model.gap_min), math.log(model.gap_max), size=n))
        gaps = draw(n_expect)
        while gaps.sum() < duration:
            gaps = np.concatenate([gaps, draw(n_expect)])
        return _gaps_to_trace(0.0, gaps, duration)
    raise ValueError(f"unknown arrival model: {model!r}")


def parse_traffic_spec(spec: str):
    """Parse a CLI traffic spec like 'poisson:1000', 'grid:1e-3', 'loguniform:3.85e-5:0.15'."""
    parts = spec.split(":")
    kind = parts[0].strip().lower()
    try:
        if kind == "poisson" and len(parts) == 2:
            return PoissonArrivals(float(parts[1]))
        if kind == "grid" and len(parts) == 2:
            return GridArrivals(float(parts[1]))
        if kind == "loguniform" and len(parts) == 3:
            return LogUniformArrivals(float(parts[1]), float(parts[2]))
        if kind == "resample" and len(parts) == 2:
            return ResampleArrivals(load_trace(parts[1]))
    except ValueError as exc:
        raise ValueError(f"bad traffic spec {spec!r}: {exc}") from exc
    raise ValueError(f"bad traffic spec {spec!r}; expected poisson:RATE, grid:STEP, "
                     f"loguniform:GMIN:GMAX, or resample:PATH")


# -- selection ---------------------------------------------------------------


def _eligible_starts(toas: np.ndarray, t_max: float, n: int) -> np.ndarray:
    """Indices i such that [toas[i], toas[i] + t_max] holds at least n TOAs."""
    counts = np.searchsorted(toas, toas + t_max, side="right") - np.arange(toas.size)
    return np.flatnonzero(counts >= n)


def _draw_subset(toas: np.ndarray, lo: int, hi: int, n: int, t_min: float, rng):
    """One uniform without-replacement draw of n TOAs from toas[lo:hi].

    Returns the sorted TOAs, or None when the draw violates the minimum gap.
    """
    chosen = np.sort(rng.choice(np.arange(lo, hi), size=n, replace=False))
    selected = toas[chosen]
    if np.min(np.diff(selected)) >= t_min:
        return selected
    return None


def select_toas(
    trace: TrafficTrace,
    window: SamplingWindow,
    packets_per_band,
    rng,
    shared_timing: bool = False,
    max_retries: int = 1000,
) -> ToaSelection:
    """Draw packets_per_band[q] TOAs per band from random windows of the trace.

    Each band independently gets a window anchored at a uniformly chosen
    eligible recorded TOA, then a uniform without-replacement draw of the TOAs
    inside it; draws violating the minimum-gap constraint are retried up to
    max_retries times. With shared_timing, all bands share one window.

    Raises
    ------
    InfeasibleWindowError
        If the constraints are unsatisfiable (span arithmetic, trace density)
        or no valid draw was found within max_retries.
    """
    packets = [int(n) for n in np.atleast_1d(packets_per_band)]
    if any(n < 2 for n in packets):
        raise ValueError(f"every band needs at least 2 packets, got {packets}")
    for n in packets:
        if (n - 1) * window.t_min > window.t_max:
            raise InfeasibleWindowError(
                f"span constraint unsatisfiable: {n} packets with gaps >= {window.t_min} "
                f"need a span of {(n - 1) * window.t_min}, above t_max = {window.t_max}"
            )
    toas = trace.timestamps

    def pick_band(n: int, starts: np.ndarray) -> np.ndarray:
        for _ in range(max_retries):
            i = int(starts[rng.integers(starts.size)])
            j = int(np.searchsorted(toas, toas[i] + window.t_max, side="right"))
            selected = _draw_subset(toas, i, j, n, window.t_min, rng)
            if selected is not None:
                return selected
        raise InfeasibleWindowError(
            f"minimum-gap constraint: no draw of {n} TOAs with gaps >= {window.t_min} "
            f"found in {max_retries} retries"
        )

    if shared_timing:
        starts = _eligible_starts(toas, window.t_max, max(packets))
        if starts.size == 0:
            raise InfeasibleWindowError(
                f"trace density: no window of {window.t_max} s holds {max(packets)} packets"
            )
        selections = None
        for _ in range(max_retries):
            i = int(starts[rng.integers(starts.size)])
            j = int(np.searchsorted(toas, toas[i] + window.t_max, side="right"))
            drawn = [_draw_subset(toas, i, j, n, window.t_min, rng) for n in packets]
            if all(d is not None for d in drawn):
                selections = drawn
                break
        if selections is None:
            raise InfeasibleWindowError(
                f"minimum-gap constraint: no shared-window draw found in {max_retries} retries"
            )
    else:
        selections = []
        for n in packets:
            starts = _eligible_starts(toas, window.t_max, n)
            if starts.size == 0:
                raise InfeasibleWindowError(
                    f"trace density: no window of {window.t_max} s holds {n} packets"
                )
            selections.append(pick_band(n, starts))

    earliest = min(float(s[0]) for s in selections)
    return ToaSelection(tuple(s - earliest for s in selections), window)


def validate_anchor(selection: ToaSelection, bound: float, band_index: int = 0) -> bool:
    """True when the gap between the band's two earliest TOAs is below the bound."""
    if not bound > 0:
        raise ValueError(f"bound must be > 0, got {bound}")
    toas = selection.per_band[band_index]
    return bool(toas[1] - toas[0] < bound)
