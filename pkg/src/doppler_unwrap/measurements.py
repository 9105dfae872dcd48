"""Pairwise phase differences and the stacked measurement system.

Conventions: a pair (i, j) always has i < j, so its TDOA (toa[j] - toa[i]) is
positive and its wrapped phase is psi[j] - psi[i] wrapped into [0, 2*pi). The
system stacks bands in ascending-carrier order with each band's pairs in
lexicographic order, so entry 0 is the (1,2) pair, the two earliest packets,
of the lowest band: the anchor, whose integer rotation count is pinned to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import SPEED_OF_LIGHT, TWO_PI, BandSet, wrap_phase
from .traffic import ToaSelection


@dataclass(frozen=True)
class PhasePair:
    """One packet pair: indices within a band, positive TDOA, wrapped phase."""

    band_index: int
    i: int
    j: int
    tdoa: float
    wrapped_phase: float

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise ValueError(f"need 0 <= i < j, got ({self.i}, {self.j})")
        if not self.tdoa > 0:
            raise ValueError(f"tdoa must be > 0, got {self.tdoa}")
        if not 0.0 <= self.wrapped_phase < TWO_PI:
            raise ValueError(f"wrapped_phase must lie in [0, 2*pi), got {self.wrapped_phase}")


@dataclass(frozen=True)
class MeasurementSystem:
    """Stacked wrapped phases y, phase-slope coefficients, and band labels."""

    y: np.ndarray
    coeffs: np.ndarray
    band_of: np.ndarray
    anchor_index: int = 0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        coeffs = np.asarray(self.coeffs, dtype=float)
        band_of = np.asarray(self.band_of, dtype=np.int64)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "band_of", band_of)
        if not (y.ndim == 1 and y.shape == coeffs.shape == band_of.shape):
            raise ValueError("y, coeffs, band_of must be 1-d arrays of equal length")
        if y.size < 1:
            raise ValueError("a system needs at least one measurement")
        if not np.all((y >= 0.0) & (y < TWO_PI)):
            raise ValueError("wrapped phases must lie in [0, 2*pi)")
        if not np.all(coeffs > 0.0):
            raise ValueError("coefficients must be positive")
        if not 0 <= self.anchor_index < y.size:
            raise ValueError(f"anchor_index out of range: {self.anchor_index}")

    def __len__(self) -> int:
        return int(self.y.size)


def true_phase(radial_velocity: float, carrier_freq: float, tdoa: float) -> float:
    """Unwrapped pair phase 4*pi*v*f*tdoa/c; unbounded, sign follows velocity."""
    if not carrier_freq > 0:
        raise ValueError(f"carrier_freq must be > 0, got {carrier_freq}")
    if not tdoa > 0:
        raise ValueError(f"tdoa must be > 0, got {tdoa}")
    return 4.0 * math.pi * radial_velocity * carrier_freq * tdoa / SPEED_OF_LIGHT


def integer_rotations(theta: float, phi: float) -> int:
    """Rotation count R with theta - 2*pi*R - phi in [-pi, pi)."""
    return int(math.floor((theta - phi + math.pi) / TWO_PI))


def pairwise_differences(psis, toas, band_index: int = 0) -> list[PhasePair]:
    """All packet pairs of one band, lexicographic by (i, j), the (1,2) pair first."""
    psis = np.asarray(psis, dtype=float)
    toas = np.asarray(toas, dtype=float)
    if psis.shape != toas.shape or psis.ndim != 1:
        raise ValueError("psis and toas must be 1-d arrays of equal length")
    if psis.size < 2:
        raise ValueError("need at least 2 packets to form a pair")
    if not np.all(np.diff(toas) > 0):
        raise ValueError("toas must be strictly increasing")
    pairs = []
    n = psis.size
    for i in range(n):
        for j in range(i + 1, n):
            pairs.append(
                PhasePair(
                    band_index=band_index,
                    i=i,
                    j=j,
                    tdoa=float(toas[j] - toas[i]),
                    wrapped_phase=wrap_phase(float(psis[j] - psis[i])),
                )
            )
    return pairs


def build_system(bands: BandSet, selection: ToaSelection, psis_per_band) -> MeasurementSystem:
    """Stack every band's pairwise differences into one measurement system.

    psis_per_band holds, per band, the extracted packet phases aligned with
    selection.per_band. Coefficients are the phase slopes 4*pi*f*tdoa/c, so a
    radial velocity v produces the unwrapped phase coeffs * v.
    """
    if len(bands) != len(selection.per_band):
        raise ValueError(
            f"band count mismatch: {len(bands)} bands vs {len(selection.per_band)} selections"
        )
    if len(psis_per_band) != len(selection.per_band):
        raise ValueError("psis_per_band must align with selection.per_band")
    y, coeffs, band_of = [], [], []
    for q, (band, toas, psis) in enumerate(zip(bands, selection.per_band, psis_per_band)):
        psis = np.asarray(psis, dtype=float)
        if psis.shape != toas.shape:
            raise ValueError(f"band {q}: psis shape {psis.shape} != toas shape {toas.shape}")
        for pair in pairwise_differences(psis, toas, band_index=q):
            y.append(pair.wrapped_phase)
            coeffs.append(4.0 * math.pi * band.carrier_freq * pair.tdoa / SPEED_OF_LIGHT)
            band_of.append(q)
    return MeasurementSystem(
        y=np.asarray(y), coeffs=np.asarray(coeffs), band_of=np.asarray(band_of), anchor_index=0
    )
