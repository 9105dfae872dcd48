"""Carrier bands, kinematics, and the closed-form limits of phase-based velocity estimation.

All phases are radians, times are seconds, frequencies are Hz, velocities are m/s.
Wrapped phases live in [0, 2*pi); residuals re-wrapped by the solver live in [-pi, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleAnchorError

SPEED_OF_LIGHT = 3.0e8  # m/s, rounded engineering value used consistently everywhere
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Band:
    """One sensing carrier: center frequency and occupied bandwidth, both Hz."""

    carrier_freq: float
    bandwidth: float = 80e6

    def __post_init__(self):
        if not (self.carrier_freq > 0 and math.isfinite(self.carrier_freq)):
            raise ValueError(f"carrier_freq must be positive and finite, got {self.carrier_freq}")
        if not (0 < self.bandwidth < self.carrier_freq):
            raise ValueError(
                f"bandwidth must lie in (0, carrier_freq), got {self.bandwidth} at {self.carrier_freq} Hz"
            )


@dataclass(frozen=True)
class BandSet:
    """Bands ordered by ascending carrier; the lowest carrier hosts the anchor pair."""

    bands: tuple[Band, ...]

    def __post_init__(self):
        if len(self.bands) < 1:
            raise ValueError("a band set needs at least one band")
        carriers = [b.carrier_freq for b in self.bands]
        if len(set(carriers)) != len(carriers):
            raise ValueError("band carriers must be distinct")
        if carriers != sorted(carriers):
            raise ValueError("bands must be ordered by ascending carrier frequency")

    @classmethod
    def from_carriers(cls, carriers, bandwidth: float = 80e6) -> "BandSet":
        """Build a set from bare carrier frequencies, sorted ascending."""
        return cls(tuple(Band(f, bandwidth) for f in sorted(carriers)))

    @property
    def anchor_band(self) -> Band:
        return self.bands[0]

    def __len__(self) -> int:
        return len(self.bands)

    def __iter__(self):
        return iter(self.bands)


@dataclass(frozen=True)
class KinematicState:
    """Target speed and aspect angle; the radial component is what phase slopes see."""

    speed: float
    aspect_angle: float

    def __post_init__(self):
        if not (self.speed >= 0 and math.isfinite(self.speed)):
            raise ValueError(f"speed must be non-negative and finite, got {self.speed}")
        if not math.isfinite(self.aspect_angle):
            raise ValueError("aspect_angle must be finite")

    @property
    def radial_velocity(self) -> float:
        """speed * cos(aspect_angle); bounded by the speed in magnitude."""
        return self.speed * math.cos(self.aspect_angle)


def wrap_phase(theta):
    """Wrap an angle (scalar or array) into [0, 2*pi).

    The result is theta modulo 2*pi, guarded so that tiny negative inputs can
    never round up to exactly 2*pi.
    """
    wrapped = np.mod(theta, TWO_PI)
    # float mod can return the modulus itself for small negative inputs
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    if np.ndim(theta) == 0:
        return float(wrapped)
    return wrapped


def doppler_frequency(radial_velocity: float, band: Band) -> float:
    """Two-way Doppler shift 2*v*f/c in Hz for a monostatic reflection."""
    return 2.0 * radial_velocity * band.carrier_freq / SPEED_OF_LIGHT


def max_unambiguous_velocity(carrier_freq: float, tdoa: float) -> float:
    """Largest |v| whose pair phase stays below pi: c / (4 * f * tdoa).

    Parameters
    ----------
    carrier_freq : float
        Carrier frequency in Hz, > 0.
    tdoa : float
        Packet time difference of arrival in seconds, > 0.
    """
    if not carrier_freq > 0:
        raise ValueError(f"carrier_freq must be > 0, got {carrier_freq}")
    if not tdoa > 0:
        raise ValueError(f"tdoa must be > 0, got {tdoa}")
    return SPEED_OF_LIGHT / (4.0 * carrier_freq * tdoa)


def velocity_resolution(carrier_freq: float, n_packets: int, tdoa: float) -> float:
    """Velocity resolution c / (2 * f * N * tdoa) of N packets spaced tdoa apart."""
    if not carrier_freq > 0:
        raise ValueError(f"carrier_freq must be > 0, got {carrier_freq}")
    if not (isinstance(n_packets, (int, np.integer)) and n_packets >= 1):
        raise ValueError(f"n_packets must be a positive integer, got {n_packets}")
    if not tdoa > 0:
        raise ValueError(f"tdoa must be > 0, got {tdoa}")
    return SPEED_OF_LIGHT / (2.0 * carrier_freq * n_packets * tdoa)


def max_anchor_tdoa(carrier_freq: float, v_max: float, noise_std: float) -> float:
    """Largest anchor TDOA that keeps the anchor pair unambiguous with margin.

    Returns c * (pi - 3*noise_std) / (4 * pi * carrier_freq * v_max): the anchor
    phase magnitude stays below pi even with a 3-sigma noise excursion.

    Raises
    ------
    InfeasibleAnchorError
        If 3*noise_std >= pi, where no TDOA qualifies.
    """
    if not carrier_freq > 0:
        raise ValueError(f"carrier_freq must be > 0, got {carrier_freq}")
    if not v_max > 0:
        raise ValueError(f"v_max must be > 0, got {v_max}")
    if not (noise_std >= 0 and math.isfinite(noise_std)):
        raise ValueError(f"noise_std must be non-negative and finite, got {noise_std}")
    if 3.0 * noise_std >= math.pi:
        raise InfeasibleAnchorError(
            f"3*noise_std = {3.0 * noise_std:.6f} rad >= pi: no anchor TDOA is unambiguous"
        )
    return SPEED_OF_LIGHT * (math.pi - 3.0 * noise_std) / (4.0 * math.pi * carrier_freq * v_max)


def pair_count(n_packets: int) -> int:
    """Number of packet pairs N*(N-1)/2 formed from N packets."""
    if not (isinstance(n_packets, (int, np.integer)) and n_packets >= 0):
        raise ValueError(f"n_packets must be a non-negative integer, got {n_packets}")
    return int(n_packets) * (int(n_packets) - 1) // 2
