"""Synthetic channel-impulse-response peaks for moving scatterers, and phase extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError
from .model import SPEED_OF_LIGHT, Band

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TargetComponent:
    """One scattering component: coefficient in (0, 1], radial velocity, path delay."""

    scatter_coeff: float
    radial_velocity: float
    delay: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.scatter_coeff <= 1.0):
            raise ValueError(f"scatter_coeff must lie in (0, 1], got {self.scatter_coeff}")
        if not math.isfinite(self.radial_velocity):
            raise ValueError("radial_velocity must be finite")
        if not (self.delay >= 0.0 and math.isfinite(self.delay)):
            raise ValueError(f"delay must be non-negative and finite, got {self.delay}")


@dataclass(frozen=True)
class AmplitudeModel:
    """Per-band multiplicative gain draw: N(mean, std^2) clamped from below."""

    mean: float = 1.0
    std: float = 0.05
    clamp: float = 1e-6

    def __post_init__(self):
        if not self.std >= 0.0:
            raise ValueError(f"std must be >= 0, got {self.std}")
        if not self.clamp > 0.0:
            raise ValueError(f"clamp must be > 0, got {self.clamp}")


@dataclass(frozen=True)
class NoiseModel:
    """Measurement noise, applied in exactly one domain: 'phase' or 'cir'."""

    kind: str = "phase"
    std: float = 0.0

    def __post_init__(self):
        if self.kind not in ("phase", "cir"):
            raise ValueError(f"kind must be 'phase' or 'cir', got {self.kind!r}")
        if not (self.std >= 0.0 and math.isfinite(self.std)):
            raise ValueError(f"std must be non-negative and finite, got {self.std}")


def sinc_pulse(x, bandwidth: float):
    """Normalized pulse kernel sin(pi*B*x)/(pi*B*x), equal to 1 at x = 0."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    return np.sinc(np.multiply(bandwidth, x))


def draw_band_gains(n_components: int, n_bands: int, amp_model: AmplitudeModel, rng) -> np.ndarray:
    """Draw the (component, band) gain matrix once; gains are held for a whole trial."""
    if n_components < 1 or n_bands < 1:
        raise ValueError("n_components and n_bands must be >= 1")
    gains = rng.normal(amp_model.mean, amp_model.std, size=(n_components, n_bands))
    return np.maximum(gains, amp_model.clamp)


def synth_peak_value(
    components,
    band: Band,
    t: float,
    noise: NoiseModel,
    rng,
    gains=None,
    amp_model: AmplitudeModel | None = None,
) -> complex:
    """Complex CIR peak sample at packet time t.

    Each component contributes scatter_coeff * gain * pulse(delay offset) *
    exp(j*2*pi*f_D*t) with f_D its two-way Doppler shift at this band. Gains
    must be drawn once per (component, band) and passed in when samples share
    a trial; when omitted they are drawn here from amp_model (single-shot use).
    Noise of kind 'cir' adds a complex Gaussian term with per-quadrature std;
    'phase' noise belongs downstream, after phase extraction.
    """
    components = list(components)
    if len(components) == 0:
        raise ValueError("at least one component is required")
    if gains is None:
        gains = draw_band_gains(len(components), 1, amp_model or AmplitudeModel(), rng)[:, 0]
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (len(components),):
        raise ValueError(f"gains must have shape ({len(components)},), got {gains.shape}")

    ref_delay = components[0].delay
    value = 0.0 + 0.0j
    for comp, gain in zip(components, gains):
        doppler = 2.0 * comp.radial_velocity * band.carrier_freq / SPEED_OF_LIGHT
        kernel = float(sinc_pulse(comp.delay - ref_delay, band.bandwidth))
        value += comp.scatter_coeff * gain * kernel * np.exp(1j * TWO_PI * doppler * t)
    if noise.kind == "cir" and noise.std > 0.0:
        value += complex(rng.normal(0.0, noise.std), rng.normal(0.0, noise.std))
    return complex(value)


def extract_phase(sample: complex) -> float:
    """Phase of a peak sample in (-pi, pi] via atan2; zero magnitude is an error."""
    if sample == 0:
        raise DegenerateSampleError("zero-magnitude sample has no phase")
    return math.atan2(sample.imag, sample.real)


def add_phase_noise(psi, noise: NoiseModel, rng):
    """Add N(0, std^2) phase noise per packet; requires a phase-domain noise model."""
    if noise.kind != "phase":
        raise ValueError(f"phase noise requested but noise model kind is {noise.kind!r}")
    arr = np.asarray(psi, dtype=float)
    noisy = arr + rng.normal(0.0, noise.std, size=arr.shape)
    if np.ndim(psi) == 0:
        return float(noisy)
    return noisy
