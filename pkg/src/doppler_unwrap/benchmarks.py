"""Benchmark methods the exact solver is compared against.

Two baselines: an iterative maximum-likelihood (IML) velocity search over the
product of per-measurement wrapped-Gaussian phase likelihoods, and a
single-band variant of the integer least-squares solver that must trust a
pseudo-anchor inside its own band. Both are deliberately faithful to their
usual formulations, including the failure modes that motivate the multiband
anchored approach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .measurements import MeasurementSystem
from .solver import IlsProblem, IlsSolution, solve_exact

TWO_PI = 2.0 * math.pi

_EVAL_CHUNK = 8192
# tail mass guard for the pre-wrapped fast path, well under the 1e-12 contract
_FAST_TAIL = math.log(1e16)


@dataclass(frozen=True)
class ImlOptions:
    """Controls for the likelihood grid search.

    wrap_terms=None selects, per measurement, enough integer offsets k that
    2*pi*k spans +/-(|coeff| * grid_half_width + 6 sigma); the search then
    evaluates with pre-wrapped residuals, which agrees with that truncated
    sum to better than 1e-12 wherever the truncation reaches the residual's
    nearest lobe.
    """

    grid_half_width: float
    initial_grid_points: int = 4001
    zoom_rounds: int = 4
    zoom_factor: float = 10.0
    wrap_terms: int | None = None

    def __post_init__(self):
        if not (self.grid_half_width > 0 and math.isfinite(self.grid_half_width)):
            raise ValueError(f"grid_half_width must be positive, got {self.grid_half_width}")
        if self.initial_grid_points < 2:
            raise ValueError(f"initial_grid_points must be >= 2, got {self.initial_grid_points}")
        if self.zoom_rounds < 0:
            raise ValueError(f"zoom_rounds must be >= 0, got {self.zoom_rounds}")
        if not self.zoom_factor > 1.0:
            raise ValueError(f"zoom_factor must be > 1, got {self.zoom_factor}")
        if self.wrap_terms is not None and (
            not isinstance(self.wrap_terms, (int, np.integer)) or self.wrap_terms < 0
        ):
            raise ValueError(f"wrap_terms must be a non-negative integer, got {self.wrap_terms}")

    def final_grid_step(self) -> float:
        span = 2.0 * self.grid_half_width / self.zoom_factor**self.zoom_rounds
        return span / (self.initial_grid_points - 1)


def default_wrap_terms(coeff: float, grid_half_width: float, sigma: float) -> int:
    """Truncation count so 2*pi*k covers every residual the grid can produce."""
    return int(math.ceil((abs(coeff) * grid_half_width + 6.0 * sigma) / TWO_PI))


def wrapped_loglik(phi, theta_of_v, sigma: float, wrap_terms: int):
    """Log wrapped-Gaussian density of phase phi about mean theta_of_v.

    log sum_{|k| <= wrap_terms} N(phi - theta_of_v + 2*pi*k; 0, sigma^2),
    overflow-safe. Broadcasts phi against theta_of_v; scalar in, float out.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if not isinstance(wrap_terms, (int, np.integer)) or wrap_terms < 0:
        raise ValueError(f"wrap_terms must be a non-negative integer, got {wrap_terms}")
    delta = np.asarray(phi, dtype=float) - np.asarray(theta_of_v, dtype=float)
    k = np.arange(-int(wrap_terms), int(wrap_terms) + 1)
    z = (delta[..., None] + TWO_PI * k) / sigma
    out = logsumexp(-0.5 * z * z, axis=-1) - math.log(sigma * math.sqrt(TWO_PI))
    if np.ndim(out) == 0:
        return float(out)
    return out


def _fast_terms(sigma: float) -> int:
    # smallest K with the dropped lobes at |d + 2*pi*k| >= (2K+1)*pi negligible
    # against the worst on-peak term exp(-pi^2 / (2 sigma^2)) for |d| <= pi
    reach = math.sqrt(1.0 + 2.0 * sigma * sigma * _FAST_TAIL / math.pi**2)
    return max(1, int(math.ceil((reach - 1.0) / 2.0)))


def _prewrapped_loglik(delta, sigma: float, terms: int):
    """Fast path: residuals pre-wrapped to the nearest period need only a few lobes.

    With |d| <= pi the k=0 lobe always dominates, so the log-sum-exp reduces
    to a log1p over non-positive exponents; exact, overflow-free, and cheap.
    The rint wrap (vs np.mod, ~60x slower) lands ties at +pi instead of -pi;
    both the squared base term and the symmetric +-k lobe sum are invariant
    to that sign.
    """
    delta = np.asarray(delta, dtype=float)
    wrapped = delta - TWO_PI * np.rint(delta * (1.0 / TWO_PI))
    base = -0.5 * (wrapped / sigma) ** 2
    k = np.concatenate((np.arange(-terms, 0), np.arange(1, terms + 1)))
    z = (wrapped[..., None] + TWO_PI * k) / sigma
    extra = np.exp(-0.5 * z * z - base[..., None]).sum(axis=-1)
    return base + np.log1p(extra) - math.log(sigma * math.sqrt(TWO_PI))


def _centered_anchor_phase(system: MeasurementSystem) -> np.ndarray:
    y = system.y.copy()
    a = system.anchor_index
    y[a] = y[a] - TWO_PI * math.floor(y[a] / TWO_PI + 0.5)
    return y


def _total_loglik(grid, system: MeasurementSystem, sigma: float, options: ImlOptions):
    """Summed log-likelihood over measurements for each grid velocity.

    Non-anchor measurements use the wrapped density; the anchor, being
    unambiguous by construction, contributes a plain single-term Gaussian on
    its principal-value residual.
    """
    y = _centered_anchor_phase(system)
    c = system.coeffs
    a = system.anchor_index
    mask = np.ones(y.size, dtype=bool)
    mask[a] = False
    grid = np.asarray(grid, dtype=float)

    if options.wrap_terms is None:
        terms = _fast_terms(sigma)
        prewrap = True
    else:
        terms = int(options.wrap_terms)
        prewrap = False
    # keep chunk * n_coords * (2*terms+1) working memory bounded
    chunk = max(16, _EVAL_CHUNK // max(1, (2 * terms + 1) // 8))

    out = np.empty(grid.size)
    for start in range(0, grid.size, chunk):
        v = grid[start : start + chunk, None]
        delta = y[None, mask] - v * c[None, mask]
        if prewrap:
            ll = _prewrapped_loglik(delta, sigma, terms)
        else:
            k = np.arange(-terms, terms + 1)
            z = (delta[..., None] + TWO_PI * k) / sigma
            ll = logsumexp(-0.5 * z * z, axis=-1) - math.log(sigma * math.sqrt(TWO_PI))
        anchor_resid = (y[a] - v[:, 0] * c[a]) / sigma
        out[start : start + v.shape[0]] = (
            ll.sum(axis=-1)
            - 0.5 * anchor_resid * anchor_resid
            - math.log(sigma * math.sqrt(TWO_PI))
        )
    return out


def _iml_rounds(system: MeasurementSystem, sigma: float, options: ImlOptions):
    """Yields (best_v, best_loglik) after each grid round; incumbents never regress."""
    W = options.grid_half_width
    best_v, best_ll = None, -math.inf
    center, half = 0.0, W
    for _ in range(options.zoom_rounds + 1):
        grid = np.linspace(center - half, center + half, options.initial_grid_points)
        ll = _total_loglik(grid, system, sigma, options)
        idx = int(np.argmax(ll))  # first maximum = lowest velocity on ties
        if ll[idx] > best_ll or (ll[idx] == best_ll and grid[idx] < best_v):
            best_v, best_ll = float(grid[idx]), float(ll[idx])
        yield best_v, best_ll
        half /= options.zoom_factor
        # keep the zoom window inside the original search interval
        center = min(max(best_v, -W + half), W - half)


def solve_iml(system: MeasurementSystem, sigma: float, options: ImlOptions | None = None) -> float:
    """Velocity at the maximum of the product of wrapped phase likelihoods.

    Grid search over [-grid_half_width, grid_half_width], re-centered and
    shrunk by zoom_factor for zoom_rounds rounds; returns the best velocity
    seen. Ties resolve to the lowest velocity.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if options is None:
        options = ImlOptions(grid_half_width=60.0)
    best_v = None
    for best_v, _ in _iml_rounds(system, sigma, options):
        pass
    return best_v


def solve_single_band(
    system: MeasurementSystem, band_index: int, v_search: float = 60.0
) -> IlsSolution:
    """Integer least squares restricted to one band.

    The band's smallest-TDOA pair acts as the pseudo-anchor with its rotation
    pinned to zero whether or not it is genuinely unambiguous; that leap of
    faith is the baseline's documented weakness. The smallest TDOA is the
    choice most favorable to it.
    """
    mask = system.band_of == band_index
    if not np.any(mask):
        raise ValueError(f"band {band_index} has no measurements in this system")
    idx = np.flatnonzero(mask)
    sub = MeasurementSystem(
        y=system.y[idx],
        coeffs=system.coeffs[idx],
        band_of=system.band_of[idx],
        anchor_index=int(np.argmin(system.coeffs[idx])),
    )
    return solve_exact(IlsProblem(system=sub, v_search=v_search))
