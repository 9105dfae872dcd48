"""Exact integer least squares for anchored wrapped-phase systems.

The estimate minimizes sum_n (y[n] + 2*pi*r[n] - coeffs[n]*v)^2 jointly over
v in [-v_search, v_search] and integer rotations r, with the anchor's rotation
pinned to zero. For any fixed v the optimal integers decouple into nearest-
integer rounding, so the profiled objective F(v) is piecewise quadratic in v
with breakpoints where a non-anchor residual crosses +/-pi; sweeping every
breakpoint yields the exact global minimum without lattice search.

Anchored phases are stored wrapped to [0, 2*pi); the problem re-centers the
anchor entry once into [-pi, pi) so its pinned rotation refers to the
principal representation (a fixed canonicalization, not a search variable).

Two independent oracles cross-check the solver: a dense velocity grid over
the same objective, and brute-force enumeration of an integer box with the
conditionally optimal velocity per lattice point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ProblemTooLargeError
from .measurements import MeasurementSystem

TWO_PI = 2.0 * math.pi

_MAX_BREAKPOINTS = 10_000_000
_MAX_GRID_POINTS = 100_000_000
_MAX_ENUM_POINTS = 10_000_000
_RECHECK_CANDIDATES = 32
_REFINE_CANDIDATES = 1024
_EVAL_CHUNK = 65_536


@dataclass(frozen=True)
class IlsProblem:
    """A measurement system together with the symmetric velocity search bound."""

    system: MeasurementSystem
    v_search: float

    def __post_init__(self):
        if not (self.v_search > 0 and math.isfinite(self.v_search)):
            raise ValueError(f"v_search must be positive and finite, got {self.v_search}")
        y = self.system.y.copy()
        a = self.system.anchor_index
        # principal representation of the anchor phase; its rotation stays 0
        y[a] = y[a] - TWO_PI * math.floor(y[a] / TWO_PI + 0.5)
        object.__setattr__(self, "_y_centered", y)

    @property
    def y(self) -> np.ndarray:
        """Phases with the anchor entry re-centered into [-pi, pi)."""
        return self._y_centered

    @property
    def coeffs(self) -> np.ndarray:
        return self.system.coeffs

    @property
    def anchor_index(self) -> int:
        return self.system.anchor_index


@dataclass(frozen=True)
class IlsSolution:
    """Velocity estimate, integer rotations (anchor entry 0), squared residual."""

    v_hat: float
    r_hat: np.ndarray
    residual: float


def _check_rotations(r, problem: IlsProblem) -> np.ndarray:
    r = np.asarray(r)
    if r.shape != problem.y.shape:
        raise ValueError(f"r has shape {r.shape}, expected {problem.y.shape}")
    if not np.issubdtype(r.dtype, np.integer):
        as_int = np.rint(r).astype(np.int64)
        if not np.array_equal(as_int, r):
            raise ValueError("r must be a vector of integers")
        r = as_int
    if r[problem.anchor_index] != 0:
        raise ValueError("the anchor rotation is fixed at 0")
    return r.astype(np.int64)


def objective(v: float, r, problem: IlsProblem) -> float:
    """Squared residual sum_n (y[n] + 2*pi*r[n] - coeffs[n]*v)^2 at fixed (v, r)."""
    r = _check_rotations(r, problem)
    residuals = problem.y + TWO_PI * r - problem.coeffs * float(v)
    return float(np.dot(residuals, residuals))


def optimal_integers(v: float, problem: IlsProblem) -> np.ndarray:
    """Rotation vector minimizing the objective at fixed v.

    Each non-anchor entry is the nearest integer to (v*coeffs[n] - y[n])/(2*pi)
    (ties to even); the anchor entry is 0 by construction.
    """
    r = np.rint((float(v) * problem.coeffs - problem.y) / TWO_PI).astype(np.int64)
    r[problem.anchor_index] = 0
    return r


def conditional_velocity(r, problem: IlsProblem) -> float:
    """Unconstrained objective minimizer over v for fixed rotations r."""
    r = _check_rotations(r, problem)
    c = problem.coeffs
    return float(np.dot(c, problem.y + TWO_PI * r) / np.dot(c, c))


def _profiled_objective(grid: np.ndarray, problem: IlsProblem) -> np.ndarray:
    """F(v) on a velocity grid: anchor term unwrapped, others wrapped to nearest period.

    Wrapping subtracts the nearest multiple of 2*pi (rint, not mod: np.mod is
    ~60x slower and the objective squares the result, so the sign convention
    at exactly +-pi cannot matter). In-place passes over reused buffers keep
    the dense grid affordable.
    """
    y, c, a = problem.y, problem.coeffs, problem.anchor_index
    mask = np.ones(y.size, dtype=bool)
    mask[a] = False
    ym, cm = y[mask], c[mask]
    anchor = y[a] - grid * c[a]
    out = anchor * anchor
    buf = np.empty((min(_EVAL_CHUNK, grid.size), cm.size))
    turns = np.empty_like(buf)
    for start in range(0, grid.size, _EVAL_CHUNK):
        v = grid[start : start + _EVAL_CHUNK, None]
        work = buf[: v.size]
        k = turns[: v.size]
        np.multiply(v, cm[None, :], out=work)
        np.subtract(ym[None, :], work, out=work)
        np.multiply(work, 1.0 / TWO_PI, out=k)
        np.rint(k, out=k)
        k *= TWO_PI
        work -= k
        out[start : start + v.size] += np.einsum("ij,ij->i", work, work)
    return out


def solve_exact(problem: IlsProblem) -> IlsSolution:
    """Global minimizer of the anchored integer least-squares objective.

    Enumerates every breakpoint of the piecewise-quadratic profiled objective,
    minimizes the active quadratic on each segment in a vectorized sweep, then
    re-evaluates the leading candidates in exact arithmetic to settle ranking
    noise accumulated by the sweep. Ties resolve to the lowest velocity.
    """
    y, c, a = problem.y, problem.coeffs, problem.anchor_index
    V = problem.v_search
    n = y.size
    nonanchor = np.flatnonzero(np.arange(n) != a)

    # breakpoints of coord m at v = (y + pi + 2*pi*k)/c, strictly inside (-V, V);
    # crossing breakpoint k bumps the coord's rotation from k to k+1, so the
    # rotation on (-V, first breakpoint) is exactly k_lo
    c_na, y_na = c[nonanchor], y[nonanchor]
    k_lo = np.floor((-V * c_na - y_na - math.pi) / TWO_PI).astype(np.int64) + 1
    k_hi = np.ceil((V * c_na - y_na - math.pi) / TWO_PI).astype(np.int64) - 1
    counts = np.maximum(k_hi - k_lo + 1, 0)
    total = int(counts.sum())
    if total > _MAX_BREAKPOINTS:
        raise ProblemTooLargeError(
            f"{total} breakpoints exceed the {_MAX_BREAKPOINTS} sweep guard"
        )

    owner = np.repeat(np.arange(nonanchor.size), counts)
    # k values per coord: k_lo[m] + local rank within the coord's block
    block_starts = np.concatenate(([0], np.cumsum(counts)))[:-1]
    k_vals = k_lo[owner] + (np.arange(total) - np.repeat(block_starts, counts))
    bp_v = (y_na[owner] + math.pi + TWO_PI * k_vals) / c_na[owner]

    order = np.argsort(bp_v, kind="stable")
    bp_sorted = bp_v[order]
    # crossing breakpoint k of coord m bumps r_m from k to k+1
    delta_b = (-2.0 * TWO_PI * c_na[owner])[order]
    delta_c = (2.0 * TWO_PI * (y_na[owner] + TWO_PI * k_vals) + TWO_PI**2)[order]

    r_init = np.zeros(y.size, dtype=np.int64)
    r_init[nonanchor] = k_lo
    unwrapped0 = y + TWO_PI * r_init
    quad_a = float(np.dot(c, c))
    b0 = -2.0 * float(np.dot(c, unwrapped0))
    c0 = float(np.dot(unwrapped0, unwrapped0))

    seg_b = b0 + np.concatenate(([0.0], np.cumsum(delta_b)))
    seg_c = c0 + np.concatenate(([0.0], np.cumsum(delta_c)))
    seg_lo = np.concatenate(([-V], bp_sorted))
    seg_hi = np.concatenate((bp_sorted, [V]))

    vertex = np.clip(-seg_b / (2.0 * quad_a), seg_lo, seg_hi)
    approx_f = (quad_a * vertex + seg_b) * vertex + seg_c

    k = min(_RECHECK_CANDIDATES, approx_f.size)
    candidates = np.argpartition(approx_f, k - 1)[:k] if approx_f.size > k else np.arange(approx_f.size)

    best_v, best_r, best_f = None, None, math.inf
    for idx in sorted(candidates.tolist()):
        r = optimal_integers(vertex[idx], problem)
        v = min(max(conditional_velocity(r, problem), seg_lo[idx]), seg_hi[idx])
        f = objective(v, r, problem)
        if f < best_f or (f == best_f and v < best_v):
            best_v, best_r, best_f = v, r, f
    # rotations reported at the final velocity, keeping r = optimal_integers(v_hat)
    best_r = optimal_integers(best_v, problem)
    best_f = objective(best_v, best_r, problem)
    return IlsSolution(v_hat=float(best_v), r_hat=best_r, residual=best_f)


def solve_grid_oracle(problem: IlsProblem, step: float) -> IlsSolution:
    """Dense-grid minimizer of the same profiled objective; independent of the sweep.

    Evaluates F(v) at -v_search + i*step (plus the upper endpoint) and returns
    the best grid point with its optimal integers. Exhaustive, not polished:
    accuracy is bounded by the step.
    """
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    V = problem.v_search
    count = int(math.floor(2.0 * V / step)) + 1
    if count > _MAX_GRID_POINTS:
        raise ProblemTooLargeError(f"{count} grid points exceed the {_MAX_GRID_POINTS} guard")
    grid = np.minimum(-V + step * np.arange(count), V)
    if grid[-1] < V:
        grid = np.append(grid, V)
    f = _profiled_objective(grid, problem)
    idx = int(np.argmin(f))  # first minimum = lowest velocity on ties
    v = float(grid[idx])
    r = optimal_integers(v, problem)
    return IlsSolution(v_hat=v, r_hat=r, residual=objective(v, r, problem))


def solve_grid_refined(problem: IlsProblem, step: float) -> IlsSolution:
    """Grid oracle with local quadratic polish; the verification-grade refiner.

    Near-tied minima defeat a bare grid: the sampling error per segment is
    about sum(coeffs^2) * (step/2)^2, which can exceed the gap between rival
    basins. So every sampled local minimum within that slack of the best is
    polished by alternating nearest-integer rounding with the closed-form
    conditional vertex (monotone in the objective, so it terminates), and a
    fine sub-grid around the winner catches segments narrower than the step.
    Shares no machinery with the breakpoint sweep.
    """
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    V = problem.v_search
    count = int(math.floor(2.0 * V / step)) + 1
    if count > _MAX_GRID_POINTS:
        raise ProblemTooLargeError(f"{count} grid points exceed the {_MAX_GRID_POINTS} guard")
    grid = np.minimum(-V + step * np.arange(count), V)
    if grid[-1] < V:
        grid = np.append(grid, V)

    c = problem.coeffs
    quad_a = float(np.dot(c, c))

    def polish(v0: float) -> tuple[float, float]:
        r = optimal_integers(v0, problem)
        best_v, best_f = float(v0), objective(v0, r, problem)
        for _ in range(8):
            v = min(max(conditional_velocity(r, problem), -V), V)
            r_next = optimal_integers(v, problem)
            f = objective(v, r_next, problem)
            if f < best_f or (f == best_f and v < best_v):
                best_v, best_f = float(v), f
            if np.array_equal(r_next, r):
                break
            r = r_next
        return best_v, best_f

    def shortlist(values: np.ndarray, points: np.ndarray, slack: float) -> np.ndarray:
        padded = np.concatenate(([math.inf], values, [math.inf]))
        local = (values <= padded[:-2]) & (values <= padded[2:])
        keep = np.flatnonzero(local & (values <= values.min() + slack))
        if keep.size > _REFINE_CANDIDATES:
            keep = keep[np.argsort(values[keep], kind="stable")[:_REFINE_CANDIDATES]]
            keep.sort()
        return points[keep]

    slack = quad_a * step * step + 1e-9
    best_v, best_f = None, math.inf
    coarse = _profiled_objective(grid, problem)
    for v0 in shortlist(coarse, grid, slack):
        v, f = polish(float(v0))
        if f < best_f or (f == best_f and v < best_v):
            best_v, best_f = v, f

    # segments narrower than the step can hide between coarse samples
    fine_step = step / 128.0
    fine = np.clip(best_v + fine_step * np.arange(-256, 257), -V, V)
    fine_f = _profiled_objective(fine, problem)
    for v0 in shortlist(fine_f, fine, quad_a * fine_step * fine_step + 1e-9):
        v, f = polish(float(v0))
        if f < best_f or (f == best_f and v < best_v):
            best_v, best_f = v, f

    r = optimal_integers(best_v, problem)
    return IlsSolution(v_hat=float(best_v), r_hat=r, residual=objective(best_v, r, problem))


def solve_integer_enum_oracle(problem: IlsProblem, r_bound: int) -> IlsSolution:
    """Brute-force minimizer over the integer box [-r_bound, r_bound]^(N-1).

    For each lattice point the conditionally optimal velocity (clamped to the
    search range) scores the pair; exact when the box covers the optimal
    rotations. Independent of both the sweep and the grid.
    """
    if not (isinstance(r_bound, (int, np.integer)) and r_bound >= 0):
        raise ValueError(f"r_bound must be a non-negative integer, got {r_bound}")
    y, c, a = problem.y, problem.coeffs, problem.anchor_index
    V = problem.v_search
    n = y.size
    nonanchor = np.flatnonzero(np.arange(n) != a)
    m = nonanchor.size
    width = 2 * r_bound + 1
    total = width**m
    if total > _MAX_ENUM_POINTS:
        raise ProblemTooLargeError(f"{total} lattice points exceed the {_MAX_ENUM_POINTS} guard")

    quad_a = float(np.dot(c, c))
    base = float(np.dot(c, y))
    c_na = c[nonanchor]

    best_v, best_r, best_f = None, None, math.inf
    for start in range(0, total, _EVAL_CHUNK):
        lin = np.arange(start, min(start + _EVAL_CHUNK, total), dtype=np.int64)
        digits = np.empty((lin.size, m), dtype=np.int64)
        rem = lin.copy()
        for col in range(m - 1, -1, -1):
            digits[:, col] = rem % width
            rem //= width
        r_na = digits - r_bound
        v = (base + TWO_PI * (r_na @ c_na)) / quad_a
        np.clip(v, -V, V, out=v)
        resid = y[None, :] - v[:, None] * c[None, :]
        resid[:, nonanchor] += TWO_PI * r_na
        f = np.einsum("ij,ij->i", resid, resid)
        ties = np.flatnonzero(f == f.min())
        idx = int(ties[np.argmin(v[ties])])
        if f[idx] < best_f or (f[idx] == best_f and v[idx] < best_v):
            best_f = float(f[idx])
            best_v = float(v[idx])
            r = np.zeros(n, dtype=np.int64)
            r[nonanchor] = r_na[idx]
            best_r = r
    return IlsSolution(v_hat=best_v, r_hat=best_r, residual=best_f)
