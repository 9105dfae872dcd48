"""Scikit-learn style front door for the velocity solvers.

X carries one column, the phase-slope coefficient of each packet pair
(rad per m/s); y carries the wrapped pair phases in [0, 2*pi). fit solves
for the radial velocity; predict maps coefficients back to the wrapped
phases the fitted velocity would produce.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .benchmarks import ImlOptions, solve_iml
from .measurements import MeasurementSystem
from .model import wrap_phase
from .solver import IlsProblem, solve_exact


def _validate_coeff_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] != 1:
        raise ValueError(f"X must have a single coefficient column, got shape {X.shape}")
    return X[:, 0]


def _validate_system_inputs(X, y) -> tuple[np.ndarray, np.ndarray]:
    coeffs = _validate_coeff_matrix(X)
    y = np.asarray(y, dtype=float)
    if y.shape != coeffs.shape:
        raise ValueError(f"y has shape {y.shape}, expected {coeffs.shape}")
    return coeffs, y


class MultibandVelocityEstimator(RegressorMixin, BaseEstimator):
    """Anchored integer least-squares velocity estimator.

    Parameters
    ----------
    v_search : symmetric velocity search bound in m/s.
    anchor_index : row of X/y whose integer rotation is pinned to zero; must
        be the genuinely unambiguous pair.
    """

    def __init__(self, v_search: float = 60.0, anchor_index: int = 0):
        self.v_search = v_search
        self.anchor_index = anchor_index

    def fit(self, X, y):
        coeffs, phases = _validate_system_inputs(X, y)
        system = MeasurementSystem(
            y=phases,
            coeffs=coeffs,
            band_of=np.zeros(coeffs.size, dtype=np.int64),
            anchor_index=self.anchor_index,
        )
        solution = solve_exact(IlsProblem(system=system, v_search=self.v_search))
        self.velocity_ = solution.v_hat
        self.rotations_ = solution.r_hat
        self.residual_ = solution.residual
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "velocity_")
        return wrap_phase(_validate_coeff_matrix(X) * self.velocity_)


class IterativeMaxLikelihoodEstimator(RegressorMixin, BaseEstimator):
    """Wrapped-likelihood grid-search benchmark in estimator clothing.

    sigma is the phase-difference noise standard deviation in radians. The
    remaining parameters mirror ImlOptions.
    """

    def __init__(
        self,
        sigma: float = 0.25,
        grid_half_width: float = 60.0,
        initial_grid_points: int = 4001,
        zoom_rounds: int = 4,
        zoom_factor: float = 10.0,
        wrap_terms: int | None = None,
        anchor_index: int = 0,
    ):
        self.sigma = sigma
        self.grid_half_width = grid_half_width
        self.initial_grid_points = initial_grid_points
        self.zoom_rounds = zoom_rounds
        self.zoom_factor = zoom_factor
        self.wrap_terms = wrap_terms
        self.anchor_index = anchor_index

    def fit(self, X, y):
        coeffs, phases = _validate_system_inputs(X, y)
        system = MeasurementSystem(
            y=phases,
            coeffs=coeffs,
            band_of=np.zeros(coeffs.size, dtype=np.int64),
            anchor_index=self.anchor_index,
        )
        options = ImlOptions(
            grid_half_width=self.grid_half_width,
            initial_grid_points=self.initial_grid_points,
            zoom_rounds=self.zoom_rounds,
            zoom_factor=self.zoom_factor,
            wrap_terms=self.wrap_terms,
        )
        self.velocity_ = solve_iml(system, self.sigma, options)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "velocity_")
        return wrap_phase(_validate_coeff_matrix(X) * self.velocity_)
