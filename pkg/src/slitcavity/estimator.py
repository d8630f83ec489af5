"""scikit-learn style wrapper: wavenumbers in, enhancement factors out."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .approx import approx_enhancement, single_mode_solve
from .bie import DEFAULT_GRID, DEFAULT_MODES, solve_enhancement
from .cavity import Bottom, CavityGeometry, IncidentWave


class EnhancementSpectrum(TransformerMixin, BaseEstimator):
    """Map a column of wavenumbers to ``[Q_E, Q_H]``.

    Nothing is learned from data; ``fit`` validates the cavity parameters and
    freezes the geometry so that ``transform`` is a pure function of ``X``.
    """

    def __init__(
        self,
        epsilon: float = 0.005,
        depth: float = 1.0,
        theta: float = math.pi / 3,
        bottom: str = "pmc",
        solver: str = "bie",
        grid_size: int = DEFAULT_GRID,
        n_modes: int = DEFAULT_MODES,
    ) -> None:
        self.epsilon = epsilon
        self.depth = depth
        self.theta = theta
        self.bottom = bottom
        self.solver = solver
        self.grid_size = grid_size
        self.n_modes = n_modes

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError("X must have a single column of wavenumbers")
        if self.solver not in ("bie", "single-mode"):
            raise ValueError(f"unknown solver {self.solver!r}")
        self.geometry_ = CavityGeometry(self.epsilon, self.depth, Bottom.parse(self.bottom))
        self.n_features_in_ = 1
        return self

    def _one(self, kappa: float) -> tuple[float, float]:
        wave = IncidentWave(float(kappa), self.theta)
        if self.solver == "single-mode":
            return approx_enhancement(single_mode_solve(wave, self.geometry_))
        rec = solve_enhancement(wave, self.geometry_, self.grid_size, self.n_modes)
        return rec.Q_E, rec.Q_H

    def transform(self, X):
        check_is_fitted(self, "geometry_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError("X must have a single column of wavenumbers")
        return np.array([self._one(k) for k in X[:, 0]])

    def get_feature_names_out(self, input_features=None):
        return np.array(["Q_E", "Q_H"], dtype=object)
