"""Observation models for the latent Gaussian engine.

Each likelihood exposes per-row log probability, gradient, and curvature
(negative second derivative) with respect to the linear predictor. The
Gaussian variant exists for exactness checks: with it the Laplace
approximation is exact and the engine must reproduce conjugate formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class PoissonLikelihood:
    """Counts with a log link: E[y] = exp(eta).

    Overflowing exponentials produce infinities that the mode search's line
    search rejects, so they are not raised as warnings here.
    """

    name: str = "poisson"

    def log_prob(self, eta: np.ndarray, y: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return y * eta - np.exp(eta) - gammaln(y + 1.0)

    def gradient(self, eta: np.ndarray, y: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return y - np.exp(eta)

    def curvature(self, eta: np.ndarray, y: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(eta)


@dataclass(frozen=True)
class GaussianLikelihood:
    """Gaussian observations with known precision (scalar or per-row)."""

    precision: float | np.ndarray = 1.0
    name: str = "gaussian"

    def _prec(self, eta: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.precision, dtype=float), eta.shape)

    def log_prob(self, eta: np.ndarray, y: np.ndarray) -> np.ndarray:
        p = self._prec(eta)
        return -0.5 * p * (y - eta) ** 2 + 0.5 * (np.log(p) - LOG_2PI)

    def gradient(self, eta: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self._prec(eta) * (y - eta)

    def curvature(self, eta: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self._prec(eta).copy()
