"""Matern-field precision matrices via the finite-element discretization.

With smoothness fixed at alpha = 2 (Matern nu = 1 in the plane) the field is
parameterized by theta1 = log(tau) and theta2 = log(kappa); its range is
``sqrt(8)/kappa`` and marginal variance ``1/(4 pi tau^2 kappa^2)``. The
discrete precision uses the lumped-mass form

    Q = tau^2 (kappa^4 C + 2 kappa^2 G + G C^{-1} G)

which stays sparse (vertices interact up to two mesh edges apart).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma as gamma_fn

import numpy as np
import scipy.sparse as sp
from scipy.special import kv

from ..errors import NumericalError, UserInputError
from .fem import FemMatrices
from .structure import StructureMatrix


@dataclass(frozen=True)
class SpdeParams:
    """Log-scale field parameters; smoothness is fixed (alpha=2, nu=1, d=2)."""

    log_tau: float
    log_kappa: float

    alpha: int = 2
    nu: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.log_tau) and np.isfinite(self.log_kappa)):
            raise UserInputError("SPDE parameters must be finite")
        if self.alpha != 2:
            raise UserInputError("only alpha = 2 is supported")


def spde_precision(fem: FemMatrices, params: SpdeParams) -> StructureMatrix:
    """Sparse precision of the discretized Matern field (positive definite)."""
    kappa = np.exp(params.log_kappa)
    tau = np.exp(params.log_tau)
    if not (np.isfinite(kappa) and kappa > 0):
        raise UserInputError("kappa must be positive and finite")
    c = sp.diags(fem.mass_diag)
    c_inv = sp.diags(1.0 / fem.mass_diag)
    g = fem.stiffness
    q = tau**2 * (kappa**4 * c + 2.0 * kappa**2 * g + g @ c_inv @ g)
    q = ((q + q.T) * 0.5).tocsr()
    return StructureMatrix(
        matrix=q, rank_deficiency=0, null_basis=np.empty((q.shape[0], 0))
    )


def matern_correlation(d, kappa: float, nu: float = 1.0):
    """Matern correlation at distance d: ``2^{1-nu}/Gamma(nu) (kd)^nu K_nu(kd)``.

    Continuous at zero where it equals one.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise UserInputError("distances must be nonnegative")
    x = kappa * d
    with np.errstate(invalid="ignore"):
        r = (2.0 ** (1.0 - nu) / gamma_fn(nu)) * x**nu * kv(nu, x)
    r = np.where(x == 0.0, 1.0, r)
    return float(r) if r.ndim == 0 else r


def range_variance(params: SpdeParams) -> tuple[float, float]:
    """Spatial range (meters) and marginal variance implied by the parameters."""
    kappa = np.exp(params.log_kappa)
    tau = np.exp(params.log_tau)
    rho = np.sqrt(8.0 * params.nu) / kappa
    sigma2 = 1.0 / (4.0 * np.pi * tau**2 * kappa**2)
    return float(rho), float(sigma2)


def sample_gmrf(
    precision: StructureMatrix | sp.spmatrix, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw samples from N(0, Q^{-1}) via a dense Cholesky factor of Q.

    Returns an (n_samples, dim) array. Intended for meshes small enough to
    densify (model validation and diagnostics, not production inference).
    """
    q = precision.matrix if isinstance(precision, StructureMatrix) else precision
    dense = np.asarray(q.todense(), dtype=float)
    try:
        chol = np.linalg.cholesky(dense)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("precision matrix is not positive definite") from exc
    z = rng.standard_normal((dense.shape[0], n_samples))
    from scipy.linalg import solve_triangular

    samples = solve_triangular(chol.T, z, lower=False)
    return samples.T
