"""Gaussian approximation of the latent field given data and hyperparameters.

The conditional mode maximizes ``loglik(B x) - x' Q x / 2`` by Newton
iterations with step-halving; the conditional precision at the mode is
``H = Q + B' diag(c) B``. Newton solves go through a sparse LU factorization;
moment extraction (marginal variances, eta variances, posterior draws) uses a
dense Cholesky factor of H, built once per hyperparameter point at the mode.
Linear constraints are imposed exactly afterwards by conditioning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from ..errors import NumericalError
from .latent import LatentModel

_OBJ_TOL = 1e-8
_GRAD_TOL = 1e-6
_MAX_HALVINGS = 40


class SparseSpdFactor:
    """Sparse LU factorization of a symmetric positive-definite matrix.

    Exposes solves and the log-determinant (the matrix is SPD, so the
    determinant is the product of the absolute U diagonal).
    """

    def __init__(self, matrix: sp.spmatrix):
        self.matrix = matrix.tocsc()
        self._lu = sla.splu(self.matrix)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._lu.solve(rhs)

    @property
    def logdet(self) -> float:
        diag = self._lu.U.diagonal()
        if np.any(diag == 0.0):
            raise NumericalError("singular factorization")
        return float(np.sum(np.log(np.abs(diag))))


class DenseSpdFactor:
    """Dense Cholesky factor of H for marginal variances and sampling."""

    def __init__(self, matrix: sp.spmatrix | np.ndarray):
        dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
        try:
            self.chol = np.linalg.cholesky(dense)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("conditional precision is not positive definite") from exc

    @property
    def dim(self) -> int:
        return self.chol.shape[0]

    def diag_inverse(self) -> np.ndarray:
        """diag(H^-1) as squared column norms of inv(L)."""
        inv_l = solve_triangular(self.chol, np.eye(self.dim), lower=True)
        return np.einsum("ij,ij->j", inv_l, inv_l)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        half = solve_triangular(self.chol, rhs, lower=True)
        return solve_triangular(self.chol.T, half, lower=False)

    def half_solve(self, rhs: np.ndarray) -> np.ndarray:
        """inv(L) @ rhs; squared column norms give quadratic forms in H^-1."""
        return solve_triangular(self.chol, rhs, lower=True)

    def sample(self, rng: np.random.Generator, n_samples: int) -> np.ndarray:
        """Draws from N(0, H^-1), one per column."""
        z = rng.standard_normal((self.dim, n_samples))
        return solve_triangular(self.chol.T, z, lower=False)


@dataclass
class ConstraintCorrection:
    """Quantities for conditioning a Gaussian on A x = 0 (kriging update)."""

    A: np.ndarray  # (c, n)
    V: np.ndarray  # (n, c) = H^-1 A'
    M: np.ndarray  # (c, c) = A H^-1 A'
    M_cho: tuple
    logdet_M: float

    def correct_vector(self, x: np.ndarray) -> np.ndarray:
        return x - self.V @ cho_solve(self.M_cho, self.A @ x)

    def variance_reduction(self) -> np.ndarray:
        """Per-element variance drop: diag(V M^-1 V')."""
        half = solve_triangular(np.linalg.cholesky(self.M), self.V.T, lower=True)
        return np.einsum("ij,ij->j", half, half)

    def eta_variance_reduction(self, vt_b: np.ndarray) -> np.ndarray:
        """Quadratic-form drop for predictor rows; ``vt_b = A H^-1 B'``."""
        half = solve_triangular(np.linalg.cholesky(self.M), vt_b, lower=True)
        return np.einsum("ij,ij->j", half, half)


def constrain(x: np.ndarray, solver, constraints: np.ndarray) -> tuple[np.ndarray, ConstraintCorrection]:
    """Condition on ``A x = 0`` by the kriging update.

    ``solver`` must expose ``solve``; returns the corrected vector together
    with the correction terms reused by the constrained Laplace log density
    and downstream variance reductions.
    """
    a = np.atleast_2d(np.asarray(constraints, dtype=float))
    v = np.column_stack([solver.solve(a[i]) for i in range(a.shape[0])])
    m = a @ v
    m = 0.5 * (m + m.T)
    try:
        m_cho = cho_factor(m, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("constraint normal matrix A H^-1 A' is singular") from exc
    logdet_m = 2.0 * float(np.sum(np.log(np.diag(m_cho[0]))))
    corr = ConstraintCorrection(A=a, V=v, M=m, M_cho=m_cho, logdet_M=logdet_m)
    return corr.correct_vector(x), corr


@dataclass
class GaussianApprox:
    """Mode and conditional precision of the latent field at one theta."""

    theta: np.ndarray
    mode: np.ndarray  # constrained mode
    unconstrained_mode: np.ndarray
    hessian: sp.csc_matrix  # H = Q + B' diag(c) B at the mode
    factor: SparseSpdFactor
    log_det: float
    objective: float
    iterations: int
    grad_norm: float
    correction: ConstraintCorrection | None = None
    _dense: DenseSpdFactor | None = None

    def dense_factor(self) -> DenseSpdFactor:
        if self._dense is None:
            self._dense = DenseSpdFactor(self.hessian)
        return self._dense

    def latent_sd(self) -> np.ndarray:
        """Constrained marginal standard deviations of the latent elements."""
        var = self.dense_factor().diag_inverse()
        if self.correction is not None:
            var = var - self.correction.variance_reduction()
        return np.sqrt(np.clip(var, 0.0, None))


def gaussian_approx(
    model: LatentModel,
    theta,
    y=None,
    x0: np.ndarray | None = None,
    max_iter: int = 50,
) -> GaussianApprox:
    """Newton mode search with step-halving line search.

    Converges when the objective gain drops below 1e-8 or the gradient norm
    below 1e-6 per latent dimension; raises after ``max_iter`` iterations.
    """
    theta = np.asarray(theta, dtype=float)
    y = model.y if y is None else np.asarray(y, dtype=float)
    b = model.incidence
    lik = model.likelihood
    q = model.prior_precision(theta).tocsc()
    n_latent = model.n_latent

    def objective(x: np.ndarray) -> float:
        eta = b @ x
        return float(np.sum(lik.log_prob(eta, y)) - 0.5 * x @ (q @ x))

    x = np.zeros(n_latent) if x0 is None else np.asarray(x0, dtype=float).copy()
    obj = objective(x)
    factor: SparseSpdFactor | None = None
    grad_norm = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        eta = b @ x
        grad = b.T @ lik.gradient(eta, y) - q @ x
        grad_norm = float(np.linalg.norm(grad))
        curv = lik.curvature(eta, y)
        hessian = (q + (b.T.multiply(curv) @ b)).tocsc()
        factor = SparseSpdFactor(hessian)
        step = factor.solve(grad)

        step_size = 1.0
        new_obj = None
        for _ in range(_MAX_HALVINGS):
            candidate = x + step_size * step
            cand_obj = objective(candidate)
            if np.isfinite(cand_obj) and cand_obj >= obj:
                new_obj = cand_obj
                x = candidate
                break
            step_size *= 0.5
        if new_obj is None:
            # no ascent possible: accept the current point as the mode
            new_obj = obj
        gain = new_obj - obj
        obj = new_obj
        eta = b @ x
        grad = b.T @ lik.gradient(eta, y) - q @ x
        grad_norm = float(np.linalg.norm(grad))
        if gain < _OBJ_TOL or grad_norm < _GRAD_TOL * n_latent:
            break
    else:
        raise NumericalError(
            f"Newton did not converge in {max_iter} iterations "
            f"(theta={theta.tolist()}, grad_norm={grad_norm:.3e})"
        )

    # refresh the factorization at the final mode
    eta = b @ x
    curv = lik.curvature(eta, y)
    hessian = (q + (b.T.multiply(curv) @ b)).tocsc()
    factor = SparseSpdFactor(hessian)

    correction = None
    mode = x
    if model.constraints is not None:
        mode, correction = constrain(x, factor, model.constraints)

    return GaussianApprox(
        theta=theta,
        mode=mode,
        unconstrained_mode=x,
        hessian=hessian,
        factor=factor,
        log_det=factor.logdet,
        objective=obj,
        iterations=iterations,
        grad_norm=grad_norm,
        correction=correction,
    )
