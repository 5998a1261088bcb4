"""Structure (precision) matrices for the intrinsic GMRF priors.

Both constructions are exact in integer arithmetic, so the returned sparse
matrices are bitwise symmetric. Rank deficiencies are declared explicitly
together with a null-space basis: the second-order random walk is invariant
to level shifts and linear trends (deficiency 2), the neighbourhood model to
level shifts only (deficiency 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma

import numpy as np
import scipy.sparse as sp

from ..errors import UserInputError
from .graph import AdjacencyGraph, connected_components


@dataclass(frozen=True)
class StructureMatrix:
    """A sparse symmetric GMRF structure or precision matrix."""

    matrix: sp.csr_matrix
    rank_deficiency: int
    null_basis: np.ndarray  # shape (n, rank_deficiency)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self) -> None:
        diff = (self.matrix - self.matrix.T).tocoo()
        if diff.nnz and np.max(np.abs(diff.data)) != 0.0:
            raise UserInputError("structure matrix is not exactly symmetric")
        if self.null_basis.shape != (self.dim, self.rank_deficiency):
            raise UserInputError(
                "null basis shape inconsistent with declared rank deficiency"
            )


def rw2_structure(n_periods: int) -> StructureMatrix:
    """Second-difference penalty matrix R = D2' D2 for a length-n random walk.

    R is banded with bandwidth 2 and f' R f equals the sum of squared second
    differences of f.
    """
    if n_periods < 3:
        raise UserInputError(f"rw2_structure requires n >= 3, got {n_periods}")
    d2 = sp.diags(
        [np.ones(n_periods - 2), -2.0 * np.ones(n_periods - 2), np.ones(n_periods - 2)],
        offsets=[0, 1, 2],
        shape=(n_periods - 2, n_periods),
        format="csr",
    )
    r = (d2.T @ d2).tocsr()
    r = ((r + r.T) * 0.5).tocsr()
    null = np.column_stack(
        [np.ones(n_periods), np.arange(1, n_periods + 1, dtype=float)]
    )
    return StructureMatrix(matrix=r, rank_deficiency=2, null_basis=null)


def icar_structure(graph: AdjacencyGraph) -> StructureMatrix:
    """Unscaled neighbourhood precision D - W for a connected adjacency graph.

    The diagonal holds node degrees and off-diagonals are -1 per edge, so each
    node's full conditional is centred at the plain average of its neighbours.
    """
    if len(connected_components(graph)) != 1:
        raise UserInputError(
            "icar_structure requires a connected graph; bridge components first"
        )
    n = graph.n_nodes
    i = graph.edges[:, 0]
    j = graph.edges[:, 1]
    degree = np.zeros(n)
    np.add.at(degree, i, 1.0)
    np.add.at(degree, j, 1.0)
    rows = np.concatenate([np.arange(n), i, j])
    cols = np.concatenate([np.arange(n), j, i])
    vals = np.concatenate([degree, -np.ones(len(i)), -np.ones(len(j))])
    q = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    null = np.ones((n, 1))
    return StructureMatrix(matrix=q, rank_deficiency=1, null_basis=null)


def log_gamma_prior_logdensity(theta, shape: float = 1.0, rate: float = 5e-5) -> float:
    """Log density of theta = log(tau) where tau ~ Gamma(shape, rate).

    Equals ``shape*theta - rate*exp(theta) - lgamma(shape) + shape*log(rate)``;
    the mode sits at ``log(shape/rate)``.
    """
    if shape <= 0 or rate <= 0:
        raise UserInputError("log-gamma prior requires positive shape and rate")
    theta = np.asarray(theta, dtype=float)
    value = shape * theta - rate * np.exp(theta) - lgamma(shape) + shape * np.log(rate)
    return float(value) if value.ndim == 0 else value
