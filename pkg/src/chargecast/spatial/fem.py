"""Linear finite-element matrices on a triangulated mesh.

Piecewise-linear hat functions give, per triangle of area A, a lumped mass
contribution A/3 to each vertex and the stiffness block
``A * grad(psi_k) . grad(psi_l) = (e_k . e_l) / (4A)`` where ``e_k`` is the
edge opposite vertex k of a counterclockwise triangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import NumericalError
from .meshing import Mesh, _MIN_TRIANGLE_AREA


@dataclass(frozen=True)
class FemMatrices:
    """Lumped mass diagonal and sparse stiffness matrix of a mesh."""

    mass_diag: np.ndarray  # (V,), entries = sum of adjacent triangle areas / 3
    stiffness: sp.csr_matrix  # (V, V), symmetric positive semidefinite

    @property
    def n_vertices(self) -> int:
        return self.mass_diag.shape[0]

    @property
    def total_area(self) -> float:
        return float(self.mass_diag.sum())


def assemble_fem(mesh: Mesh) -> FemMatrices:
    """Assemble lumped mass and stiffness matrices by summation over triangles."""
    areas = mesh.triangle_areas()
    degenerate = np.flatnonzero(areas <= _MIN_TRIANGLE_AREA)
    if degenerate.size:
        raise NumericalError(
            f"degenerate triangle(s) {degenerate.tolist()} during FEM assembly"
        )
    v = mesh.vertices
    t = mesh.triangles
    n = mesh.n_vertices

    mass = np.zeros(n)
    np.add.at(mass, t[:, 0], areas / 3.0)
    np.add.at(mass, t[:, 1], areas / 3.0)
    np.add.at(mass, t[:, 2], areas / 3.0)

    # edges opposite each vertex of a CCW triangle
    edges = np.stack(
        [
            v[t[:, 2]] - v[t[:, 1]],
            v[t[:, 0]] - v[t[:, 2]],
            v[t[:, 1]] - v[t[:, 0]],
        ],
        axis=1,
    )  # (T, 3, 2)
    local = np.einsum("tkd,tld->tkl", edges, edges) / (4.0 * areas)[:, None, None]
    rows = np.repeat(t, 3, axis=1).ravel()  # k index varies slowest
    cols = np.tile(t, (1, 3)).ravel()
    g = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    g = ((g + g.T) * 0.5).tocsr()
    return FemMatrices(mass_diag=mass, stiffness=g)
