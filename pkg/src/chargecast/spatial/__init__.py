"""Spatial building blocks: adjacency graphs, GMRF structure matrices,
planar projection, mesh construction, and the finite-element Matern field."""

from .fem import FemMatrices, assemble_fem
from .graph import (
    AdjacencyGraph,
    bridge_components,
    connected_components,
    knn_graph,
    write_adjacency_text,
    write_edge_list_csv,
)
from .meshing import (
    EXTENSION_ZONE,
    INNER_ZONE,
    Mesh,
    build_mesh,
    mesh_geojson,
    projection_matrix,
    rectangular_mesh,
    write_mesh_csv,
    write_mesh_geojson,
)
from .projection import EARTH_RADIUS_M, LocalProjection, PlanarPoints, project_coords
from .spde import SpdeParams, matern_correlation, range_variance, sample_gmrf, spde_precision
from .structure import StructureMatrix, icar_structure, log_gamma_prior_logdensity, rw2_structure

__all__ = [
    "AdjacencyGraph",
    "EARTH_RADIUS_M",
    "EXTENSION_ZONE",
    "FemMatrices",
    "INNER_ZONE",
    "LocalProjection",
    "Mesh",
    "PlanarPoints",
    "SpdeParams",
    "StructureMatrix",
    "assemble_fem",
    "bridge_components",
    "build_mesh",
    "connected_components",
    "icar_structure",
    "knn_graph",
    "log_gamma_prior_logdensity",
    "matern_correlation",
    "mesh_geojson",
    "project_coords",
    "projection_matrix",
    "range_variance",
    "rectangular_mesh",
    "rw2_structure",
    "sample_gmrf",
    "spde_precision",
    "write_adjacency_text",
    "write_edge_list_csv",
    "write_mesh_csv",
    "write_mesh_geojson",
]
