"""Assembly of the joint latent Gaussian model.

The latent vector is laid out as ``[fixed effects | temporal effect | spatial
effect]``. Every observation row touches the fixed-effect block through its
covariate row, exactly one temporal element (its day), and either one spatial
unit (discrete neighbourhood model) or up to three mesh vertices (continuous
field, barycentric weights). Sum-to-zero constraints on the temporal and
spatial blocks keep the decomposition identifiable next to the intercept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from ..errors import UserInputError
from ..spatial.fem import FemMatrices, assemble_fem
from ..spatial.graph import AdjacencyGraph, bridge_components, knn_graph
from ..spatial.meshing import Mesh, build_mesh, projection_matrix
from ..spatial.projection import PlanarPoints, project_coords
from ..spatial.spde import SpdeParams, spde_precision
from ..spatial.structure import (
    StructureMatrix,
    icar_structure,
    log_gamma_prior_logdensity,
    rw2_structure,
)
from .likelihoods import LOG_2PI, PoissonLikelihood
from .priors import PriorSpec


@dataclass(frozen=True)
class Rw2TemporalSpec:
    """Second-order random-walk smoother over consecutive periods."""

    n_periods: int
    structure: StructureMatrix

    @classmethod
    def for_days(cls, n_periods: int) -> "Rw2TemporalSpec":
        return cls(n_periods=n_periods, structure=rw2_structure(n_periods))


@dataclass(frozen=True)
class IcarSpatialSpec:
    """Discrete spatial smoother on a station adjacency graph."""

    kind = "icar"
    graph: AdjacencyGraph
    structure: StructureMatrix
    cpids: tuple[str, ...]
    points: PlanarPoints

    @property
    def n_units(self) -> int:
        return len(self.cpids)


@dataclass(frozen=True)
class SpdeSpatialSpec:
    """Continuous Matern field on a triangulated mesh."""

    kind = "spde"
    mesh: Mesh
    fem: FemMatrices
    station_weights: sp.csr_matrix  # (n_stations, n_vertices) barycentric rows
    cpids: tuple[str, ...]
    points: PlanarPoints

    @property
    def n_units(self) -> int:
        return self.mesh.n_vertices


def _station_points(stations, cpids: tuple[str, ...]) -> PlanarPoints:
    table = stations.set_index("cpid") if "cpid" in stations.columns else stations
    missing = [c for c in cpids if c not in table.index]
    if missing:
        raise UserInputError(f"stations table missing coordinates for CPIDs {missing}")
    lonlat = np.column_stack(
        [
            [float(table.loc[c, "lon"]) for c in cpids],
            [float(table.loc[c, "lat"]) for c in cpids],
        ]
    )
    return project_coords(lonlat)


def make_icar_spec(stations, cpids, k: int = 4) -> IcarSpatialSpec:
    """Build the k-nearest-neighbour graph (bridged to one component) and its
    structure matrix for the given station order."""
    cpids = tuple(str(c) for c in cpids)
    points = _station_points(stations, cpids)
    graph = bridge_components(knn_graph(points.xy, k=k))
    return IcarSpatialSpec(
        graph=graph, structure=icar_structure(graph), cpids=cpids, points=points
    )


def make_spde_spec(
    stations,
    cpids,
    inner_edge: float = 200.0,
    outer_edge: float = 2000.0,
    cutoff: float = 100.0,
) -> SpdeSpatialSpec:
    """Build the mesh over the stations plus their barycentric weight rows."""
    cpids = tuple(str(c) for c in cpids)
    points = _station_points(stations, cpids)
    mesh = build_mesh(points, inner_edge=inner_edge, outer_edge=outer_edge, cutoff=cutoff)
    fem = assemble_fem(mesh)
    weights = projection_matrix(mesh, points)
    return SpdeSpatialSpec(
        mesh=mesh, fem=fem, station_weights=weights, cpids=cpids, points=points
    )


@dataclass
class LatentModel:
    """Joint model: incidence, priors, constraints, and hyperparameter map.

    ``prior_precision(theta)`` returns the (jittered, full-rank) joint prior
    precision; ``log_hyperprior(theta)`` the hyperparameter log prior. The
    inference engine only relies on these callables plus the incidence and
    likelihood, so reduced test models can be constructed directly.
    """

    y: np.ndarray
    incidence: sp.csr_matrix  # (n_rows, n_latent)
    likelihood: object
    prior_precision: Callable[[np.ndarray], sp.csc_matrix]
    log_hyperprior: Callable[[np.ndarray], float]
    theta_names: tuple[str, ...]
    theta_init: np.ndarray
    constraints: np.ndarray | None = None  # (n_constraints, n_latent)
    blocks: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def n_latent(self) -> int:
        return self.incidence.shape[1]

    @property
    def n_rows(self) -> int:
        return self.incidence.shape[0]

    @property
    def n_hyper(self) -> int:
        return len(self.theta_names)

    def validate(self) -> None:
        if self.y.shape[0] != self.n_rows:
            raise UserInputError("response length does not match incidence rows")
        if self.constraints is not None:
            a = np.atleast_2d(self.constraints)
            if a.shape[1] != self.n_latent:
                raise UserInputError("constraint width does not match latent dimension")
            if np.linalg.matrix_rank(a) < a.shape[0]:
                raise UserInputError("constraint matrix is row-rank deficient")


def _gaussian_logpdf(x: float, mean: float, sd: float) -> float:
    z = (x - mean) / sd
    return -0.5 * z * z - np.log(sd) - 0.5 * LOG_2PI


def assemble(
    frame,
    spatial_spec: IcarSpatialSpec | SpdeSpatialSpec,
    temporal_spec: Rw2TemporalSpec,
    priors: PriorSpec | None = None,
    likelihood=None,
) -> LatentModel:
    """Wire a model frame and its spatial/temporal smoothers into a LatentModel."""
    priors = priors or PriorSpec()
    likelihood = likelihood or PoissonLikelihood()
    if temporal_spec.n_periods != len(frame.days):
        raise UserInputError(
            f"temporal spec covers {temporal_spec.n_periods} periods, frame has {len(frame.days)} days"
        )
    if tuple(spatial_spec.cpids) != tuple(frame.cpids):
        raise UserInputError("spatial spec station order does not match frame CPIDs")

    n = frame.X.shape[0]
    n_fixed = frame.X.shape[1]
    n_time = temporal_spec.n_periods
    n_space = spatial_spec.n_units

    time_inc = sp.csr_matrix(
        (np.ones(n), (np.arange(n), frame.day_index)), shape=(n, n_time)
    )
    if isinstance(spatial_spec, IcarSpatialSpec):
        space_inc = sp.csr_matrix(
            (np.ones(n), (np.arange(n), frame.cpid_index)), shape=(n, n_space)
        )
    else:
        space_inc = spatial_spec.station_weights[frame.cpid_index]
    incidence = sp.hstack([sp.csr_matrix(frame.X), time_inc, space_inc]).tocsr()

    blocks = {
        "fixed": slice(0, n_fixed),
        "temporal": slice(n_fixed, n_fixed + n_time),
        "spatial": slice(n_fixed + n_time, n_fixed + n_time + n_space),
    }
    n_latent = n_fixed + n_time + n_space

    constraints = np.zeros((2, n_latent))
    constraints[0, blocks["temporal"]] = 1.0
    constraints[1, blocks["spatial"]] = 1.0

    rw2 = temporal_spec.structure.matrix
    jitter = priors.intrinsic_jitter
    fixed_block = sp.identity(n_fixed) * priors.fixed_effect_precision

    if isinstance(spatial_spec, IcarSpatialSpec):
        icar = spatial_spec.structure.matrix

        def prior_precision(theta: np.ndarray) -> sp.csc_matrix:
            theta_t, theta_s = float(theta[0]), float(theta[1])
            return sp.block_diag(
                [
                    fixed_block,
                    np.exp(theta_t) * rw2 + jitter * sp.identity(n_time),
                    np.exp(theta_s) * icar + jitter * sp.identity(n_space),
                ],
                format="csc",
            )

        def log_hyperprior(theta: np.ndarray) -> float:
            return log_gamma_prior_logdensity(
                theta[0], priors.rw2_loggamma_shape, priors.rw2_loggamma_rate
            ) + log_gamma_prior_logdensity(
                theta[1], priors.icar_loggamma_shape, priors.icar_loggamma_rate
            )

        theta_names = ("rw2_log_precision", "icar_log_precision")
        theta_init = np.array([4.0, 4.0])
        spatial_kind = "icar"
    else:
        fem = spatial_spec.fem

        def prior_precision(theta: np.ndarray) -> sp.csc_matrix:
            theta_t = float(theta[0])
            q_space = spde_precision(
                fem, SpdeParams(log_tau=float(theta[1]), log_kappa=float(theta[2]))
            ).matrix
            return sp.block_diag(
                [
                    fixed_block,
                    np.exp(theta_t) * rw2 + jitter * sp.identity(n_time),
                    q_space,
                ],
                format="csc",
            )

        def log_hyperprior(theta: np.ndarray) -> float:
            return (
                log_gamma_prior_logdensity(
                    theta[0], priors.rw2_loggamma_shape, priors.rw2_loggamma_rate
                )
                + _gaussian_logpdf(
                    float(theta[1]), priors.spde_log_tau_mean, priors.spde_log_tau_sd
                )
                + _gaussian_logpdf(
                    float(theta[2]), priors.spde_log_kappa_mean, priors.spde_log_kappa_sd
                )
            )

        xy = spatial_spec.points.xy
        diameter = float(np.hypot(*(xy.max(axis=0) - xy.min(axis=0))))
        log_kappa0 = float(np.log(np.sqrt(8.0) / (0.2 * diameter)))
        log_tau0 = float(-0.5 * np.log(4.0 * np.pi) - log_kappa0)
        theta_names = ("rw2_log_precision", "spde_log_tau", "spde_log_kappa")
        theta_init = np.array([4.0, log_tau0, log_kappa0])
        spatial_kind = "spde"

    model = LatentModel(
        y=np.asarray(frame.y, dtype=float),
        incidence=incidence,
        likelihood=likelihood,
        prior_precision=prior_precision,
        log_hyperprior=log_hyperprior,
        theta_names=theta_names,
        theta_init=theta_init,
        constraints=constraints,
        blocks=blocks,
        meta={
            "spatial_kind": spatial_kind,
            "columns": list(frame.column_names),
            "cpids": list(frame.cpids),
            "days": list(frame.days),
            "spatial_spec": spatial_spec,
            "temporal_spec": temporal_spec,
            "priors": priors,
        },
    )
    model.validate()
    return model


def joint_prior_precision(model: LatentModel, theta) -> StructureMatrix:
    """Joint prior precision at theta as a full-rank structure matrix."""
    q = model.prior_precision(np.asarray(theta, dtype=float)).tocsr()
    return StructureMatrix(matrix=q, rank_deficiency=0, null_basis=np.empty((q.shape[0], 0)))
