"""Latent Gaussian model assembly and approximate Bayesian inference."""

from .criteria import dic, dic_from_loglik, posterior_draws, waic, waic_from_loglik
from .gaussian import (
    ConstraintCorrection,
    DenseSpdFactor,
    GaussianApprox,
    SparseSpdFactor,
    constrain,
    gaussian_approx,
)
from .inference import HyperPoint, PosteriorSummary, explore_grid, log_marginal, marginals
from .latent import (
    IcarSpatialSpec,
    LatentModel,
    Rw2TemporalSpec,
    SpdeSpatialSpec,
    assemble,
    joint_prior_precision,
    make_icar_spec,
    make_spde_spec,
)
from .likelihoods import GaussianLikelihood, PoissonLikelihood
from .prediction import predict
from .priors import PriorSpec

__all__ = [
    "ConstraintCorrection",
    "DenseSpdFactor",
    "GaussianApprox",
    "GaussianLikelihood",
    "HyperPoint",
    "IcarSpatialSpec",
    "LatentModel",
    "PoissonLikelihood",
    "PosteriorSummary",
    "PriorSpec",
    "Rw2TemporalSpec",
    "SparseSpdFactor",
    "SpdeSpatialSpec",
    "assemble",
    "constrain",
    "dic",
    "dic_from_loglik",
    "explore_grid",
    "gaussian_approx",
    "joint_prior_precision",
    "log_marginal",
    "make_icar_spec",
    "make_spde_spec",
    "marginals",
    "posterior_draws",
    "predict",
    "waic",
    "waic_from_loglik",
]
