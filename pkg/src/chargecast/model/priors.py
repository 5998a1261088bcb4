"""Prior configuration for the latent Gaussian model."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UserInputError


@dataclass(frozen=True)
class PriorSpec:
    """Hyperprior and fixed-effect prior settings.

    Log-precisions of the random-walk and neighbourhood components get
    log-gamma priors; the continuous-field parameters (log tau, log kappa) get
    wide Gaussians. ``intrinsic_jitter`` is added to the diagonal of the
    rank-deficient blocks so the joint prior precision factorizes; the
    identifiability constraints are then imposed exactly by conditioning.
    """

    fixed_effect_precision: float = 1e-3
    rw2_loggamma_shape: float = 1.0
    rw2_loggamma_rate: float = 5e-5
    icar_loggamma_shape: float = 1.0
    icar_loggamma_rate: float = 5e-5
    spde_log_tau_mean: float = 0.0
    spde_log_tau_sd: float = 10.0
    spde_log_kappa_mean: float = 0.0
    spde_log_kappa_sd: float = 10.0
    intrinsic_jitter: float = 1e-5

    def __post_init__(self):
        if self.fixed_effect_precision <= 0:
            raise UserInputError("fixed_effect_precision must be positive")
        if self.intrinsic_jitter <= 0:
            raise UserInputError("intrinsic_jitter must be positive")
        for name in ("rw2_loggamma_shape", "rw2_loggamma_rate",
                     "icar_loggamma_shape", "icar_loggamma_rate",
                     "spde_log_tau_sd", "spde_log_kappa_sd"):
            if getattr(self, name) <= 0:
                raise UserInputError(f"{name} must be positive")
