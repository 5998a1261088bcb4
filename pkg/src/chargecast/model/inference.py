"""Hyperparameter exploration and posterior summaries.

The hyperparameter posterior is explored on a deterministic grid: a
derivative-free simplex search finds the mode of the Laplace-approximated
evidence, central finite differences estimate its curvature, and an
axis-aligned grid in the curvature-whitened space (5 points per axis, +/-2.5
standard deviations) carries normalized weights. Latent posteriors are
Gaussian mixtures over the grid.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtr

from ..errors import NumericalError
from .gaussian import GaussianApprox, SparseSpdFactor, gaussian_approx
from .latent import LatentModel
from .likelihoods import LOG_2PI


@dataclass
class HyperPoint:
    """One explored hyperparameter point with its weight in the grid mixture."""

    theta: np.ndarray
    log_posterior: float
    weight: float
    approx: GaussianApprox | None = field(default=None, repr=False, compare=False)


def log_marginal(model: LatentModel, theta, y=None, approx: GaussianApprox | None = None) -> float:
    """Laplace approximation of ``log p(y, theta)`` (unnormalized posterior).

    Evaluates ``log pi(theta) + log p(x*|theta) + log p(y|x*) - log q(x*)``
    at the (constrained) mode, where q is the Gaussian approximation whose
    value at its own mode is ``log det(H)/2 - n log(2 pi)/2``. Under linear
    constraints both the prior and the approximation receive the matching
    conditional-density corrections.
    """
    theta = np.asarray(theta, dtype=float)
    y = model.y if y is None else np.asarray(y, dtype=float)
    if approx is None:
        approx = gaussian_approx(model, theta, y)
    x = approx.mode
    n_latent = model.n_latent

    q = model.prior_precision(theta).tocsc()
    q_factor = SparseSpdFactor(q)
    value = model.log_hyperprior(theta)
    value += 0.5 * q_factor.logdet - 0.5 * n_latent * LOG_2PI - 0.5 * float(x @ (q @ x))
    value += float(np.sum(model.likelihood.log_prob(model.incidence @ x, y)))
    value -= 0.5 * approx.log_det - 0.5 * n_latent * LOG_2PI

    if model.constraints is not None and approx.correction is not None:
        a = approx.correction.A
        v_prior = np.column_stack([q_factor.solve(a[i]) for i in range(a.shape[0])])
        s_prior = a @ v_prior
        sign, logdet_prior = np.linalg.slogdet(0.5 * (s_prior + s_prior.T))
        if sign <= 0:
            raise NumericalError("constraint prior normal matrix not positive definite")
        value += 0.5 * logdet_prior
        value -= 0.5 * approx.correction.logdet_M
    return float(value)


def _fd_hessian(fun, x0: np.ndarray, f0: float, step: float) -> np.ndarray:
    """Central-difference Hessian estimate."""
    d = x0.size
    hess = np.empty((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = step
        f_plus = fun(x0 + ei)
        f_minus = fun(x0 - ei)
        hess[i, i] = (f_plus - 2.0 * f0 + f_minus) / step**2
    for i in range(d):
        for j in range(i + 1, d):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = step
            ej[j] = step
            fpp = fun(x0 + ei + ej)
            fpm = fun(x0 + ei - ej)
            fmp = fun(x0 - ei + ej)
            fmm = fun(x0 - ei - ej)
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * step**2)
    return hess


def explore_grid(
    model: LatentModel,
    y=None,
    theta_init=None,
    points_per_axis: int = 5,
    sd_span: float = 2.5,
    fd_step: float = 0.05,
    simplex_tol: float = 1e-4,
    max_evaluations: int = 500,
) -> list[HyperPoint]:
    """Locate the hyperparameter mode and lay a whitened grid around it.

    Returns grid points in deterministic (itertools.product) order with
    normalized weights; the central point is the located mode.
    """
    y = model.y if y is None else np.asarray(y, dtype=float)
    d = model.n_hyper
    if d > 3:
        raise NumericalError("grid exploration supports at most 3 hyperparameters")
    theta0 = np.asarray(
        model.theta_init if theta_init is None else theta_init, dtype=float
    )

    warm: dict[str, np.ndarray | None] = {"x": None}

    def evaluate(theta: np.ndarray) -> tuple[float, GaussianApprox]:
        approx = gaussian_approx(model, theta, y, x0=warm["x"])
        warm["x"] = approx.unconstrained_mode
        return log_marginal(model, theta, y, approx=approx), approx

    result = minimize(
        lambda t: -evaluate(np.asarray(t, dtype=float))[0],
        theta0,
        method="Nelder-Mead",
        options={
            "xatol": simplex_tol,
            "fatol": 1e-8,
            "maxfev": max_evaluations,
            "disp": False,
        },
    )
    if not result.success:
        raise NumericalError(
            f"simplex search did not converge within {max_evaluations} evaluations: "
            f"{result.message}"
        )
    theta_star = np.asarray(result.x, dtype=float)
    lp_star, _ = evaluate(theta_star)

    neg_hess = -_fd_hessian(lambda t: evaluate(t)[0], theta_star, lp_star, fd_step)
    neg_hess = 0.5 * (neg_hess + neg_hess.T)
    eigval, eigvec = np.linalg.eigh(neg_hess)
    floor = max(np.max(np.abs(eigval)), 1e-8) * 1e-8
    eigval = np.clip(eigval, floor, None)
    axis_sd = 1.0 / np.sqrt(eigval)

    offsets = np.linspace(-sd_span, sd_span, points_per_axis)
    points: list[HyperPoint] = []
    for combo in itertools.product(offsets, repeat=d):
        z = np.asarray(combo, dtype=float)
        theta_g = theta_star + eigvec @ (z * axis_sd)
        if np.allclose(z, 0.0):
            theta_g = theta_star
        lp, approx = evaluate(theta_g)
        points.append(HyperPoint(theta=theta_g, log_posterior=lp, weight=0.0, approx=approx))

    log_weights = np.array([p.log_posterior for p in points])
    log_weights -= log_weights.max()
    weights = np.exp(log_weights)
    weights /= weights.sum()
    for p, w in zip(points, weights):
        p.weight = float(w)
    return points


@dataclass
class PosteriorSummary:
    """Posterior summaries of fixed effects, hyperparameters, and latent fields."""

    fixed_effects: list[dict]
    hyperparameters: list[dict]
    temporal: dict  # {"mean": [...], "sd": [...]}
    spatial: dict
    dic: float | None = None
    waic: float | None = None
    p_dic: float | None = None
    p_waic: float | None = None

    def to_dict(self) -> dict:
        return {
            "fixed_effects": self.fixed_effects,
            "hyperparameters": self.hyperparameters,
            "temporal": self.temporal,
            "spatial": self.spatial,
            "dic": self.dic,
            "waic": self.waic,
            "p_dic": self.p_dic,
            "p_waic": self.p_waic,
        }


def _mixture_quantile(
    means: np.ndarray, sds: np.ndarray, weights: np.ndarray, prob: float
) -> float:
    """Quantile of a Gaussian mixture by bisection on its CDF."""
    sds = np.maximum(sds, 1e-300)
    lo = float(np.min(means - 10.0 * sds))
    hi = float(np.max(means + 10.0 * sds))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        cdf = float(weights @ ndtr((mid - means) / sds))
        if cdf < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * (1.0 + abs(mid)):
            break
    return 0.5 * (lo + hi)


def _weighted_quantile(values: np.ndarray, weights: np.ndarray, prob: float) -> float:
    order = np.argsort(values)
    cum = np.cumsum(weights[order])
    idx = int(np.searchsorted(cum, prob, side="left"))
    idx = min(idx, values.size - 1)
    return float(values[order][idx])


def _grid_moments(grid: list[HyperPoint]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    thetas = np.array([p.theta for p in grid])
    weights = np.array([p.weight for p in grid])
    return thetas, weights, np.array([p.log_posterior for p in grid])


def marginals(model: LatentModel, grid: list[HyperPoint], y=None) -> PosteriorSummary:
    """Mixture-of-Gaussians posterior summaries over the explored grid."""
    if not grid:
        raise NumericalError("marginals requires a nonempty grid")
    y = model.y if y is None else np.asarray(y, dtype=float)
    weights = np.array([p.weight for p in grid])
    modes = []
    sds = []
    for p in grid:
        approx = p.approx or gaussian_approx(model, p.theta, y)
        p.approx = approx
        modes.append(approx.mode)
        sds.append(approx.latent_sd())
    modes = np.array(modes)  # (G, n_latent)
    sds = np.array(sds)

    mix_mean = weights @ modes
    mix_var = weights @ (sds**2 + modes**2) - mix_mean**2
    mix_sd = np.sqrt(np.clip(mix_var, 0.0, None))

    fixed_slice = model.blocks.get("fixed", slice(0, model.n_latent))
    columns = model.meta.get("columns") or [
        f"x{i}" for i in range(fixed_slice.stop - fixed_slice.start)
    ]
    fixed_effects = []
    for local, name in enumerate(columns):
        i = fixed_slice.start + local
        fixed_effects.append(
            {
                "name": name,
                "mean": float(mix_mean[i]),
                "sd": float(mix_sd[i]),
                "q025": _mixture_quantile(modes[:, i], sds[:, i], weights, 0.025),
                "q975": _mixture_quantile(modes[:, i], sds[:, i], weights, 0.975),
            }
        )

    thetas, w, _ = _grid_moments(grid)
    hyperparameters = []
    for j, name in enumerate(model.theta_names):
        vals = thetas[:, j]
        mean = float(w @ vals)
        sd = float(np.sqrt(max(w @ vals**2 - mean**2, 0.0)))
        hyperparameters.append(
            {
                "name": name,
                "mean": mean,
                "sd": sd,
                "q025": _weighted_quantile(vals, w, 0.025),
                "q975": _weighted_quantile(vals, w, 0.975),
            }
        )
        if name.endswith("log_precision"):
            tau = np.exp(vals)
            tmean = float(w @ tau)
            hyperparameters.append(
                {
                    "name": name.replace("log_precision", "precision"),
                    "mean": tmean,
                    "sd": float(np.sqrt(max(w @ tau**2 - tmean**2, 0.0))),
                    "q025": _weighted_quantile(tau, w, 0.025),
                    "q975": _weighted_quantile(tau, w, 0.975),
                }
            )
    if model.meta.get("spatial_kind") == "spde":
        names = list(model.theta_names)
        i_tau, i_kappa = names.index("spde_log_tau"), names.index("spde_log_kappa")
        rng_vals = np.sqrt(8.0) * np.exp(-thetas[:, i_kappa])
        var_vals = 1.0 / (4.0 * np.pi * np.exp(2.0 * thetas[:, i_tau] + 2.0 * thetas[:, i_kappa]))
        for name, vals in (("spatial_range_m", rng_vals), ("spatial_marginal_var", var_vals)):
            mean = float(w @ vals)
            hyperparameters.append(
                {
                    "name": name,
                    "mean": mean,
                    "sd": float(np.sqrt(max(w @ vals**2 - mean**2, 0.0))),
                    "q025": _weighted_quantile(vals, w, 0.025),
                    "q975": _weighted_quantile(vals, w, 0.975),
                }
            )

    temporal = {}
    spatial = {}
    if "temporal" in model.blocks:
        s = model.blocks["temporal"]
        temporal = {"mean": mix_mean[s].tolist(), "sd": mix_sd[s].tolist()}
    if "spatial" in model.blocks:
        s = model.blocks["spatial"]
        spatial = {"mean": mix_mean[s].tolist(), "sd": mix_sd[s].tolist()}

    return PosteriorSummary(
        fixed_effects=fixed_effects,
        hyperparameters=hyperparameters,
        temporal=temporal,
        spatial=spatial,
    )
