"""Deviance- and pointwise-predictive model comparison criteria.

Both criteria are computed from latent draws of the fitted grid mixture:
a component is sampled per draw proportionally to its weight, then a draw is
taken from that component's constrained Gaussian. Seeds are fixed by callers
for reproducibility.
"""

from __future__ import annotations

import numpy as np

from ..errors import UserInputError
from .gaussian import gaussian_approx
from .inference import HyperPoint
from .latent import LatentModel


def posterior_draws(
    model: LatentModel,
    grid: list[HyperPoint],
    y=None,
    n_draws: int = 200,
    seed: int = 0,
) -> np.ndarray:
    """Latent draws (n_draws, n_latent) from the grid mixture."""
    if n_draws < 1:
        raise UserInputError("n_draws must be positive")
    y = model.y if y is None else np.asarray(y, dtype=float)
    rng = np.random.default_rng(seed)
    weights = np.array([p.weight for p in grid])
    components = rng.choice(len(grid), size=n_draws, p=weights)
    draws = np.empty((n_draws, model.n_latent))
    for g in range(len(grid)):
        rows = np.flatnonzero(components == g)
        if rows.size == 0:
            continue
        point = grid[g]
        approx = point.approx or gaussian_approx(model, point.theta, y)
        point.approx = approx
        noise = approx.dense_factor().sample(rng, rows.size)  # (n_latent, k)
        if approx.correction is not None:
            corr = approx.correction
            noise = noise - corr.V @ np.linalg.solve(corr.M, corr.A @ noise)
        draws[rows] = approx.mode[None, :] + noise.T
    return draws


def _row_loglik_draws(model: LatentModel, draws: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-row log likelihood for each draw, shape (n_draws, n_rows)."""
    etas = (model.incidence @ draws.T).T
    return model.likelihood.log_prob(etas, y[None, :])


def dic_from_loglik(loglik_at_mean: float, loglik_draws: np.ndarray) -> tuple[float, float]:
    """DIC and its effective-parameter count from total log likelihoods.

    ``p_D = 2 (log p(y | x_bar) - mean_s log p(y | x_s))`` and
    ``DIC = -2 log p(y | x_bar) + 2 p_D``.
    """
    p_d = 2.0 * (loglik_at_mean - float(np.mean(loglik_draws)))
    return -2.0 * loglik_at_mean + 2.0 * p_d, p_d


def waic_from_loglik(row_loglik: np.ndarray) -> tuple[float, float]:
    """WAIC and its penalty from per-row draw log likelihoods (S, n_rows).

    Uses ``-2 sum_r (log mean_s p(y_r|x_s) - var_s log p(y_r|x_s))`` with the
    sample (ddof=1) variance.
    """
    s = row_loglik.shape[0]
    max_per_row = row_loglik.max(axis=0)
    lppd = max_per_row + np.log(np.mean(np.exp(row_loglik - max_per_row), axis=0))
    penalty = row_loglik.var(axis=0, ddof=1) if s > 1 else np.zeros(row_loglik.shape[1])
    return float(-2.0 * np.sum(lppd - penalty)), float(np.sum(penalty))


def dic(
    model: LatentModel,
    grid: list[HyperPoint],
    y=None,
    n_draws: int = 200,
    seed: int = 0,
    draws: np.ndarray | None = None,
) -> float:
    """Deviance information criterion of the fitted mixture (lower is better)."""
    y = model.y if y is None else np.asarray(y, dtype=float)
    if draws is None:
        draws = posterior_draws(model, grid, y, n_draws=n_draws, seed=seed)
    weights = np.array([p.weight for p in grid])
    modes = []
    for p in grid:
        approx = p.approx or gaussian_approx(model, p.theta, y)
        p.approx = approx
        modes.append(approx.mode)
    x_bar = weights @ np.array(modes)
    loglik_at_mean = float(np.sum(model.likelihood.log_prob(model.incidence @ x_bar, y)))
    row_loglik = _row_loglik_draws(model, draws, y)
    value, _ = dic_from_loglik(loglik_at_mean, row_loglik.sum(axis=1))
    return value


def waic(
    model: LatentModel,
    grid: list[HyperPoint],
    y=None,
    n_draws: int = 200,
    seed: int = 0,
    draws: np.ndarray | None = None,
) -> float:
    """Widely applicable information criterion (lower is better)."""
    y = model.y if y is None else np.asarray(y, dtype=float)
    if draws is None:
        draws = posterior_draws(model, grid, y, n_draws=n_draws, seed=seed)
    row_loglik = _row_loglik_draws(model, draws, y)
    value, _ = waic_from_loglik(row_loglik)
    return value
