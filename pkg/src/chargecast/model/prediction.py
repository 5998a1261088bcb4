"""Out-of-sample prediction from a fitted grid mixture.

Each new row receives the posterior mean and variance of its linear predictor
from every grid component; the predicted count level is the lognormal-mixture
mean ``sum_g w_g exp(mu_g + var_g / 2)`` and the reported interval comes from
the lognormal mixture quantiles. Temporal indices beyond the training window
reuse the last training state of the random walk and are flagged as
extrapolated.
"""

from __future__ import annotations

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.special import ndtr

from ..errors import UserInputError
from .gaussian import gaussian_approx
from .inference import HyperPoint
from .latent import IcarSpatialSpec, LatentModel

_CHUNK = 1024


def _build_incidence(model: LatentModel, frame) -> tuple[sp.csr_matrix, np.ndarray]:
    """Incidence of new frame rows in the fitted model's latent layout."""
    columns = model.meta.get("columns")
    if columns is not None and list(frame.column_names) != list(columns):
        raise UserInputError("new frame columns do not match the fitted design")
    train_days = model.meta["days"]
    train_cpids = model.meta["cpids"]
    day_position = {d: i for i, d in enumerate(train_days)}
    cpid_position = {c: i for i, c in enumerate(train_cpids)}
    last_day = max(train_days)

    n = frame.X.shape[0]
    day_idx = np.empty(n, dtype=int)
    extrapolated = np.zeros(n, dtype=bool)
    for r in range(n):
        day = frame.days[frame.day_index[r]]
        if day in day_position:
            day_idx[r] = day_position[day]
        elif day > last_day:
            day_idx[r] = len(train_days) - 1
            extrapolated[r] = True
        else:
            raise UserInputError(
                f"day {day} precedes or falls inside the training window but was never observed"
            )
    unit_idx = np.empty(n, dtype=int)
    for r in range(n):
        cpid = frame.cpids[frame.cpid_index[r]]
        if cpid not in cpid_position:
            raise UserInputError(f"unknown CPID {cpid!r}: not part of the fitted model")
        unit_idx[r] = cpid_position[cpid]

    blocks = model.blocks
    n_time = blocks["temporal"].stop - blocks["temporal"].start
    n_space = blocks["spatial"].stop - blocks["spatial"].start
    time_inc = sp.csr_matrix((np.ones(n), (np.arange(n), day_idx)), shape=(n, n_time))
    spatial_spec = model.meta["spatial_spec"]
    if isinstance(spatial_spec, IcarSpatialSpec):
        space_inc = sp.csr_matrix(
            (np.ones(n), (np.arange(n), unit_idx)), shape=(n, n_space)
        )
    else:
        space_inc = spatial_spec.station_weights[unit_idx]
    incidence = sp.hstack([sp.csr_matrix(frame.X), time_inc, space_inc]).tocsr()
    return incidence, extrapolated


def _lognormal_mixture_quantile(
    mu: np.ndarray, sd: np.ndarray, weights: np.ndarray, prob: float
) -> np.ndarray:
    """Row-wise quantiles of exp(eta) mixtures by vectorized bisection.

    ``mu`` and ``sd`` have shape (G, n); returns (n,).
    """
    sd = np.maximum(sd, 1e-12)
    lo = np.min(mu - 10.0 * sd, axis=0)
    hi = np.max(mu + 10.0 * sd, axis=0)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        cdf = np.einsum("g,gn->n", weights, ndtr((mid[None, :] - mu) / sd))
        too_low = cdf < prob
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
    return np.exp(0.5 * (lo + hi))


def predict(
    model: LatentModel,
    grid: list[HyperPoint],
    frame,
    y=None,
    level: float = 0.95,
) -> pd.DataFrame:
    """Predict counts for the rows of ``frame`` under the fitted mixture.

    Returns one row per frame row: cpid, day, observed count (if present),
    predicted mean count, its standard deviation, the central interval at
    ``level``, and the extrapolation flag.
    """
    if not grid:
        raise UserInputError("predict requires a nonempty grid")
    y = model.y if y is None else np.asarray(y, dtype=float)
    incidence, extrapolated = _build_incidence(model, frame)
    n = incidence.shape[0]
    weights = np.array([p.weight for p in grid])

    mu = np.empty((len(grid), n))
    var = np.empty((len(grid), n))
    for g, point in enumerate(grid):
        approx = point.approx or gaussian_approx(model, point.theta, y)
        point.approx = approx
        mu[g] = incidence @ approx.mode
        dense = approx.dense_factor()
        bt = incidence.T.tocsc()
        for start in range(0, n, _CHUNK):
            stop = min(start + _CHUNK, n)
            block = np.asarray(bt[:, start:stop].todense())
            half = dense.half_solve(block)
            var[g, start:stop] = np.einsum("ij,ij->j", half, half)
            if approx.correction is not None:
                vt_b = approx.correction.V.T @ block
                var[g, start:stop] -= approx.correction.eta_variance_reduction(vt_b)
    var = np.clip(var, 0.0, None)

    mean_count = np.einsum("g,gn->n", weights, np.exp(mu + 0.5 * var))
    second_moment = np.einsum("g,gn->n", weights, np.exp(2.0 * mu + 2.0 * var))
    sd_count = np.sqrt(np.clip(second_moment - mean_count**2, 0.0, None))
    alpha = (1.0 - level) / 2.0
    sd = np.sqrt(var)
    lo = _lognormal_mixture_quantile(mu, sd, weights, alpha)
    hi = _lognormal_mixture_quantile(mu, sd, weights, 1.0 - alpha)

    out = pd.DataFrame(
        {
            "cpid": [frame.cpids[i] for i in frame.cpid_index],
            "day": [frame.days[i] for i in frame.day_index],
            "mean": mean_count,
            "sd": sd_count,
            "lo95": lo,
            "hi95": hi,
            "extrapolated": extrapolated,
        }
    )
    if getattr(frame, "y", None) is not None and len(frame.y) == n:
        out.insert(2, "y_true", np.asarray(frame.y))
    return out
