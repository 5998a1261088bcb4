"""Station-level Poisson GLM baseline, fitted independently per station.

The solver is iteratively reweighted least squares with step-halving on the
deviance and a small ridge term for numerical safety on quasi-separated
stations. With an all-zero response and an intercept-only design the ridge
keeps the optimum finite: the fit converges with an intercept below -10
rather than diverging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import UserInputError
from .ingest.design import ModelFrame
from .validation import as_count_array, as_float_array

_IRLS_TOL = 1e-10
_IRLS_MAX_ITER = 100


@dataclass
class GlmFit:
    """Fitted Poisson regression: coefficients, covariance, and diagnostics."""

    coefficients: np.ndarray
    covariance: np.ndarray  # inverse Fisher information (ridge included)
    deviance: float
    iterations: int
    converged: bool
    column_names: tuple[str, ...] = ()


def poisson_deviance(y: np.ndarray, mu: np.ndarray) -> float:
    """2 * sum(y log(y/mu) - (y - mu)); the y=0 terms reduce to 2 mu."""
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(y / mu), 0.0)
    return float(2.0 * np.sum(term - (y - mu)))


def irls_poisson(
    X,
    y,
    ridge: float = 1e-8,
    max_iter: int = _IRLS_MAX_ITER,
    column_names: tuple[str, ...] = (),
) -> GlmFit:
    """Maximize the ridge-penalized Poisson log likelihood with a log link.

    Converges on a relative deviance change below 1e-10; divergence or the
    iteration cap leaves ``converged`` False with the last iterate returned.
    """
    X = as_float_array(X, "X", ndim=2)
    y = as_count_array(y, "y").astype(float)
    if X.shape[0] != y.shape[0]:
        raise UserInputError("X and y row counts differ")
    if X.shape[0] < 1:
        raise UserInputError("irls_poisson requires at least one row")
    n, p = X.shape
    beta = np.zeros(p)
    mu = np.exp(X @ beta)
    dev = poisson_deviance(y, mu) + ridge * float(beta @ beta)
    converged = False
    iterations = 0
    penalty = ridge * np.eye(p)
    for iterations in range(1, max_iter + 1):
        eta = X @ beta
        mu = np.exp(eta)
        w = mu
        z = eta + (y - mu) / np.maximum(mu, 1e-300)
        xtw = X.T * w
        lhs = xtw @ X + penalty
        rhs = xtw @ z
        try:
            beta_target = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            break
        step = beta_target - beta
        step_size = 1.0
        new_dev = None
        for _ in range(40):
            candidate = beta + step_size * step
            cand_dev = poisson_deviance(y, np.exp(X @ candidate)) + ridge * float(
                candidate @ candidate
            )
            if np.isfinite(cand_dev) and cand_dev <= dev:
                new_dev = cand_dev
                beta = candidate
                break
            step_size *= 0.5
        if new_dev is None:
            break
        change = abs(dev - new_dev) / (abs(dev) + 1e-10)
        dev = new_dev
        if change < _IRLS_TOL:
            converged = True
            break
    mu = np.exp(X @ beta)
    xtw = X.T * mu
    covariance = np.linalg.inv(xtw @ X + penalty)
    return GlmFit(
        coefficients=beta,
        covariance=covariance,
        deviance=poisson_deviance(y, mu),
        iterations=iterations,
        converged=converged,
        column_names=tuple(column_names),
    )


def glm_predict(fit: GlmFit, X_new) -> np.ndarray:
    """Mean counts exp(X beta); the design must match the fitted columns."""
    X_new = as_float_array(X_new, "X_new", ndim=2)
    if X_new.shape[1] != fit.coefficients.shape[0]:
        raise UserInputError(
            f"design has {X_new.shape[1]} columns, fit expects {fit.coefficients.shape[0]}"
        )
    return np.exp(X_new @ fit.coefficients)


@dataclass
class StationFit:
    """Per-station fit plus which design columns it kept."""

    glm: GlmFit
    columns: tuple[str, ...]
    intercept_only: bool = False


def _station_design(frame: ModelFrame, rows: np.ndarray) -> tuple[np.ndarray, tuple[str, ...]]:
    """Per-station design: drop columns constant within the station (the
    intercept column stays)."""
    X = frame.X[rows]
    keep = []
    for k, name in enumerate(frame.column_names):
        if name == "intercept":
            keep.append(k)
            continue
        if np.ptp(X[:, k]) > 0.0:
            keep.append(k)
    names = tuple(frame.column_names[k] for k in keep)
    return X[:, keep], names


def fit_all_stations(frame: ModelFrame, ridge: float = 1e-8) -> dict[str, StationFit]:
    """Independent Poisson GLM per station.

    Stations with fewer rows than parameters plus one fall back to an
    intercept-only fit and are flagged.
    """
    fits: dict[str, StationFit] = {}
    for c, cpid in enumerate(frame.cpids):
        rows = np.flatnonzero(frame.cpid_index == c)
        if rows.size == 0:
            continue
        X, names = _station_design(frame, rows)
        intercept_only = rows.size < X.shape[1] + 1
        if intercept_only:
            X = np.ones((rows.size, 1))
            names = ("intercept",)
        glm = irls_poisson(X, frame.y[rows], ridge=ridge, column_names=names)
        fits[cpid] = StationFit(glm=glm, columns=names, intercept_only=intercept_only)
    return fits


def predict_all_stations(
    fits: dict[str, StationFit], frame: ModelFrame
) -> pd.DataFrame:
    """Per-row mean counts (columns: cpid, day, mean) from the station fits."""
    name_pos = {name: k for k, name in enumerate(frame.column_names)}
    means = np.empty(frame.n_rows)
    for c, cpid in enumerate(frame.cpids):
        rows = np.flatnonzero(frame.cpid_index == c)
        if rows.size == 0:
            continue
        if cpid not in fits:
            raise UserInputError(f"no baseline fit for CPID {cpid!r}")
        fit = fits[cpid]
        if fit.intercept_only:
            X = np.ones((rows.size, 1))
        else:
            cols = [name_pos[name] for name in fit.columns]
            X = frame.X[np.ix_(rows, cols)]
        means[rows] = glm_predict(fit.glm, X)
    return pd.DataFrame(
        {
            "cpid": [frame.cpids[i] for i in frame.cpid_index],
            "day": [frame.days[i] for i in frame.day_index],
            "mean": means,
        }
    )
