"""Estimator-style front door for the forecasting engine.

``CountForecaster`` wraps spatial-spec construction, grid exploration,
posterior summarization, and prediction behind the familiar
fit/predict/get_params surface; ``PerStationPoissonGLM`` does the same for
the independent station baselines.
"""

from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .baseline import fit_all_stations, predict_all_stations
from .errors import UserInputError
from .ingest.design import ModelFrame
from .model.criteria import dic_from_loglik, posterior_draws, waic_from_loglik
from .model.inference import explore_grid, marginals
from .model.latent import Rw2TemporalSpec, assemble, make_icar_spec, make_spde_spec
from .model.prediction import predict as predict_counts
from .model.priors import PriorSpec

SPATIAL_KINDS = ("icar", "spde")


class CountForecaster(BaseEstimator):
    """Spatio-temporal Bayesian forecaster for daily station counts.

    Parameters mirror the pipeline configuration: the spatial smoother is
    either the discrete station-graph model (``spatial="icar"``) or the
    continuous mesh field (``spatial="spde"``). ``fit`` expects a ModelFrame
    plus the station metadata table providing coordinates.
    """

    def __init__(
        self,
        spatial: str = "icar",
        k_neighbors: int = 4,
        inner_edge_m: float = 200.0,
        outer_edge_m: float = 2000.0,
        cutoff_m: float = 100.0,
        priors: PriorSpec | None = None,
        points_per_axis: int = 5,
        sd_span: float = 2.5,
        n_draws: int = 200,
        seed: int = 0,
    ):
        self.spatial = spatial
        self.k_neighbors = k_neighbors
        self.inner_edge_m = inner_edge_m
        self.outer_edge_m = outer_edge_m
        self.cutoff_m = cutoff_m
        self.priors = priors
        self.points_per_axis = points_per_axis
        self.sd_span = sd_span
        self.n_draws = n_draws
        self.seed = seed

    def fit(self, frame: ModelFrame, stations: pd.DataFrame, theta_init=None):
        if self.spatial not in SPATIAL_KINDS:
            raise UserInputError(f"spatial must be one of {SPATIAL_KINDS}")
        if self.spatial == "icar":
            spec = make_icar_spec(stations, frame.cpids, k=self.k_neighbors)
        else:
            spec = make_spde_spec(
                stations,
                frame.cpids,
                inner_edge=self.inner_edge_m,
                outer_edge=self.outer_edge_m,
                cutoff=self.cutoff_m,
            )
        temporal = Rw2TemporalSpec.for_days(frame.n_days)
        model = assemble(frame, spec, temporal, priors=self.priors)
        grid = explore_grid(
            model,
            theta_init=theta_init,
            points_per_axis=self.points_per_axis,
            sd_span=self.sd_span,
        )
        summary = marginals(model, grid)
        draws = posterior_draws(model, grid, n_draws=self.n_draws, seed=self.seed)
        etas = (model.incidence @ draws.T).T
        row_loglik = model.likelihood.log_prob(etas, model.y[None, :])
        weights = np.array([p.weight for p in grid])
        modes = np.array([p.approx.mode for p in grid])
        x_bar = weights @ modes
        loglik_at_mean = float(
            np.sum(model.likelihood.log_prob(model.incidence @ x_bar, model.y))
        )
        summary.dic, summary.p_dic = dic_from_loglik(
            loglik_at_mean, row_loglik.sum(axis=1)
        )
        summary.waic, summary.p_waic = waic_from_loglik(row_loglik)

        self.model_ = model
        self.grid_ = grid
        self.summary_ = summary
        self.spatial_spec_ = spec
        self.train_frame_ = frame
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("CountForecaster is not fitted")

    def predict(self, frame: ModelFrame, level: float = 0.95) -> pd.DataFrame:
        self._check_fitted()
        return predict_counts(self.model_, self.grid_, frame, level=level)

    def score(self, frame: ModelFrame) -> float:
        """Negative MAE of the posterior-mean forecast (sklearn convention:
        larger is better)."""
        preds = self.predict(frame)
        return -float(np.mean(np.abs(preds["y_true"] - preds["mean"])))


class PerStationPoissonGLM(BaseEstimator):
    """Independent per-station Poisson regressions (no spatial pooling)."""

    def __init__(self, ridge: float = 1e-8):
        self.ridge = ridge

    def fit(self, frame: ModelFrame, stations: pd.DataFrame | None = None):
        self.fits_ = fit_all_stations(frame, ridge=self.ridge)
        return self

    def predict(self, frame: ModelFrame) -> pd.DataFrame:
        if not hasattr(self, "fits_"):
            raise NotFittedError("PerStationPoissonGLM is not fitted")
        return predict_all_stations(self.fits_, frame)
