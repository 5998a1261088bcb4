"""chargecast: spatio-temporal Bayesian forecasting of daily EV-charging counts.

The package follows the estimator idiom: build a ModelFrame with the ingest
pipeline, then ``CountForecaster(spatial=...).fit(frame, stations)`` and
``.predict(test_frame)``. Lower-level building blocks (graphs, meshes,
structure matrices, the Laplace engine) are importable from the ``spatial``
and ``model`` subpackages.
"""

from .baseline import GlmFit, fit_all_stations, glm_predict, irls_poisson
from .errors import ChargecastError, NumericalError, UserInputError
from .estimators import CountForecaster, PerStationPoissonGLM
from .ingest import ModelFrame, PipelineConfig, build_frame, temporal_split
from .metrics import bootstrap_ci, dominance, mae, mape, rmse, weekday_summary

__version__ = "0.1.0"

__all__ = [
    "ChargecastError",
    "CountForecaster",
    "GlmFit",
    "ModelFrame",
    "NumericalError",
    "PerStationPoissonGLM",
    "PipelineConfig",
    "UserInputError",
    "bootstrap_ci",
    "build_frame",
    "dominance",
    "fit_all_stations",
    "glm_predict",
    "irls_poisson",
    "mae",
    "mape",
    "rmse",
    "temporal_split",
    "weekday_summary",
    "__version__",
]
