"""Fit-directory artifacts: plot-ready CSVs, JSON summaries, and enough model
metadata to reload a fit for later prediction.

A fit directory contains: ``summary.json`` (posterior summary incl. DIC and
WAIC), ``grid.csv`` (explored hyperparameter points), ``latent_time.csv`` and
``latent_space.csv``/``latent_space.geojson`` (posterior latent effects),
``predictions.csv`` (training-window fit), ``model_spec.json`` plus
``stations.csv`` (reconstruction inputs), and ``modes.npz`` (warm starts).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import UserInputError
from .estimators import CountForecaster
from .ingest.design import ModelFrame
from .ingest.records import load_stations_csv
from .model.gaussian import gaussian_approx
from .model.inference import HyperPoint
from .model.latent import (
    IcarSpatialSpec,
    Rw2TemporalSpec,
    assemble,
    make_icar_spec,
    make_spde_spec,
)

_FLOAT_FORMAT = "%.17g"


def _write_csv(table: pd.DataFrame, path: Path) -> None:
    table.to_csv(path, index=False, float_format=_FLOAT_FORMAT)


def write_fit_artifact(
    fitdir: Path | str,
    forecaster: CountForecaster,
    stations: pd.DataFrame,
    train_predictions: pd.DataFrame | None = None,
) -> None:
    fitdir = Path(fitdir)
    fitdir.mkdir(parents=True, exist_ok=True)
    model = forecaster.model_
    summary = forecaster.summary_

    (fitdir / "summary.json").write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )

    grid_rows = []
    for p in forecaster.grid_:
        row = {f"theta_{name}": float(v) for name, v in zip(model.theta_names, p.theta)}
        row["log_posterior"] = p.log_posterior
        row["weight"] = p.weight
        grid_rows.append(row)
    _write_csv(pd.DataFrame(grid_rows), fitdir / "grid.csv")

    days = model.meta["days"]
    _write_csv(
        pd.DataFrame(
            {
                "day": [str(d) for d in days],
                "mean": summary.temporal["mean"],
                "sd": summary.temporal["sd"],
            }
        ),
        fitdir / "latent_time.csv",
    )

    spec = model.meta["spatial_spec"]
    spatial_mean = np.asarray(summary.spatial["mean"])
    spatial_sd = np.asarray(summary.spatial["sd"])
    if isinstance(spec, IcarSpatialSpec):
        units = list(spec.cpids)
        lonlat = spec.points.projection.to_lonlat(spec.points.xy)
        unit_col = "cpid"
    else:
        units = list(range(spec.mesh.n_vertices))
        lonlat = spec.points.projection.to_lonlat(spec.mesh.vertices)
        unit_col = "vertex"
    _write_csv(
        pd.DataFrame(
            {
                unit_col: units,
                "lon": lonlat[:, 0],
                "lat": lonlat[:, 1],
                "mean": spatial_mean,
                "sd": spatial_sd,
            }
        ),
        fitdir / "latent_space.csv",
    )
    features = []
    for i, unit in enumerate(units):
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [float(lonlat[i, 0]), float(lonlat[i, 1])],
                },
                "properties": {
                    unit_col: unit if isinstance(unit, str) else int(unit),
                    "mean": float(spatial_mean[i]),
                    "sd": float(spatial_sd[i]),
                },
            }
        )
    (fitdir / "latent_space.geojson").write_text(
        json.dumps({"type": "FeatureCollection", "features": features}, sort_keys=True),
        encoding="utf-8",
    )

    if train_predictions is not None:
        write_predictions_csv(train_predictions, fitdir / "predictions.csv")

    spec_json = {
        "spatial": forecaster.spatial,
        "k_neighbors": forecaster.k_neighbors,
        "inner_edge_m": forecaster.inner_edge_m,
        "outer_edge_m": forecaster.outer_edge_m,
        "cutoff_m": forecaster.cutoff_m,
        "points_per_axis": forecaster.points_per_axis,
        "sd_span": forecaster.sd_span,
        "n_draws": forecaster.n_draws,
        "seed": forecaster.seed,
        "columns": model.meta["columns"],
        "cpids": model.meta["cpids"],
        "days": [str(d) for d in days],
        "theta_names": list(model.theta_names),
    }
    (fitdir / "model_spec.json").write_text(
        json.dumps(spec_json, indent=2, sort_keys=True), encoding="utf-8"
    )
    _write_csv(
        stations.assign(
            tariff_start_date=stations["tariff_start_date"].map(
                lambda d: "" if pd.isna(d) else str(d)
            )
        ),
        fitdir / "stations.csv",
    )
    np.savez(
        fitdir / "modes.npz",
        thetas=np.array([p.theta for p in forecaster.grid_]),
        log_posteriors=np.array([p.log_posterior for p in forecaster.grid_]),
        weights=np.array([p.weight for p in forecaster.grid_]),
        modes=np.array([p.approx.unconstrained_mode for p in forecaster.grid_]),
    )


def write_predictions_csv(predictions: pd.DataFrame, path: Path | str) -> None:
    table = predictions.copy()
    table["day"] = table["day"].map(str)
    _write_csv(table, Path(path))


def read_predictions_csv(path: Path | str) -> pd.DataFrame:
    table = pd.read_csv(path, dtype={"cpid": str})
    table["day"] = pd.to_datetime(table["day"]).dt.date
    return table


def load_fit(fitdir: Path | str, train_frame: ModelFrame) -> CountForecaster:
    """Rebuild a fitted forecaster from its artifact directory.

    The training frame must be supplied (fit directories reference, not
    embed, the frame); the stored grid and modes make the rebuild exact
    without re-running the hyperparameter search.
    """
    fitdir = Path(fitdir)
    try:
        spec_json = json.loads((fitdir / "model_spec.json").read_text(encoding="utf-8"))
    except OSError as exc:
        raise UserInputError(f"not a fit directory: {fitdir} ({exc})") from exc
    if list(train_frame.column_names) != list(spec_json["columns"]):
        raise UserInputError("training frame columns do not match the fit artifact")
    if [str(d) for d in train_frame.days] != spec_json["days"]:
        raise UserInputError("training frame days do not match the fit artifact")
    if list(train_frame.cpids) != spec_json["cpids"]:
        raise UserInputError("training frame stations do not match the fit artifact")
    stations = load_stations_csv(fitdir / "stations.csv")

    forecaster = CountForecaster(
        spatial=spec_json["spatial"],
        k_neighbors=spec_json["k_neighbors"],
        inner_edge_m=spec_json["inner_edge_m"],
        outer_edge_m=spec_json["outer_edge_m"],
        cutoff_m=spec_json["cutoff_m"],
        points_per_axis=spec_json["points_per_axis"],
        sd_span=spec_json["sd_span"],
        n_draws=spec_json["n_draws"],
        seed=spec_json["seed"],
    )
    stored = np.load(fitdir / "modes.npz")

    if forecaster.spatial == "icar":
        spatial_spec = make_icar_spec(stations, train_frame.cpids, k=forecaster.k_neighbors)
    else:
        spatial_spec = make_spde_spec(
            stations,
            train_frame.cpids,
            inner_edge=forecaster.inner_edge_m,
            outer_edge=forecaster.outer_edge_m,
            cutoff=forecaster.cutoff_m,
        )
    temporal = Rw2TemporalSpec.for_days(train_frame.n_days)
    model = assemble(train_frame, spatial_spec, temporal)
    grid = []
    for i in range(stored["thetas"].shape[0]):
        theta = stored["thetas"][i]
        approx = gaussian_approx(model, theta, x0=stored["modes"][i])
        grid.append(
            HyperPoint(
                theta=theta,
                log_posterior=float(stored["log_posteriors"][i]),
                weight=float(stored["weights"][i]),
                approx=approx,
            )
        )
    forecaster.model_ = model
    forecaster.grid_ = grid
    forecaster.spatial_spec_ = spatial_spec
    forecaster.train_frame_ = train_frame
    return forecaster
