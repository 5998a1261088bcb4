"""Command-line orchestration of the full pipeline.

Subcommands: ``ingest`` (raw logs -> panel/frame + curation report), ``mesh``
(station geometry artifacts), ``fit`` (train a spatial model), ``predict``,
``baseline`` (per-station GLMs), ``evaluate`` (score one prediction file),
``benchmark`` (score several and compare station-wise), and ``eda``
(weekday/daily summaries). Exit codes: 0 success, 1 user error, 2 numerical
failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd

from . import artifacts
from .baseline import fit_all_stations, predict_all_stations
from .errors import NumericalError, UserInputError
from .estimators import CountForecaster
from .ingest.config import PipelineConfig
from .ingest.curate import curate
from .ingest.design import ModelFrame, build_frame, temporal_split
from .ingest.panel import aggregate_daily
from .ingest.records import load_sessions_csv, load_stations_csv, load_weather_csv
from .metrics import DominanceResult, dominance, metric_table, weekday_summary
from .spatial.graph import write_adjacency_text, write_edge_list_csv
from .model.latent import make_icar_spec, make_spde_spec
from .spatial.meshing import write_mesh_csv, write_mesh_geojson

_FLOAT_FORMAT = "%.17g"


def _load_config(path: str | None) -> PipelineConfig:
    return PipelineConfig.from_json(path) if path else PipelineConfig()


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_frame(path: str) -> ModelFrame:
    try:
        table = pd.read_csv(path, dtype={"cpid": str})
    except OSError as exc:
        raise UserInputError(f"cannot read frame {path}: {exc}") from exc
    table["day"] = pd.to_datetime(table["day"]).dt.date
    return ModelFrame.from_dataframe(table)


def _write_frame(frame: ModelFrame, path: Path) -> None:
    table = frame.to_dataframe()
    table["day"] = table["day"].map(str)
    table.to_csv(path, index=False, float_format=_FLOAT_FORMAT)


@click.group(name="chargecast")
def cli_group():
    """Spatio-temporal forecasting of daily EV-charging session counts."""


@cli_group.command("ingest")
@click.option("--sessions", "session_files", multiple=True, required=True, help="Session CSV file(s).")
@click.option("--stations", "stations_file", required=True, help="Station metadata CSV.")
@click.option("--weather", "weather_file", required=True, help="Per-day weather CSV.")
@click.option("--config", "config_file", default=None, help="JSON run configuration.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
def ingest_cmd(session_files, stations_file, weather_file, config_file, out_dir):
    """Curate raw logs into panel.csv, frame CSVs, and a curation report."""
    config = _load_config(config_file)
    out = _outdir(out_dir)
    records = []
    for path in session_files:
        records.extend(load_sessions_csv(path, column_map=config.column_map or None))
    stations = load_stations_csv(stations_file)
    weather = load_weather_csv(weather_file)

    sessions, report = curate(records, config.curation())
    panel = aggregate_daily(sessions, stations, zero_fill=config.zero_fill)
    report.unmatched_session_cpids = panel.attrs.get("unmatched_sessions", {})
    frame = build_frame(panel, weather, spline_training_cutoff=config.split_date)
    train, test = temporal_split(frame, config.split_date)

    panel_out = panel.copy()
    panel_out["day"] = panel_out["day"].map(str)
    panel_out.to_csv(out / "panel.csv", index=False, float_format=_FLOAT_FORMAT)
    _write_frame(frame, out / "frame.csv")
    _write_frame(train, out / "frame_train.csv")
    _write_frame(test, out / "frame_test.csv")
    report.write_json(out / "curation_report.json")
    click.echo(
        f"ingest: kept {report.total_kept}/{report.total_input} sessions, "
        f"{len(panel)} panel rows, {frame.n_stations} stations, {frame.n_days} days"
    )


@cli_group.command("mesh")
@click.option("--stations", "stations_file", required=True, help="Station metadata CSV.")
@click.option("--frame", "frame_file", default=None, help="Optional frame CSV restricting the station set.")
@click.option("--config", "config_file", default=None)
@click.option("--out", "out_dir", required=True)
def mesh_cmd(stations_file, frame_file, config_file, out_dir):
    """Emit mesh and adjacency-graph artifacts for the station geometry."""
    config = _load_config(config_file)
    out = _outdir(out_dir)
    stations = load_stations_csv(stations_file)
    if frame_file:
        cpids = tuple(_read_frame(frame_file).cpids)
    else:
        cpids = tuple(sorted(stations["cpid"]))
    spde_spec = make_spde_spec(
        stations,
        cpids,
        inner_edge=config.mesh_inner_edge_m,
        outer_edge=config.mesh_outer_edge_m,
        cutoff=config.mesh_cutoff_m,
    )
    icar_spec = make_icar_spec(stations, cpids, k=config.knn_k)
    write_mesh_csv(spde_spec.mesh, out / "mesh_vertices.csv", out / "mesh_triangles.csv")
    write_mesh_geojson(spde_spec.mesh, out / "mesh.geojson")
    write_edge_list_csv(icar_spec.graph, out / "graph_edges.csv")
    write_adjacency_text(icar_spec.graph, out / "graph_adjacency.txt")
    click.echo(
        f"mesh: {spde_spec.mesh.n_vertices} vertices, {spde_spec.mesh.n_triangles} triangles; "
        f"graph: {len(icar_spec.graph.edges)} edges"
    )


@cli_group.command("fit")
@click.option("--spatial", type=click.Choice(["icar", "spde"]), required=True)
@click.option("--frame", "frame_file", required=True, help="Training frame CSV.")
@click.option("--stations", "stations_file", required=True)
@click.option("--config", "config_file", default=None)
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_dir", required=True, help="Fit artifact directory.")
def fit_cmd(spatial, frame_file, stations_file, config_file, seed, out_dir):
    """Fit a spatio-temporal model on the training frame."""
    config = _load_config(config_file)
    out = _outdir(out_dir)
    frame = _read_frame(frame_file)
    stations = load_stations_csv(stations_file)
    forecaster = CountForecaster(
        spatial=spatial,
        k_neighbors=config.knn_k,
        inner_edge_m=config.mesh_inner_edge_m,
        outer_edge_m=config.mesh_outer_edge_m,
        cutoff_m=config.mesh_cutoff_m,
        points_per_axis=config.grid_points_per_axis,
        sd_span=config.grid_sd_span,
        n_draws=config.n_draws,
        seed=seed,
    ).fit(frame, stations)
    train_preds = forecaster.predict(frame)
    artifacts.write_fit_artifact(out, forecaster, stations, train_predictions=train_preds)
    _write_frame(frame, out / "frame_train.csv")
    click.echo(
        f"fit[{spatial}]: dic={forecaster.summary_.dic:.1f} waic={forecaster.summary_.waic:.1f} "
        f"({len(forecaster.grid_)} grid points)"
    )


@cli_group.command("predict")
@click.option("--fit", "fit_dir", required=True, help="Fit artifact directory.")
@click.option("--frame", "frame_file", required=True, help="Frame CSV to predict.")
@click.option("--out", "out_dir", required=True)
def predict_cmd(fit_dir, frame_file, out_dir):
    """Predict counts for a frame with a stored fit."""
    out = _outdir(out_dir)
    train_frame = _read_frame(str(Path(fit_dir) / "frame_train.csv"))
    forecaster = artifacts.load_fit(fit_dir, train_frame)
    frame = _read_frame(frame_file)
    preds = forecaster.predict(frame)
    artifacts.write_predictions_csv(preds, out / "predictions.csv")
    click.echo(f"predict: {len(preds)} rows -> {out / 'predictions.csv'}")


@cli_group.command("baseline")
@click.option("--frame-train", "train_file", required=True)
@click.option("--frame-test", "test_file", default=None, help="Defaults to scoring the training frame.")
@click.option("--out", "out_dir", required=True)
def baseline_cmd(train_file, test_file, out_dir):
    """Fit independent per-station Poisson GLMs and write mean predictions."""
    out = _outdir(out_dir)
    train = _read_frame(train_file)
    target = _read_frame(test_file) if test_file else train
    fits = fit_all_stations(train)
    preds = predict_all_stations(fits, target)
    artifacts.write_predictions_csv(preds, out / "baseline_predictions.csv")
    flagged = sorted(c for c, f in fits.items() if f.intercept_only)
    message = f"baseline: fitted {len(fits)} stations"
    if flagged:
        message += f" (intercept-only: {flagged})"
    click.echo(message)


def _join_predictions(truth: ModelFrame, predictions: pd.DataFrame) -> pd.DataFrame:
    pred = predictions.copy()
    if "mean" not in pred.columns:
        raise UserInputError("prediction file needs a 'mean' column")
    key_truth = pd.DataFrame(
        {
            "cpid": [truth.cpids[i] for i in truth.cpid_index],
            "day": truth.row_days(),
            "y_true": truth.y,
        }
    )
    merged = key_truth.merge(
        pred[["cpid", "day", "mean"]].rename(columns={"mean": "y_pred"}),
        on=["cpid", "day"],
        how="left",
    )
    missing = merged["y_pred"].isna().sum()
    if missing:
        raise UserInputError(
            f"predictions missing for {missing} truth rows (join on cpid, day)"
        )
    return merged


@cli_group.command("evaluate")
@click.option("--predictions", "pred_file", required=True)
@click.option("--truth", "truth_file", required=True, help="Frame CSV with observed counts.")
@click.option("--label", default=None, help="Model label (defaults to file stem).")
@click.option("--out", "out_dir", required=True)
def evaluate_cmd(pred_file, truth_file, label, out_dir):
    """Score one prediction file against observed counts."""
    out = _outdir(out_dir)
    truth = _read_frame(truth_file)
    preds = artifacts.read_predictions_csv(pred_file)
    name = label or Path(pred_file).stem
    merged = _join_predictions(truth, preds)
    table, pooled = metric_table(merged, name)
    table.to_csv(out / "metrics.csv", index=False, float_format=_FLOAT_FORMAT)
    (out / "metrics.json").write_text(
        json.dumps(pooled, indent=2, sort_keys=True), encoding="utf-8"
    )
    click.echo(
        f"evaluate[{name}]: mae={pooled['mae']:.4f} rmse={pooled['rmse']:.4f} "
        f"mape={pooled['mape']:.2f}% ({pooled['mape_skipped']} zero rows skipped)"
    )


@cli_group.command("benchmark")
@click.option(
    "--predictions",
    "pred_specs",
    multiple=True,
    required=True,
    help="label=path prediction files (repeatable).",
)
@click.option("--truth", "truth_file", required=True)
@click.option("--out", "out_dir", required=True)
def benchmark_cmd(pred_specs, truth_file, out_dir):
    """Score several prediction files and compare them station by station."""
    out = _outdir(out_dir)
    truth = _read_frame(truth_file)
    tables = {}
    pooled_rows = []
    long_rows = []
    for spec in pred_specs:
        if "=" in spec:
            name, path = spec.split("=", 1)
        else:
            name, path = Path(spec).stem, spec
        preds = artifacts.read_predictions_csv(path)
        merged = _join_predictions(truth, preds)
        table, pooled = metric_table(merged, name)
        tables[name] = table
        pooled_rows.append(pooled)
        for _, row in table.iterrows():
            for metric in ("mae", "rmse", "mape"):
                long_rows.append(
                    {
                        "cpid": row["cpid"],
                        "model": name,
                        "metric": metric,
                        "value": row[metric],
                    }
                )
    long_table = pd.DataFrame(long_rows).sort_values(["cpid", "model", "metric"])
    long_table.to_csv(out / "benchmark_long.csv", index=False, float_format=_FLOAT_FORMAT)
    pd.DataFrame(pooled_rows).to_csv(
        out / "benchmark_pooled.csv", index=False, float_format=_FLOAT_FORMAT
    )

    names = sorted(tables)
    dom_rows = []
    for a in names:
        for b in names:
            if a >= b:
                continue
            for metric in ("mae", "rmse", "mape"):
                ea = dict(zip(tables[a]["cpid"], tables[a][metric]))
                eb = dict(zip(tables[b]["cpid"], tables[b][metric]))
                result = dominance(ea, eb, metric=metric)
                dom_rows.append(
                    {
                        "model_a": a,
                        "model_b": b,
                        "metric": metric,
                        "wins_a": result.wins_a,
                        "wins_b": result.wins_b,
                        "ties": result.ties,
                        "wins_a_pct": result.wins_a_pct,
                        "wins_b_pct": result.wins_b_pct,
                    }
                )
    pd.DataFrame(dom_rows).to_csv(
        out / "dominance.csv", index=False, float_format=_FLOAT_FORMAT
    )
    click.echo(f"benchmark: {len(names)} models over {len(truth.cpids)} stations")


@cli_group.command("eda")
@click.option("--panel", "panel_file", required=True)
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_dir", required=True)
def eda_cmd(panel_file, seed, out_dir):
    """Weekday demand profile and the daily sessions/active-station series."""
    out = _outdir(out_dir)
    panel = pd.read_csv(panel_file, dtype={"cpid": str})
    panel["day"] = pd.to_datetime(panel["day"]).dt.date
    summary = weekday_summary(panel, seed=seed)
    summary.to_csv(out / "weekday_summary.csv", index=False, float_format=_FLOAT_FORMAT)
    daily = (
        panel.groupby("day")
        .agg(total_sessions=("y", "sum"), active_stations=("cpid", "nunique"))
        .reset_index()
    )
    daily["day"] = daily["day"].map(str)
    daily.to_csv(out / "daily_series.csv", index=False, float_format=_FLOAT_FORMAT)
    click.echo(f"eda: {len(summary)} weekdays, {len(daily)} days")


def main(argv=None) -> int:
    """Run the CLI and translate failures into exit codes (0/1/2)."""
    try:
        cli_group.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except UserInputError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
