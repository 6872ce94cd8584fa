"""Report emitters: proxy-ranking table, train/test metrics, interval forecast,
and a static SVG chart of actual-vs-predicted plus the horizon fan.

Column names are fixed (`Adjusted_CI_Lower_95%` etc.) so reports can be laid
side by side across runs and tools. All emitters are deterministic: identical
inputs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import warnings
from datetime import date
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "proxycast"  # deterministic element ids
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .boosting import ensemble_to_dict
from .errors import DataError
from .pipeline import ForecastOutcome, RankOutcome
from .selection import METHOD_LABELS

RANKING_CSV = "ranking.csv"
RANKING_JSON = "ranking.json"
METRICS_CSV = "metrics.csv"
METRICS_JSON = "metrics.json"
MODEL_JSON = "model.json"
FORECAST_CSV = "forecast.csv"
FORECAST_JSON = "forecast.json"
TEST_PREDICTIONS_CSV = "test_predictions.csv"
CHART_SVG = "forecast_chart.svg"


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def interval_columns(proxy_id: str, level: float) -> list[str]:
    pct = f"{level * 100:g}"
    return [
        "step",
        f"Predicted_{proxy_id}",
        f"Adjusted_CI_Lower_{pct}%",
        f"Adjusted_CI_Upper_{pct}%",
    ]


def write_ranking_reports(outcome: RankOutcome, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    k = outcome.consensus.k
    methods = [r.method for r in outcome.rankings]

    csv_path = out_dir / RANKING_CSV
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([METHOD_LABELS[m] for m in methods])
        tops = {m: outcome.consensus.per_method_top[m] for m in methods}
        for row_idx in range(k):
            writer.writerow(
                [tops[m][row_idx] if row_idx < len(tops[m]) else "" for m in methods]
            )

    payload = {
        "winner": outcome.consensus.winner,
        "k": k,
        "normalized": outcome.normalized,
        "methods": methods,
        "top_ranked": outcome.consensus.per_method_top,
        "borda_scores": outcome.consensus.borda_scores,
        "top1_counts": outcome.consensus.top1_counts,
        "distances": {
            r.method: [[cid, d] for cid, d in r.entries] for r in outcome.rankings
        },
        "excluded": {m: list(ids) for m, ids in outcome.consensus.excluded.items()},
        "skipped_candidates": outcome.skipped,
        "sparse_years": outcome.sparse,
    }
    json_path = out_dir / RANKING_JSON
    _write_json(json_path, payload)
    return [csv_path, json_path]


def _metrics_rows(outcome: ForecastOutcome) -> list[list[str]]:
    rows = []
    for split, m in (("train", outcome.train_metrics), ("test", outcome.test_metrics)):
        rows.append([split, _fmt(m.rmse), _fmt(m.mae), _fmt(m.r2)])
    return rows


def write_forecast_reports(outcome: ForecastOutcome, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    metrics_csv = out_dir / METRICS_CSV
    with open(metrics_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split", "RMSE", "MAE", "R^2"])
        writer.writerows(_metrics_rows(outcome))
    written.append(metrics_csv)

    hp = outcome.best_hp
    metrics_payload = {
        "proxy": outcome.proxy_id,
        "train": {
            "RMSE": outcome.train_metrics.rmse,
            "MAE": outcome.train_metrics.mae,
            "R^2": outcome.train_metrics.r2,
        },
        "test": {
            "RMSE": outcome.test_metrics.rmse,
            "MAE": outcome.test_metrics.mae,
            "R^2": outcome.test_metrics.r2,
        },
        "selected_hyperparams": {
            "rounds": hp.rounds,
            "max_depth": hp.max_depth,
            "learning_rate": hp.learning_rate,
            "l2_lambda": hp.l2_lambda,
            "l1_alpha": hp.l1_alpha,
            "gamma": hp.gamma,
            "min_child_weight": hp.min_child_weight,
        },
        "cv_mean_rmse": [
            {"config_index": i, "mean_rmse": score}
            for i, (_, score) in enumerate(outcome.cv_scores)
        ],
    }
    metrics_json = out_dir / METRICS_JSON
    _write_json(metrics_json, metrics_payload)
    written.append(metrics_json)

    model_json = out_dir / MODEL_JSON
    _write_json(model_json, ensemble_to_dict(outcome.model))
    written.append(model_json)

    columns = interval_columns(outcome.proxy_id, outcome.level)
    forecast_csv = out_dir / FORECAST_CSV
    with open(forecast_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in outcome.intervals:
            writer.writerow([row.step, _fmt(row.point), _fmt(row.lower), _fmt(row.upper)])
    written.append(forecast_csv)

    forecast_json = out_dir / FORECAST_JSON
    _write_json(
        forecast_json,
        {
            "proxy": outcome.proxy_id,
            "level": outcome.level,
            "inflation": outcome.inflation,
            "columns": columns,
            "rows": [
                {"step": r.step, "point": r.point, "lower": r.lower, "upper": r.upper}
                for r in outcome.intervals
            ],
        },
    )
    written.append(forecast_json)

    test_csv = out_dir / TEST_PREDICTIONS_CSV
    with open(test_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "actual", "predicted"])
        for d, a, p in zip(outcome.test_dates, outcome.test_actual, outcome.test_predicted):
            writer.writerow([d.isoformat(), _fmt(a), _fmt(p)])
    written.append(test_csv)
    return written


def read_forecast_rows(out_dir: Path) -> tuple[list[str], list[dict]]:
    """Load the interval report back for rendering."""
    path = Path(out_dir) / FORECAST_CSV
    if not path.exists():
        raise DataError(f"expected forecast report at {path}; run the forecast subcommand first")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [
            {
                "step": int(r[0]),
                "point": float(r[1]),
                "lower": float(r[2]),
                "upper": float(r[3]),
            }
            for r in reader
            if r
        ]
    return header, rows


def read_test_predictions(out_dir: Path) -> list[dict]:
    path = Path(out_dir) / TEST_PREDICTIONS_CSV
    if not path.exists():
        raise DataError(
            f"expected test predictions at {path}; run the forecast subcommand first"
        )
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [
            {"date": date.fromisoformat(r[0]), "actual": float(r[1]), "predicted": float(r[2])}
            for r in reader
            if r
        ]


def fan_edges(rows: list[dict]) -> tuple[list[int], list[float], list[float]]:
    """Vertices of the interval fan: one (lower, upper) pair per horizon step."""
    steps = [r["step"] for r in rows]
    return steps, [r["lower"] for r in rows], [r["upper"] for r in rows]


def render_chart(out_dir: Path, proxy_label: str = "") -> Path | None:
    """Render actual-vs-predicted and the horizon fan to one SVG.

    Returns None (with a warning) when the test window is empty.
    """
    out_dir = Path(out_dir)
    header, rows = read_forecast_rows(out_dir)
    test = read_test_predictions(out_dir)
    if not test:
        warnings.warn("test window is empty; chart omitted", stacklevel=2)
        return None
    if not proxy_label and len(header) > 1 and header[1].startswith("Predicted_"):
        proxy_label = header[1][len("Predicted_"):]

    fig, (ax_fit, ax_fan) = plt.subplots(1, 2, figsize=(11, 4.2))

    dates = [r["date"] for r in test]
    ax_fit.plot(dates, [r["actual"] for r in test], label="actual", lw=1.2)
    ax_fit.plot(dates, [r["predicted"] for r in test], label="predicted", lw=1.2)
    ax_fit.set_title(f"Actual vs predicted {proxy_label} (test window)")
    ax_fit.set_xlabel("date")
    ax_fit.legend()
    fig.autofmt_xdate()

    steps, lowers, uppers = fan_edges(rows)
    points = [r["point"] for r in rows]
    ax_fan.fill_between(steps, lowers, uppers, alpha=0.3, label="adjusted interval")
    ax_fan.plot(steps, points, marker="o", ms=3, lw=1.2, label="forecast")
    ax_fan.set_title(f"{len(rows)}-step forecast with adjusted intervals")
    ax_fan.set_xlabel("horizon step")
    ax_fan.legend()

    fig.tight_layout()
    chart = out_dir / CHART_SVG
    fig.savefig(chart, format="svg", metadata={"Date": None})
    plt.close(fig)
    return chart
