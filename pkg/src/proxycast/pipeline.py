"""End-to-end flows behind the CLI subcommands: load, impute, rank, forecast."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .boosting import (
    BoostedEnsemble,
    HyperParams,
    Metrics,
    build_features,
    chrono_split,
    compute_metrics,
    fit_boosted_ensemble,
    grid_search,
    predict,
    recursive_forecast,
)
from .config import FIXTURE, RunConfig
from .errors import DataError, ZeroVarianceError
from .fixtures import make_synthetic_dataset
from .ingest import (
    EndpointConfig,
    fetch_remote_ohlcv,
    read_csv_series,
    read_target_index,
    records_to_series,
)
from .intervals import (
    MIN_RESIDUALS,
    IntervalForecast,
    build_intervals,
    build_intervals_per_step,
    residual_quantiles,
)
from .selection import ConsensusResult, MethodRanking, consensus_select, rank_by_method
from .series import (
    AnnualSeries,
    DataMatrix,
    NormalizationParams,
    TimeSeries,
    annualize,
    impute_autoencoder,
    sparse_years,
    z_normalize,
    z_normalize_values,
)

logger = logging.getLogger(__name__)


@dataclass
class PreparedData:
    target: AnnualSeries
    daily: dict[str, TimeSeries]  # imputed, raw scale
    params: dict[str, NormalizationParams]
    skipped: dict[str, str]  # candidate id -> reason (e.g. zero variance)
    sparse: dict[str, list[int]]  # candidate id -> flagged thin years


@dataclass
class RankOutcome:
    consensus: ConsensusResult
    rankings: list[MethodRanking]
    skipped: dict[str, str]
    sparse: dict[str, list[int]]
    normalized: bool


@dataclass
class ForecastOutcome:
    proxy_id: str
    best_hp_index: int
    best_hp: HyperParams
    cv_scores: list[tuple[HyperParams, float]]
    train_metrics: Metrics
    test_metrics: Metrics
    model: BoostedEnsemble
    test_dates: tuple[date, ...]
    test_actual: np.ndarray
    test_predicted: np.ndarray
    intervals: list[IntervalForecast]
    level: float
    inflation: float


def load_inputs(config: RunConfig) -> tuple[list[TimeSeries], AnnualSeries]:
    """Resolve the candidate series and the annual target from the configured source."""
    if config.candidates == FIXTURE:
        dataset = make_synthetic_dataset(seed=config.seed)
        return dataset.candidates, dataset.target

    target = read_target_index(config.target)
    if config.candidates == "remote":
        endpoint = EndpointConfig(
            url_template=config.endpoint,
            cache_dir=Path(config.cache_dir),
            ttl_seconds=config.ttl,
            offline=config.offline,
        )
        start = date.fromisoformat(config.fetch_start)
        end = date.fromisoformat(config.fetch_end)
        candidates = []
        for instrument in [s.strip() for s in config.instruments.split(",") if s.strip()]:
            records = fetch_remote_ohlcv(instrument, start, end, endpoint)
            candidates.extend(records_to_series(instrument, records))
        return candidates, target
    return read_csv_series(config.candidates, schema=config.schema), target


def prepare(config: RunConfig) -> PreparedData:
    """Standardize, impute, and restore candidates to a fully observed raw scale."""
    candidates, target = load_inputs(config)
    if not candidates:
        raise DataError("no candidate series loaded")

    normalized = []
    params = {}
    skipped: dict[str, str] = {}
    sparse: dict[str, list[int]] = {}
    for series in candidates:
        thin = sparse_years(series)
        if thin:
            sparse[series.id] = thin
        try:
            norm, p = z_normalize(series)
        except ZeroVarianceError:
            skipped[series.id] = "zero variance"
            logger.warning("skipping constant candidate %s", series.id)
            continue
        normalized.append(norm)
        params[norm.id] = p
    if not normalized:
        raise DataError("all candidates were skipped (zero variance)")

    matrix = DataMatrix.from_series(normalized)
    imputed = impute_autoencoder(matrix, config.autoencoder_config())
    daily = {}
    for cid in imputed.column_ids:
        column = imputed.column(cid)
        daily[cid] = column.with_values(params[cid].invert(column.values))
    return PreparedData(target, daily, params, skipped, sparse)


def run_rank(config: RunConfig) -> RankOutcome:
    prepared = prepare(config)
    annual = {cid: annualize(s) for cid, s in prepared.daily.items()}

    target = prepared.target
    candidates = list(annual.values())
    if config.normalize:
        target = AnnualSeries(
            target.id, target.years, z_normalize_values(target.values)[0]
        )
        candidates = [
            AnnualSeries(a.id, a.years, z_normalize_values(a.values)[0])
            for a in candidates
        ]

    sim = config.similarity_config()
    rankings = [
        rank_by_method(target, candidates, method, sim) for method in config.methods()
    ]
    consensus = consensus_select(rankings, k=config.k)
    return RankOutcome(
        consensus, rankings, prepared.skipped, prepared.sparse, config.normalize
    )


def resolve_proxy_id(config: RunConfig) -> str:
    """Explicit config id, or the winner recorded by a prior rank run."""
    if config.proxy:
        return config.proxy
    ranking_json = config.out_dir() / "ranking.json"
    if not ranking_json.exists():
        raise DataError(
            f"no proxy configured and no prior ranking found at {ranking_json}; "
            "run the rank subcommand first or set train.proxy"
        )
    doc = json.loads(ranking_json.read_text())
    winner = doc.get("winner")
    if not winner:
        raise DataError(f"{ranking_json} has no winner recorded")
    return winner


def rolling_multistep_offsets(
    model: BoostedEnsemble,
    proxy: TimeSeries,
    first_test_pos: int,
    horizon: int,
    level: float,
) -> list[tuple[float, float]]:
    """Per-horizon-step residual quantiles from rolling-origin recursive
    forecasts over the test segment. Requires enough test rows that every
    step collects MIN_RESIDUALS residuals."""
    values = proxy.values
    n = len(values)
    residuals: list[list[float]] = [[] for _ in range(horizon)]
    for t0 in range(first_test_pos, n):
        history = TimeSeries(proxy.id, proxy.dates[:t0], values[:t0])
        preds = recursive_forecast(model, history, min(horizon, n - t0))
        for k, pred in enumerate(preds):
            residuals[k].append(float(values[t0 + k] - pred))
    offsets = []
    for step, res in enumerate(residuals, start=1):
        if len(res) < MIN_RESIDUALS:
            raise DataError(
                f"per-step offsets need at least {MIN_RESIDUALS} rolling residuals "
                f"at step {step}, got {len(res)}; use pooled offsets or more data"
            )
        offsets.append(residual_quantiles(res, np.zeros(len(res)), level=level))
    return offsets


def run_forecast(config: RunConfig, proxy_id: str | None = None) -> ForecastOutcome:
    prepared = prepare(config)
    proxy_id = proxy_id or resolve_proxy_id(config)
    if proxy_id not in prepared.daily:
        raise DataError(f"proxy series {proxy_id!r} not among loaded candidates")
    proxy = prepared.daily[proxy_id]

    spec = config.feature_spec()
    frame = build_features(proxy, spec)
    train, test = chrono_split(frame, config.split_fraction)

    grid = config.hyper_grid()
    best_hp, scores = grid_search(train, grid, folds=config.folds, seed=config.seed)
    model = fit_boosted_ensemble(
        train, best_hp, seed=config.seed, normalization=prepared.params[proxy_id]
    )

    train_pred = predict(model, train.features)
    test_pred = predict(model, test.features)
    train_metrics = compute_metrics(train.targets, train_pred)
    test_metrics = compute_metrics(test.targets, test_pred)

    points = recursive_forecast(model, proxy, config.horizon)
    if config.per_step_offsets:
        first_test_pos = spec.history_needed + len(train)
        offsets_per_step = rolling_multistep_offsets(
            model, proxy, first_test_pos, config.horizon, config.level
        )
        rows = build_intervals_per_step(
            points, offsets_per_step, inflation=config.inflation, level=config.level
        )
    else:
        offsets = residual_quantiles(test.targets, test_pred, level=config.level)
        rows = build_intervals(
            points, offsets, inflation=config.inflation, level=config.level
        )

    return ForecastOutcome(
        proxy_id=proxy_id,
        best_hp_index=grid.index(best_hp),
        best_hp=best_hp,
        cv_scores=scores,
        train_metrics=train_metrics,
        test_metrics=test_metrics,
        model=model,
        test_dates=test.dates,
        test_actual=test.targets,
        test_predicted=test_pred,
        intervals=rows,
        level=config.level,
        inflation=config.inflation,
    )
