"""Bundled synthetic dataset: an annual target plus daily candidates with one
planted proxy whose annualized, normalized values equal the target plus small
Gaussian noise. Used by the fully-defaulted CLI run and by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .ingest import DEFAULT_INSTRUMENTS, OHLCV_FIELDS, write_csv_series
from .series import AnnualSeries, TimeSeries

TARGET_ID = "Energy_Security_Index"
PLANTED_ID = "Volume_Brent"


@dataclass(frozen=True)
class SyntheticDataset:
    target: AnnualSeries
    candidates: list[TimeSeries]
    planted_id: str


def _candidate_ids(n: int) -> list[str]:
    ids = [PLANTED_ID]
    for inst in DEFAULT_INSTRUMENTS:
        for field in OHLCV_FIELDS:
            cid = f"{field}_{inst}"
            if cid != PLANTED_ID:
                ids.append(cid)
    return ids[:n]


def _year_dates(year: int, days: int) -> list[date]:
    start = date(year, 1, 1)
    return [start + timedelta(days=k) for k in range(days)]


def make_synthetic_dataset(
    seed: int = 42,
    n_years: int = 13,
    first_year: int = 2011,
    days_per_year: int = 60,
    n_candidates: int = 20,
    noise_sd: float = 0.1,
    missing_fraction: float = 0.02,
) -> SyntheticDataset:
    """Build the planted-proxy fixture, deterministic for a given seed.

    The planted candidate's per-year anchors are the standardized target plus
    N(0, noise_sd^2) noise; its daily wiggle is demeaned within each year so
    the annual mean hits the anchor exactly. A few non-planted candidates get
    missing holes to exercise imputation.
    """
    rng = np.random.default_rng(seed)
    years = list(range(first_year, first_year + n_years))

    # Annual target: a bounded random walk around an index-like level.
    steps = rng.normal(0.0, 1.0, size=n_years)
    target_values = 55.0 + 4.0 * np.cumsum(steps) / np.sqrt(n_years)
    target = AnnualSeries(TARGET_ID, tuple(years), target_values)
    z_target = (target_values - target_values.mean()) / target_values.std()

    dates = [d for y in years for d in _year_dates(y, days_per_year)]
    ids = _candidate_ids(n_candidates)

    candidates = []
    holey = set(
        rng.choice([cid for cid in ids if cid != PLANTED_ID], size=5, replace=False)
    )
    for cid in ids:
        if cid == PLANTED_ID:
            anchors = 15000.0 + 2500.0 * (z_target + rng.normal(0.0, noise_sd, n_years))
            values = _anchored_daily(rng, anchors, days_per_year, wiggle=400.0)
        else:
            level = rng.uniform(20.0, 20000.0)
            anchors = level * (1.0 + 0.3 * np.cumsum(rng.normal(0.0, 1.0, n_years)) / np.sqrt(n_years))
            values = _anchored_daily(rng, anchors, days_per_year, wiggle=0.05 * level)
        if cid in holey:
            n_total = len(values)
            holes = rng.choice(n_total, size=max(1, int(missing_fraction * n_total)), replace=False)
            values = values.copy()
            values[holes] = np.nan
        candidates.append(TimeSeries(cid, tuple(dates), values))
    return SyntheticDataset(target, candidates, PLANTED_ID)


def _anchored_daily(rng: np.random.Generator, anchors: np.ndarray,
                    days_per_year: int, wiggle: float) -> np.ndarray:
    """AR(1) daily wiggle demeaned per year so each annual mean equals its anchor."""
    out = np.empty(len(anchors) * days_per_year)
    for i, anchor in enumerate(anchors):
        noise = rng.normal(0.0, 1.0, days_per_year)
        ar = np.empty(days_per_year)
        ar[0] = noise[0]
        for k in range(1, days_per_year):
            ar[k] = 0.9 * ar[k - 1] + noise[k]
        ar -= ar.mean()
        out[i * days_per_year : (i + 1) * days_per_year] = anchor + wiggle * ar / 3.0
    return out


def write_synthetic_csvs(dataset: SyntheticDataset, directory) -> tuple[Path, Path]:
    """Write the fixture as a wide candidates CSV and a year,value target CSV."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    candidates_path = directory / "candidates.csv"
    target_path = directory / "target.csv"
    write_csv_series(candidates_path, dataset.candidates)
    with open(target_path, "w", newline="") as fh:
        fh.write("year,value\n")
        for y, v in zip(dataset.target.years, dataset.target.values):
            fh.write(f"{y},{float(v)!r}\n")
    return candidates_path, target_path
