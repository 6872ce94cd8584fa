"""Core series containers, standardization, annual aggregation, and gap imputation.

Daily observations live in :class:`TimeSeries` (missing values are NaN).
Candidates are joined into a :class:`DataMatrix` for autoencoder imputation,
then averaged per calendar year into :class:`AnnualSeries` objects for the
similarity stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import DataError, NumericError, ZeroVarianceError


def _as_value_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"expected a 1-D value array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """A named daily series; NaN marks a missing observation."""

    id: str
    dates: tuple[date, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", _as_value_array(self.values))
        if len(self.dates) != len(self.values):
            raise DataError(
                f"series {self.id!r}: {len(self.dates)} dates vs {len(self.values)} values"
            )
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise DataError(f"series {self.id!r}: dates not strictly increasing at {b}")
        if self.n_observed < 2:
            raise DataError(f"series {self.id!r}: needs at least 2 observed values")
        self.values.setflags(write=False)

    @property
    def observed_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def n_observed(self) -> int:
        return int(np.count_nonzero(~np.isnan(self.values)))

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(self.id, self.dates, values)


@dataclass(frozen=True)
class AnnualSeries:
    """Year-indexed annual means (no missing values)."""

    id: str
    years: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        object.__setattr__(self, "values", _as_value_array(self.values))
        if len(self.years) != len(self.values):
            raise DataError(
                f"annual series {self.id!r}: {len(self.years)} years vs {len(self.values)} values"
            )
        for a, b in zip(self.years, self.years[1:]):
            if not a < b:
                raise DataError(f"annual series {self.id!r}: years not strictly increasing")
        if np.isnan(self.values).any():
            raise DataError(f"annual series {self.id!r}: missing values not allowed")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class NormalizationParams:
    """Column mean and population standard deviation, exactly as applied."""

    mean: float
    std: float

    def __post_init__(self):
        if not (self.std >= 0):
            raise NumericError(f"standard deviation must be >= 0, got {self.std}")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.mean) / self.std

    def invert(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=float) * self.std + self.mean


@dataclass(frozen=True)
class AutoencoderConfig:
    hidden_width: int = 0  # 0 = auto: ceil(columns / 2)
    learning_rate: float = 0.01
    epochs: int = 500
    seed: int = 42

    def __post_init__(self):
        if self.hidden_width < 0:
            raise NumericError("hidden width must be >= 1 (or 0 for auto)")
        if self.epochs < 1:
            raise NumericError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise NumericError("learning rate must be positive")


@dataclass
class DataMatrix:
    """Joint (dates x columns) container; `mask` is True where observed."""

    column_ids: list[str]
    dates: tuple[date, ...]
    values: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.mask is None:
            self.mask = ~np.isnan(self.values)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.values.shape:
            raise DataError(
                f"mask shape {self.mask.shape} != value shape {self.values.shape}"
            )
        if self.values.shape != (len(self.dates), len(self.column_ids)):
            raise DataError(
                f"matrix shape {self.values.shape} inconsistent with "
                f"{len(self.dates)} dates x {len(self.column_ids)} columns"
            )
        per_col = self.mask.sum(axis=0)
        if len(self.column_ids) and per_col.min() < 2:
            worst = self.column_ids[int(per_col.argmin())]
            raise DataError(f"column {worst!r} has fewer than 2 observed cells")

    @classmethod
    def from_series(cls, series_list: list[TimeSeries]) -> "DataMatrix":
        """Join series on the union of their dates; unshared dates are missing."""
        if not series_list:
            raise DataError("cannot build a matrix from zero series")
        all_dates = sorted({d for s in series_list for d in s.dates})
        index = {d: i for i, d in enumerate(all_dates)}
        values = np.full((len(all_dates), len(series_list)), np.nan)
        for j, s in enumerate(series_list):
            rows = [index[d] for d in s.dates]
            values[rows, j] = s.values
        return cls([s.id for s in series_list], tuple(all_dates), values)

    def column(self, col_id: str) -> TimeSeries:
        j = self.column_ids.index(col_id)
        return TimeSeries(col_id, self.dates, self.values[:, j])


def z_normalize(series: TimeSeries) -> tuple[TimeSeries, NormalizationParams]:
    """Standardize observed values to mean 0 and population std 1.

    Missing entries stay missing. A constant series raises
    :class:`ZeroVarianceError` instead of dividing by zero.
    """
    observed = series.values[series.observed_mask]
    mu = float(observed.mean())
    sigma = float(observed.std())  # population convention (ddof=0)
    if sigma == 0.0:
        raise ZeroVarianceError(f"series {series.id!r} has zero variance")
    params = NormalizationParams(mu, sigma)
    return series.with_values((series.values - mu) / sigma), params


def z_normalize_values(values: np.ndarray) -> tuple[np.ndarray, NormalizationParams]:
    """Standardize a plain value vector (used for annual series)."""
    arr = _as_value_array(values)
    mu = float(arr.mean())
    sigma = float(arr.std())
    if sigma == 0.0:
        raise ZeroVarianceError("zero variance in value vector")
    return (arr - mu) / sigma, NormalizationParams(mu, sigma)


def annualize(series: TimeSeries) -> AnnualSeries:
    """Average the daily values of each calendar year (boundary: January 1)."""
    if series.has_missing:
        raise DataError(
            f"series {series.id!r} has missing values; impute before annualizing"
        )
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for d, v in zip(series.dates, series.values):
        sums[d.year] = sums.get(d.year, 0.0) + float(v)
        counts[d.year] = counts.get(d.year, 0) + 1
    years = sorted(sums)
    means = [sums[y] / counts[y] for y in years]
    return AnnualSeries(series.id, tuple(years), np.array(means))


def sparse_years(series: TimeSeries, min_days: int = 30) -> list[int]:
    """Years with fewer than `min_days` observed days (annualized anyway, but flagged)."""
    counts: dict[int, int] = {}
    for d, v in zip(series.dates, series.values):
        if not math.isnan(v):
            counts[d.year] = counts.get(d.year, 0) + 1
    return sorted(y for y, c in counts.items() if c < min_days)


def impute_autoencoder(matrix: DataMatrix, config: AutoencoderConfig | None = None) -> DataMatrix:
    """Fill missing cells with a single-hidden-layer autoencoder reconstruction.

    Columns are expected z-normalized. Observed cells are returned bit-identical;
    only missing cells are replaced. Training is full-batch gradient descent on
    the mean squared error over observed cells, with missing inputs held at 0
    (the post-standardization column mean). Deterministic for a fixed seed.
    """
    config = config or AutoencoderConfig()
    values, mask = matrix.values, matrix.mask
    if values.size == 0:
        raise DataError("cannot impute an empty matrix")
    if not np.isfinite(values[mask]).all():
        raise DataError("matrix contains non-finite observed values")

    if not (~mask).any():
        return DataMatrix(list(matrix.column_ids), matrix.dates, values.copy(), mask.copy())

    n, d = values.shape
    k = config.hidden_width or max(1, math.ceil(d / 2))
    x = np.where(mask, values, 0.0)
    m = mask.astype(float)
    n_obs = m.sum()

    rng = np.random.default_rng(config.seed)
    w1 = rng.normal(0.0, 0.1, size=(d, k))
    b1 = np.zeros(k)
    w2 = rng.normal(0.0, 0.1, size=(k, d))
    b2 = np.zeros(d)

    lr = config.learning_rate
    for _ in range(config.epochs):
        hidden = np.tanh(x @ w1 + b1)
        recon = hidden @ w2 + b2
        d_out = 2.0 * m * (recon - x) / n_obs
        grad_w2 = hidden.T @ d_out
        grad_b2 = d_out.sum(axis=0)
        d_hidden = (d_out @ w2.T) * (1.0 - hidden**2)
        grad_w1 = x.T @ d_hidden
        grad_b1 = d_hidden.sum(axis=0)
        w1 -= lr * grad_w1
        b1 -= lr * grad_b1
        w2 -= lr * grad_w2
        b2 -= lr * grad_b2

    recon = np.tanh(x @ w1 + b1) @ w2 + b2
    if not np.isfinite(recon).all():
        raise NumericError("autoencoder training diverged (non-finite reconstruction)")
    filled = np.where(mask, values, recon)
    return DataMatrix(
        list(matrix.column_ids), matrix.dates, filled, np.ones_like(mask, dtype=bool)
    )
