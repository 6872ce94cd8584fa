"""Prediction intervals from holdout-residual quantiles, widened for proxy error.

Offsets are empirical quantiles of actual - predicted residuals (asymmetric
bounds are preserved), shared across all horizon steps and inflated by a
factor kappa >= 1 to absorb the proxy-vs-target discrepancy on top of model
uncertainty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError

MIN_RESIDUALS = 10


@dataclass(frozen=True)
class IntervalForecast:
    step: int  # 1-based horizon index
    point: float
    lower: float
    upper: float
    level: float
    inflation: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise NumericError(
                f"step {self.step}: lower bound {self.lower} exceeds upper {self.upper}"
            )


def residual_quantiles(actual, predicted, level: float = 0.95) -> tuple[float, float]:
    """Empirical (1-level)/2 and 1-(1-level)/2 quantiles of actual - predicted.

    Linear interpolation between order statistics; needs at least
    MIN_RESIDUALS residuals.
    """
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if len(a) != len(p):
        raise DataError(f"length mismatch: {len(a)} vs {len(p)}")
    if len(a) < MIN_RESIDUALS:
        raise DataError(
            f"need at least {MIN_RESIDUALS} residuals for quantile offsets, got {len(a)}"
        )
    if not 0 < level < 1:
        raise DataError(f"level must be in (0, 1), got {level}")
    residuals = a - p
    tail = (1.0 - level) / 2.0
    low = float(np.quantile(residuals, tail, method="linear"))
    high = float(np.quantile(residuals, 1.0 - tail, method="linear"))
    return low, high


def _check_offsets(offsets, inflation: float) -> tuple[float, float]:
    if inflation < 1.0:
        raise NumericError(f"inflation factor must be >= 1, got {inflation}")
    low, high = float(offsets[0]), float(offsets[1])
    if low > high:
        raise NumericError(f"offsets out of order: low {low} > high {high}")
    return low, high


def build_intervals(
    points,
    offsets: tuple[float, float],
    inflation: float = 1.0,
    level: float = 0.95,
) -> list[IntervalForecast]:
    """Attach kappa-scaled offsets to each point forecast.

    kappa = 1 reproduces the unadjusted interval; kappa < 1 would narrow the
    interval below model uncertainty and is rejected.
    """
    low, high = _check_offsets(offsets, inflation)
    rows = []
    for i, point in enumerate(np.asarray(points, dtype=float), start=1):
        rows.append(
            IntervalForecast(
                step=i,
                point=float(point),
                lower=float(point + inflation * low),
                upper=float(point + inflation * high),
                level=level,
                inflation=inflation,
            )
        )
    return rows


def build_intervals_per_step(
    points,
    offsets_per_step: list[tuple[float, float]],
    inflation: float = 1.0,
    level: float = 0.95,
) -> list[IntervalForecast]:
    """Like build_intervals but with its own (low, high) offsets per horizon step."""
    pts = np.asarray(points, dtype=float)
    if len(offsets_per_step) != len(pts):
        raise DataError(
            f"{len(pts)} points but {len(offsets_per_step)} offset pairs"
        )
    rows = []
    for i, (point, offsets) in enumerate(zip(pts, offsets_per_step), start=1):
        low, high = _check_offsets(offsets, inflation)
        rows.append(
            IntervalForecast(
                step=i,
                point=float(point),
                lower=float(point + inflation * low),
                upper=float(point + inflation * high),
                level=level,
                inflation=inflation,
            )
        )
    return rows
