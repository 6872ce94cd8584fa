"""Elastic and geometric similarity kernels for short (annualized) sequences.

All kernels take plain 1-D sequences of finite reals. Lower is always "more
similar"; the subsequence count from :func:`lcs_length` is converted to a
distance by :func:`lcss_distance`. The warping measures share a squared local
cost so the smoothed variant converges to the hard one as gamma -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError

_INF = math.inf


@dataclass(frozen=True)
class SimilarityConfig:
    """Knobs shared by the kernels.

    epsilon: match threshold for LCSS/EDR, in (normalized) value units.
    gamma: smoothing of the soft minimum; must be positive.
    band: optional Sakoe-Chiba window half-width for the warping measures;
          must admit at least one path, i.e. band >= |len(x) - len(y)|.
    """

    epsilon: float = 0.5
    gamma: float = 1.0
    band: int | None = None

    def __post_init__(self):
        if self.epsilon < 0:
            raise NumericError("epsilon must be >= 0")
        if not self.gamma > 0:
            raise NumericError("gamma must be positive")
        if self.band is not None and self.band < 0:
            raise NumericError("band must be >= 0")


def _check_sequence(x, name: str, allow_empty: bool = False) -> list[float]:
    vals = [float(v) for v in x]
    if not vals and not allow_empty:
        raise DataError(f"sequence {name} is empty")
    if any(not math.isfinite(v) for v in vals):
        raise DataError(f"sequence {name} contains non-finite values")
    return vals


def _in_band(i: int, j: int, band: int | None) -> bool:
    return band is None or abs(i - j) <= band


def dtw(x, y, config: SimilarityConfig | None = None) -> float:
    """Minimal accumulated squared difference over all monotone warping paths."""
    config = config or SimilarityConfig()
    xv = _check_sequence(x, "x")
    yv = _check_sequence(y, "y")
    band = config.band
    m, n = len(xv), len(yv)
    cost = [[_INF] * n for _ in range(m)]
    for i in range(m):
        for j in range(n):
            if not _in_band(i, j, band):
                continue
            diff = xv[i] - yv[j]
            d = diff * diff
            if i == 0 and j == 0:
                cost[i][j] = d
                continue
            best = _INF
            if i > 0 and cost[i - 1][j] < best:
                best = cost[i - 1][j]
            if j > 0 and cost[i][j - 1] < best:
                best = cost[i][j - 1]
            if i > 0 and j > 0 and cost[i - 1][j - 1] < best:
                best = cost[i - 1][j - 1]
            cost[i][j] = d + best
    result = cost[m - 1][n - 1]
    if result == _INF and band is not None:
        raise NumericError(
            f"band {band} excludes every warping path for lengths {m} vs {n}"
        )
    return result


def _softmin(a: float, b: float, c: float, gamma: float) -> float:
    # Canonical (sorted) log-sum-exp with max-shift: stable for tiny gamma and
    # bit-symmetric under transposition of the DP.
    lo = min(a, b, c)
    if lo == _INF:
        return _INF
    total = 0.0
    for v in sorted((a, b, c)):
        if v < _INF:
            total += math.exp(-(v - lo) / gamma)
    return lo - gamma * math.log(total)


def soft_dtw(x, y, config: SimilarityConfig | None = None) -> float:
    """DTW with the hard minimum replaced by a gamma-smoothed soft minimum.

    Can be negative; converges to :func:`dtw` as gamma -> 0+.
    """
    config = config or SimilarityConfig()
    xv = _check_sequence(x, "x")
    yv = _check_sequence(y, "y")
    gamma, band = config.gamma, config.band
    m, n = len(xv), len(yv)
    r = [[_INF] * (n + 1) for _ in range(m + 1)]
    r[0][0] = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if not _in_band(i - 1, j - 1, band):
                continue
            sm = _softmin(r[i - 1][j], r[i][j - 1], r[i - 1][j - 1], gamma)
            if sm == _INF:
                continue
            diff = xv[i - 1] - yv[j - 1]
            r[i][j] = diff * diff + sm
    result = r[m][n]
    if result == _INF and band is not None:
        raise NumericError(
            f"band {band} excludes every warping path for lengths {m} vs {n}"
        )
    return result


def lcs_length(x, y, epsilon: float) -> int:
    """Length of the longest common subsequence under |x_i - y_j| <= epsilon."""
    xv = _check_sequence(x, "x", allow_empty=True)
    yv = _check_sequence(y, "y", allow_empty=True)
    m, n = len(xv), len(yv)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if abs(xv[i - 1] - yv[j - 1]) <= epsilon:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[m][n]


def lcss_distance(x, y, epsilon: float) -> float:
    """1 - LCS / min(m, n); a distance in [0, 1]."""
    xv = _check_sequence(x, "x")
    yv = _check_sequence(y, "y")
    return 1.0 - lcs_length(xv, yv, epsilon) / min(len(xv), len(yv))


def edr(x, y, epsilon: float) -> int:
    """Edit distance on real sequences: unit-cost deletes plus unit-cost
    matches of points farther apart than epsilon (strict comparison)."""
    xv = _check_sequence(x, "x", allow_empty=True)
    yv = _check_sequence(y, "y", allow_empty=True)
    m, n = len(xv), len(yv)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        table[i][0] = i
    for j in range(n + 1):
        table[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            penalty = 0 if abs(xv[i - 1] - yv[j - 1]) < epsilon else 1
            table[i][j] = min(
                table[i - 1][j - 1] + penalty,
                table[i][j - 1] + 1,
                table[i - 1][j] + 1,
            )
    return table[m][n]


def embed_as_trajectory(x) -> np.ndarray:
    """Map a sequence to (i/(n-1), x_i) points; abscissa spans [0, 1]."""
    xv = _check_sequence(x, "x")
    n = len(xv)
    if n < 2:
        raise DataError("trajectory embedding needs at least 2 points")
    t = np.arange(n) / (n - 1)
    return np.column_stack([t, xv])


def hausdorff(a, b) -> float:
    """Greatest nearest-neighbor Euclidean distance between two 2-D point sets."""
    pa = np.asarray(a, dtype=float)
    pb = np.asarray(b, dtype=float)
    if pa.size == 0 or pb.size == 0:
        raise DataError("hausdorff distance needs non-empty point sets")
    pa = pa.reshape(len(pa), -1)
    pb = pb.reshape(len(pb), -1)
    if not (np.isfinite(pa).all() and np.isfinite(pb).all()):
        raise DataError("point sets contain non-finite coordinates")
    diff = pa[:, None, :] - pb[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def euclidean(x, y) -> float:
    """Point-to-point L2 distance; requires equal lengths."""
    xv = _check_sequence(x, "x")
    yv = _check_sequence(y, "y")
    if len(xv) != len(yv):
        raise DataError(f"length mismatch: {len(xv)} vs {len(yv)}")
    return math.sqrt(sum((a - b) * (a - b) for a, b in zip(xv, yv)))
