"""Rank annualized candidates against the annual target and pick a consensus proxy.

Each method produces an ascending distance ranking; the winner is chosen by
Borda scoring over the per-method top-k lists, with ties broken by the number
of first places and then lexicographically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DataError
from .series import AnnualSeries
from .similarity import (
    SimilarityConfig,
    dtw,
    edr,
    embed_as_trajectory,
    euclidean,
    hausdorff,
    lcss_distance,
    soft_dtw,
)

# Report column order; euclidean is an optional sixth measure.
DEFAULT_METHODS = ("soft_dtw", "dtw", "lcss", "edr", "hausdorff")
ALL_METHODS = DEFAULT_METHODS + ("euclidean",)

METHOD_LABELS = {
    "soft_dtw": "Soft-DTW Distance",
    "dtw": "DTW Distance",
    "lcss": "LCSS",
    "edr": "edr",
    "hausdorff": "hausdorff",
    "euclidean": "euclidean",
}


@dataclass(frozen=True)
class MethodRanking:
    """Candidates ordered by ascending distance under one method."""

    method: str
    entries: tuple[tuple[str, float], ...]
    excluded: tuple[str, ...] = ()  # non-finite distance under this method

    def top(self, k: int) -> list[str]:
        return [cid for cid, _ in self.entries[:k]]


@dataclass(frozen=True)
class ConsensusResult:
    winner: str
    k: int
    per_method_top: dict[str, list[str]]
    borda_scores: dict[str, int]
    top1_counts: dict[str, int]
    excluded: dict[str, tuple[str, ...]] = field(default_factory=dict)


def _distance(method: str, target: AnnualSeries, cand: AnnualSeries,
              config: SimilarityConfig) -> float:
    x, y = target.values, cand.values
    if method == "dtw":
        return dtw(x, y, config)
    if method == "soft_dtw":
        return soft_dtw(x, y, config)
    if method == "lcss":
        return lcss_distance(x, y, config.epsilon)
    if method == "edr":
        return float(edr(x, y, config.epsilon))
    if method == "hausdorff":
        return hausdorff(embed_as_trajectory(x), embed_as_trajectory(y))
    if method == "euclidean":
        return euclidean(x, y)
    raise DataError(f"unknown similarity method {method!r}")


def rank_by_method(target: AnnualSeries, candidates: list[AnnualSeries],
                   method: str, config: SimilarityConfig | None = None) -> MethodRanking:
    """Rank candidates by ascending distance to the target under one method.

    Candidates must cover exactly the target's year range. Non-finite
    distances exclude the candidate from this ranking (flagged, not dropped
    globally). Ties break lexicographically by candidate id.
    """
    if method not in ALL_METHODS:
        raise DataError(f"unknown similarity method {method!r}")
    config = config or SimilarityConfig()
    entries = []
    excluded = []
    for cand in candidates:
        if cand.years != target.years:
            raise DataError(
                f"candidate {cand.id!r} covers years {cand.years[0]}-{cand.years[-1]}, "
                f"target covers {target.years[0]}-{target.years[-1]}"
            )
        d = _distance(method, target, cand, config)
        if math.isfinite(d):
            entries.append((cand.id, d))
        else:
            excluded.append(cand.id)
    entries.sort(key=lambda e: (e[1], e[0]))
    return MethodRanking(method, tuple(entries), tuple(excluded))


def consensus_select(rankings: list[MethodRanking], k: int = 5) -> ConsensusResult:
    """Borda-aggregate the per-method top-k lists.

    The rank-r candidate of each method's top-k earns k - r + 1 points.
    Ties break by top-1 count, then lexicographically.
    """
    if not rankings:
        raise DataError("consensus needs at least one ranking")
    if k < 1:
        raise DataError("k must be >= 1")
    borda: dict[str, int] = {}
    top1: dict[str, int] = {}
    per_method_top: dict[str, list[str]] = {}
    for ranking in rankings:
        for cid, _ in ranking.entries:
            borda.setdefault(cid, 0)
            top1.setdefault(cid, 0)
        top = ranking.top(k)
        per_method_top[ranking.method] = top
        for r, cid in enumerate(top, start=1):
            borda[cid] += k - r + 1
            if r == 1:
                top1[cid] += 1
    if not borda:
        raise DataError("no candidates appear in any ranking")
    winner = min(borda, key=lambda cid: (-borda[cid], -top1[cid], cid))
    return ConsensusResult(
        winner=winner,
        k=k,
        per_method_top=per_method_top,
        borda_scores=borda,
        top1_counts=top1,
        excluded={r.method: r.excluded for r in rankings if r.excluded},
    )
