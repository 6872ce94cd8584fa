import numpy as np
import pytest

from proxycast.errors import DataError
from proxycast.selection import (
    ALL_METHODS,
    DEFAULT_METHODS,
    MethodRanking,
    consensus_select,
    rank_by_method,
)
from proxycast.series import AnnualSeries
from proxycast.similarity import SimilarityConfig

YEARS = tuple(range(2011, 2024))


def annual(cid, values):
    return AnnualSeries(cid, YEARS, np.asarray(values, dtype=float))


@pytest.fixture
def target():
    rng = np.random.default_rng(0)
    vals = np.cumsum(rng.normal(size=len(YEARS)))
    return annual("target", (vals - vals.mean()) / vals.std())


class TestRankByMethod:
    def test_identical_candidate_ranks_first(self, target):
        clean = annual("clean", target.values)
        rng = np.random.default_rng(1)
        others = [
            annual(f"cand_{i}", rng.normal(size=len(YEARS))) for i in range(4)
        ]
        for method in DEFAULT_METHODS:
            ranking = rank_by_method(target, [clean] + others, method)
            assert ranking.entries[0][0] == "clean"
            if method != "soft_dtw":
                assert ranking.entries[0][1] == pytest.approx(0.0, abs=1e-12)

    def test_clean_beats_noisy(self, target):
        rng = np.random.default_rng(2)
        clean = annual("clean", target.values)
        noisy = annual("noisy", target.values + rng.normal(0, 3.0, len(YEARS)))
        for method in ALL_METHODS:
            ranking = rank_by_method(target, [clean, noisy], method)
            assert [cid for cid, _ in ranking.entries] == ["clean", "noisy"]

    def test_empty_candidate_list(self, target):
        ranking = rank_by_method(target, [], "dtw")
        assert ranking.entries == ()

    def test_year_mismatch_names_candidate(self, target):
        bad = AnnualSeries("latecomer", tuple(range(2012, 2025)), np.ones(13) * 2)
        with pytest.raises(DataError, match="latecomer"):
            rank_by_method(target, [bad], "dtw")

    def test_unknown_method_rejected(self, target):
        with pytest.raises(DataError, match="unknown"):
            rank_by_method(target, [], "frechet")

    def test_ties_break_lexicographically(self, target):
        twin_b = annual("b_twin", target.values)
        twin_a = annual("a_twin", target.values)
        ranking = rank_by_method(target, [twin_b, twin_a], "euclidean")
        assert [cid for cid, _ in ranking.entries] == ["a_twin", "b_twin"]

    def test_nonfinite_distance_excluded_and_flagged(self, target):
        huge = annual("overflow", np.full(len(YEARS), 1e200))
        ok = annual("ok", target.values)
        ranking = rank_by_method(target, [huge, ok], "dtw")
        assert ranking.excluded == ("overflow",)
        assert [cid for cid, _ in ranking.entries] == ["ok"]

    def test_ordering_invariant_under_common_rescaling(self, target):
        rng = np.random.default_rng(3)
        cands = [annual(f"c{i}", rng.normal(size=len(YEARS))) for i in range(6)]
        base = rank_by_method(target, cands, "euclidean")
        scale = 37.5
        scaled_target = annual("target", target.values * scale)
        scaled = rank_by_method(
            scaled_target,
            [annual(c.id, c.values * scale) for c in cands],
            "euclidean",
        )
        assert [cid for cid, _ in base.entries] == [cid for cid, _ in scaled.entries]

    def test_band_config_respected(self, target):
        clean = annual("clean", target.values)
        ranking = rank_by_method(target, [clean], "dtw", SimilarityConfig(band=0))
        assert ranking.entries[0][1] == 0.0


def ranking_of(method, *ids):
    return MethodRanking(method, tuple((cid, float(i)) for i, cid in enumerate(ids)))


class TestConsensusSelect:
    def test_single_method_winner(self):
        result = consensus_select([ranking_of("dtw", "a", "b", "c")], k=5)
        assert result.winner == "a"

    def test_unanimous_rank1_scores(self):
        rankings = [
            ranking_of(m, "star", "b", "c", "d", "e", "f") for m in DEFAULT_METHODS
        ]
        result = consensus_select(rankings, k=5)
        assert result.winner == "star"
        assert result.borda_scores["star"] == 25
        assert result.top1_counts["star"] == 5

    def test_hand_evaluated_borda(self):
        rankings = [
            ranking_of("m1", "A", "B"),
            ranking_of("m2", "B", "A"),
            ranking_of("m3", "A", "C"),
        ]
        result = consensus_select(rankings, k=2)
        assert result.winner == "A"
        assert result.borda_scores == {"A": 5, "B": 3, "C": 1}

    def test_permutation_invariance(self):
        rankings = [
            ranking_of("m1", "A", "B", "C"),
            ranking_of("m2", "B", "C", "A"),
            ranking_of("m3", "C", "A", "B"),
            ranking_of("m4", "A", "C", "B"),
        ]
        base = consensus_select(rankings, k=3)
        for perm in ([3, 1, 0, 2], [2, 3, 1, 0]):
            shuffled = consensus_select([rankings[i] for i in perm], k=3)
            assert shuffled.winner == base.winner
            assert shuffled.borda_scores == base.borda_scores

    def test_outside_topk_candidate_cannot_change_winner(self):
        rankings = [ranking_of("m1", "A", "B", "C"), ranking_of("m2", "A", "C", "B")]
        base = consensus_select(rankings, k=2)
        extended = consensus_select(
            [
                ranking_of("m1", "A", "B", "C", "Z"),
                ranking_of("m2", "A", "C", "B", "Z"),
            ],
            k=2,
        )
        assert extended.winner == base.winner

    def test_dominant_candidate_always_wins(self):
        rng = np.random.default_rng(4)
        others = [f"c{i}" for i in range(6)]
        rankings = []
        for m in range(5):
            tail = list(rng.permutation(others))
            rankings.append(ranking_of(f"m{m}", "dom", *tail))
        assert consensus_select(rankings, k=4).winner == "dom"

    def test_top1_count_breaks_borda_ties(self):
        # A: ranks 1,2 -> 2+1 = 3; B: ranks 2,1 -> 1+2 = 3; then C gets a top1
        rankings = [
            ranking_of("m1", "A", "B"),
            ranking_of("m2", "B", "A"),
            ranking_of("m3", "A", "B"),
            ranking_of("m4", "B", "A"),
        ]
        result = consensus_select(rankings, k=2)
        # full tie on borda and top1 -> lexicographic
        assert result.winner == "A"

    def test_empty_rankings_rejected(self):
        with pytest.raises(DataError):
            consensus_select([], k=5)

    def test_k_must_be_positive(self):
        with pytest.raises(DataError):
            consensus_select([ranking_of("m", "a")], k=0)
