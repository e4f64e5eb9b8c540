from __future__ import annotations

import pytest

from jobforge.sampler import (
    SampleSpec,
    nearest_rank_threshold,
    sample_random_negatives,
    sample_rule_pool,
    sample_type1,
    sample_type2,
)
from jobforge.store import UsageLedger


def ledger_with(*ids: str) -> UsageLedger:
    ledger = UsageLedger()
    if ids:
        ledger.consume(ids, "used")
    return ledger


class TestNearestRankThreshold:
    def test_integral_rank_steps_up(self):
        # 0.8 quantile of five points admits exactly the top point
        assert nearest_rank_threshold([5, 4, 3, 2, 1], 0.8) == 5

    def test_fractional_rank(self):
        assert nearest_rank_threshold([7, 6, 5, 4, 3, 2, 1], 0.8) == 6

    def test_empty(self):
        with pytest.raises(ValueError):
            nearest_rank_threshold([], 0.5)


class TestType1:
    def ranked(self):
        return [("a", 5.0), ("b", 4.0), ("c", 3.0), ("d", 2.0), ("e", 1.0)]

    def test_threshold_admits_only_top_point(self):
        spec = SampleSpec(strategy="type1", k=1, seed=0, percentile=0.8)
        assert sample_type1(self.ranked(), spec, UsageLedger()) == ["a"]

    def test_k_larger_than_pool(self):
        spec = SampleSpec(strategy="type1", k=10, seed=0, percentile=0.8)
        assert sample_type1(self.ranked(), spec, UsageLedger()) == ["a"]

    def test_all_in_ledger(self):
        spec = SampleSpec(strategy="type1", k=3, seed=0, percentile=0.8)
        assert sample_type1(self.ranked(), spec, ledger_with("a")) == []

    def test_results_above_threshold(self):
        ranked = [(f"t{i:02d}", 10.0 - i) for i in range(10)]
        spec = SampleSpec(strategy="type1", k=5, seed=7, percentile=0.5)
        got = sample_type1(ranked, spec, UsageLedger())
        threshold = nearest_rank_threshold([c for _, c in ranked], 0.5)
        scores = dict(ranked)
        assert all(scores[tid] >= threshold for tid in got)

    def test_requires_descending_order(self):
        spec = SampleSpec(strategy="type1", k=1, seed=0)
        with pytest.raises(ValueError):
            sample_type1([("a", 1.0), ("b", 2.0)], spec, UsageLedger())

    def test_deterministic(self):
        ranked = [(f"t{i:02d}", 10.0 - i) for i in range(10)]
        spec = SampleSpec(strategy="type1", k=3, seed=42, percentile=0.5)
        first = sample_type1(ranked, spec, UsageLedger())
        second = sample_type1(ranked, spec, UsageLedger())
        assert first == second


class TestType2:
    def test_band_enumeration(self):
        pos = [("p1", 0.1), ("p2", 0.2), ("p3", 0.9)]
        neg = [("n1", -0.05), ("n2", -0.8)]
        spec = SampleSpec(strategy="type2", k=2, seed=1, band_fraction=0.5)
        got = sample_type2(pos, neg, spec, UsageLedger())
        # bands: ceil(0.5*3)=2 -> {p1,p2}; ceil(0.5*2)=1 -> {n1}
        assert len(got) == 2
        assert got[0] in {"p1", "p2"}
        assert got[1] == "n1"

    def test_band_enumeration_golden(self):
        pos = [("p1", 0.1), ("p2", 0.2), ("p3", 0.9)]
        neg = [("n1", -0.05), ("n2", -0.8)]
        spec = SampleSpec(strategy="type2", k=2, seed=1, band_fraction=0.5)
        assert sample_type2(pos, neg, spec, UsageLedger()) == \
            sample_type2(pos, neg, spec, UsageLedger())

    def test_k_zero(self):
        spec = SampleSpec(strategy="type2", k=0, seed=1)
        assert sample_type2([("p", 0.1)], [("n", -0.1)], spec, UsageLedger()) == []

    def test_empty_negative_side_spills_to_positive(self):
        pos = [(f"p{i}", 0.1 * (i + 1)) for i in range(8)]
        spec = SampleSpec(strategy="type2", k=4, seed=3, band_fraction=0.9)
        got = sample_type2(pos, [], spec, UsageLedger())
        assert len(got) == 4
        assert all(tid.startswith("p") for tid in got)

    def test_odd_k_extra_from_positive(self):
        pos = [(f"p{i}", 0.1 + i) for i in range(6)]
        neg = [(f"n{i}", -0.1 - i) for i in range(6)]
        spec = SampleSpec(strategy="type2", k=5, seed=3, band_fraction=0.99)
        got = sample_type2(pos, neg, spec, UsageLedger())
        assert sum(1 for t in got if t.startswith("p")) == 3
        assert sum(1 for t in got if t.startswith("n")) == 2

    def test_band_members_have_smallest_magnitude(self):
        pos = [(f"p{i}", float(i + 1)) for i in range(10)]
        spec = SampleSpec(strategy="type2", k=3, seed=5, band_fraction=0.3)
        got = sample_type2(pos, [], spec, UsageLedger())
        assert set(got) <= {"p0", "p1", "p2"}


class TestRandomNegatives:
    def test_set_difference(self):
        got = sample_random_negatives(["a", "b", "c"], ["b"], 2, 0, UsageLedger())
        assert sorted(got) == ["a", "c"]

    def test_k_zero(self):
        assert sample_random_negatives(["a"], [], 0, 0, UsageLedger()) == []

    def test_ledger_excluded(self):
        got = sample_random_negatives(["a", "b", "c"], [], 3, 0, ledger_with("b"))
        assert sorted(got) == ["a", "c"]

    def test_seeded_golden(self):
        pool = [f"t{i:03d}" for i in range(50)]
        first = sample_random_negatives(pool, [], 5, 1234, UsageLedger())
        second = sample_random_negatives(pool, [], 5, 1234, UsageLedger())
        assert first == second
        assert len(set(first)) == 5
        different = sample_random_negatives(pool, [], 5, 4321, UsageLedger())
        assert first != different  # overwhelmingly likely with 50 choose 5


class TestRulePool:
    def test_exclusion_and_exhaustion(self):
        got = sample_rule_pool(["x", "y"], 5, 0, ledger_with("y"))
        assert got == ["x"]

    def test_empty(self):
        assert sample_rule_pool([], 3, 0, UsageLedger()) == []

    def test_seeded_replay(self):
        pool = [f"m{i:03d}" for i in range(50)]
        first = sample_rule_pool(pool, 10, 99, UsageLedger())
        second = sample_rule_pool(pool, 10, 99, UsageLedger())
        assert first == second
        assert len(set(first)) == 10


class TestSampleSpec:
    def test_strategy_validated(self):
        with pytest.raises(ValueError):
            SampleSpec(strategy="nope", k=1, seed=0)

    def test_percentile_bounds(self):
        with pytest.raises(ValueError):
            SampleSpec(strategy="type1", k=1, seed=0, percentile=1.0)
