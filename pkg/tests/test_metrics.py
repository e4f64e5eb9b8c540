from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from jobforge.errors import UndefinedStatisticError
from jobforge.metrics import (
    EffectiveRecallInputs,
    effective_recall,
    eval_report,
    round_half_up,
)

# -- independent oracle --------------------------------------------------------


def recount(preds, refs, label):
    """Brute-force confusion recount for one class."""
    tp = sum(1 for p, r in zip(preds, refs) if p == label == r)
    fp = sum(1 for p, r in zip(preds, refs) if p == label != r)
    fn = sum(1 for p, r in zip(preds, refs) if r == label != p)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


class TestEvalReport:
    def test_perfect(self):
        report = eval_report(["job", "notjob"], ["job", "notjob"])
        for _, m in report.per_class:
            assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)
        assert report.weighted_f1 == 1.0

    def test_symmetric_half(self):
        refs = ["job", "job", "notjob", "notjob"]
        preds = ["job", "notjob", "job", "notjob"]
        report = eval_report(preds, refs)
        job = report.metrics_for("job")
        assert (job.precision, job.recall, job.f1) == (0.5, 0.5, 0.5)
        assert report.weighted_precision == 0.5
        assert report.weighted_f1 == 0.5

    def test_zero_over_zero_is_zero(self):
        report = eval_report(["notjob", "notjob"], ["notjob", "notjob"])
        job = report.metrics_for("job")
        assert (job.precision, job.recall, job.f1) == (0.0, 0.0, 0.0)

    def test_table_layout_rounding(self):
        # A confusion matrix chosen to render as the published row shape
        # (job: P 0.83, R 0.97, F1 0.89) after 2-decimal presentation rounding.
        refs = ["job"] * 100 + ["notjob"] * 200
        preds = (["job"] * 97 + ["notjob"] * 3) + (["job"] * 20 + ["notjob"] * 180)
        rows = eval_report(preds, refs).rows()
        label, p, r, f1, support = rows[0]
        assert (label, p, r, f1, support) == ("job", 0.83, 0.97, 0.89, 100)
        assert rows[-1][0] == "avg / total"

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            eval_report(["job"], [])

    @given(st.lists(st.tuples(st.sampled_from(["job", "notjob"]),
                              st.sampled_from(["job", "notjob"])),
                    min_size=1, max_size=60))
    def test_matches_brute_force_recount(self, pairs):
        preds = [p for p, _ in pairs]
        refs = [r for _, r in pairs]
        report = eval_report(preds, refs)
        for label in ("job", "notjob"):
            expected = recount(preds, refs, label)
            got = report.metrics_for(label)
            assert got.precision == pytest.approx(expected[0], abs=1e-12)
            assert got.recall == pytest.approx(expected[1], abs=1e-12)
            assert got.f1 == pytest.approx(expected[2], abs=1e-12)


class TestEffectiveRecall:
    @pytest.mark.parametrize("y,n,yt,nt,r,published", [
        (115_696, 6_990_633, 512, 1_088, 0.82, 0.14),
        (195_442, 6_910_887, 691, 909, 0.95, 0.41),
        (190_471, 6_915_858, 707, 893, 0.96, 0.46),
        (233_187, 6_873_142, 729, 871, 0.97, 0.57),
    ])
    def test_published_inputs(self, y, n, yt, nt, r, published):
        got = effective_recall(EffectiveRecallInputs(y=y, n=n, yt=yt, nt=nt, recall=r))
        assert got == pytest.approx(published, abs=0.005)

    @pytest.mark.parametrize("r", [0.5, 0.25, 0.75, 0.125])
    def test_balanced_identity_exact(self, r):
        # Y*Nt == N*Yt makes the estimate collapse to R itself.
        inputs = EffectiveRecallInputs(y=300, n=600, yt=20, nt=40, recall=r)
        assert effective_recall(inputs) == r

    @given(st.floats(min_value=0.001, max_value=0.999))
    def test_balanced_identity_approx(self, r):
        inputs = EffectiveRecallInputs(y=300, n=600, yt=20, nt=40, recall=r)
        assert effective_recall(inputs) == pytest.approx(r, abs=1e-12)

    def test_bounds_and_extremes(self):
        base = dict(y=1000, n=9000, yt=30, nt=70)
        assert effective_recall(EffectiveRecallInputs(recall=1.0, **base)) == 1.0
        assert effective_recall(EffectiveRecallInputs(recall=0.0, **base)) == 0.0
        for r in (0.1, 0.4, 0.7, 0.95):
            assert 0.0 <= effective_recall(EffectiveRecallInputs(recall=r, **base)) <= 1.0

    def test_strictly_increasing_in_recall(self):
        base = dict(y=1000, n=9000, yt=30, nt=70)
        grid = [i / 50 for i in range(1, 50)]
        values = [effective_recall(EffectiveRecallInputs(recall=r, **base)) for r in grid]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_zero_denominator(self):
        with pytest.raises(UndefinedStatisticError):
            effective_recall(EffectiveRecallInputs(y=0, n=5, yt=0, nt=10, recall=0.5))

    def test_validation(self):
        with pytest.raises(ValueError):
            EffectiveRecallInputs(y=-1, n=0, yt=0, nt=0, recall=0.5)
        with pytest.raises(ValueError):
            EffectiveRecallInputs(y=1, n=1, yt=1, nt=1, recall=1.5)


class TestRounding:
    @pytest.mark.parametrize("value,expected", [
        (0.455, 0.46), (0.445, 0.45), (0.125, 0.13), (99.955, 99.96), (0.0, 0.0),
    ])
    def test_half_up(self, value, expected):
        assert round_half_up(value, 2) == expected
