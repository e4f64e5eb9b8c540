"""Classifier evaluation: per-class precision/recall/F1 with support-weighted
averages, and the estimated effective recall that rescales test-set recall to
the full-corpus class ratio.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from typing import Sequence

from .errors import UndefinedStatisticError


def round_half_up(value: float, places: int = 2) -> float:
    """Presentation rounding (half-up). Internal values stay full precision."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    """Per-class metrics plus the support-weighted average row."""

    per_class: tuple[tuple[str, ClassMetrics], ...]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float

    def metrics_for(self, label: str) -> ClassMetrics:
        for name, metrics in self.per_class:
            if name == label:
                return metrics
        raise KeyError(label)

    def rows(self) -> list[tuple[str, float, float, float, int]]:
        """Table rows with 2-decimal presentation rounding, avg/total last."""
        out = [
            (label, round_half_up(m.precision), round_half_up(m.recall),
             round_half_up(m.f1), m.support)
            for label, m in self.per_class
        ]
        total = sum(m.support for _, m in self.per_class)
        out.append(("avg / total", round_half_up(self.weighted_precision),
                    round_half_up(self.weighted_recall),
                    round_half_up(self.weighted_f1), total))
        return out


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def eval_report(
    preds: Sequence[str],
    refs: Sequence[str],
    labels: Sequence[str] = ("job", "notjob"),
) -> EvalReport:
    """Standard confusion-matrix P/R/F1 per class; 0/0 ratios defined as 0."""
    if len(preds) != len(refs) or len(refs) < 1:
        raise ValueError("preds and refs must be nonempty and equal length")
    per_class = []
    total = len(refs)
    w_p = w_r = w_f = 0.0
    for label in labels:
        tp = sum(1 for p, r in zip(preds, refs) if p == label and r == label)
        pred_pos = sum(1 for p in preds if p == label)
        support = sum(1 for r in refs if r == label)
        precision = _safe_div(tp, pred_pos)
        recall = _safe_div(tp, support)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class.append((label, ClassMetrics(precision, recall, f1, support)))
        w_p += precision * support
        w_r += recall * support
        w_f += f1 * support
    return EvalReport(
        per_class=tuple(per_class),
        weighted_precision=w_p / total,
        weighted_recall=w_r / total,
        weighted_f1=w_f / total,
    )


@dataclass(frozen=True)
class EffectiveRecallInputs:
    """Counts feeding the effective-recall estimate.

    y/n: classifier-labeled job/notjob counts over the full corpus;
    yt/nt: the same split inside the test sample; recall: job-class recall
    measured on the test sample.
    """

    y: int
    n: int
    yt: int
    nt: int
    recall: float

    def __post_init__(self) -> None:
        for name in ("y", "n", "yt", "nt"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.recall <= 1.0:
            raise ValueError("recall must be in [0, 1]")


def effective_recall(inputs: EffectiveRecallInputs) -> float:
    """Recall reweighted to the full-corpus class ratio.

    r_hat = (Y * Nt * R) / (Y * Nt * R + N * Yt * (1 - R))
    """
    numerator = inputs.y * inputs.nt * inputs.recall
    denominator = numerator + inputs.n * inputs.yt * (1.0 - inputs.recall)
    if denominator == 0:
        raise UndefinedStatisticError("effective recall denominator is zero")
    return numerator / denominator
