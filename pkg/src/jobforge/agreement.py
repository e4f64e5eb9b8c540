"""Inter-annotator reliability statistics.

Implements Fleiss' kappa, Krippendorff's alpha (nominal, via the coincidence
matrix), and Cohen's kappa, plus per-round summaries with Altman's
qualitative bands. Degenerate inputs (zero expected disagreement) raise
UndefinedStatisticError rather than returning a silent 0 or 1.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import UndefinedStatisticError

FLEISS_KAPPA = "fleiss_kappa"
KRIPP_ALPHA = "kripp_alpha"
COHEN_KAPPA = "cohen_kappa"

# Altman (1991) strength-of-agreement cutoffs.
_ALTMAN_BANDS = (
    (0.2, "Poor"),
    (0.4, "Fair"),
    (0.6, "Moderate"),
    (0.8, "Good"),
)


def altman_band(value: float) -> str:
    value = round(value, 9)  # keep float noise from flipping a cutoff
    for cutoff, label in _ALTMAN_BANDS:
        if value < cutoff:
            return label
    return "Very Good"


@dataclass(frozen=True)
class RatingMatrix:
    """Items x categories table of rater counts, constant raters per item."""

    counts: tuple[tuple[int, ...], ...]
    categories: tuple[str, ...] = ("Y", "N")

    def __post_init__(self) -> None:
        if not self.counts:
            raise ValueError("rating matrix needs at least one item")
        width = len(self.categories)
        sums = set()
        for row in self.counts:
            if len(row) != width:
                raise ValueError("row width must match category count")
            if any(c < 0 for c in row):
                raise ValueError("counts must be nonnegative")
            sums.add(sum(row))
        if len(sums) != 1:
            raise ValueError("every item must have the same number of raters")
        if next(iter(sums)) < 2:
            raise ValueError("need at least 2 raters per item")

    @property
    def raters_per_item(self) -> int:
        return sum(self.counts[0])

    @classmethod
    def from_votes(cls, votes: Iterable[tuple[int, int]]) -> "RatingMatrix":
        """Build a two-category (Y, N) matrix from (y_count, n_count) pairs."""
        return cls(counts=tuple((y, n) for y, n in votes))

    def to_units(self) -> list[list[str]]:
        """Expand rows back into per-item rating lists (for alpha)."""
        units = []
        for row in self.counts:
            unit: list[str] = []
            for cat, count in zip(self.categories, row):
                unit.extend([cat] * count)
            units.append(unit)
        return units


def fleiss_kappa(matrix: RatingMatrix) -> float:
    """kappa = (P_bar - Pe_bar) / (1 - Pe_bar), Fleiss (1971) definitions."""
    n = matrix.raters_per_item
    n_items = len(matrix.counts)
    per_item = [
        (sum(c * c for c in row) - n) / (n * (n - 1))
        for row in matrix.counts
    ]
    p_observed = sum(per_item) / n_items
    total = n_items * n
    proportions = [sum(row[j] for row in matrix.counts) / total
                   for j in range(len(matrix.categories))]
    p_expected = sum(p * p for p in proportions)
    if p_expected >= 1.0:
        raise UndefinedStatisticError(
            "all raters chose a single category for every item; kappa undefined")
    return (p_observed - p_expected) / (1.0 - p_expected)


def krippendorff_alpha_nominal(units: Iterable[Sequence[str]]) -> float:
    """alpha = 1 - D_o/D_e from the coincidence matrix; missing raters allowed.

    Units with fewer than two ratings are unpairable and contribute nothing.
    """
    coincidences: Counter[tuple[str, str]] = Counter()
    total = 0.0
    for unit in units:
        m = len(unit)
        if m < 2:
            continue
        total += m
        weight = 1.0 / (m - 1)
        for i, a in enumerate(unit):
            for j, b in enumerate(unit):
                if i != j:
                    coincidences[(a, b)] += weight
    if total < 2:
        raise ValueError("need at least 2 pairable values")
    categories = sorted({c for pair in coincidences for c in pair})
    marginals = {c: sum(coincidences[(c, k)] for k in categories) for c in categories}
    observed = sum(coincidences[(c, k)] for c in categories for k in categories if c != k)
    expected = sum(marginals[c] * marginals[k]
                   for c in categories for k in categories if c != k)
    if expected == 0:
        raise UndefinedStatisticError(
            "all pairable values are a single category; alpha undefined")
    d_o = observed / total
    d_e = expected / (total * (total - 1.0))
    return 1.0 - d_o / d_e


def cohen_kappa(a: Sequence[str], b: Sequence[str]) -> float:
    """kappa = (p_o - p_e) / (1 - p_e) for two raters over the same items."""
    if len(a) != len(b) or len(a) < 1:
        raise ValueError("rating vectors must be nonempty and equal length")
    n = len(a)
    p_observed = sum(1 for x, y in zip(a, b) if x == y) / n
    categories = sorted(set(a) | set(b))
    marg_a = Counter(a)
    marg_b = Counter(b)
    p_expected = sum((marg_a[c] / n) * (marg_b[c] / n) for c in categories)
    if p_expected >= 1.0:
        raise UndefinedStatisticError(
            "both raters constant on one category; kappa undefined")
    return (p_observed - p_expected) / (1.0 - p_expected)


@dataclass(frozen=True)
class AgreementReport:
    """Per-HIT values of one statistic with their mean, spread and band."""

    statistic: str
    per_hit_values: tuple[float, ...]
    mean: float
    stdev: float
    band: str
    n_undefined: int = 0

    @property
    def value(self) -> float:
        return self.mean


def round_summary(hits: Sequence[RatingMatrix], statistic: str = FLEISS_KAPPA) -> AgreementReport:
    """Compute the statistic per HIT, then mean +/- population stdev and band.

    HITs on which the statistic is undefined are excluded and counted.
    """
    if statistic not in (FLEISS_KAPPA, KRIPP_ALPHA):
        raise ValueError(
            f"round_summary supports {FLEISS_KAPPA!r} and {KRIPP_ALPHA!r}, "
            f"got {statistic!r} (Cohen's kappa needs ordered rater vectors)")
    values: list[float] = []
    undefined = 0
    for matrix in hits:
        try:
            if statistic == FLEISS_KAPPA:
                values.append(fleiss_kappa(matrix))
            else:
                values.append(krippendorff_alpha_nominal(matrix.to_units()))
        except UndefinedStatisticError:
            undefined += 1
    if not values:
        raise UndefinedStatisticError("statistic undefined on every HIT")
    mean = sum(values) / len(values)
    stdev = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
    return AgreementReport(
        statistic=statistic,
        per_hit_values=tuple(values),
        mean=mean,
        stdev=stdev,
        band=altman_band(mean),
        n_undefined=undefined,
    )


def expert_agreement(a: Sequence[str], b: Sequence[str]) -> AgreementReport:
    """Cohen's kappa between two expert label vectors, as a one-value report."""
    value = cohen_kappa(a, b)
    return AgreementReport(
        statistic=COHEN_KAPPA,
        per_hit_values=(value,),
        mean=value,
        stdev=0.0,
        band=altman_band(value),
    )
