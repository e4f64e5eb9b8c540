"""Selecting tweets for annotation rounds: high-confidence positives
(type-1), near-hyperplane items from both sides (type-2), random negatives,
and rule-matched pools, always excluding previously used tweets.

All sampling uses numpy's seeded PCG64 generator, so identical spec + seed +
inputs reproduce identical output lists on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .store import UsageLedger

TYPE1 = "type1"
TYPE2 = "type2"
RANDOM_NEGATIVE = "random_negative"
RULE_POOL = "rule_pool"

_STRATEGIES = (TYPE1, TYPE2, RANDOM_NEGATIVE, RULE_POOL)


@dataclass(frozen=True)
class SampleSpec:
    strategy: str
    k: int
    seed: int
    percentile: float = 0.8      # type1 only
    band_fraction: float = 0.1   # type2 only

    def __post_init__(self) -> None:
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not 0.0 < self.percentile < 1.0:
            raise ValueError("percentile must be in (0, 1)")
        if not 0.0 < self.band_fraction < 1.0:
            raise ValueError("band_fraction must be in (0, 1)")


def nearest_rank_threshold(confidences: Sequence[float], percentile: float) -> float:
    """Nearest-rank quantile: the ceil(p*n)-th smallest value, stepping one
    rank higher when p*n lands exactly on an integer (so the 0.8 quantile of
    five points admits exactly the top point)."""
    ascending = sorted(confidences)
    n = len(ascending)
    if n == 0:
        raise ValueError("cannot take a quantile of an empty list")
    pn = percentile * n
    nearest_int = round(pn)
    if math.isclose(pn, nearest_int, rel_tol=0.0, abs_tol=1e-9):
        index = min(int(nearest_int), n - 1)
    else:
        index = math.ceil(pn) - 1
    return ascending[index]


def _draw(pool: Sequence[str], k: int, rng: np.random.Generator) -> list[str]:
    if k <= 0 or not pool:
        return []
    size = min(k, len(pool))
    chosen = rng.choice(len(pool), size=size, replace=False)
    return [pool[i] for i in chosen]


def sample_type1(
    ranked_pos: Sequence[tuple[str, float]],
    spec: SampleSpec,
    ledger: UsageLedger,
) -> list[str]:
    """Uniform draw from positives at or above the percentile threshold.

    ranked_pos must be sorted by confidence descending; the threshold is
    computed over all positives, the ledger is excluded afterwards.
    """
    confidences = [conf for _, conf in ranked_pos]
    if any(confidences[i] < confidences[i + 1] for i in range(len(confidences) - 1)):
        raise ValueError("ranked_pos must be sorted by confidence descending")
    if not ranked_pos:
        return []
    threshold = nearest_rank_threshold(confidences, spec.percentile)
    pool = [tid for tid, conf in ranked_pos if conf >= threshold and tid not in ledger]
    return _draw(pool, spec.k, np.random.default_rng(spec.seed))


def _band(side: Sequence[tuple[str, float]], fraction: float) -> list[tuple[str, float]]:
    ordered = sorted(side, key=lambda item: (abs(item[1]), item[0]))
    count = min(len(ordered), math.ceil(fraction * len(ordered)))
    return ordered[:count]


def sample_type2(
    ranked_pos: Sequence[tuple[str, float]],
    ranked_neg: Sequence[tuple[str, float]],
    spec: SampleSpec,
    ledger: UsageLedger,
) -> list[str]:
    """k/2 from the smallest-|confidence| band of each side (extra one from
    the positive side when k is odd); a short or empty side spills over to
    the other side's band."""
    rng = np.random.default_rng(spec.seed)
    pool_pos = [tid for tid, _ in _band(ranked_pos, spec.band_fraction) if tid not in ledger]
    pool_neg = [tid for tid, _ in _band(ranked_neg, spec.band_fraction) if tid not in ledger]
    want_pos = spec.k - spec.k // 2
    want_neg = spec.k // 2
    take_pos = _draw(pool_pos, want_pos, rng)
    take_neg = _draw(pool_neg, want_neg, rng)
    shortfall = spec.k - len(take_pos) - len(take_neg)
    if shortfall > 0:
        leftover_pos = [tid for tid in pool_pos if tid not in set(take_pos)]
        extra = _draw(leftover_pos, shortfall, rng)
        take_pos.extend(extra)
        shortfall -= len(extra)
    if shortfall > 0:
        leftover_neg = [tid for tid in pool_neg if tid not in set(take_neg)]
        take_neg.extend(_draw(leftover_neg, shortfall, rng))
    return take_pos + take_neg


def sample_random_negatives(
    all_ids: Iterable[str],
    job_likely_ids: Iterable[str],
    k: int,
    seed: int,
    ledger: UsageLedger,
) -> list[str]:
    """Uniform without replacement from all_ids - job_likely_ids - ledger."""
    if k < 0:
        raise ValueError("k must be >= 0")
    excluded = set(job_likely_ids)
    pool = sorted(tid for tid in set(all_ids)
                  if tid not in excluded and tid not in ledger)
    return _draw(pool, k, np.random.default_rng(seed))


def sample_rule_pool(
    matched_ids: Iterable[str],
    k: int,
    seed: int,
    ledger: UsageLedger,
) -> list[str]:
    """Uniform without replacement from matched_ids - ledger."""
    if k < 0:
        raise ValueError("k must be >= 0")
    pool = sorted(tid for tid in set(matched_ids) if tid not in ledger)
    return _draw(pool, k, np.random.default_rng(seed))
