"""Annotation round mechanics: HIT construction with duplicate injection,
worker consistency screening, consensus aggregation, expert adjudication, and
assembly of the gold training set.

Everything here is pure over its inputs; persistence goes through the store.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Collection, Iterable, Mapping, Sequence

import numpy as np

from .normalize import anonymize

YES = "Y"
NO = "N"

UNANIMOUS_JOB = "unanimous_job"
UNANIMOUS_NOTJOB = "unanimous_notjob"
MAJORITY_JOB = "majority_job"
MAJORITY_NOTJOB = "majority_notjob"


@dataclass(frozen=True)
class HitItem:
    item_id: str
    tweet_id: str
    text: str  # anonymized


@dataclass(frozen=True)
class Hit:
    hit_id: str
    round_id: str
    items: tuple[HitItem, ...]
    n_base: int
    n_dups: int

    def duplicated_tweet_ids(self) -> set[str]:
        counts = Counter(item.tweet_id for item in self.items)
        return {tid for tid, c in counts.items() if c > 1}


@dataclass(frozen=True)
class WorkerResponse:
    worker_id: str
    hit_id: str
    item_id: str
    answer: str

    def __post_init__(self) -> None:
        if self.answer not in (YES, NO):
            raise ValueError(f"answer must be Y or N, got {self.answer!r}")


@dataclass(frozen=True)
class AggregatedLabel:
    tweet_id: str
    y_count: int
    n_count: int
    consensus: str
    needs_adjudication: bool

    @property
    def votes(self) -> tuple[int, int]:
        return (self.y_count, self.n_count)

    @property
    def label(self) -> str:
        return "job" if self.y_count > self.n_count else "notjob"


@dataclass(frozen=True)
class Adjudication:
    tweet_id: str
    expert_id: str
    final_label: str


def build_hits(
    tweet_ids: Sequence[str],
    texts: Mapping[str, str],
    subset_size: int,
    n_dups: int,
    seed: int,
    round_id: str = "R",
) -> list[Hit]:
    """Partition ids into subsets, duplicate n_dups of each, shuffle, anonymize.

    A remainder shorter than subset_size forms a short final HIT; every HIT
    carries exactly n_dups duplicate slots, so a short subset with fewer ids
    than n_dups cycles its ids through the slots (the only case in which a
    duplicated id can appear more than twice).
    """
    if subset_size < 1:
        raise ValueError("subset_size must be >= 1")
    if not 0 <= n_dups <= subset_size:
        raise ValueError("need subset_size >= n_dups >= 0")
    rng = np.random.default_rng(seed)
    hits: list[Hit] = []
    for start in range(0, len(tweet_ids), subset_size):
        subset = list(tweet_ids[start:start + subset_size])
        index = len(hits)
        hit_id = f"{round_id}-h{index:03d}"
        if n_dups <= len(subset):
            dup_positions = rng.choice(len(subset), size=n_dups, replace=False)
            dups = [subset[i] for i in dup_positions]
        else:
            dups = [subset[i % len(subset)] for i in range(n_dups)]
        pool = subset + dups
        order = rng.permutation(len(pool))
        items = tuple(
            HitItem(
                item_id=f"{hit_id}-i{pos:03d}",
                tweet_id=pool[original],
                text=anonymize(texts[pool[original]]),
            )
            for pos, original in enumerate(order)
        )
        hits.append(Hit(hit_id=hit_id, round_id=round_id, items=items,
                        n_base=len(subset), n_dups=n_dups))
    return hits


@dataclass(frozen=True)
class ScreeningResult:
    """Validity is judged per (worker, HIT): one bad HIT does not void a
    worker's other HITs."""

    valid: frozenset[tuple[str, str]]
    rejected: frozenset[tuple[str, str]]

    @property
    def valid_workers(self) -> set[str]:
        return {worker for worker, _ in self.valid}

    @property
    def rejected_workers(self) -> set[str]:
        return {worker for worker, _ in self.rejected}


def screen_workers(responses: Iterable[WorkerResponse],
                   hits: Iterable[Hit]) -> ScreeningResult:
    """Reject a (worker, hit) whose duplicate copies got differing answers,
    or which is missing answers for some items."""
    hit_index = {hit.hit_id: hit for hit in hits}
    by_pair: dict[tuple[str, str], dict[str, str]] = defaultdict(dict)
    for response in responses:
        by_pair[(response.worker_id, response.hit_id)][response.item_id] = response.answer

    valid: set[tuple[str, str]] = set()
    rejected: set[tuple[str, str]] = set()
    for (worker_id, hit_id), answers in by_pair.items():
        hit = hit_index.get(hit_id)
        if hit is None:
            rejected.add((worker_id, hit_id))
            continue
        if set(answers) != {item.item_id for item in hit.items}:
            rejected.add((worker_id, hit_id))
            continue
        per_tweet: dict[str, set[str]] = defaultdict(set)
        for item in hit.items:
            per_tweet[item.tweet_id].add(answers[item.item_id])
        if any(len(seen) > 1 for seen in per_tweet.values()):
            rejected.add((worker_id, hit_id))
        else:
            valid.add((worker_id, hit_id))
    return ScreeningResult(valid=frozenset(valid), rejected=frozenset(rejected))


@dataclass(frozen=True)
class AggregateResult:
    labels: tuple[AggregatedLabel, ...]
    short_staffed: tuple[str, ...]   # tweets with != n_required valid votes
    tied: tuple[str, ...]            # only possible for even n_required

    def by_tweet(self) -> dict[str, AggregatedLabel]:
        return {lab.tweet_id: lab for lab in self.labels}


def aggregate(responses: Iterable[WorkerResponse], hits: Sequence[Hit],
              n_required: int = 5) -> AggregateResult:
    """Collapse duplicates to one vote per valid worker and bucket consensus.

    Tweets that did not end up with exactly n_required valid votes are
    flagged short-staffed and excluded from the labeled output.
    """
    if n_required < 2:
        raise ValueError("n_required must be >= 2")
    responses = list(responses)
    screening = screen_workers(responses, hits)
    answer_of: dict[tuple[str, str], str] = {
        (r.worker_id, r.item_id): r.answer for r in responses}
    workers_of_hit: dict[str, set[str]] = defaultdict(set)
    for response in responses:
        workers_of_hit[response.hit_id].add(response.worker_id)

    votes: dict[str, Counter[str]] = defaultdict(Counter)
    for hit in hits:
        valid_workers = [w for w in workers_of_hit.get(hit.hit_id, ())
                         if (w, hit.hit_id) in screening.valid]
        # screening guarantees all copies agree; one representative item per tweet
        item_of_tweet = {item.tweet_id: item.item_id for item in hit.items}
        for worker in valid_workers:
            for tweet_id, item_id in item_of_tweet.items():
                votes[tweet_id][answer_of[(worker, item_id)]] += 1

    labels: list[AggregatedLabel] = []
    short_staffed: list[str] = []
    tied: list[str] = []
    for tweet_id in sorted(votes):
        y = votes[tweet_id][YES]
        n = votes[tweet_id][NO]
        if y + n != n_required:
            short_staffed.append(tweet_id)
            continue
        if y == n:
            tied.append(tweet_id)
            continue
        if y == n_required:
            consensus = UNANIMOUS_JOB
        elif n == n_required:
            consensus = UNANIMOUS_NOTJOB
        elif y > n:
            consensus = MAJORITY_JOB
        else:
            consensus = MAJORITY_NOTJOB
        labels.append(AggregatedLabel(
            tweet_id=tweet_id, y_count=y, n_count=n, consensus=consensus,
            needs_adjudication=consensus in (MAJORITY_JOB, MAJORITY_NOTJOB)))
    return AggregateResult(labels=tuple(labels), short_staffed=tuple(short_staffed),
                           tied=tuple(tied))


def adjudication_queue(aggregated: Iterable[AggregatedLabel]) -> list[str]:
    """Disputed tweets ordered by descending disagreement (3-2 before 4-1)."""
    disputed = [lab for lab in aggregated if lab.needs_adjudication]
    disputed.sort(key=lambda lab: (-min(lab.y_count, lab.n_count), lab.tweet_id))
    return [lab.tweet_id for lab in disputed]


class AdjudicationBook:
    """Expert labels over queued tweets.

    A tweet's resolution is the experts' common label; once two experts
    disagree the tweet is marked unresolved and stays out of training data.
    """

    def __init__(self) -> None:
        self._labels: dict[str, dict[str, str]] = defaultdict(dict)

    def record(self, queue: Collection[str], tweet_id: str, expert_id: str,
               final_label: str) -> Adjudication:
        if tweet_id not in queue:
            raise ValueError(f"tweet {tweet_id} is not in the adjudication queue")
        if final_label not in ("job", "notjob"):
            raise ValueError(f"final_label must be job or notjob, got {final_label!r}")
        self._labels[tweet_id][expert_id] = final_label
        return Adjudication(tweet_id=tweet_id, expert_id=expert_id, final_label=final_label)

    def load(self, adjudications: Iterable[Adjudication]) -> None:
        for adj in adjudications:
            self._labels[adj.tweet_id][adj.expert_id] = adj.final_label

    def labels_of(self, tweet_id: str) -> dict[str, str]:
        return dict(self._labels.get(tweet_id, {}))

    def resolution(self, tweet_id: str) -> str | None:
        labels = set(self._labels.get(tweet_id, {}).values())
        if len(labels) == 1:
            return next(iter(labels))
        return None  # unlabeled, or experts disagree

    def resolved(self) -> dict[str, str]:
        out = {}
        for tweet_id in self._labels:
            label = self.resolution(tweet_id)
            if label is not None:
                out[tweet_id] = label
        return out

    def unresolved(self) -> set[str]:
        return {tweet_id for tweet_id, labels in self._labels.items()
                if len(set(labels.values())) > 1}

    def expert_vectors(self, expert_a: str, expert_b: str) -> tuple[list[str], list[str]]:
        """Parallel label vectors over tweets both experts labeled."""
        a, b = [], []
        for tweet_id in sorted(self._labels):
            labels = self._labels[tweet_id]
            if expert_a in labels and expert_b in labels:
                a.append(labels[expert_a])
                b.append(labels[expert_b])
        return a, b


def gold_training_set(
    aggregated_rounds: Iterable[Iterable[AggregatedLabel]],
    book: AdjudicationBook | None = None,
) -> list[tuple[str, str]]:
    """Union of unanimous labels across rounds plus adjudicated labels.

    Deduplicated by tweet_id; an adjudicated label always wins over a
    unanimous one, and unresolved adjudications are excluded entirely.
    """
    gold: dict[str, str] = {}
    conflicted: set[str] = set()
    for round_labels in aggregated_rounds:
        for lab in round_labels:
            if lab.consensus not in (UNANIMOUS_JOB, UNANIMOUS_NOTJOB):
                continue
            label = "job" if lab.consensus == UNANIMOUS_JOB else "notjob"
            if lab.tweet_id in gold and gold[lab.tweet_id] != label:
                conflicted.add(lab.tweet_id)
            gold[lab.tweet_id] = label
    for tweet_id in conflicted:
        gold.pop(tweet_id, None)
    if book is not None:
        for tweet_id, label in book.resolved().items():
            gold[tweet_id] = label
        for tweet_id in book.unresolved():
            gold.pop(tweet_id, None)
    return sorted(gold.items())
