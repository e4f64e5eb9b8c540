"""Persistence and interchange: append-only JSON-lines segment files with an
in-memory index rebuilt on open, plus release export and corpus statistics.

All mutations flow through one serialized writer (a re-entrant lock held by
the Store); readers always see a consistent snapshot.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ConflictError
from .normalize import Tweet
from .rounds import Adjudication, Hit, HitItem, WorkerResponse

TOPIC_LABELS = ("job", "notjob")
SOURCE_LABELS = ("personal", "business")
NA = "NA"

# Canonical field order of a release row, copied from the published record
# layout so exports are byte-stable.
RECORD_FIELDS = ("topic_human", "tweet_id", "topic_machine", "source_machine", "source_human")


@dataclass(frozen=True)
class CorpusRecord:
    tweet_id: str
    topic_human: str = NA
    topic_machine: str = "notjob"
    source_human: str = NA
    source_machine: str = "personal"

    def __post_init__(self) -> None:
        if self.topic_human not in TOPIC_LABELS + (NA,):
            raise ValueError(f"bad topic_human: {self.topic_human!r}")
        if self.topic_machine not in TOPIC_LABELS:
            raise ValueError(f"bad topic_machine: {self.topic_machine!r}")
        if self.source_human not in SOURCE_LABELS + (NA,):
            raise ValueError(f"bad source_human: {self.source_human!r}")
        if self.source_machine not in SOURCE_LABELS:
            raise ValueError(f"bad source_machine: {self.source_machine!r}")

    def to_json(self) -> str:
        ordered = {name: getattr(self, name) for name in RECORD_FIELDS}
        return json.dumps(ordered, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "CorpusRecord":
        raw = json.loads(line)
        return cls(
            tweet_id=raw["tweet_id"],
            topic_human=raw["topic_human"],
            topic_machine=raw["topic_machine"],
            source_human=raw["source_human"],
            source_machine=raw["source_machine"],
        )


class UsageLedger:
    """Append-only record of which round consumed each tweet."""

    def __init__(self) -> None:
        self._used: dict[str, str] = {}

    def __contains__(self, tweet_id: str) -> bool:
        return tweet_id in self._used

    def __len__(self) -> int:
        return len(self._used)

    def round_of(self, tweet_id: str) -> str | None:
        return self._used.get(tweet_id)

    def ids(self) -> set[str]:
        return set(self._used)

    def consume(self, ids: Iterable[str], round_id: str) -> None:
        """Record ids against a round; reuse is a conflict, not a warning."""
        ids = list(ids)
        for tweet_id in ids:
            prior = self._used.get(tweet_id)
            if prior is not None:
                raise ConflictError(
                    f"tweet {tweet_id} already consumed by round {prior}",
                    tweet_id=tweet_id, prior_round=prior)
        for tweet_id in ids:
            self._used[tweet_id] = round_id


@dataclass(frozen=True)
class LineError:
    line: int
    message: str


@dataclass(frozen=True)
class IngestReport:
    accepted: int
    skipped_duplicates: int
    errors: tuple[LineError, ...]


def export_release(records: Iterable[CorpusRecord], path: str | Path,
                   ids_only: bool = True,
                   texts: Mapping[str, str] | None = None) -> Path:
    """Write JSON-lines release rows in canonical field order.

    ids_only mode never emits text; passing ids_only=False attaches the raw
    text after the five canonical fields (local use only).
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            if ids_only:
                fh.write(record.to_json())
            else:
                ordered = {name: getattr(record, name) for name in RECORD_FIELDS}
                if texts and record.tweet_id in texts:
                    ordered["text"] = texts[record.tweet_id]
                fh.write(json.dumps(ordered, separators=(",", ":")))
            fh.write("\n")
    return path


def import_release(path: str | Path) -> list[CorpusRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(CorpusRecord.from_json(line))
    return records


def corpus_stats(records: Iterable[CorpusRecord]) -> dict:
    """Counts by (topic|source) x (human|machine) x label, NA included for human."""
    stats = {
        "topic": {
            "human": {"job": 0, "notjob": 0, NA: 0},
            "machine": {"job": 0, "notjob": 0},
        },
        "source": {
            "human": {"personal": 0, "business": 0, NA: 0},
            "machine": {"personal": 0, "business": 0},
        },
    }
    for record in records:
        stats["topic"]["human"][record.topic_human] += 1
        stats["topic"]["machine"][record.topic_machine] += 1
        stats["source"]["human"][record.source_human] += 1
        stats["source"]["machine"][record.source_machine] += 1
    return stats


class Store:
    """JSON-lines backed, single-writer store for tweets, rounds and labels."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._tweets: dict[str, Tweet] = {}
        self._ledger = UsageLedger()
        self._hits: dict[str, Hit] = {}
        self._rounds: dict[str, list[str]] = {}
        self._responses: list[WorkerResponse] = []
        self._latest_response: dict[tuple[str, str], WorkerResponse] = {}
        self._adjudications: list[Adjudication] = []
        self._records: dict[str, CorpusRecord] = {}
        self._load()

    # -- paths ------------------------------------------------------------

    def _path(self, name: str) -> Path:
        return self.root / f"{name}.jsonl"

    def _append(self, name: str, row: dict) -> None:
        with open(self._path(name), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")

    def _read(self, name: str) -> Iterator[dict]:
        path = self._path(name)
        if not path.exists():
            return
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield json.loads(line)

    def _load(self) -> None:
        for raw in self._read("tweets"):
            tweet = _tweet_from_row(raw)
            self._tweets[tweet.tweet_id] = tweet
        for raw in self._read("ledger"):
            self._ledger.consume([raw["tweet_id"]], raw["round_id"])
        for raw in self._read("hits"):
            hit = Hit(
                hit_id=raw["hit_id"],
                round_id=raw["round_id"],
                items=tuple(HitItem(*item) for item in raw["items"]),
                n_base=raw["n_base"],
                n_dups=raw["n_dups"],
            )
            self._index_hit(hit)
        for raw in self._read("responses"):
            self._index_response(WorkerResponse(
                worker_id=raw["worker_id"], hit_id=raw["hit_id"],
                item_id=raw["item_id"], answer=raw["answer"]))
        for raw in self._read("adjudications"):
            self._adjudications.append(Adjudication(
                tweet_id=raw["tweet_id"], expert_id=raw["expert_id"],
                final_label=raw["final_label"]))
        for raw in self._read("records"):
            record = CorpusRecord(
                tweet_id=raw["tweet_id"], topic_human=raw["topic_human"],
                topic_machine=raw["topic_machine"], source_human=raw["source_human"],
                source_machine=raw["source_machine"])
            self._records[record.tweet_id] = record

    def _index_hit(self, hit: Hit) -> None:
        self._hits[hit.hit_id] = hit
        self._rounds.setdefault(hit.round_id, []).append(hit.hit_id)

    def _index_response(self, response: WorkerResponse) -> None:
        self._responses.append(response)
        self._latest_response[(response.worker_id, response.item_id)] = response

    # -- tweets -----------------------------------------------------------

    def ingest(self, path: str | Path) -> IngestReport:
        """Append new tweets from a JSON-lines file; bad lines are reported
        with their line number and skipped, duplicates counted."""
        accepted = 0
        duplicates = 0
        errors: list[LineError] = []
        with self._lock:
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        raw = json.loads(line)
                        tweet = _tweet_from_row(raw)
                    except (ValueError, KeyError, TypeError) as exc:
                        errors.append(LineError(lineno, str(exc)))
                        continue
                    if tweet.tweet_id in self._tweets:
                        duplicates += 1
                        continue
                    self._tweets[tweet.tweet_id] = tweet
                    self._append("tweets", _tweet_to_row(tweet))
                    accepted += 1
        return IngestReport(accepted, duplicates, tuple(errors))

    def add_tweets(self, tweets: Iterable[Tweet]) -> int:
        with self._lock:
            added = 0
            for tweet in tweets:
                if tweet.tweet_id in self._tweets:
                    continue
                self._tweets[tweet.tweet_id] = tweet
                self._append("tweets", _tweet_to_row(tweet))
                added += 1
            return added

    def tweet(self, tweet_id: str) -> Tweet:
        with self._lock:
            return self._tweets[tweet_id]

    def tweets(self) -> list[Tweet]:
        with self._lock:
            return list(self._tweets.values())

    def tweet_ids(self) -> list[str]:
        with self._lock:
            return list(self._tweets)

    def __len__(self) -> int:
        return len(self._tweets)

    # -- ledger -----------------------------------------------------------

    @property
    def ledger(self) -> UsageLedger:
        return self._ledger

    def consume(self, ids: Iterable[str], round_id: str) -> None:
        with self._lock:
            ids = list(ids)
            self._ledger.consume(ids, round_id)
            for tweet_id in ids:
                self._append("ledger", {"tweet_id": tweet_id, "round_id": round_id})

    # -- rounds -----------------------------------------------------------

    def add_hits(self, hits: Iterable[Hit]) -> None:
        with self._lock:
            for hit in hits:
                if hit.hit_id in self._hits:
                    raise ConflictError(f"hit {hit.hit_id} already stored")
                self._index_hit(hit)
                self._append("hits", {
                    "hit_id": hit.hit_id, "round_id": hit.round_id,
                    "n_base": hit.n_base, "n_dups": hit.n_dups,
                    "items": [[i.item_id, i.tweet_id, i.text] for i in hit.items],
                })

    def hits_for_round(self, round_id: str) -> list[Hit]:
        with self._lock:
            return [self._hits[h] for h in self._rounds.get(round_id, [])]

    def round_ids(self) -> list[str]:
        with self._lock:
            return list(self._rounds)

    def hit(self, hit_id: str) -> Hit:
        with self._lock:
            return self._hits[hit_id]

    def add_responses(self, responses: Iterable[WorkerResponse]) -> None:
        """Append worker answers; resubmission for the same (worker, item) is
        idempotent last-write-wins, with the full history kept as audit."""
        with self._lock:
            for response in responses:
                self._index_response(response)
                self._append("responses", {
                    "worker_id": response.worker_id, "hit_id": response.hit_id,
                    "item_id": response.item_id, "answer": response.answer,
                })

    def responses_for_round(self, round_id: str) -> list[WorkerResponse]:
        """Latest answer per (worker, item) across the round's HITs."""
        with self._lock:
            hit_ids = set(self._rounds.get(round_id, []))
            return [r for r in self._latest_response.values() if r.hit_id in hit_ids]

    def audit_trail(self, worker_id: str, item_id: str) -> list[WorkerResponse]:
        with self._lock:
            return [r for r in self._responses
                    if r.worker_id == worker_id and r.item_id == item_id]

    def add_adjudication(self, adjudication: Adjudication) -> None:
        with self._lock:
            self._adjudications.append(adjudication)
            self._append("adjudications", {
                "tweet_id": adjudication.tweet_id,
                "expert_id": adjudication.expert_id,
                "final_label": adjudication.final_label,
            })

    def adjudications(self) -> list[Adjudication]:
        with self._lock:
            return list(self._adjudications)

    # -- records ----------------------------------------------------------

    def put_records(self, records: Iterable[CorpusRecord]) -> None:
        with self._lock:
            for record in records:
                self._records[record.tweet_id] = record
                self._append("records", json.loads(record.to_json()))

    def records(self) -> list[CorpusRecord]:
        with self._lock:
            return list(self._records.values())

    # -- integrity --------------------------------------------------------

    def audit(self) -> list[str]:
        """Full-scan referential integrity check; returns violations."""
        problems: list[str] = []
        with self._lock:
            item_ids = {item.item_id for hit in self._hits.values() for item in hit.items}
            for response in self._responses:
                if response.hit_id not in self._hits:
                    problems.append(f"response references unknown hit {response.hit_id}")
                elif response.item_id not in item_ids:
                    problems.append(f"response references unknown item {response.item_id}")
            for hit in self._hits.values():
                for item in hit.items:
                    if item.tweet_id not in self._tweets:
                        problems.append(
                            f"hit {hit.hit_id} references unknown tweet {item.tweet_id}")
            for tweet_id in self._ledger.ids():
                if tweet_id not in self._tweets:
                    problems.append(f"ledger references unknown tweet {tweet_id}")
            for record in self._records.values():
                if record.tweet_id not in self._tweets:
                    problems.append(f"record references unknown tweet {record.tweet_id}")
            for adjudication in self._adjudications:
                if adjudication.tweet_id not in self._tweets:
                    problems.append(
                        f"adjudication references unknown tweet {adjudication.tweet_id}")
        return problems


def _tweet_to_row(tweet: Tweet) -> dict:
    row: dict = {
        "tweet_id": tweet.tweet_id,
        "text": tweet.text,
        "account_id": tweet.account_id,
    }
    if tweet.created_at is not None:
        row["created_at"] = tweet.created_at
    if tweet.geo is not None:
        row["lat"], row["lon"] = tweet.geo
    return row


def _tweet_from_row(raw: Mapping) -> Tweet:
    geo = None
    if "lat" in raw and "lon" in raw:
        geo = (float(raw["lat"]), float(raw["lon"]))
    return Tweet(
        tweet_id=str(raw["tweet_id"]),
        text=raw["text"],
        account_id=str(raw["account_id"]),
        created_at=raw.get("created_at"),
        geo=geo,
    )
