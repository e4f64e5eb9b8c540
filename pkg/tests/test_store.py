from __future__ import annotations

import json

import pytest

from jobforge.errors import ConflictError
from jobforge.normalize import Tweet
from jobforge.rounds import WorkerResponse, build_hits
from jobforge.store import (
    CorpusRecord,
    Store,
    UsageLedger,
    corpus_stats,
    export_release,
    import_release,
)

PUBLISHED_RECORD_LINE = ('{"topic_human":"NA","tweet_id":"409834886405832705",'
                     '"topic_machine":"job","source_machine":"personal",'
                     '"source_human":"NA"}')


def write_corpus(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


class TestIngest:
    def test_three_lines(self, tmp_path):
        src = tmp_path / "in.jsonl"
        write_corpus(src, [
            {"tweet_id": "1", "text": "a", "account_id": "x"},
            {"tweet_id": "2", "text": "b", "account_id": "x"},
            {"tweet_id": "3", "text": "c", "account_id": "y", "lat": 43.1, "lon": -77.6},
        ])
        store = Store(tmp_path / "store")
        report = store.ingest(src)
        assert report.accepted == 3
        assert report.skipped_duplicates == 0
        assert store.tweet("3").geo == (43.1, -77.6)

    def test_second_run_is_idempotent(self, tmp_path):
        src = tmp_path / "in.jsonl"
        write_corpus(src, [{"tweet_id": "1", "text": "a", "account_id": "x"}])
        store = Store(tmp_path / "store")
        assert store.ingest(src).accepted == 1
        again = store.ingest(src)
        assert again.accepted == 0
        assert again.skipped_duplicates == 1

    def test_malformed_line_reported_with_number(self, tmp_path):
        src = tmp_path / "in.jsonl"
        src.write_text(
            '{"tweet_id": "1", "text": "a", "account_id": "x"}\n'
            'not json at all\n'
            '{"tweet_id": "2", "text": "b", "account_id": "x"}\n',
            encoding="utf-8")
        store = Store(tmp_path / "store")
        report = store.ingest(src)
        assert report.accepted == 2
        assert len(report.errors) == 1
        assert report.errors[0].line == 2

    def test_reload_from_disk(self, tmp_path):
        src = tmp_path / "in.jsonl"
        write_corpus(src, [{"tweet_id": "1", "text": "a", "account_id": "x"}])
        Store(tmp_path / "store").ingest(src)
        reopened = Store(tmp_path / "store")
        assert len(reopened) == 1


class TestLedger:
    def test_consume_accumulates(self):
        ledger = UsageLedger()
        ledger.consume(["a"], "R1")
        ledger.consume(["b"], "R2")
        assert ledger.ids() == {"a", "b"}
        assert ledger.round_of("a") == "R1"

    def test_double_consume_conflicts(self):
        ledger = UsageLedger()
        ledger.consume(["a"], "R1")
        with pytest.raises(ConflictError) as err:
            ledger.consume(["a"], "R2")
        assert err.value.tweet_id == "a"
        assert err.value.prior_round == "R1"

    def test_conflict_is_atomic(self):
        ledger = UsageLedger()
        ledger.consume(["a"], "R1")
        with pytest.raises(ConflictError):
            ledger.consume(["b", "a"], "R2")
        assert "b" not in ledger

    def test_empty_consume(self):
        ledger = UsageLedger()
        ledger.consume([], "R1")
        assert len(ledger) == 0

    def test_store_persists_ledger(self, tmp_path):
        store = Store(tmp_path / "store")
        store.add_tweets([Tweet("1", "a", "x")])
        store.consume(["1"], "R1")
        assert Store(tmp_path / "store").ledger.round_of("1") == "R1"


class TestExport:
    def test_published_record_byte_for_byte(self, tmp_path):
        record = CorpusRecord(tweet_id="409834886405832705", topic_human="NA",
                              topic_machine="job", source_human="NA",
                              source_machine="personal")
        out = tmp_path / "release.jsonl"
        export_release([record], out)
        assert out.read_text(encoding="utf-8") == PUBLISHED_RECORD_LINE + "\n"

    def test_empty_set(self, tmp_path):
        out = tmp_path / "release.jsonl"
        export_release([], out)
        assert out.read_text(encoding="utf-8") == ""

    def test_round_trip(self, tmp_path):
        records = [
            CorpusRecord(tweet_id="1", topic_human="job", topic_machine="job",
                         source_human="personal", source_machine="personal"),
            CorpusRecord(tweet_id="2", topic_human="NA", topic_machine="notjob",
                         source_human="NA", source_machine="business"),
        ]
        out = tmp_path / "release.jsonl"
        export_release(records, out)
        assert import_release(out) == records

    def test_deterministic_bytes(self, tmp_path):
        records = [CorpusRecord(tweet_id=str(i), topic_machine="job") for i in range(5)]
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        export_release(records, a)
        export_release(records, b)
        assert a.read_bytes() == b.read_bytes()

    def test_ids_only_never_emits_text(self, tmp_path):
        record = CorpusRecord(tweet_id="1", topic_machine="job")
        out = tmp_path / "release.jsonl"
        export_release([record], out, ids_only=True, texts={"1": "secret text"})
        assert "secret" not in out.read_text(encoding="utf-8")

    def test_validation(self):
        with pytest.raises(ValueError):
            CorpusRecord(tweet_id="1", topic_machine="spam")
        with pytest.raises(ValueError):
            CorpusRecord(tweet_id="1", topic_human="maybe")


class TestCorpusStats:
    def test_machine_counts(self):
        records = [
            CorpusRecord(tweet_id="1", topic_machine="job"),
            CorpusRecord(tweet_id="2", topic_machine="job"),
            CorpusRecord(tweet_id="3", topic_machine="notjob"),
        ]
        stats = corpus_stats(records)
        assert stats["topic"]["machine"] == {"job": 2, "notjob": 1}

    def test_empty(self):
        stats = corpus_stats([])
        assert stats["topic"]["human"] == {"job": 0, "notjob": 0, "NA": 0}
        assert stats["source"]["machine"] == {"personal": 0, "business": 0}

    def test_published_table_shape(self):
        # rows shaped like the released dataset statistics: human labels on
        # a small subset, machine labels everywhere, NA only in human fields
        records = (
            [CorpusRecord(tweet_id=f"j{i}", topic_human="job", topic_machine="job")
             for i in range(3)]
            + [CorpusRecord(tweet_id=f"n{i}", topic_human="notjob", topic_machine="notjob")
               for i in range(4)]
            + [CorpusRecord(tweet_id=f"x{i}", topic_machine="job") for i in range(2)]
        )
        stats = corpus_stats(records)
        assert stats["topic"]["human"] == {"job": 3, "notjob": 4, "NA": 2}
        assert stats["topic"]["machine"] == {"job": 5, "notjob": 4}
        assert "NA" not in stats["topic"]["machine"]


class TestStoreRoundData:
    def test_hits_responses_round_trip(self, tmp_path):
        store = Store(tmp_path / "store")
        ids = [str(i) for i in range(6)]
        store.add_tweets([Tweet(t, f"text {t}", "a") for t in ids])
        hits = build_hits(ids, {t: f"text {t}" for t in ids}, 6, 1, seed=1, round_id="R1")
        store.add_hits(hits)
        responses = [WorkerResponse("w1", hits[0].hit_id, item.item_id, "Y")
                     for item in hits[0].items]
        store.add_responses(responses)
        reopened = Store(tmp_path / "store")
        assert reopened.hits_for_round("R1") == hits
        assert sorted(r.item_id for r in reopened.responses_for_round("R1")) == \
            sorted(r.item_id for r in responses)

    def test_resubmission_last_write_wins_with_audit(self, tmp_path):
        store = Store(tmp_path / "store")
        ids = ["1", "2"]
        store.add_tweets([Tweet(t, f"text {t}", "a") for t in ids])
        hits = build_hits(ids, {t: "x" for t in ids}, 2, 0, seed=1, round_id="R1")
        store.add_hits(hits)
        item = hits[0].items[0]
        store.add_responses([WorkerResponse("w1", hits[0].hit_id, item.item_id, "Y")])
        store.add_responses([WorkerResponse("w1", hits[0].hit_id, item.item_id, "N")])
        latest = {r.item_id: r.answer for r in store.responses_for_round("R1")}
        assert latest[item.item_id] == "N"
        assert len(store.audit_trail("w1", item.item_id)) == 2

    def test_audit_clean_store(self, tmp_path):
        store = Store(tmp_path / "store")
        store.add_tweets([Tweet("1", "a", "x")])
        store.consume(["1"], "R1")
        assert store.audit() == []

    def test_audit_detects_unknown_tweet(self, tmp_path):
        store = Store(tmp_path / "store")
        store.add_tweets([Tweet("1", "a", "x")])
        store.put_records([CorpusRecord(tweet_id="999", topic_machine="job")])
        problems = store.audit()
        assert any("999" in p for p in problems)
