"""Workflow orchestration: the alternating filter/train/sample/annotate loop
as resumable stages over one store, plus the simulated-annotator harness.

Each stage persists its outputs and a manifest of input hashes; rerunning a
completed stage with unchanged inputs is a no-op. Stage order forms a DAG,
and no stage reads data produced by a later stage.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import accounts as accounts_mod
from . import agreement as agreement_mod
from . import metrics as metrics_mod
from . import model as model_mod
from . import rounds as rounds_mod
from . import sampler as sampler_mod
from .errors import DependencyError, UndefinedStatisticError
from .lexicon import (c0_ruleset, c4_ruleset, default_slang,
                      job_likely_filter, load_ruleset)
from .normalize import NormalizedDoc, SlangDictionary, Tweet, normalize
from .store import NA, CorpusRecord, Store, corpus_stats, export_release
from .synthesis import SimulationProfile, generate_synthetic_corpus

logger = logging.getLogger(__name__)

ANNOTATION_QUESTION = "Is this tweet about job or employment?"


# -- configuration -------------------------------------------------------------


@dataclass
class PipelineConfig:
    workdir: Path
    seed: int = 7

    # text processing
    max_n: int = 3
    min_df: int = 2
    min_tokens: int = 5
    slang_file: str | None = None
    c0_rules_file: str | None = None
    c4_rules_file: str | None = None

    # annotation rounds
    annotators: int = 5
    majority_threshold: int = 3
    subset_size: int = 40
    n_dups: int = 5

    # sampling
    r1_k: int = 400
    negatives_k: int = 300
    type1_k: int = 320
    type2_k: int = 160
    type1_percentile: float = 0.8
    type2_band: float = 0.10
    r4_k: int = 400
    validation_per_model: int = 400

    # training
    k_folds: int = 5
    grid_pos_weights: tuple[float, ...] = (1.0, 2.0, 5.0)
    grid_c: tuple[float, ...] = (1.0,)
    epochs: int = 60
    tolerance: float = 1e-6

    # data source
    simulate: bool = True
    corpus_file: str | None = None

    # simulation block
    sim_corpus_size: int = 10_000
    sim_job_fraction: float = 0.2
    sim_confounder_rate: float = 0.1
    sim_accounts: int = 400
    sim_business_fraction: float = 0.08
    sim_business_tweet_share: float = 0.25
    annotator_accuracy: float = 0.9
    expert_accuracy: float = 0.97

    def __post_init__(self) -> None:
        self.workdir = Path(self.workdir)
        if self.simulate and not 0.5 < self.annotator_accuracy <= 1.0:
            raise ValueError("annotator_accuracy must be in (0.5, 1]")
        if self.simulate and not 0.5 < self.expert_accuracy <= 1.0:
            raise ValueError("expert_accuracy must be in (0.5, 1]")
        if not self.simulate and not self.corpus_file:
            raise ValueError("corpus_file is required when simulate is false")
        if self.annotators < 2:
            raise ValueError("annotators must be >= 2")
        if not 1 <= self.majority_threshold <= self.annotators:
            raise ValueError("majority_threshold must be within the annotator count")

    def config_hash(self) -> str:
        payload = dataclasses.asdict(self)
        payload["workdir"] = "."  # location must not invalidate manifests
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def grid(self) -> list[tuple[float, float, float]]:
        return [(pos, 1.0, c) for c in self.grid_c for pos in self.grid_pos_weights]


_TUPLE_FIELDS = {"grid_pos_weights", "grid_c"}
_BOOL_FIELDS = {"simulate"}


def load_config(path: str | Path) -> PipelineConfig:
    """Parse the plain-text `key = value` config format.

    Unknown keys are errors; list-valued keys take comma-separated numbers;
    booleans take true/false. Relative paths resolve against the file.
    """
    path = Path(path)
    field_types = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in field_types:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = value

    if "workdir" not in raw:
        raise ValueError(f"{path}: workdir is required")
    kwargs: dict = {}
    for key, value in raw.items():
        if key in _TUPLE_FIELDS:
            kwargs[key] = tuple(float(v) for v in value.split(",") if v.strip())
        elif key in _BOOL_FIELDS:
            if value.lower() not in ("true", "false"):
                raise ValueError(f"{path}: {key} must be true or false")
            kwargs[key] = value.lower() == "true"
        elif key == "workdir":
            workdir = Path(value)
            kwargs[key] = workdir if workdir.is_absolute() else path.parent / workdir
        elif key in ("slang_file", "c0_rules_file", "c4_rules_file", "corpus_file"):
            p = Path(value)
            kwargs[key] = str(p if p.is_absolute() else path.parent / p)
        else:
            default = getattr(PipelineConfig, key, None)
            if isinstance(default, bool):
                kwargs[key] = value.lower() == "true"
            elif isinstance(default, int):
                kwargs[key] = int(value)
            elif isinstance(default, float):
                kwargs[key] = float(value)
            else:
                kwargs[key] = value
    return PipelineConfig(**kwargs)


def write_example_config(path: str | Path) -> None:
    lines = ["# pipeline configuration: key = value, '#' starts a comment"]
    for f in dataclasses.fields(PipelineConfig):
        value = f.default
        if value is dataclasses.MISSING:
            value = "./run"
        if value is None:
            lines.append(f"# {f.name} =")
            continue
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def stage_seed(seed: int, stage: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


# -- simulated annotators -------------------------------------------------------


@dataclass(frozen=True)
class SimulatedAnnotator:
    """Answers the true label with probability `accuracy`, independently per
    item and deterministically per (worker, item, seed)."""

    worker_id: str
    accuracy: float
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 < self.accuracy <= 1.0:
            raise ValueError("accuracy must be in (0, 1]")

    def answer(self, item_id: str, truth_label: str) -> str:
        digest = hashlib.sha256(
            f"{self.seed}|{self.worker_id}|{item_id}".encode()).digest()
        draw = int.from_bytes(digest[:8], "big") / 2**64
        correct = draw < self.accuracy
        truth_is_job = truth_label == "job"
        return rounds_mod.YES if truth_is_job == correct else rounds_mod.NO


def simulate_round(
    hits: Sequence[rounds_mod.Hit],
    truth_topics: Mapping[str, str],
    n_required: int,
    accuracy: float,
    seed: int,
    worker_prefix: str = "sim",
) -> list[rounds_mod.WorkerResponse]:
    """Staff each HIT with fresh simulated workers until n_required of them
    pass the duplicate-consistency screen (rejected attempts stay in the
    record, exactly as a re-published assignment would)."""
    responses: list[rounds_mod.WorkerResponse] = []
    for hit in hits:
        valid = 0
        attempt = 0
        while valid < n_required:
            attempt += 1
            if attempt > 400:
                raise RuntimeError(f"could not staff hit {hit.hit_id}; accuracy too low?")
            worker = f"{worker_prefix}-{hit.hit_id}-w{attempt:03d}"
            annotator = SimulatedAnnotator(worker_id=worker, accuracy=accuracy, seed=seed)
            batch = [
                rounds_mod.WorkerResponse(
                    worker_id=worker, hit_id=hit.hit_id, item_id=item.item_id,
                    answer=annotator.answer(item.item_id, truth_topics[item.tweet_id]))
                for item in hit.items
            ]
            responses.extend(batch)
            screening = rounds_mod.screen_workers(batch, [hit])
            if (worker, hit.hit_id) in screening.valid:
                valid += 1
    return responses


# -- per-round agreement over stored responses ---------------------------------


def round_rating_matrices(store: Store, round_id: str,
                          n_required: int) -> list[agreement_mod.RatingMatrix]:
    """One items-by-{Y,N} matrix per HIT, over valid workers' collapsed votes."""
    hits = store.hits_for_round(round_id)
    responses = store.responses_for_round(round_id)
    matrices = []
    for hit in hits:
        result = rounds_mod.aggregate(responses, [hit], n_required=n_required)
        votes = [(lab.y_count, lab.n_count) for lab in result.labels]
        if votes:
            matrices.append(agreement_mod.RatingMatrix.from_votes(votes))
    return matrices


# -- stage reports --------------------------------------------------------------


@dataclass(frozen=True)
class StageReport:
    stage: str
    status: str  # "completed" | "up-to-date"
    outputs: tuple[str, ...]
    details: dict = field(default_factory=dict)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


MODELS = ("c1", "c2", "c3", "c5")


class Pipeline:
    """Runs the stage DAG against one working directory."""

    def __init__(self, config: PipelineConfig) -> None:
        self.cfg = config
        self.workdir = Path(config.workdir)
        for sub in ("data", "artifacts", "manifests", "models", "report"):
            (self.workdir / sub).mkdir(parents=True, exist_ok=True)
        self.store = Store(self.workdir / "store")
        self.slang = (SlangDictionary.from_file(config.slang_file)
                      if config.slang_file else default_slang())
        self.c0 = (load_ruleset(config.c0_rules_file, "c0")
                   if config.c0_rules_file else c0_ruleset())
        self.c4 = (load_ruleset(config.c4_rules_file, "c4")
                   if config.c4_rules_file else c4_ruleset())
        self._doc_cache: dict[str, NormalizedDoc] | None = None

        self.stages: dict[str, tuple[tuple[str, ...], Callable[[], dict]]] = {
            "corpus": ((), self._stage_corpus),
            "c0": (("corpus",), self._stage_c0),
            "r1_sample": (("c0",), self._stage_r1_sample),
            "r1_hits": (("r1_sample",), lambda: self._stage_hits("R1", "r1_sample")),
            "r1_responses": (("r1_hits",), lambda: self._stage_responses("R1")),
            "r1_aggregate": (("r1_responses",), lambda: self._stage_aggregate("R1")),
            "c1_train": (("r1_aggregate", "c0"), self._stage_c1_train),
            "c1_predict": (("c1_train",), lambda: self._stage_predict("c1")),
            "r2_sample": (("c1_predict",), self._stage_r2_sample),
            "r2_hits": (("r2_sample",), lambda: self._stage_hits("R2", "r2_sample")),
            "r2_responses": (("r2_hits",), lambda: self._stage_responses("R2")),
            "r2_aggregate": (("r2_responses",), lambda: self._stage_aggregate("R2")),
            "c2_train": (("r1_aggregate", "r2_aggregate"),
                         lambda: self._stage_train_on_gold("c2", ("R1", "R2"), False)),
            "c2_predict": (("c2_train",), lambda: self._stage_predict("c2")),
            "r3_adjudicate": (("r1_aggregate", "r2_aggregate"), self._stage_r3),
            "c3_train": (("r1_aggregate", "r2_aggregate", "r3_adjudicate"),
                         lambda: self._stage_train_on_gold("c3", ("R1", "R2"), True)),
            "c3_predict": (("c3_train",), lambda: self._stage_predict("c3")),
            "validation_sample": (("c0", "c1_predict", "c2_predict", "c3_predict"),
                                  self._stage_validation_sample),
            "validation_hits": (("validation_sample",),
                                lambda: self._stage_hits("VAL", "validation_sample")),
            "validation_responses": (("validation_hits",),
                                     lambda: self._stage_responses("VAL")),
            "validation_aggregate": (("validation_responses",), self._stage_validation_refs),
            "c4": (("corpus",), self._stage_c4),
            "r4_sample": (("c4",), self._stage_r4_sample),
            "r4_hits": (("r4_sample",), lambda: self._stage_hits("R4", "r4_sample")),
            "r4_responses": (("r4_hits",), lambda: self._stage_responses("R4")),
            "r4_aggregate": (("r4_responses",), lambda: self._stage_aggregate("R4")),
            "c5_train": (("r1_aggregate", "r2_aggregate", "r3_adjudicate", "r4_aggregate"),
                         lambda: self._stage_train_on_gold("c5", ("R1", "R2", "R4"), True)),
            "c5_predict": (("c5_train",), lambda: self._stage_predict("c5")),
            "evaluate": (("validation_aggregate", "c0", "c1_predict", "c2_predict",
                          "c3_predict", "c5_predict"), self._stage_evaluate),
            "agreement": (("r1_aggregate", "r2_aggregate", "r4_aggregate",
                           "r3_adjudicate"), self._stage_agreement),
            "accounts": (("c5_predict", "validation_aggregate"), self._stage_accounts),
            "export": (("accounts", "c5_predict", "r3_adjudicate"), self._stage_export),
            "report": (("evaluate", "agreement", "accounts", "export"), self._stage_report),
        }
        self.stage_order = list(self.stages)

    # -- bookkeeping -----------------------------------------------------------

    def artifact(self, name: str) -> Path:
        return self.workdir / "artifacts" / name

    def _manifest_path(self, stage: str) -> Path:
        return self.workdir / "manifests" / f"{stage}.json"

    def _stage_outputs(self, stage: str) -> list[Path]:
        manifest = self._manifest_path(stage)
        if not manifest.exists():
            return []
        data = json.loads(manifest.read_text(encoding="utf-8"))
        return [self.workdir / rel for rel in data["outputs"]]

    def _input_hashes(self, stage: str) -> dict[str, str]:
        deps = self.stages[stage][0]
        hashes: dict[str, str] = {}
        for dep in deps:
            for path in self._stage_outputs(dep):
                if path.exists():
                    hashes[str(path.relative_to(self.workdir))] = _sha256(path)
        return hashes

    def completed(self, stage: str) -> bool:
        return self._manifest_path(stage).exists()

    def _write_manifest(self, stage: str, outputs: list[Path], details: dict) -> None:
        manifest = {
            "stage": stage,
            "config_hash": self.cfg.config_hash(),
            "inputs": self._input_hashes(stage),
            "outputs": sorted(str(p.relative_to(self.workdir)) for p in outputs),
            "details": details,
        }
        self._manifest_path(stage).write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def _up_to_date(self, stage: str) -> bool:
        path = self._manifest_path(stage)
        if not path.exists():
            return False
        manifest = json.loads(path.read_text(encoding="utf-8"))
        if manifest.get("config_hash") != self.cfg.config_hash():
            return False
        for rel in manifest["outputs"]:
            if not (self.workdir / rel).exists():
                return False
        return manifest.get("inputs") == self._input_hashes(stage)

    def run_stage(self, stage: str, force: bool = False) -> StageReport:
        if stage not in self.stages:
            raise ValueError(f"unknown stage {stage!r}; stages: {', '.join(self.stage_order)}")
        deps, fn = self.stages[stage]
        for dep in deps:
            if not self.completed(dep):
                raise DependencyError(stage, dep)
        if not force and self._up_to_date(stage):
            manifest = json.loads(self._manifest_path(stage).read_text(encoding="utf-8"))
            return StageReport(stage=stage, status="up-to-date",
                               outputs=tuple(manifest["outputs"]),
                               details=manifest.get("details", {}))
        logger.info("running stage %s", stage)
        details = fn()
        outputs = [self.workdir / rel for rel in details.pop("_outputs")]
        self._write_manifest(stage, outputs, details)
        return StageReport(stage=stage, status="completed",
                           outputs=tuple(str(p.relative_to(self.workdir)) for p in outputs),
                           details=details)

    def run_all(self, force: bool = False) -> dict:
        for stage in self.stage_order:
            report = self.run_stage(stage, force=force)
            logger.info("stage %-22s %s", stage, report.status)
        return json.loads((self.workdir / "report" / "final_report.json")
                          .read_text(encoding="utf-8"))

    # -- shared helpers ---------------------------------------------------------

    def docs(self) -> dict[str, NormalizedDoc]:
        if self._doc_cache is None:
            self._doc_cache = {
                t.tweet_id: normalize(t, self.slang) for t in self.store.tweets()
            }
        return self._doc_cache

    def truth(self) -> dict[str, dict]:
        path = self.workdir / "data" / "truth.jsonl"
        if not path.exists():
            return {}
        out = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    out[row["tweet_id"]] = row
        return out

    def truth_topics(self) -> dict[str, str]:
        return {tid: row["topic"] for tid, row in self.truth().items()}

    def _read_ids(self, artifact: str, key: str) -> list[str]:
        data = json.loads(self.artifact(artifact).read_text(encoding="utf-8"))
        return data[key]

    def _write_artifact(self, name: str, payload: dict) -> Path:
        path = self.artifact(name)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path

    def _scores_path(self, model_name: str) -> Path:
        return self.artifact(f"{model_name}_scores.csv")

    def _read_scores(self, model_name: str) -> dict[str, tuple[float, str]]:
        scores: dict[str, tuple[float, str]] = {}
        with open(self._scores_path(model_name), encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                scores[row["tweet_id"]] = (float(row["confidence"]), row["label"])
        return scores

    def _consume_fresh(self, ids: Iterable[str], round_id: str) -> list[str]:
        fresh = [tid for tid in ids if self.store.ledger.round_of(tid) != round_id]
        self.store.consume(fresh, round_id)
        return fresh

    def _aggregate_labels(self, round_id: str) -> list[rounds_mod.AggregatedLabel]:
        data = json.loads(self.artifact(f"{round_id.lower()}_aggregate.json")
                          .read_text(encoding="utf-8"))
        return [
            rounds_mod.AggregatedLabel(
                tweet_id=row["tweet_id"], y_count=row["y"], n_count=row["n"],
                consensus=row["consensus"],
                needs_adjudication=row["consensus"].startswith("majority"))
            for row in data["labels"]
        ]

    def _adjudication_book(self) -> rounds_mod.AdjudicationBook:
        book = rounds_mod.AdjudicationBook()
        book.load(self.store.adjudications())
        return book

    # -- stages -----------------------------------------------------------------

    def _stage_corpus(self) -> dict:
        data_dir = self.workdir / "data"
        corpus_path = data_dir / "corpus.jsonl"
        outputs = ["data/corpus.jsonl"]
        if self.cfg.simulate:
            profile = SimulationProfile(
                corpus_size=self.cfg.sim_corpus_size,
                job_fraction=self.cfg.sim_job_fraction,
                confounder_rate=self.cfg.sim_confounder_rate,
                n_accounts=self.cfg.sim_accounts,
                business_account_fraction=self.cfg.sim_business_fraction,
                business_tweet_share=self.cfg.sim_business_tweet_share,
                seed=stage_seed(self.cfg.seed, "corpus"),
            )
            tweets, truth = generate_synthetic_corpus(profile)
            with open(corpus_path, "w", encoding="utf-8") as fh:
                for t in tweets:
                    row = {"tweet_id": t.tweet_id, "text": t.text,
                           "account_id": t.account_id, "created_at": t.created_at}
                    fh.write(json.dumps(row) + "\n")
            with open(data_dir / "truth.jsonl", "w", encoding="utf-8") as fh:
                for tid, record in truth.items():
                    fh.write(json.dumps({
                        "tweet_id": tid, "topic": record.topic,
                        "account_kind": record.account_kind, "origin": record.origin,
                    }) + "\n")
            outputs.append("data/truth.jsonl")
        else:
            corpus_path.write_bytes(Path(self.cfg.corpus_file).read_bytes())
        report = self.store.ingest(corpus_path)
        self._doc_cache = None
        return {"_outputs": outputs, "ingested": report.accepted,
                "duplicates": report.skipped_duplicates,
                "errors": len(report.errors)}

    def _stage_c0(self) -> dict:
        job_likely = job_likely_filter(self.store.tweets(), self.c0,
                                       min_tokens=self.cfg.min_tokens, slang=self.slang)
        self._write_artifact("c0.json", {"job_likely": sorted(job_likely)})
        return {"_outputs": ["artifacts/c0.json"], "job_likely": len(job_likely)}

    def _stage_r1_sample(self) -> dict:
        pool = self._read_ids("c0.json", "job_likely")
        ids = sampler_mod.sample_rule_pool(
            pool, self.cfg.r1_k, stage_seed(self.cfg.seed, "r1_sample"),
            self.store.ledger)
        self._consume_fresh(ids, "R1")
        self._write_artifact("r1_sample.json", {"ids": sorted(ids)})
        return {"_outputs": ["artifacts/r1_sample.json"], "sampled": len(ids)}

    def _sample_ids_for_round(self, artifact: str) -> list[str]:
        data = json.loads(self.artifact(artifact + ".json").read_text(encoding="utf-8"))
        if "ids" in data:
            return data["ids"]
        merged: list[str] = []
        for key in sorted(data):
            merged.extend(data[key])
        return merged

    def _stage_hits(self, round_id: str, sample_artifact: str) -> dict:
        ids = self._sample_ids_for_round(sample_artifact)
        texts = {tid: self.store.tweet(tid).text for tid in ids}
        existing = self.store.hits_for_round(round_id)
        if existing:
            hits = existing  # crash-resume: hits already persisted
        else:
            hits = rounds_mod.build_hits(
                ids, texts, subset_size=self.cfg.subset_size, n_dups=self.cfg.n_dups,
                seed=stage_seed(self.cfg.seed, f"{round_id}_hits"), round_id=round_id)
            self.store.add_hits(hits)
        csv_rel = f"artifacts/{round_id.lower()}_hits.csv"
        export_hits_csv(hits, self.workdir / csv_rel)
        return {"_outputs": [csv_rel], "hits": len(hits),
                "items": sum(len(h.items) for h in hits)}

    def _stage_responses(self, round_id: str) -> dict:
        if not self.cfg.simulate:
            raise DependencyError(
                f"{round_id.lower()}_responses",
                f"imported responses for round {round_id} (forge hits import)")
        hits = self.store.hits_for_round(round_id)
        responses = simulate_round(
            hits, self.truth_topics(), n_required=self.cfg.annotators,
            accuracy=self.cfg.annotator_accuracy,
            seed=stage_seed(self.cfg.seed, f"{round_id}_responses"),
            worker_prefix=f"sim{round_id}")
        already = {(r.worker_id, r.item_id)
                   for r in self.store.responses_for_round(round_id)}
        fresh = [r for r in responses if (r.worker_id, r.item_id) not in already]
        self.store.add_responses(fresh)
        rel = f"artifacts/{round_id.lower()}_responses.json"
        self._write_artifact(Path(rel).name, {
            "round": round_id, "responses": len(responses),
            "workers": len({r.worker_id for r in responses}),
        })
        return {"_outputs": [rel], "responses": len(responses)}

    def _stage_aggregate(self, round_id: str) -> dict:
        hits = self.store.hits_for_round(round_id)
        responses = self.store.responses_for_round(round_id)
        result = rounds_mod.aggregate(responses, hits, n_required=self.cfg.annotators)
        rel = f"artifacts/{round_id.lower()}_aggregate.json"
        self._write_artifact(Path(rel).name, {
            "labels": [
                {"tweet_id": lab.tweet_id, "y": lab.y_count, "n": lab.n_count,
                 "consensus": lab.consensus}
                for lab in result.labels
            ],
            "short_staffed": list(result.short_staffed),
            "tied": list(result.tied),
        })
        unanimous = sum(1 for lab in result.labels
                        if lab.consensus.startswith("unanimous"))
        return {"_outputs": [rel], "labeled": len(result.labels),
                "unanimous": unanimous,
                "short_staffed": len(result.short_staffed)}

    def _train_and_save(self, name: str, labeled: list[tuple[str, str]]) -> dict:
        docs = self.docs()
        train_docs = [docs[tid] for tid, _ in labeled]
        labels = [label for _, label in labeled]
        vocab = model_mod.build_vocab(train_docs, max_n=self.cfg.max_n,
                                      min_df=self.cfg.min_df)
        X = [model_mod.vectorize(doc, vocab) for doc in train_docs]
        cfg_base = model_mod.TrainConfig(
            epochs=self.cfg.epochs, tolerance=self.cfg.tolerance,
            seed=stage_seed(self.cfg.seed, f"{name}_train"))
        best_cfg, cv = model_mod.grid_search_cv(
            X, labels, self.cfg.grid(), self.cfg.k_folds, cfg_base, vocab)
        trained = model_mod.train(X, labels, best_cfg, vocab)
        model_path = self.workdir / "models" / f"{name}.json"
        model_mod.save_model(trained, model_path)
        counts = {"job": labels.count("job"), "notjob": labels.count("notjob")}
        art_rel = f"artifacts/{name}_train.json"
        self._write_artifact(Path(art_rel).name, {
            "training_counts": counts,
            "vocabulary_size": vocab.size,
            "chosen": {"class_weight_pos": best_cfg.class_weight_pos,
                       "class_weight_neg": best_cfg.class_weight_neg,
                       "c": best_cfg.c},
            "cv": [
                {"pos": cell.config.class_weight_pos, "c": cell.config.c,
                 "mean_f1": cell.mean_f1, "fold_f1": list(cell.fold_f1)}
                for cell in cv.cells
            ],
            "final_objective": trained.objective_history[-1],
        })
        return {"_outputs": [f"models/{name}.json", art_rel],
                "training_counts": counts, "vocab": vocab.size,
                "chosen_pos_weight": best_cfg.class_weight_pos}

    def _stage_c1_train(self) -> dict:
        part1 = [(lab.tweet_id, lab.label) for lab in self._aggregate_labels("R1")
                 if lab.consensus.startswith("unanimous")]
        job_likely = set(self._read_ids("c0.json", "job_likely"))
        negatives = sampler_mod.sample_random_negatives(
            self.store.tweet_ids(), job_likely, self.cfg.negatives_k,
            stage_seed(self.cfg.seed, "c1_negatives"), self.store.ledger)
        self._consume_fresh(negatives, "C1-negatives")
        labeled = part1 + [(tid, "notjob") for tid in sorted(negatives)]
        details = self._train_and_save("c1", labeled)
        details["negatives"] = len(negatives)
        return details

    def _stage_train_on_gold(self, name: str, round_ids: tuple[str, ...],
                             with_adjudications: bool) -> dict:
        rounds_labels = [self._aggregate_labels(rid) for rid in round_ids]
        book = self._adjudication_book() if with_adjudications else None
        gold = rounds_mod.gold_training_set(rounds_labels, book)
        return self._train_and_save(name, gold)

    def _stage_predict(self, name: str) -> dict:
        trained = model_mod.load_model(self.workdir / "models" / f"{name}.json")
        docs = self.docs()
        rel = f"artifacts/{name}_scores.csv"
        n_job = 0
        with open(self.workdir / rel, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tweet_id", "confidence", "label"])
            for tid in sorted(docs):
                pred = model_mod.predict(trained, docs[tid])
                n_job += pred.label == "job"
                writer.writerow([tid, repr(pred.confidence), pred.label])
        return {"_outputs": [rel], "predicted_job": n_job,
                "predicted_notjob": len(docs) - n_job}

    def _stage_r2_sample(self) -> dict:
        scores = self._read_scores("c1")
        pos = sorted(((tid, conf) for tid, (conf, lab) in scores.items() if lab == "job"),
                     key=lambda item: (-item[1], item[0]))
        neg = sorted(((tid, conf) for tid, (conf, lab) in scores.items() if lab == "notjob"),
                     key=lambda item: (-abs(item[1]), item[0]))
        type1 = sampler_mod.sample_type1(
            pos,
            sampler_mod.SampleSpec(strategy="type1", k=self.cfg.type1_k,
                                   seed=stage_seed(self.cfg.seed, "r2_type1"),
                                   percentile=self.cfg.type1_percentile),
            self.store.ledger)
        self._consume_fresh(type1, "R2")
        type2 = sampler_mod.sample_type2(
            pos, neg,
            sampler_mod.SampleSpec(strategy="type2", k=self.cfg.type2_k,
                                   seed=stage_seed(self.cfg.seed, "r2_type2"),
                                   band_fraction=self.cfg.type2_band),
            self.store.ledger)
        self._consume_fresh(type2, "R2")
        self._write_artifact("r2_sample.json", {
            "type1_ids": sorted(type1), "type2_ids": sorted(type2)})
        return {"_outputs": ["artifacts/r2_sample.json"],
                "type1": len(type1), "type2": len(type2)}

    def _stage_r3(self) -> dict:
        labels = self._aggregate_labels("R1") + self._aggregate_labels("R2")
        queue = rounds_mod.adjudication_queue(labels)
        book = rounds_mod.AdjudicationBook()
        experts = ("expert-1", "expert-2")
        seed = stage_seed(self.cfg.seed, "r3")
        truth = self.truth_topics()
        recorded = {adj.tweet_id for adj in self.store.adjudications()}
        for tweet_id in queue:
            for expert_id in experts:
                annotator = SimulatedAnnotator(worker_id=expert_id,
                                               accuracy=self.cfg.expert_accuracy,
                                               seed=seed)
                answer = annotator.answer(tweet_id, truth[tweet_id])
                label = "job" if answer == rounds_mod.YES else "notjob"
                adjudication = book.record(queue, tweet_id, expert_id, label)
                if tweet_id not in recorded:
                    self.store.add_adjudication(adjudication)
        vec_a, vec_b = book.expert_vectors(*experts)
        try:
            kappa = agreement_mod.cohen_kappa(vec_a, vec_b) if vec_a else None
        except UndefinedStatisticError:
            kappa = None
        resolved = book.resolved()
        self._write_artifact("r3.json", {
            "queue_length": len(queue),
            "resolved": dict(sorted(resolved.items())),
            "unresolved": sorted(book.unresolved()),
            "expert_cohen_kappa": kappa,
            "experts": list(experts),
        })
        return {"_outputs": ["artifacts/r3.json"], "queue": len(queue),
                "resolved": len(resolved), "unresolved": len(book.unresolved()),
                "expert_cohen_kappa": kappa}

    def _stage_validation_sample(self) -> dict:
        """Balanced never-used samples per model: half from its predicted-job
        pool, half from its predicted-notjob pool, pairwise disjoint via the
        ledger (shortfall on one side spills to the other)."""
        per_model: dict[str, list[str]] = {}
        pools: dict[str, tuple[list[str], list[str]]] = {}
        job_likely = set(self._read_ids("c0.json", "job_likely"))
        all_ids = self.store.tweet_ids()
        pools["c0"] = (sorted(job_likely),
                       sorted(set(all_ids) - job_likely))
        for name in ("c1", "c2", "c3"):
            scores = self._read_scores(name)
            pools[name] = (
                [tid for tid, (_, lab) in scores.items() if lab == "job"],
                [tid for tid, (_, lab) in scores.items() if lab == "notjob"],
            )
        k = self.cfg.validation_per_model
        for name in ("c0", "c1", "c2", "c3"):
            pos_pool, neg_pool = pools[name]
            want_pos = k - k // 2
            taken_pos = sampler_mod.sample_rule_pool(
                pos_pool, want_pos,
                stage_seed(self.cfg.seed, f"validation_{name}_pos"), self.store.ledger)
            self._consume_fresh(taken_pos, "VAL")
            taken_neg = sampler_mod.sample_rule_pool(
                neg_pool, k - len(taken_pos),
                stage_seed(self.cfg.seed, f"validation_{name}_neg"), self.store.ledger)
            self._consume_fresh(taken_neg, "VAL")
            shortfall = k - len(taken_pos) - len(taken_neg)
            if shortfall > 0:
                extra = sampler_mod.sample_rule_pool(
                    pos_pool, shortfall,
                    stage_seed(self.cfg.seed, f"validation_{name}_fill"),
                    self.store.ledger)
                self._consume_fresh(extra, "VAL")
                taken_pos = taken_pos + extra
            per_model[name] = sorted(taken_pos + taken_neg)
        self._write_artifact("validation_sample.json", per_model)
        return {"_outputs": ["artifacts/validation_sample.json"],
                "per_model": {k: len(v) for k, v in per_model.items()}}

    def _stage_validation_refs(self) -> dict:
        hits = self.store.hits_for_round("VAL")
        responses = self.store.responses_for_round("VAL")
        result = rounds_mod.aggregate(responses, hits, n_required=self.cfg.annotators)
        refs = {}
        for lab in result.labels:
            majority = max(lab.y_count, lab.n_count)
            if majority >= self.cfg.majority_threshold:
                refs[lab.tweet_id] = lab.label
        self._write_artifact("validation_refs.json", {
            "refs": dict(sorted(refs.items())),
            "short_staffed": list(result.short_staffed),
        })
        return {"_outputs": ["artifacts/validation_refs.json"], "refs": len(refs)}

    def _stage_c4(self) -> dict:
        matched = job_likely_filter(self.store.tweets(), self.c4, min_tokens=1,
                                    slang=self.slang)
        self._write_artifact("c4.json", {"matched": sorted(matched)})
        return {"_outputs": ["artifacts/c4.json"], "matched": len(matched)}

    def _stage_r4_sample(self) -> dict:
        pool = self._read_ids("c4.json", "matched")
        ids = sampler_mod.sample_rule_pool(
            pool, self.cfg.r4_k, stage_seed(self.cfg.seed, "r4_sample"),
            self.store.ledger)
        self._consume_fresh(ids, "R4")
        self._write_artifact("r4_sample.json", {"ids": sorted(ids)})
        return {"_outputs": ["artifacts/r4_sample.json"], "sampled": len(ids)}

    def _model_labels_for(self, name: str, ids: Sequence[str]) -> list[str]:
        if name == "c0":
            job_likely = set(self._read_ids("c0.json", "job_likely"))
            return ["job" if tid in job_likely else "notjob" for tid in ids]
        scores = self._read_scores(name)
        return [scores[tid][1] for tid in ids]

    def _stage_evaluate(self) -> dict:
        refs_data = json.loads(self.artifact("validation_refs.json")
                               .read_text(encoding="utf-8"))["refs"]
        ref_ids = sorted(refs_data)
        refs = [refs_data[tid] for tid in ref_ids]
        truth = self.truth_topics()
        corpus_size = len(self.store)
        evaluation: dict = {"test_size": len(ref_ids), "models": {}}
        for name in ("c0",) + MODELS:
            preds = self._model_labels_for(name, ref_ids)
            report = metrics_mod.eval_report(preds, refs)
            entry: dict = {
                "eval": _eval_report_payload(report),
            }
            if name != "c0":
                scores = self._read_scores(name)
                y_full = sum(1 for _, lab in scores.values() if lab == "job")
                yt = sum(1 for p in preds if p == "job")
                recall = report.metrics_for("job").recall
                inputs = metrics_mod.EffectiveRecallInputs(
                    y=y_full, n=corpus_size - y_full, yt=yt, nt=len(ref_ids) - yt,
                    recall=recall)
                try:
                    estimated = metrics_mod.effective_recall(inputs)
                except UndefinedStatisticError:
                    estimated = None
                entry["effective_recall"] = {
                    "y": y_full, "n": corpus_size - y_full, "yt": yt,
                    "nt": len(ref_ids) - yt, "recall": recall,
                    "estimated": estimated,
                }
                if truth:
                    true_job = [tid for tid, topic in truth.items() if topic == "job"]
                    tp = sum(1 for tid in true_job if scores[tid][1] == "job")
                    entry["effective_recall"]["true_full_corpus_recall"] = (
                        tp / len(true_job) if true_job else None)
            if truth:
                truth_refs = [truth[tid] for tid in ref_ids]
                entry["eval_vs_truth"] = _eval_report_payload(
                    metrics_mod.eval_report(preds, truth_refs))
            evaluation["models"][name] = entry
        self._write_artifact("evaluation.json", evaluation)
        return {"_outputs": ["artifacts/evaluation.json"],
                "models": list(evaluation["models"])}

    def _stage_agreement(self) -> dict:
        payload: dict = {"rounds": {}}
        for round_id in ("R1", "R2", "R4", "VAL"):
            matrices = round_rating_matrices(self.store, round_id, self.cfg.annotators)
            entry: dict = {"hits": len(matrices)}
            for stat in (agreement_mod.FLEISS_KAPPA, agreement_mod.KRIPP_ALPHA):
                try:
                    report = agreement_mod.round_summary(matrices, statistic=stat)
                    entry[stat] = {
                        "mean": report.mean, "stdev": report.stdev,
                        "band": report.band, "n_undefined": report.n_undefined,
                        "per_hit": list(report.per_hit_values),
                    }
                except (UndefinedStatisticError, ValueError):
                    entry[stat] = {"undefined": True}
            payload["rounds"][round_id] = entry
        r3 = json.loads(self.artifact("r3.json").read_text(encoding="utf-8"))
        payload["expert_cohen_kappa"] = r3.get("expert_cohen_kappa")
        self._write_artifact("agreement.json", payload)
        return {"_outputs": ["artifacts/agreement.json"],
                "rounds": {rid: payload["rounds"][rid]["hits"]
                           for rid in payload["rounds"]}}

    def _stage_accounts(self) -> dict:
        scores = self._read_scores("c5")
        pattern = accounts_mod.RecruitmentPattern.default()
        by_account: dict[str, list[tuple[Tweet, str]]] = {}
        for tweet in self.store.tweets():
            by_account.setdefault(tweet.account_id, []).append(
                (tweet, scores[tweet.tweet_id][1]))
        profiles = {}
        for account_id in sorted(by_account):
            profile = accounts_mod.classify_account(by_account[account_id], pattern)
            profiles[account_id] = {
                "kind": profile.kind,
                "n_pattern_job": profile.n_pattern_job,
                "n_other": profile.n_other,
            }
        census = accounts_mod.hashtag_census(self.store.tweets())

        # crowd-style source validation over job-reference tweets
        refs = json.loads(self.artifact("validation_refs.json")
                          .read_text(encoding="utf-8"))["refs"]
        truth = self.truth()
        source_votes: dict[str, str] = {}
        seed = stage_seed(self.cfg.seed, "source_validation")
        for tid, label in sorted(refs.items()):
            if label != "job" or tid not in truth:
                continue
            true_kind = truth[tid]["account_kind"]
            votes = 0
            for k in range(self.cfg.annotators):
                annotator = SimulatedAnnotator(worker_id=f"src-w{k}",
                                               accuracy=self.cfg.annotator_accuracy,
                                               seed=seed)
                answer = annotator.answer(tid, "job" if true_kind == "business" else "notjob")
                votes += answer == rounds_mod.YES
            if votes >= self.cfg.majority_threshold:
                source_votes[tid] = "business"
            elif (self.cfg.annotators - votes) >= self.cfg.majority_threshold:
                source_votes[tid] = "personal"
        payload = {
            "profiles": profiles,
            "census": [dataclasses.asdict(row) for row in census],
            "source_human": source_votes,
        }
        self._write_artifact("accounts.json", payload)
        business = sum(1 for p in profiles.values() if p["kind"] == "business")
        details: dict = {"_outputs": ["artifacts/accounts.json"],
                         "accounts": len(profiles), "business": business}
        if truth:
            kinds = {t.account_id: truth[t.tweet_id]["account_kind"]
                     for t in self.store.tweets() if t.tweet_id in truth}
            agree = sum(1 for aid, p in profiles.items()
                        if kinds.get(aid) == p["kind"])
            details["kind_accuracy"] = agree / len(profiles) if profiles else None
        return details

    def _stage_export(self) -> dict:
        scores = self._read_scores("c5")
        gold = dict(rounds_mod.gold_training_set(
            [self._aggregate_labels(r) for r in ("R1", "R2", "R4")],
            self._adjudication_book()))
        accounts_data = json.loads(self.artifact("accounts.json")
                                   .read_text(encoding="utf-8"))
        profiles = accounts_data["profiles"]
        source_human = accounts_data["source_human"]
        records = []
        for tweet in sorted(self.store.tweets(), key=lambda t: t.tweet_id):
            tid = tweet.tweet_id
            records.append(CorpusRecord(
                tweet_id=tid,
                topic_human=gold.get(tid, NA),
                topic_machine=scores[tid][1],
                source_human=source_human.get(tid, NA),
                source_machine=profiles[tweet.account_id]["kind"],
            ))
        self.store.put_records(records)
        release = self.workdir / "release.jsonl"
        export_release(records, release, ids_only=True)
        stats = corpus_stats(records)
        self._write_artifact("corpus_stats.json", stats)
        return {"_outputs": ["release.jsonl", "artifacts/corpus_stats.json"],
                "records": len(records),
                "human_labeled": sum(1 for r in records if r.topic_human != NA)}

    def _stage_report(self) -> dict:
        from .report import render_report  # deferred: pulls in matplotlib
        evaluation = json.loads(self.artifact("evaluation.json").read_text(encoding="utf-8"))
        agreement = json.loads(self.artifact("agreement.json").read_text(encoding="utf-8"))
        accounts_data = json.loads(self.artifact("accounts.json").read_text(encoding="utf-8"))
        stats = json.loads(self.artifact("corpus_stats.json").read_text(encoding="utf-8"))
        stage_details = {}
        for stage in self.stage_order:
            if stage == "report" or not self.completed(stage):
                continue
            manifest = json.loads(self._manifest_path(stage).read_text(encoding="utf-8"))
            stage_details[stage] = manifest.get("details", {})
        final = {
            "config_hash": self.cfg.config_hash(),
            "seed": self.cfg.seed,
            "corpus_size": len(self.store),
            "stages": stage_details,
            "evaluation": evaluation,
            "agreement": agreement,
            "accounts": {
                "n_accounts": len(accounts_data["profiles"]),
                "n_business": sum(1 for p in accounts_data["profiles"].values()
                                  if p["kind"] == "business"),
                "census": accounts_data["census"],
            },
            "corpus_stats": stats,
        }
        report_dir = self.workdir / "report"
        (report_dir / "final_report.json").write_text(
            json.dumps(final, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written = render_report(final, self._read_scores("c5"), report_dir)
        outputs = ["report/final_report.json"] + [
            str(p.relative_to(self.workdir)) for p in written]
        return {"_outputs": outputs, "files": len(outputs)}


def _eval_report_payload(report: metrics_mod.EvalReport) -> dict:
    return {
        "per_class": {
            label: {"precision": m.precision, "recall": m.recall,
                    "f1": m.f1, "support": m.support}
            for label, m in report.per_class
        },
        "weighted": {"precision": report.weighted_precision,
                     "recall": report.weighted_recall,
                     "f1": report.weighted_f1},
    }


def export_hits_csv(hits: Iterable[rounds_mod.Hit], path: str | Path) -> Path:
    """hit_id,item_id,anonymized_text rows for generic crowdsourcing uploads."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hit_id", "item_id", "anonymized_text"])
        for hit in hits:
            for item in hit.items:
                writer.writerow([hit.hit_id, item.item_id, item.text])
    return path


def import_responses_csv(path: str | Path) -> list[rounds_mod.WorkerResponse]:
    """worker_id,hit_id,item_id,answer rows."""
    responses = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            responses.append(rounds_mod.WorkerResponse(
                worker_id=row["worker_id"], hit_id=row["hit_id"],
                item_id=row["item_id"], answer=row["answer"].strip().upper()))
    return responses
