"""HTTP service for the browser console: annotation tasks, label submission,
adjudication, and read-only statistics.

Workers authenticate with bearer tokens mapped to worker ids; raw tweet ids
and raw (un-anonymized) text never leave the server in annotation mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from pydantic import BaseModel, Field

from . import agreement as agreement_mod
from . import rounds as rounds_mod
from .errors import UndefinedStatisticError
from .pipeline import ANNOTATION_QUESTION, round_rating_matrices
from .store import Store, corpus_stats

ANNOTATE = "annotator"
EXPERT = "expert"


@dataclass(frozen=True)
class WorkerAccount:
    worker_id: str
    role: str  # annotator | expert

    def __post_init__(self) -> None:
        if self.role not in (ANNOTATE, EXPERT):
            raise ValueError(f"role must be annotator or expert, got {self.role!r}")


def load_worker_tokens(path: str | Path) -> dict[str, WorkerAccount]:
    """token<TAB>worker_id<TAB>role lines; '#' comments ignored."""
    tokens: dict[str, WorkerAccount] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected token<TAB>worker<TAB>role")
            token, worker_id, role = (p.strip() for p in parts)
            tokens[token] = WorkerAccount(worker_id=worker_id, role=role)
    return tokens


class TaskEnvelopeModel(BaseModel):
    item_id: str
    anonymized_text: str
    round_id: str
    question: str = ANNOTATION_QUESTION
    context: dict[str, int] | None = None


class LabelSubmission(BaseModel):
    item_id: str
    answer: str = Field(pattern="^[YN]$")


class AdjudicationSubmission(BaseModel):
    tweet_id: str
    label: str = Field(pattern="^(job|notjob)$")


class AckModel(BaseModel):
    status: str
    worker_id: str
    item_id: str
    answer: str
    audit_length: int


class AnnotationService:
    """Glue between the HTTP layer and the store; one instance per server."""

    def __init__(self, store: Store, tokens: dict[str, WorkerAccount],
                 annotators_required: int = 5,
                 adjudication_rounds: tuple[str, ...] = ("R1", "R2"),
                 artifacts_dir: str | Path | None = None) -> None:
        self.store = store
        self.tokens = dict(tokens)
        self.n_required = annotators_required
        self.adjudication_rounds = adjudication_rounds
        self.artifacts_dir = Path(artifacts_dir) if artifacts_dir else None

    def account_for(self, token: str) -> WorkerAccount:
        account = self.tokens.get(token)
        if account is None:
            raise HTTPException(status_code=401, detail="unknown bearer token")
        return account

    # -- annotation -------------------------------------------------------------

    def next_task(self, round_id: str, worker_id: str) -> TaskEnvelopeModel | None:
        hits = self.store.hits_for_round(round_id)
        if not hits:
            raise HTTPException(status_code=404, detail=f"unknown round {round_id!r}")
        answered = {r.item_id for r in self.store.responses_for_round(round_id)
                    if r.worker_id == worker_id}
        for hit in hits:
            for item in hit.items:
                if item.item_id not in answered:
                    return TaskEnvelopeModel(
                        item_id=item.item_id,
                        anonymized_text=item.text,
                        round_id=round_id,
                    )
        return None

    def submit_label(self, worker_id: str, item_id: str, answer: str) -> AckModel:
        owner = self._hit_of_item(item_id)
        if owner is None:
            raise HTTPException(status_code=403, detail="item not assigned to you")
        self.store.add_responses([rounds_mod.WorkerResponse(
            worker_id=worker_id, hit_id=owner.hit_id, item_id=item_id, answer=answer)])
        return AckModel(
            status="stored", worker_id=worker_id, item_id=item_id, answer=answer,
            audit_length=len(self.store.audit_trail(worker_id, item_id)))

    def _hit_of_item(self, item_id: str):
        for round_id in self.store.round_ids():
            for hit in self.store.hits_for_round(round_id):
                if any(item.item_id == item_id for item in hit.items):
                    return hit
        return None

    # -- adjudication -----------------------------------------------------------

    def _queue(self) -> list[str]:
        labels: list[rounds_mod.AggregatedLabel] = []
        for round_id in self.adjudication_rounds:
            hits = self.store.hits_for_round(round_id)
            responses = self.store.responses_for_round(round_id)
            labels.extend(rounds_mod.aggregate(responses, hits,
                                               n_required=self.n_required).labels)
        return rounds_mod.adjudication_queue(labels)

    def _votes_of(self, tweet_id: str) -> dict[str, int]:
        for round_id in self.adjudication_rounds:
            hits = self.store.hits_for_round(round_id)
            responses = self.store.responses_for_round(round_id)
            result = rounds_mod.aggregate(responses, hits, n_required=self.n_required)
            for lab in result.labels:
                if lab.tweet_id == tweet_id:
                    return {"y": lab.y_count, "n": lab.n_count}
        return {"y": 0, "n": 0}

    def next_adjudication(self, expert_id: str) -> TaskEnvelopeModel | None:
        done = {adj.tweet_id for adj in self.store.adjudications()
                if adj.expert_id == expert_id}
        for tweet_id in self._queue():
            if tweet_id in done:
                continue
            text = self._anonymized_text_of(tweet_id)
            return TaskEnvelopeModel(
                item_id=tweet_id,
                anonymized_text=text,
                round_id="adjudication",
                context=self._votes_of(tweet_id),
            )
        return None

    def _anonymized_text_of(self, tweet_id: str) -> str:
        for round_id in self.store.round_ids():
            for hit in self.store.hits_for_round(round_id):
                for item in hit.items:
                    if item.tweet_id == tweet_id:
                        return item.text
        raise HTTPException(status_code=404, detail="tweet has no published item")

    def record_adjudication(self, expert_id: str, tweet_id: str, label: str) -> dict:
        queue = self._queue()
        book = rounds_mod.AdjudicationBook()
        book.load(self.store.adjudications())
        try:
            adjudication = book.record(queue, tweet_id, expert_id, label)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        self.store.add_adjudication(adjudication)
        remaining = sum(
            1 for tid in queue
            if tid not in {a.tweet_id for a in self.store.adjudications()
                           if a.expert_id == expert_id})
        return {"status": "stored", "tweet_id": tweet_id, "label": label,
                "remaining": remaining}

    # -- statistics ---------------------------------------------------------------

    def agreement_payload(self, round_id: str, statistic: str) -> dict:
        if not self.store.hits_for_round(round_id):
            raise HTTPException(status_code=404, detail=f"unknown round {round_id!r}")
        matrices = round_rating_matrices(self.store, round_id, self.n_required)
        try:
            report = agreement_mod.round_summary(matrices, statistic=statistic)
        except UndefinedStatisticError as exc:
            return {"round_id": round_id, "statistic": statistic,
                    "undefined": True, "reason": str(exc)}
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "round_id": round_id,
            "statistic": statistic,
            "undefined": False,
            "mean": report.mean,
            "stdev": report.stdev,
            "band": report.band,
            "n_undefined_hits": report.n_undefined,
            "per_hit": list(report.per_hit_values),
        }

    def corpus_payload(self) -> dict:
        return corpus_stats(self.store.records())

    def models_payload(self) -> dict:
        if self.artifacts_dir is None:
            return {"models": {}}
        path = self.artifacts_dir / "evaluation.json"
        if not path.exists():
            return {"models": {}}
        return json.loads(path.read_text(encoding="utf-8"))


_STAT_ALIASES = {
    "fleiss": agreement_mod.FLEISS_KAPPA,
    "fleiss_kappa": agreement_mod.FLEISS_KAPPA,
    "alpha": agreement_mod.KRIPP_ALPHA,
    "kripp_alpha": agreement_mod.KRIPP_ALPHA,
}


def create_app(service: AnnotationService) -> FastAPI:
    app = FastAPI(title="annotation console API", version="1")

    def current_account(request: Request) -> WorkerAccount:
        header = request.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="bearer token required")
        return service.account_for(header.removeprefix("Bearer ").strip())

    @app.get("/rounds/{round_id}/next", response_model=TaskEnvelopeModel | None)
    def next_task(round_id: str, account: WorkerAccount = Depends(current_account)):
        envelope = service.next_task(round_id, account.worker_id)
        if envelope is None:
            return Response(status_code=204)
        return envelope

    @app.post("/labels", response_model=AckModel)
    def submit_label(body: LabelSubmission,
                     account: WorkerAccount = Depends(current_account)):
        return service.submit_label(account.worker_id, body.item_id, body.answer)

    @app.get("/adjudication/next", response_model=TaskEnvelopeModel | None)
    def next_adjudication(account: WorkerAccount = Depends(current_account)):
        if account.role != EXPERT:
            raise HTTPException(status_code=403, detail="expert token required")
        envelope = service.next_adjudication(account.worker_id)
        if envelope is None:
            return Response(status_code=204)
        return envelope

    @app.post("/adjudication")
    def record_adjudication(body: AdjudicationSubmission,
                            account: WorkerAccount = Depends(current_account)):
        if account.role != EXPERT:
            raise HTTPException(status_code=403, detail="expert token required")
        return service.record_adjudication(account.worker_id, body.tweet_id, body.label)

    @app.get("/stats/agreement/{round_id}")
    def agreement_stats(round_id: str, stat: str = "fleiss"):
        statistic = _STAT_ALIASES.get(stat)
        if statistic is None:
            raise HTTPException(status_code=400,
                                detail=f"stat must be one of {sorted(_STAT_ALIASES)}")
        return service.agreement_payload(round_id, statistic)

    @app.get("/stats/corpus")
    def corpus():
        return service.corpus_payload()

    @app.get("/stats/models")
    def models():
        return service.models_payload()

    return app


def serve(store_dir: str | Path, workers_file: str | Path, port: int = 8400,
          host: str = "127.0.0.1", annotators_required: int = 5,
          artifacts_dir: str | Path | None = None) -> None:
    import uvicorn

    store = Store(store_dir)
    tokens = load_worker_tokens(workers_file)
    service = AnnotationService(store, tokens,
                                annotators_required=annotators_required,
                                artifacts_dir=artifacts_dir)
    uvicorn.run(create_app(service), host=host, port=port, log_level="info")
