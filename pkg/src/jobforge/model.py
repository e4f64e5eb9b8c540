"""N-gram featurization and a class-weighted linear SVM trained by exact
coordinate descent on the primal objective

    P(w, b) = 0.5 * ||w||^2 + C * sum_i wt_i * max(0, 1 - y_i * (w.x_i + b))

Each coordinate step (and the bias step) solves its one-dimensional convex
subproblem exactly, so the objective never increases; with a fixed seed the
epoch-wise feature order is reproducible and training is fully deterministic.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .metrics import eval_report
from .normalize import NormalizedDoc, ngrams

JOB = "job"
NOTJOB = "notjob"

FeatureVector = tuple[tuple[int, int], ...]

MODEL_FORMAT = "jobforge-linear-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Vocabulary:
    """Dense n-gram -> feature id map, ids in lexicographic n-gram order."""

    index: dict[str, int]
    max_n: int

    @property
    def size(self) -> int:
        return len(self.index)

    def terms(self) -> list[str]:
        """N-grams in feature-id order."""
        out = [""] * len(self.index)
        for term, fid in self.index.items():
            out[fid] = term
        return out


def build_vocab(docs: Sequence[NormalizedDoc], max_n: int, min_df: int = 1) -> Vocabulary:
    """N-grams occurring in >= min_df distinct docs, ids assigned lexicographically."""
    if not docs:
        raise ValueError("cannot build a vocabulary from zero documents")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(ngrams(doc, max_n)))
    terms = sorted(t for t, count in df.items() if count >= min_df)
    return Vocabulary(index={t: i for i, t in enumerate(terms)}, max_n=max_n)


def vectorize(doc: NormalizedDoc, vocab: Vocabulary, max_n: int | None = None) -> FeatureVector:
    """Counts of in-vocabulary n-grams; out-of-vocabulary n-grams are dropped."""
    if max_n is not None and max_n != vocab.max_n:
        raise ValueError(f"vocabulary was built with max_n={vocab.max_n}, got {max_n}")
    counts: Counter[int] = Counter()
    for gram, count in ngrams(doc, vocab.max_n).items():
        fid = vocab.index.get(gram)
        if fid is not None:
            counts[fid] += count
    return tuple(sorted(counts.items()))


@dataclass(frozen=True)
class TrainConfig:
    c: float = 1.0
    class_weight_pos: float = 1.0
    class_weight_neg: float = 1.0
    epochs: int = 100
    tolerance: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("c", "class_weight_pos", "class_weight_neg", "tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")


@dataclass
class LinearModel:
    """Immutable once trained; safe for concurrent prediction."""

    weights: np.ndarray
    bias: float
    vocab: Vocabulary
    config: TrainConfig
    objective_history: tuple[float, ...]


@dataclass(frozen=True)
class Prediction:
    label: str
    confidence: float

    def __post_init__(self) -> None:
        if (self.label == JOB) != (self.confidence > 0):
            raise ValueError("label must be job exactly when confidence > 0")


def _hinge_slope_levels(r: np.ndarray, g: np.ndarray, cost: np.ndarray
                        ) -> tuple[np.ndarray, np.ndarray]:
    """For phi(t) = sum_i cost_i * max(0, g_i - r_i t), return the sorted
    breakpoints and the piecewise-constant values of -phi'(t) per interval
    (a non-increasing step function with m+1 levels)."""
    breakpoints = g / r
    order = np.argsort(breakpoints, kind="stable")
    breakpoints = breakpoints[order]
    slope_drop = (-cost * np.abs(r))[order]
    s0 = float(np.sum(np.where(r > 0, cost * r, 0.0)))
    s_levels = s0 + np.concatenate(([0.0], np.cumsum(slope_drop)))
    return breakpoints, s_levels


def _line_argmin(a: float, l: float, r: np.ndarray, g: np.ndarray,
                 cost: np.ndarray) -> float:
    """Exact minimizer of f(t) = 0.5*a*t^2 + l*t + sum_i cost_i*max(0, g_i - r_i*t).

    Every training move is one of these exact one-dimensional solves, which is
    what makes the epoch objective provably non-increasing. Entries with
    r_i == 0 must be filtered out by the caller. Requires a > 0, or a == 0
    with a sign-crossing derivative (the bias case).
    """
    breakpoints, s_levels = _hinge_slope_levels(r, g, cost)
    if a > 0:
        # f'(t) = a*t + l - S(t); stationary point per interval: (S - l) / a
        t_candidates = (s_levels - l) / a
        uppers = np.concatenate((breakpoints, [np.inf]))
        lowers = np.concatenate(([-np.inf], breakpoints))
        k = int(np.argmax(t_candidates <= uppers))
        return float(max(t_candidates[k], lowers[k]))
    # piecewise linear: f'(t) = l - S(t), non-decreasing; move to the first
    # breakpoint where it crosses zero
    crossed = s_levels <= l
    if crossed[0] or not crossed.any():
        return 0.0  # unbounded or degenerate; stay put
    k = int(np.argmax(crossed))
    return float(breakpoints[k - 1])


def _objective(weights: np.ndarray, scores: np.ndarray, y: np.ndarray,
               cost: np.ndarray) -> float:
    hinge = np.maximum(0.0, 1.0 - y * scores)
    return 0.5 * float(weights @ weights) + float(cost @ hinge)


class _DualSolver:
    """Maximal-violating-pair ascent on the hinge-SVM dual

        max  sum(alpha) - 0.5 * ||sum_i alpha_i y_i x_i||^2
        s.t. 0 <= alpha_i <= cost_i,  sum_i alpha_i y_i = 0

    whose optimum equals the primal optimum of the free-bias objective.
    Pair selection is deterministic (first index on ties).
    """

    def __init__(self, X: Sequence[FeatureVector], signs: np.ndarray,
                 cost: np.ndarray, columns: list[tuple[np.ndarray, np.ndarray]],
                 n_features: int) -> None:
        self.X = X
        self.signs = signs
        self.cost = cost
        self.columns = columns
        self.n = len(X)
        self.alpha = np.zeros(self.n)
        self.w = np.zeros(n_features)
        self.wx = np.zeros(self.n)  # w . x_i, bias excluded

    def violation_gap(self) -> float:
        scores = self.signs - self.wx
        up = ((self.signs > 0) & (self.alpha < self.cost)) | \
             ((self.signs < 0) & (self.alpha > 0))
        low = ((self.signs > 0) & (self.alpha > 0)) | \
              ((self.signs < 0) & (self.alpha < self.cost))
        if not up.any() or not low.any():
            return 0.0
        return float(np.max(scores[up]) - np.min(scores[low]))

    def _apply(self, i: int, sign: float, step: float) -> None:
        for fid, count in self.X[i]:
            delta = sign * step * count
            self.w[fid] += delta
            rows, vals = self.columns[fid]
            self.wx[rows] += delta * vals

    def step(self) -> float:
        """One pair update; returns the violation gap seen before it."""
        scores = self.signs - self.wx
        up = ((self.signs > 0) & (self.alpha < self.cost)) | \
             ((self.signs < 0) & (self.alpha > 0))
        low = ((self.signs > 0) & (self.alpha > 0)) | \
              ((self.signs < 0) & (self.alpha < self.cost))
        if not up.any() or not low.any():
            return 0.0
        i = int(np.argmax(np.where(up, scores, -np.inf)))
        j = int(np.argmin(np.where(low, scores, np.inf)))
        gap = float(scores[i] - scores[j])
        if gap <= 0.0:
            return gap
        di = dict(self.X[i])
        dj = dict(self.X[j])
        eta = sum((di.get(f, 0) - dj.get(f, 0)) ** 2 for f in set(di) | set(dj))
        # feasible step range keeping both alphas inside their boxes
        if self.signs[i] > 0:
            hi, lo = self.cost[i] - self.alpha[i], -self.alpha[i]
        else:
            hi, lo = self.alpha[i], self.alpha[i] - self.cost[i]
        if self.signs[j] > 0:
            hi = min(hi, self.alpha[j])
            lo = max(lo, self.alpha[j] - self.cost[j])
        else:
            hi = min(hi, self.cost[j] - self.alpha[j])
            lo = max(lo, -self.alpha[j])
        step = gap / eta if eta > 1e-12 else hi
        step = float(np.clip(step, lo, hi))
        if step == 0.0:
            return 0.0
        self.alpha[i] = float(np.clip(self.alpha[i] + self.signs[i] * step, 0.0, self.cost[i]))
        self.alpha[j] = float(np.clip(self.alpha[j] - self.signs[j] * step, 0.0, self.cost[j]))
        self._apply(i, 1.0, step)
        self._apply(j, -1.0, step)
        return gap

    def refresh(self) -> None:
        """Recompute wx from w so incremental float drift cannot accumulate."""
        self.wx = _feature_scores(self.X, self.w, self.n)


def train(X: Sequence[FeatureVector], y: Sequence[str], cfg: TrainConfig,
          vocab: Vocabulary) -> LinearModel:
    """Fit the class-weighted hinge objective.

    A dual pairwise-coordinate ascent proposes candidate solutions; the kept
    iterate only ever moves through exact primal line searches (toward the
    candidate, then over the bias), so the recorded objective history is
    non-increasing while converging to the dual's global optimum. Stops when
    the objective improves by less than cfg.tolerance between epochs, or when
    cfg.epochs is exhausted.
    """
    if len(X) != len(y) or len(y) < 2:
        raise ValueError("need at least two labeled vectors")
    label_set = set(y)
    if label_set != {JOB, NOTJOB}:
        raise ValueError(f"training data must contain both classes, got {sorted(label_set)}")

    n = len(X)
    n_features = vocab.size
    signs = np.array([1.0 if lab == JOB else -1.0 for lab in y])
    cost = np.where(signs > 0, cfg.c * cfg.class_weight_pos, cfg.c * cfg.class_weight_neg)

    col_rows: list[list[int]] = [[] for _ in range(n_features)]
    col_vals: list[list[float]] = [[] for _ in range(n_features)]
    for i, fv in enumerate(X):
        for fid, count in fv:
            col_rows[fid].append(i)
            col_vals[fid].append(float(count))
    columns = [
        (np.asarray(rows, dtype=np.intp), np.asarray(vals, dtype=float))
        for rows, vals in zip(col_rows, col_vals)
    ]

    solver = _DualSolver(X, signs, cost, columns, n_features)
    weights = np.zeros(n_features)
    bias = 0.0
    wx = np.zeros(n)
    history: list[float] = []
    prev_obj: float | None = None
    gap_tol = min(cfg.tolerance, 1e-10)
    updates_per_epoch = max(2 * n, 32)

    def bias_step() -> None:
        nonlocal bias
        delta = _line_argmin(0.0, 0.0, signs, 1.0 - signs * (wx + bias), cost)
        if delta != 0.0:
            bias += delta

    for _ in range(cfg.epochs):
        saved = (weights, bias, wx)
        for _ in range(updates_per_epoch):
            if solver.step() <= gap_tol:
                break
        solver.refresh()
        # exact line search from the kept iterate toward the dual candidate
        cand_w = solver.w
        cand_b = _line_argmin(0.0, 0.0, signs, 1.0 - signs * solver.wx, cost)
        dw = cand_w - weights
        d_effect = (solver.wx + cand_b) - (wx + bias)
        a = float(dw @ dw)
        live = np.abs(d_effect) > 1e-12
        if a > 1e-18 or np.abs(d_effect).max() > 1e-9:
            r = (signs * d_effect)[live]
            g = (1.0 - signs * (wx + bias))[live]
            t = _line_argmin(a, float(weights @ dw), r, g, cost[live])
            if t != 0.0:
                weights = weights + t * dw
                bias += t * (cand_b - bias)
                wx = wx + t * (solver.wx - wx)
        bias_step()
        obj = _objective(weights, wx + bias, signs, cost)
        if prev_obj is not None and obj > prev_obj:
            # numerical pathology safeguard: a dust-direction search cannot
            # be allowed to undo a better iterate
            weights, bias, wx = saved
            obj = prev_obj
        history.append(obj)
        converged = solver.violation_gap() <= max(gap_tol, 1e-8)
        if prev_obj is not None and prev_obj - obj < cfg.tolerance and converged:
            break
        prev_obj = obj

    return LinearModel(
        weights=weights,
        bias=bias,
        vocab=vocab,
        config=cfg,
        objective_history=tuple(history),
    )


def _feature_scores(X: Sequence[FeatureVector], weights: np.ndarray, n: int) -> np.ndarray:
    scores = np.zeros(n)
    for i, fv in enumerate(X):
        acc = 0.0
        for fid, count in fv:
            acc += weights[fid] * count
        scores[i] = acc
    return scores


def decision_value(model: LinearModel, fv: FeatureVector) -> float:
    """Signed decision value w.x + b for a sparse vector."""
    acc = model.bias
    for fid, count in fv:
        acc += float(model.weights[fid]) * count
    return acc


def predict(model: LinearModel, doc: NormalizedDoc) -> Prediction:
    """Confidence = w.vectorize(doc) + b; ties at zero resolve to notjob."""
    confidence = decision_value(model, vectorize(doc, model.vocab))
    return Prediction(label=JOB if confidence > 0 else NOTJOB, confidence=confidence)


def decision_rank(
    model: LinearModel, docs: Iterable[NormalizedDoc]
) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    """Partition docs by predicted label, each side sorted by |confidence|
    descending with ties broken by tweet_id ascending."""
    pos: list[tuple[str, float]] = []
    neg: list[tuple[str, float]] = []
    for doc in docs:
        pred = predict(model, doc)
        (pos if pred.label == JOB else neg).append((doc.tweet_id, pred.confidence))
    key = lambda item: (-abs(item[1]), item[0])
    pos.sort(key=key)
    neg.sort(key=key)
    return pos, neg


GridCell = tuple[float, float] | tuple[float, float, float]


@dataclass(frozen=True)
class GridCellResult:
    config: TrainConfig
    fold_f1: tuple[float, ...]
    mean_f1: float


@dataclass(frozen=True)
class CVReport:
    cells: tuple[GridCellResult, ...]
    best_index: int

    @property
    def best(self) -> GridCellResult:
        return self.cells[self.best_index]


def default_weight_grid() -> list[tuple[float, float, float]]:
    """(pos_weight, neg_weight, C) cells: pos in {1,2,3,5,8} x C in {0.1,1,10}."""
    return [(pos, 1.0, c) for c in (0.1, 1.0, 10.0) for pos in (1.0, 2.0, 3.0, 5.0, 8.0)]


def stratified_fold_assignment(y: Sequence[str], k: int, seed: int) -> np.ndarray:
    """Per-sample fold ids: each class shuffled by the seed, dealt round-robin."""
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=int)
    for label in sorted(set(y)):
        idx = np.array([i for i, lab in enumerate(y) if lab == label], dtype=int)
        rng.shuffle(idx)
        for fold in range(k):
            fold_of[idx[fold::k]] = fold
    return fold_of


def grid_search_cv(
    X: Sequence[FeatureVector],
    y: Sequence[str],
    weight_grid: Sequence[GridCell],
    k: int,
    cfg_base: TrainConfig,
    vocab: Vocabulary,
) -> tuple[TrainConfig, CVReport]:
    """Pick the grid cell with the best mean job-class F1 under stratified
    k-fold CV; ties resolve to the first cell in grid order."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if not weight_grid:
        raise ValueError("grid must be nonempty")
    counts = Counter(y)
    for label in (JOB, NOTJOB):
        if counts[label] < k:
            raise ValueError(f"need at least {k} samples of class {label!r}, "
                             f"got {counts[label]}")

    fold_of = stratified_fold_assignment(y, k, cfg_base.seed)
    results: list[GridCellResult] = []
    for cell in weight_grid:
        pos, neg = cell[0], cell[1]
        c = cell[2] if len(cell) > 2 else cfg_base.c
        cfg = replace(cfg_base, class_weight_pos=pos, class_weight_neg=neg, c=c)
        fold_scores: list[float] = []
        for fold in range(k):
            train_idx = [i for i in range(len(y)) if fold_of[i] != fold]
            test_idx = [i for i in range(len(y)) if fold_of[i] == fold]
            model = train([X[i] for i in train_idx], [y[i] for i in train_idx], cfg, vocab)
            preds = [JOB if decision_value(model, X[i]) > 0 else NOTJOB for i in test_idx]
            refs = [y[i] for i in test_idx]
            fold_scores.append(eval_report(preds, refs).metrics_for(JOB).f1)
        mean_f1 = sum(fold_scores) / k
        results.append(GridCellResult(config=cfg, fold_f1=tuple(fold_scores), mean_f1=mean_f1))

    best_index = max(range(len(results)), key=lambda i: (results[i].mean_f1, -i))
    report = CVReport(cells=tuple(results), best_index=best_index)
    return results[best_index].config, report


def save_model(model: LinearModel, path: str | Path) -> None:
    """Versioned JSON text format; round-trips byte-exactly."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "max_n": model.vocab.max_n,
        "vocabulary": model.vocab.terms(),
        "weights": [float(w) for w in model.weights],
        "bias": float(model.bias),
        "config": {
            "c": model.config.c,
            "class_weight_pos": model.config.class_weight_pos,
            "class_weight_neg": model.config.class_weight_neg,
            "epochs": model.config.epochs,
            "tolerance": model.config.tolerance,
            "seed": model.config.seed,
        },
        "objective_history": [float(v) for v in model.objective_history],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str | Path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported version {payload.get('version')!r}")
    weights = np.array(payload["weights"], dtype=float)
    if not np.all(np.isfinite(weights)):
        raise ValueError(f"{path}: weights must be finite")
    vocab = Vocabulary(
        index={term: i for i, term in enumerate(payload["vocabulary"])},
        max_n=payload["max_n"],
    )
    if vocab.size != weights.size:
        raise ValueError(f"{path}: weight count does not match vocabulary size")
    return LinearModel(
        weights=weights,
        bias=float(payload["bias"]),
        vocab=vocab,
        config=TrainConfig(**payload["config"]),
        objective_history=tuple(payload["objective_history"]),
    )
