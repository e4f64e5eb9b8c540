"""Report rendering: delimited summaries plus matplotlib figures, written
side by side in the run's report directory.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import round_half_up

FIGURE_DPI = 120


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=FIGURE_DPI, metadata={"Software": None})
    plt.close(fig)
    return path


def render_report(final: dict, final_scores: dict[str, tuple[float, str]],
                  outdir: str | Path) -> list[Path]:
    """Write the CSV tables and figures for a finished run; returns paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    written.extend(_model_eval_outputs(final, outdir))
    written.extend(_effective_recall_outputs(final, outdir))
    written.extend(_agreement_outputs(final, outdir))
    written.extend(_census_outputs(final, outdir))
    written.extend(_corpus_stats_outputs(final, outdir))
    written.extend(_confidence_outputs(final_scores, outdir))
    return written


def _model_eval_outputs(final: dict, outdir: Path) -> list[Path]:
    models = final["evaluation"]["models"]
    rows = []
    names = [n for n in ("c0", "c1", "c2", "c3", "c5") if n in models]
    for name in names:
        per_class = models[name]["eval"]["per_class"]
        weighted = models[name]["eval"]["weighted"]
        for label in ("job", "notjob"):
            m = per_class[label]
            rows.append([name, label, round_half_up(m["precision"]),
                         round_half_up(m["recall"]), round_half_up(m["f1"]),
                         m["support"]])
        rows.append([name, "avg / total", round_half_up(weighted["precision"]),
                     round_half_up(weighted["recall"]),
                     round_half_up(weighted["f1"]), final["evaluation"]["test_size"]])
    csv_path = _write_csv(outdir / "model_eval.csv",
                          ["model", "class", "precision", "recall", "f1", "support"],
                          rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    x = range(len(names))
    width = 0.27
    for offset, metric in zip((-width, 0.0, width), ("precision", "recall", "f1")):
        values = [models[n]["eval"]["per_class"]["job"][metric] for n in names]
        ax.bar([i + offset for i in x], values, width=width, label=metric)
    ax.set_xticks(list(x))
    ax.set_xticklabels([n.upper() for n in names])
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("job-class score")
    ax.set_title("Model performance on the validation sample")
    ax.legend()
    fig_path = _save(fig, outdir / "model_performance.png")
    return [csv_path, fig_path]


def _effective_recall_outputs(final: dict, outdir: Path) -> list[Path]:
    models = final["evaluation"]["models"]
    names = [n for n in ("c1", "c2", "c3", "c5")
             if n in models and "effective_recall" in models[n]]
    rows = []
    for name in names:
        er = models[name]["effective_recall"]
        rows.append([name, er["y"], er["n"], er["yt"], er["nt"],
                     round_half_up(er["recall"]),
                     round_half_up(er["estimated"]) if er["estimated"] is not None else "",
                     round_half_up(er["true_full_corpus_recall"])
                     if er.get("true_full_corpus_recall") is not None else ""])
    csv_path = _write_csv(outdir / "effective_recall.csv",
                          ["model", "y", "n", "yt", "nt", "test_recall",
                           "estimated_effective_recall", "true_full_corpus_recall"],
                          rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    x = range(len(names))
    width = 0.38
    est = [models[n]["effective_recall"]["estimated"] or 0.0 for n in names]
    ax.bar([i - width / 2 for i in x], est, width=width, label="estimated")
    truths = [models[n]["effective_recall"].get("true_full_corpus_recall") for n in names]
    if any(t is not None for t in truths):
        ax.bar([i + width / 2 for i in x], [t or 0.0 for t in truths],
               width=width, label="true (synthetic)")
    ax.set_xticks(list(x))
    ax.set_xticklabels([n.upper() for n in names])
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("effective recall")
    ax.set_title("Full-corpus effective recall")
    ax.legend()
    fig_path = _save(fig, outdir / "effective_recall.png")
    return [csv_path, fig_path]


def _agreement_outputs(final: dict, outdir: Path) -> list[Path]:
    rounds = final["agreement"]["rounds"]
    rows = []
    plot_rounds, means, stdevs = [], [], []
    for round_id, entry in rounds.items():
        for stat in ("fleiss_kappa", "kripp_alpha"):
            info = entry.get(stat, {})
            if info.get("undefined"):
                rows.append([round_id, stat, "undefined", "", "", entry["hits"]])
                continue
            rows.append([round_id, stat, round_half_up(info["mean"]),
                         round_half_up(info["stdev"]), info["band"], entry["hits"]])
            if stat == "fleiss_kappa":
                plot_rounds.append(round_id)
                means.append(info["mean"])
                stdevs.append(info["stdev"])
    if final["agreement"].get("expert_cohen_kappa") is not None:
        rows.append(["R3", "cohen_kappa",
                     round_half_up(final["agreement"]["expert_cohen_kappa"]),
                     "", "", ""])
    csv_path = _write_csv(outdir / "agreement_rounds.csv",
                          ["round", "statistic", "mean", "stdev", "band", "hits"],
                          rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    if plot_rounds:
        ax.bar(range(len(plot_rounds)), means, yerr=stdevs, capsize=4)
        ax.set_xticks(range(len(plot_rounds)))
        ax.set_xticklabels(plot_rounds)
    ax.set_ylim(-0.1, 1.05)
    ax.set_ylabel("Fleiss' kappa (mean over HITs)")
    ax.set_title("Inter-annotator agreement per round")
    fig_path = _save(fig, outdir / "agreement_rounds.png")
    return [csv_path, fig_path]


def _census_outputs(final: dict, outdir: Path) -> list[Path]:
    rows = [[r["hashtag"], r["count_with_hashtag"], r["count_with_hashtag_and_url"],
             f'{r["percent"]:.2f}'] for r in final["accounts"]["census"]]
    return [_write_csv(outdir / "hashtag_census.csv",
                       ["hashtag", "count_with_hashtag", "count_with_hashtag_and_url",
                        "percent"], rows)]


def _corpus_stats_outputs(final: dict, outdir: Path) -> list[Path]:
    stats = final["corpus_stats"]
    rows = []
    for axis in ("topic", "source"):
        for labeler in ("human", "machine"):
            for label, count in stats[axis][labeler].items():
                rows.append([axis, labeler, label, count])
    return [_write_csv(outdir / "corpus_stats.csv",
                       ["axis", "labeler", "label", "count"], rows)]


def _confidence_outputs(final_scores: dict[str, tuple[float, str]],
                        outdir: Path) -> list[Path]:
    if not final_scores:
        return []
    confidences = [conf for conf, _ in final_scores.values()]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(confidences, bins=60)
    ax.axvline(0.0, linestyle="--", linewidth=1)
    ax.set_xlabel("decision value")
    ax.set_ylabel("tweets")
    ax.set_title("Final-model confidence distribution")
    return [_save(fig, outdir / "confidence_distribution.png")]
