"""The forge command line: filtering, training, sampling, annotation rounds,
agreement and evaluation reports, account heuristics, store maintenance, the
pipeline runner and the HTTP server.

Exit codes: 0 success, 2 dependency error, 3 validation/config failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import agreement as agreement_mod
from . import model as model_mod
from . import sampler as sampler_mod
from .accounts import RecruitmentPattern, classify_account, hashtag_census
from .errors import ConflictError, DependencyError, UndefinedStatisticError
from .lexicon import (c0_ruleset, default_slang, job_likely_filter, load_ruleset)
from .metrics import (EffectiveRecallInputs, effective_recall, eval_report,
                      round_half_up)
from .normalize import SlangDictionary, normalize
from .pipeline import (Pipeline, export_hits_csv, import_responses_csv,
                       load_config, round_rating_matrices, write_example_config)
from .rounds import adjudication_queue, aggregate, build_hits
from .store import Store, corpus_stats, export_release

logger = logging.getLogger("forge")


def _store(args) -> Store:
    return Store(args.store)


def _slang(path: str | None) -> SlangDictionary:
    return SlangDictionary.from_file(path) if path else default_slang()


def _rules(path: str | None):
    return load_ruleset(path) if path else c0_ruleset()


def cmd_ingest(args) -> int:
    report = _store(args).ingest(args.file)
    print(f"accepted {report.accepted}, duplicates {report.skipped_duplicates}, "
          f"errors {len(report.errors)}")
    for err in report.errors:
        print(f"  line {err.line}: {err.message}", file=sys.stderr)
    return 0


def cmd_filter(args) -> int:
    store = _store(args)
    selected = job_likely_filter(store.tweets(), _rules(args.rules),
                                 min_tokens=args.min_tokens, slang=_slang(args.slang))
    for tweet_id in sorted(selected):
        print(tweet_id)
    print(f"# matched {len(selected)} of {len(store)}", file=sys.stderr)
    return 0


def _read_labels_file(path: str) -> list[tuple[str, str]]:
    """tweet_id<TAB>label lines (or CSV with a header)."""
    rows: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.lower().startswith("tweet_id"):
                continue
            parts = line.replace(",", "\t").split("\t")
            rows.append((parts[0].strip(), parts[1].strip()))
    return rows


def cmd_train(args) -> int:
    store = _store(args)
    slang = _slang(args.slang)
    labeled = _read_labels_file(args.labels)
    docs = [normalize(store.tweet(tid), slang) for tid, _ in labeled]
    labels = [label for _, label in labeled]
    vocab = model_mod.build_vocab(docs, max_n=args.max_n, min_df=args.min_df)
    X = [model_mod.vectorize(doc, vocab) for doc in docs]
    cfg = model_mod.TrainConfig(
        c=args.c, class_weight_pos=args.pos_weight, class_weight_neg=args.neg_weight,
        epochs=args.epochs, tolerance=args.tolerance, seed=args.seed)
    trained = model_mod.train(X, labels, cfg, vocab)
    model_mod.save_model(trained, args.out)
    print(f"trained on {len(X)} docs, vocabulary {vocab.size}, "
          f"final objective {trained.objective_history[-1]:.6f} -> {args.out}")
    return 0


def cmd_gridsearch(args) -> int:
    store = _store(args)
    slang = _slang(args.slang)
    labeled = _read_labels_file(args.labels)
    docs = [normalize(store.tweet(tid), slang) for tid, _ in labeled]
    labels = [label for _, label in labeled]
    vocab = model_mod.build_vocab(docs, max_n=args.max_n, min_df=args.min_df)
    X = [model_mod.vectorize(doc, vocab) for doc in docs]
    cfg = model_mod.TrainConfig(epochs=args.epochs, tolerance=args.tolerance,
                                seed=args.seed)
    grid = model_mod.default_weight_grid()
    best, report = model_mod.grid_search_cv(X, labels, grid, args.k, cfg, vocab)
    print("pos_weight,neg_weight,c,mean_f1")
    for cell in report.cells:
        print(f"{cell.config.class_weight_pos},{cell.config.class_weight_neg},"
              f"{cell.config.c},{cell.mean_f1:.4f}")
    print(f"# best: pos={best.class_weight_pos} neg={best.class_weight_neg} c={best.c}",
          file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    store = _store(args)
    slang = _slang(args.slang)
    trained = model_mod.load_model(args.model)
    ids = ([line.strip() for line in open(args.ids, encoding="utf-8") if line.strip()]
           if args.ids else sorted(store.tweet_ids()))
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    print("tweet_id,confidence,label", file=out)
    for tweet_id in ids:
        pred = model_mod.predict(trained, normalize(store.tweet(tweet_id), slang))
        print(f"{tweet_id},{pred.confidence!r},{pred.label}", file=out)
    if args.out:
        out.close()
    return 0


def cmd_sample(args) -> int:
    store = _store(args)
    spec = sampler_mod.SampleSpec(
        strategy=args.strategy.replace("-", "_"), k=args.k, seed=args.seed,
        percentile=args.percentile, band_fraction=args.band_fraction)
    if spec.strategy in (sampler_mod.TYPE1, sampler_mod.TYPE2):
        if not args.scores:
            print("--scores FILE is required for type1/type2", file=sys.stderr)
            return 3
        import csv as _csv
        pos, neg = [], []
        with open(args.scores, encoding="utf-8", newline="") as fh:
            for row in _csv.DictReader(fh):
                item = (row["tweet_id"], float(row["confidence"]))
                (pos if row["label"] == "job" else neg).append(item)
        pos.sort(key=lambda it: (-it[1], it[0]))
        if spec.strategy == sampler_mod.TYPE1:
            ids = sampler_mod.sample_type1(pos, spec, store.ledger)
        else:
            ids = sampler_mod.sample_type2(pos, neg, spec, store.ledger)
    elif spec.strategy == sampler_mod.RANDOM_NEGATIVE:
        job_likely = set()
        if args.exclude:
            job_likely = {line.strip() for line in open(args.exclude, encoding="utf-8")
                          if line.strip()}
        ids = sampler_mod.sample_random_negatives(
            store.tweet_ids(), job_likely, spec.k, spec.seed, store.ledger)
    else:
        pool = [line.strip() for line in open(args.pool, encoding="utf-8")
                if line.strip()] if args.pool else store.tweet_ids()
        ids = sampler_mod.sample_rule_pool(pool, spec.k, spec.seed, store.ledger)
    if args.consume:
        store.consume(ids, args.consume)
    for tweet_id in ids:
        print(tweet_id)
    return 0


def cmd_hits(args) -> int:
    store = _store(args)
    if args.hits_command == "build":
        ids = [line.strip() for line in open(args.ids, encoding="utf-8") if line.strip()]
        texts = {tid: store.tweet(tid).text for tid in ids}
        hits = build_hits(ids, texts, subset_size=args.subset_size, n_dups=args.dups,
                          seed=args.seed, round_id=args.round)
        store.add_hits(hits)
        print(f"built {len(hits)} hits for round {args.round}")
    elif args.hits_command == "export":
        hits = store.hits_for_round(args.round)
        export_hits_csv(hits, args.out)
        print(f"wrote {sum(len(h.items) for h in hits)} items to {args.out}")
    else:  # import
        responses = import_responses_csv(args.file)
        store.add_responses(responses)
        print(f"imported {len(responses)} responses")
    return 0


def cmd_aggregate(args) -> int:
    store = _store(args)
    hits = store.hits_for_round(args.round)
    responses = store.responses_for_round(args.round)
    result = aggregate(responses, hits, n_required=args.annotators)
    print("tweet_id,y,n,consensus,needs_adjudication")
    for lab in result.labels:
        print(f"{lab.tweet_id},{lab.y_count},{lab.n_count},{lab.consensus},"
              f"{str(lab.needs_adjudication).lower()}")
    if result.short_staffed:
        print(f"# short-staffed: {len(result.short_staffed)}", file=sys.stderr)
    return 0


def cmd_adjudicate(args) -> int:
    store = _store(args)
    hits = store.hits_for_round(args.round)
    responses = store.responses_for_round(args.round)
    result = aggregate(responses, hits, n_required=args.annotators)
    queue = adjudication_queue(result.labels)
    if args.record:
        tweet_id, expert_id, label = args.record
        from .rounds import AdjudicationBook
        book = AdjudicationBook()
        book.load(store.adjudications())
        adjudication = book.record(queue, tweet_id, expert_id, label)
        store.add_adjudication(adjudication)
        print(f"recorded {expert_id}: {tweet_id} -> {label}")
    else:
        for tweet_id in queue:
            print(tweet_id)
        print(f"# queue length {len(queue)}", file=sys.stderr)
    return 0


def cmd_agreement(args) -> int:
    store = _store(args)
    statistic = {"fleiss": agreement_mod.FLEISS_KAPPA,
                 "alpha": agreement_mod.KRIPP_ALPHA,
                 "cohen": agreement_mod.COHEN_KAPPA}[args.stat]
    if statistic == agreement_mod.COHEN_KAPPA:
        from .rounds import AdjudicationBook
        book = AdjudicationBook()
        book.load(store.adjudications())
        experts = sorted({adj.expert_id for adj in store.adjudications()})
        if len(experts) != 2:
            print(f"need exactly 2 experts with recorded labels, found {len(experts)}",
                  file=sys.stderr)
            return 3
        vec_a, vec_b = book.expert_vectors(*experts)
        kappa = agreement_mod.cohen_kappa(vec_a, vec_b)
        print(f"cohen_kappa,{kappa!r},{agreement_mod.altman_band(kappa)}")
        return 0
    matrices = round_rating_matrices(store, args.round, args.annotators)
    report = agreement_mod.round_summary(matrices, statistic=statistic)
    print("statistic,mean,stdev,band,hits,undefined_hits")
    print(f"{report.statistic},{report.mean!r},{report.stdev!r},{report.band},"
          f"{len(report.per_hit_values)},{report.n_undefined}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("hit_index,value\n")
            for i, value in enumerate(report.per_hit_values):
                fh.write(f"{i},{value!r}\n")
    return 0


def _read_label_column(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def cmd_eval(args) -> int:
    preds = _read_label_column(args.preds)
    refs = _read_label_column(args.refs)
    report = eval_report(preds, refs)
    print("class,precision,recall,f1,support")
    for label, p, r, f1, support in report.rows():
        print(f"{label},{p:.2f},{r:.2f},{f1:.2f},{support}")
    return 0


def cmd_effective_recall(args) -> int:
    inputs = EffectiveRecallInputs(y=args.y, n=args.n, yt=args.yt, nt=args.nt,
                                   recall=args.r)
    print(round_half_up(effective_recall(inputs), 2))
    return 0


def cmd_accounts(args) -> int:
    store = _store(args)
    pattern = (RecruitmentPattern.from_file(args.hashtags)
               if args.hashtags else RecruitmentPattern.default())
    if args.accounts_command == "census":
        print("hashtag,count_with_hashtag,count_with_hashtag_and_url,percent")
        for row in hashtag_census(store.tweets(), sorted(pattern.hashtags)):
            print(f"{row.hashtag},{row.count_with_hashtag},"
                  f"{row.count_with_hashtag_and_url},{row.percent:.2f}")
        return 0
    labels = {}
    if args.labels:
        labels = dict(_read_labels_file(args.labels))
    by_account: dict[str, list] = {}
    for tweet in store.tweets():
        topic = labels.get(tweet.tweet_id, "notjob")
        by_account.setdefault(tweet.account_id, []).append((tweet, topic))
    print("account_id,kind,n_pattern_job,n_other")
    for account_id in sorted(by_account):
        profile = classify_account(by_account[account_id], pattern)
        print(f"{account_id},{profile.kind},{profile.n_pattern_job},{profile.n_other}")
    return 0


def cmd_export(args) -> int:
    store = _store(args)
    export_release(store.records(), args.out, ids_only=args.ids_only)
    print(f"wrote {len(store.records())} records to {args.out}")
    return 0


def cmd_stats(args) -> int:
    stats = corpus_stats(_store(args).records())
    print(json.dumps(stats, indent=2, sort_keys=True))
    return 0


def cmd_audit(args) -> int:
    problems = _store(args).audit()
    for problem in problems:
        print(problem)
    print(f"# {len(problems)} problem(s)", file=sys.stderr)
    return 0 if not problems else 3


def cmd_run(args) -> int:
    if args.init_config:
        write_example_config(args.config)
        print(f"wrote example config to {args.config}")
        return 0
    config = load_config(args.config)
    if args.simulate:
        config.simulate = True
    pipeline = Pipeline(config)
    if args.stage:
        report = pipeline.run_stage(args.stage, force=args.force)
        print(f"{report.stage}: {report.status}")
        for key, value in report.details.items():
            print(f"  {key}: {value}")
    else:
        final = pipeline.run_all(force=args.force)
        print(json.dumps({"corpus_size": final["corpus_size"],
                          "report": str(Path(config.workdir) / "report")}, indent=2))
    return 0


def cmd_report(args) -> int:
    config = load_config(args.config)
    pipeline = Pipeline(config)
    report = pipeline.run_stage("report", force=True)
    print("\n".join(report.outputs))
    return 0


def cmd_serve(args) -> int:
    from .api import serve
    serve(args.store, args.workers, port=args.port, host=args.host,
          annotators_required=args.annotators, artifacts_dir=args.artifacts)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="humans-in-the-loop corpus construction toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_store(p):
        p.add_argument("--store", required=True, help="store directory")

    p = sub.add_parser("ingest", help="append tweets from a JSON-lines file")
    add_store(p)
    p.add_argument("file")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("filter", help="apply an include/exclude rule file")
    add_store(p)
    p.add_argument("--rules", help="rule file (default: packaged seed rules)")
    p.add_argument("--min-tokens", type=int, default=5)
    p.add_argument("--slang", help="slang TSV (default: packaged)")
    p.set_defaults(fn=cmd_filter)

    p = sub.add_parser("train", help="train a linear model from labeled ids")
    add_store(p)
    p.add_argument("--labels", required=True, help="tweet_id<TAB>label file")
    p.add_argument("--out", required=True)
    p.add_argument("--slang")
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--pos-weight", type=float, default=1.0)
    p.add_argument("--neg-weight", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("gridsearch", help="grid search class weights with CV")
    add_store(p)
    p.add_argument("--labels", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--slang")
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gridsearch)

    p = sub.add_parser("predict", help="score tweets with a saved model")
    add_store(p)
    p.add_argument("--model", required=True)
    p.add_argument("--ids", help="file of tweet ids (default: whole store)")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.add_argument("--slang")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("sample", help="draw annotation samples")
    add_store(p)
    p.add_argument("--strategy", required=True,
                   choices=["type1", "type2", "random-negative", "rule-pool"])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--percentile", type=float, default=0.8)
    p.add_argument("--band-fraction", type=float, default=0.1)
    p.add_argument("--scores", help="scores CSV for type1/type2")
    p.add_argument("--pool", help="id file for rule-pool")
    p.add_argument("--exclude", help="id file to exclude for random-negative")
    p.add_argument("--consume", metavar="ROUND",
                   help="record drawn ids in the ledger under this round")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("hits", help="build, export or import annotation HITs")
    hits_sub = p.add_subparsers(dest="hits_command", required=True)
    b = hits_sub.add_parser("build")
    b.add_argument("--ids", required=True)
    b.add_argument("--round", required=True)
    b.add_argument("--subset-size", type=int, default=40)
    b.add_argument("--dups", type=int, default=5)
    b.add_argument("--seed", type=int, required=True)
    e = hits_sub.add_parser("export")
    e.add_argument("--round", required=True)
    e.add_argument("--out", required=True)
    i = hits_sub.add_parser("import")
    i.add_argument("--file", required=True)
    for q in (b, e, i):
        q.set_defaults(fn=cmd_hits)
        q.add_argument("--store", required=True)
    p.set_defaults(fn=cmd_hits)

    p = sub.add_parser("aggregate", help="aggregate a round's responses")
    add_store(p)
    p.add_argument("--round", required=True)
    p.add_argument("--annotators", type=int, default=5)
    p.set_defaults(fn=cmd_aggregate)

    p = sub.add_parser("adjudicate", help="list the queue or record an expert label")
    add_store(p)
    p.add_argument("--round", required=True, help="round whose disagreements to queue")
    p.add_argument("--annotators", type=int, default=5)
    p.add_argument("--record", nargs=3, metavar=("TWEET", "EXPERT", "LABEL"))
    p.set_defaults(fn=cmd_adjudicate)

    p = sub.add_parser("agreement", help="inter-annotator agreement for a round")
    add_store(p)
    p.add_argument("--round", required=True)
    p.add_argument("--stat", choices=["fleiss", "alpha", "cohen"], default="fleiss")
    p.add_argument("--annotators", type=int, default=5)
    p.add_argument("--csv", help="write per-HIT values to this CSV")
    p.set_defaults(fn=cmd_agreement)

    p = sub.add_parser("eval", help="precision/recall/F1 of preds against refs")
    p.add_argument("--preds", required=True)
    p.add_argument("--refs", required=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("effective-recall", help="full-corpus effective recall")
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--yt", type=int, required=True)
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.set_defaults(fn=cmd_effective_recall)

    p = sub.add_parser("accounts", help="account heuristics")
    accounts_sub = p.add_subparsers(dest="accounts_command", required=True)
    c = accounts_sub.add_parser("classify")
    c.add_argument("--labels", help="tweet_id<TAB>topic file (default: all notjob)")
    z = accounts_sub.add_parser("census")
    for q in (c, z):
        q.add_argument("--store", required=True)
        q.add_argument("--hashtags", help="hashtag list file (default: built-in)")
        q.set_defaults(fn=cmd_accounts)
    p.set_defaults(fn=cmd_accounts)

    p = sub.add_parser("export", help="write the release JSON-lines file")
    add_store(p)
    p.add_argument("--out", required=True)
    p.add_argument("--ids-only", action="store_true", default=True)
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("stats", help="corpus label statistics")
    add_store(p)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("audit", help="referential integrity scan")
    add_store(p)
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("run", help="run the pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--stage", help="run exactly one stage")
    p.add_argument("--simulate", action="store_true",
                   help="force simulated annotators")
    p.add_argument("--force", action="store_true", help="ignore up-to-date manifests")
    p.add_argument("--init-config", action="store_true",
                   help="write an example config to --config and exit")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("report", help="re-render report tables and figures")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("serve", help="serve the annotation console API")
    add_store(p)
    p.add_argument("--workers", required=True, help="token\tworker\trole file")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--annotators", type=int, default=5)
    p.add_argument("--artifacts", help="pipeline artifacts dir for /stats/models")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except DependencyError as exc:
        print(f"dependency error: {exc}", file=sys.stderr)
        return 2
    except (ConflictError, UndefinedStatisticError, ValueError, FileNotFoundError,
            KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
