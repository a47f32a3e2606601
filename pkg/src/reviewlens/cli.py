"""Command-line entry point wiring all modules into reproducible runs.

Exit codes: 0 success, 1 validation error (bad arguments or inputs),
2 runtime failure.  Every subcommand writes its outputs under --out
together with a manifest recording input hashes, seed and config.
"""

import argparse
import json
import sys
from pathlib import Path

from . import experiments
from .categories import CATEGORIES, Category
from .classify import (
    classify_corpus,
    load_encoder,
    train_binary,
    train_multilabel,
    train_multitask,
)
from .classify.training import (
    load_model,
    read_predictions_jsonl,
    save_model,
    write_predictions_jsonl,
)
from .config import load_run_config
from .corpus import (
    TextBox,
    aggregate_majority,
    ingest_annotations,
    ingest_gold,
    ingest_sentences,
    segment_review,
    stratified_holdout,
    write_jsonl,
)
from .errors import ReviewlensError
from .metrics import REPORT_COLUMNS
from .prevalence import (
    prevalence_summary,
    review_prevalence,
    write_prevalence_csv,
    write_summary_json,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def _common_flags(sub):
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--config", help="TOML config file")
    sub.add_argument("--seed", type=int, help="seed override")


def build_parser():
    parser = _Parser(prog="reviewlens")
    subs = parser.add_subparsers(dest="command", metavar="subcommand")

    s = subs.add_parser("ingest", parents=[], help="segment raw reviews")
    s.add_argument("--reviews", required=True)
    _common_flags(s)

    s = subs.add_parser("aggregate", help="majority-vote gold labels")
    s.add_argument("--annotations", required=True)
    s.add_argument("--quorum", type=int, default=2)
    _common_flags(s)

    s = subs.add_parser("split", help="stratified holdout split")
    s.add_argument("--gold", required=True)
    s.add_argument("--category", required=True)
    s.add_argument("--test-fraction", type=float, default=0.2)
    _common_flags(s)

    for name in ("train", "cv", "ablate"):
        s = subs.add_parser(name)
        s.add_argument("--gold", required=True)
        s.add_argument("--sentences", required=True)
        s.add_argument("--approach", default="binary",
                       choices=experiments.APPROACHES)
        s.add_argument("--category")
        s.add_argument("--encoder")
        if name == "cv":
            s.add_argument("--k", type=int, default=5)
        if name == "ablate":
            s.add_argument("--chunk", type=int, default=500)
            s.add_argument("--test-fraction", type=float, default=0.2)
        _common_flags(s)

    s = subs.add_parser("evaluate", help="evaluate a saved model")
    s.add_argument("--model-dir", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--sentences", required=True)
    _common_flags(s)

    s = subs.add_parser("compare-encoders")
    s.add_argument("--gold", required=True)
    s.add_argument("--sentences", required=True)
    s.add_argument("--encoders", required=True,
                   help="comma-separated encoder ids")
    _common_flags(s)

    s = subs.add_parser("compare-agreement",
                        help="majority vs full-agreement training")
    s.add_argument("--gold", required=True)
    s.add_argument("--sentences", required=True)
    s.add_argument("--category", required=True)
    s.add_argument("--encoder")
    _common_flags(s)

    s = subs.add_parser("compare-context",
                        help="rationale with and without context window")
    s.add_argument("--gold", required=True)
    s.add_argument("--sentences", required=True)
    s.add_argument("--context-labels", required=True)
    s.add_argument("--encoder")
    _common_flags(s)

    s = subs.add_parser("classify", help="predict all categories")
    s.add_argument("--model-dir", required=True)
    s.add_argument("--sentences", required=True)
    _common_flags(s)

    s = subs.add_parser("keyness", help="category-keyness by chi-squared")
    s.add_argument("--sentences", required=True)
    s.add_argument("--predictions", required=True)
    s.add_argument("--category", required=True)
    s.add_argument("--top", type=int, default=25)
    _common_flags(s)

    s = subs.add_parser("prevalence")
    s.add_argument("--sentences", required=True)
    s.add_argument("--predictions", required=True)
    _common_flags(s)

    s = subs.add_parser("fewshot")
    s.add_argument("--gold", required=True)
    s.add_argument("--sentences", required=True)
    s.add_argument("--category", action="append", default=None,
                   help="limit to this category (repeatable)")
    s.add_argument("--stub", choices=["oracle", "always-positive"],
                   help="offline stand-in instead of the HTTP endpoint")
    _common_flags(s)

    s = subs.add_parser("serve", help="run the annotation service")
    s.add_argument("--sentences")
    s.add_argument("--db")
    s.add_argument("--bind")

    s = subs.add_parser("report", help="tables and figures for a run dir")
    s.add_argument("--run-dir", required=True)
    s.add_argument("--out")

    return parser


def _load_config(args):
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "encoder", None):
        overrides["encoder_id"] = args.encoder
    config = load_run_config(getattr(args, "config", None), overrides)
    # the seed travels into training through TrainConfig
    if config.seed != config.train.seed:
        from .classify import TrainConfig

        values = config.train.to_json()
        values["seed"] = config.seed
        config.train = TrainConfig(**values)
    return config


def _load_corpus(args):
    sentences = ingest_sentences(args.sentences)
    golds = ingest_gold(args.gold)
    sentences_by_id = {s.sentence_id: s for s in sentences}
    missing = [g.sentence_id for g in golds
               if g.sentence_id not in sentences_by_id]
    if missing:
        raise ReviewlensError(
            f"{len(missing)} gold sentence ids missing from sentences file"
        )
    return sentences, golds, sentences_by_id


def _category(name):
    try:
        return Category(name)
    except ValueError:
        raise _UsageError(
            f"unknown category {name!r}; choose from "
            f"{[c.value for c in CATEGORIES]}"
        )


def _report_rows(reports):
    rows = []
    for cat, report in reports.items():
        rows.append([cat.value] + [getattr(report, c) for c in REPORT_COLUMNS])
    return rows


def _evaluate_model_on(model, golds, sentences_by_id, threshold):
    return experiments._evaluate_model(
        model, golds, sentences_by_id,
        model.categories(), threshold,
    )


def cmd_ingest(args, config):
    sentences = []
    with open(args.reviews, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            sentences.extend(segment_review(
                obj["text"], obj["review_id"], TextBox(obj["text_box"])
            ))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "sentences.jsonl", [s.to_json() for s in sentences])
    experiments.write_manifest(out, "ingest", config, [args.reviews],
                               extra={"n_sentences": len(sentences)})
    return 0


def cmd_aggregate(args, config):
    records = ingest_annotations(args.annotations)
    golds = aggregate_majority(records, quorum=args.quorum)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "gold.jsonl", [g.to_json() for g in sorted(
        golds, key=lambda g: g.sentence_id)])
    experiments.write_manifest(out, "aggregate", config, [args.annotations],
                               extra={"quorum": args.quorum,
                                      "n_sentences": len(golds)})
    return 0


def cmd_split(args, config):
    golds = ingest_gold(args.gold)
    category = _category(args.category)
    split = stratified_holdout(golds, category, args.test_fraction,
                               seed=config.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "split.json").write_text(json.dumps({
        "seed": split.seed,
        "category": category.value,
        "train_ids": sorted(split.train_ids),
        "test_ids": sorted(split.test_ids),
    }, indent=2) + "\n", encoding="utf-8")
    experiments.write_manifest(out, "split", config, [args.gold])
    return 0


def cmd_train(args, config):
    _, golds, sentences_by_id = _load_corpus(args)
    encoder = load_encoder(config.encoder_id, models_dir=config.models_dir)
    if args.approach == "binary":
        if not args.category:
            raise _UsageError("binary training requires --category")
        model = train_binary(golds, _category(args.category), encoder,
                             config.train, sentences_by_id)
    elif args.approach == "multilabel":
        model = train_multilabel(golds, encoder, config.train,
                                 sentences_by_id)
    else:
        model = train_multitask(golds, encoder, config.train,
                                sentences_by_id)
    out = Path(args.out)
    save_model(model, out / "model")
    experiments.write_manifest(out, "train", config,
                               [args.gold, args.sentences],
                               extra={"approach": args.approach})
    return 0


def cmd_evaluate(args, config):
    _, golds, sentences_by_id = _load_corpus(args)
    meta = json.loads(
        (Path(args.model_dir) / "config.json").read_text(encoding="utf-8")
    )
    encoder = load_encoder(meta["encoder_id"], models_dir=config.models_dir)
    model = load_model(args.model_dir, encoder)
    reports = _evaluate_model_on(model, golds, sentences_by_id,
                                 model.config.threshold)
    out = Path(args.out)
    experiments.write_results_csv(out, ["category"] + REPORT_COLUMNS,
                                  _report_rows(reports))
    experiments.write_manifest(out, "evaluate", config,
                               [args.gold, args.sentences])
    return 0


def cmd_cv(args, config):
    _, golds, sentences_by_id = _load_corpus(args)
    encoder = load_encoder(config.encoder_id, models_dir=config.models_dir)
    categories = [_category(args.category)] if args.category else None
    report = experiments.run_cv(args.approach, golds, encoder, config.train,
                                sentences_by_id, k=args.k,
                                categories=categories)
    out = Path(args.out)
    experiments.write_results_csv(
        out, ["category", "f1_macro_mean", "f1_macro_min", "f1_macro_max"],
        experiments.cv_results_rows(report),
    )
    (out / "cv_report.json").write_text(
        json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8"
    )
    experiments.write_manifest(out, "cv", config,
                               [args.gold, args.sentences],
                               extra={"approach": args.approach, "k": args.k})
    return 0


def cmd_ablate(args, config):
    _, golds, sentences_by_id = _load_corpus(args)
    encoder = load_encoder(config.encoder_id, models_dir=config.models_dir)
    golds_by_id = {g.sentence_id: g for g in golds}
    k = max(2, round(1 / args.test_fraction))
    folds = experiments.unstratified_kfold(golds, k=k, seed=config.seed)
    test_ids = set(folds[0])
    train = [g for g in golds if g.sentence_id not in test_ids]
    test = [golds_by_id[sid] for sid in sorted(test_ids)]
    category = _category(args.category) if args.category else None
    curve = experiments.run_ablation(
        train, test, encoder, config.train, sentences_by_id,
        chunk=args.chunk, approach=args.approach, category=category,
    )
    out = Path(args.out)
    experiments.write_results_csv(
        out, ["train_size", "category", "f1_macro"],
        experiments.curve_results_rows(curve),
    )
    experiments.write_manifest(out, "ablate", config,
                               [args.gold, args.sentences],
                               extra={"chunk": args.chunk,
                                      "approach": args.approach})
    return 0


def cmd_compare_encoders(args, config):
    _, golds, sentences_by_id = _load_corpus(args)
    encoder_ids = [e.strip() for e in args.encoders.split(",") if e.strip()]
    if not encoder_ids:
        raise _UsageError("--encoders must list at least one id")
    table = experiments.compare_encoders(golds, encoder_ids, config.train,
                                         sentences_by_id,
                                         models_dir=config.models_dir)
    rows = []
    for cat in CATEGORIES:
        rows.append([cat.value] + [
            table[e]["reports"][cat].f1_macro for e in encoder_ids
        ])
    rows.append(["average"] + [table[e]["average"] for e in encoder_ids])
    out = Path(args.out)
    experiments.write_results_csv(out, ["category"] + encoder_ids, rows)
    experiments.write_manifest(out, "compare-encoders", config,
                               [args.gold, args.sentences],
                               extra={"encoders": encoder_ids})
    return 0


def cmd_compare_agreement(args, config):
    _, golds, sentences_by_id = _load_corpus(args)
    encoder = load_encoder(config.encoder_id, models_dir=config.models_dir)
    category = _category(args.category)
    pair = experiments.compare_training_sets(golds, category, encoder,
                                             config.train, sentences_by_id)
    out = Path(args.out)
    experiments.write_results_csv(
        out, ["training_set"] + REPORT_COLUMNS,
        [[tag] + [getattr(report, c) for c in REPORT_COLUMNS]
         for tag, report in pair.items()],
    )
    experiments.write_manifest(out, "compare-agreement", config,
                               [args.gold, args.sentences],
                               extra={"category": category.value})
    return 0


def cmd_compare_context(args, config):
    _, golds, sentences_by_id = _load_corpus(args)
    context_labels = {}
    with open(args.context_labels, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            context_labels[obj["sentence_id"]] = int(obj["label"])
    encoder = load_encoder(config.encoder_id, models_dir=config.models_dir)
    pair = experiments.compare_context(golds, context_labels, encoder,
                                       config.train, sentences_by_id)
    out = Path(args.out)
    experiments.write_results_csv(
        out, ["variant"] + REPORT_COLUMNS,
        [[tag] + [getattr(report, c) for c in REPORT_COLUMNS]
         for tag, report in pair.items()],
    )
    experiments.write_manifest(out, "compare-context", config,
                               [args.gold, args.sentences,
                                args.context_labels])
    return 0


def cmd_classify(args, config):
    sentences = ingest_sentences(args.sentences)
    meta = json.loads(
        (Path(args.model_dir) / "config.json").read_text(encoding="utf-8")
    )
    encoder = load_encoder(meta["encoder_id"], models_dir=config.models_dir)
    model = load_model(args.model_dir, encoder)
    predictions = classify_corpus(model, sentences)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_predictions_jsonl(out / "predictions.jsonl", predictions)
    experiments.write_manifest(out, "classify", config, [args.sentences])
    return 0


def cmd_keyness(args, config):
    from .keyness import keyness_chi2, tokenize

    sentences = ingest_sentences(args.sentences)
    predictions = read_predictions_jsonl(args.predictions)
    category = _category(args.category)
    target_docs = []
    reference_docs = []
    for sentence in sentences:
        entry = predictions.get(sentence.sentence_id, {}).get(category)
        if entry is None:
            continue
        tokens = set(tokenize(sentence.text))
        (target_docs if entry["label"] == 1 else reference_docs).append(tokens)
    target_freqs = {}
    reference_freqs = {}
    for docs, freqs in ((target_docs, target_freqs),
                        (reference_docs, reference_freqs)):
        for tokens in docs:
            for token in tokens:
                freqs[token] = freqs.get(token, 0) + 1
    results = keyness_chi2(target_freqs, reference_freqs,
                           len(target_docs), len(reference_docs))
    out = Path(args.out)
    experiments.write_results_csv(
        out, ["term", "chi2", "freq_target", "freq_reference"],
        [[r.term, r.chi2, r.freq_target, r.freq_reference]
         for r in results if r.direction == "target"][:args.top],
    )
    experiments.write_manifest(out, "keyness", config,
                               [args.sentences, args.predictions],
                               extra={"category": category.value,
                                      "top": args.top})
    return 0


def cmd_prevalence(args, config):
    sentences = ingest_sentences(args.sentences)
    predictions = read_predictions_jsonl(args.predictions)
    review_of = {s.sentence_id: s.review_id for s in sentences}
    by_review = {}
    for sentence_id, cats in predictions.items():
        review_id = review_of.get(sentence_id)
        if review_id is None:
            continue
        by_review.setdefault(review_id, {})[sentence_id] = {
            cat: entry["label"] for cat, entry in cats.items()
        }
    reviews = review_prevalence(by_review)
    summary = prevalence_summary(reviews)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_prevalence_csv(out / "prevalence.csv", reviews)
    write_summary_json(out / "summary.json", summary)
    rows = []
    for review in reviews:
        for cat in CATEGORIES:
            value = review.prevalence[cat]
            if value is not None:
                rows.append([cat.value, value])
    experiments.write_results_csv(out, ["category", "share"], rows)
    experiments.write_manifest(out, "prevalence", config,
                               [args.sentences, args.predictions])
    return 0


def cmd_fewshot(args, config):
    from . import fewshot as fs

    sentences, golds, sentences_by_id = _load_corpus(args)
    golds_by_id = {g.sentence_id: g for g in golds}
    categories = (None if args.category is None
                  else [_category(c) for c in args.category])
    specs = fs.default_specs(golds, sentences_by_id, categories=categories)
    if args.stub == "oracle":
        client = fs.oracle_client(golds_by_id, sentences)
    elif args.stub == "always-positive":
        client = fs.ConstantClient(fs.POSITIVE_TOKEN)
    else:
        client = fs.HttpClient(model=config.llm_model)
    result = fs.classify_fewshot(client, specs, sentences,
                                 golds_by_id=golds_by_id)
    out = Path(args.out)
    experiments.write_results_csv(
        out, ["category"] + REPORT_COLUMNS, _report_rows(result.reports)
    )
    experiments.write_manifest(out, "fewshot", config,
                               [args.gold, args.sentences],
                               extra={"parse_failures": result.parse_failures,
                                      "client_calls": result.client_calls})
    return 0


def cmd_serve(args, config):
    from .service import RoundStore, create_app, serve

    sentences = ingest_sentences(args.sentences) if args.sentences else []
    store = RoundStore(db_path=args.db)
    app = create_app(store=store, sentences=sentences)
    serve(app, bind_addr=args.bind)
    return 0


def cmd_report(args, config):
    from .report import render_report

    render_report(args.run_dir, out_dir=args.out)
    return 0


_HANDLERS = {
    "ingest": cmd_ingest,
    "aggregate": cmd_aggregate,
    "split": cmd_split,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "cv": cmd_cv,
    "ablate": cmd_ablate,
    "compare-encoders": cmd_compare_encoders,
    "compare-agreement": cmd_compare_agreement,
    "compare-context": cmd_compare_context,
    "classify": cmd_classify,
    "keyness": cmd_keyness,
    "prevalence": cmd_prevalence,
    "fewshot": cmd_fewshot,
    "serve": cmd_serve,
    "report": cmd_report,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise _UsageError(parser.format_usage())
        config = _load_config(args)
        return _HANDLERS[args.command](args, config)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ReviewlensError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as exc:  # anything unexpected is a runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
