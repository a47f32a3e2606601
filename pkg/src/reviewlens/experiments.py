"""Study orchestration: cross-validation, learning-curve ablation,
encoder comparison, full-agreement training comparison and the
rationale-context comparison.  Every runner is a deterministic function
of (data, config, seed) and can emit a manifest sufficient to re-run it."""

import csv
import dataclasses
import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .categories import CATEGORIES, Category
from .classify import (
    TrainConfig,
    build_context_input,
    load_encoder,
    train_binary,
    train_multilabel,
    train_multitask,
)
from .corpus import filter_full_agreement, stratified_holdout, stratified_kfold
from .errors import DegenerateStratum
from .metrics import evaluate

APPROACHES = ("binary", "multilabel", "multitask")


@dataclass(frozen=True)
class CategorySummary:
    mean: float
    min: float
    max: float

    def __post_init__(self):
        if not self.min <= self.mean <= self.max:
            raise ValueError("summary must satisfy min <= mean <= max")


@dataclass
class CVReport:
    approach: str
    k: int
    seed: int
    per_category: dict  # Category -> CategorySummary (macro F1 over folds)
    fold_reports: list  # per fold: {Category -> EvalReport}

    def to_json(self):
        return {
            "approach": self.approach,
            "k": self.k,
            "seed": self.seed,
            "per_category": {
                c.value: {"mean": s.mean, "min": s.min, "max": s.max}
                for c, s in self.per_category.items()
            },
            "fold_reports": [
                {c.value: r.to_json() for c, r in fold.items()}
                for fold in self.fold_reports
            ],
        }


@dataclass(frozen=True)
class CurvePoint:
    train_size: int
    scores: dict  # Category -> macro F1
    test_ids: frozenset


@dataclass
class LearningCurve:
    points: list  # of CurvePoint, train_size strictly increasing
    seed: int

    def __post_init__(self):
        sizes = [p.train_size for p in self.points]
        if sizes != sorted(set(sizes)):
            raise ValueError("train sizes must be strictly increasing")

    def to_json(self):
        return {
            "seed": self.seed,
            "points": [
                {
                    "train_size": p.train_size,
                    "scores": {c.value: v for c, v in p.scores.items()},
                }
                for p in self.points
            ],
        }


def _train(approach, golds, encoder, config, sentences_by_id, category=None):
    if approach == "binary":
        return train_binary(golds, category, encoder, config, sentences_by_id)
    if approach == "multilabel":
        return train_multilabel(golds, encoder, config, sentences_by_id)
    if approach == "multitask":
        return train_multitask(golds, encoder, config, sentences_by_id)
    raise ValueError(f"unknown approach: {approach}")


def _evaluate_model(model, golds, sentences_by_id, categories, threshold):
    texts = [sentences_by_id[g.sentence_id].text for g in golds]
    probs = model.predict_probs(texts)
    model_cats = model.categories()
    reports = {}
    for cat in categories:
        idx = model_cats.index(cat)
        y = [g.labels[cat] for g in golds]
        p = [1 if probs[i][idx] >= threshold else 0 for i in range(len(golds))]
        reports[cat] = evaluate(y, p)
    return reports


def unstratified_kfold(golds, k=5, seed=42):
    """Round-robin fold assignment after one seeded shuffle; fold sizes
    differ by at most one."""
    ids = sorted(g.sentence_id for g in golds)
    rng = random.Random(seed)
    rng.shuffle(ids)
    folds = [[] for _ in range(k)]
    for i, sid in enumerate(ids):
        folds[i % k].append(sid)
    return [tuple(fold) for fold in folds]


def run_cv(approach, golds, encoder, config, sentences_by_id, k=5,
           categories=None):
    """k-fold cross-validation; each fold serves as validation once.

    Binary uses per-category stratified folds; multi-label and
    multi-task share one unstratified fold assignment (per-category
    stratification is not well-defined for a joint 12-label split).
    """
    categories = list(categories or CATEGORIES)
    golds_by_id = {g.sentence_id: g for g in golds}
    fold_reports = [dict() for _ in range(k)]
    if approach == "binary":
        for cat in categories:
            folds = stratified_kfold(golds, cat, k=k, seed=config.seed).folds
            for i, fold_ids in enumerate(folds):
                held = set(fold_ids)
                train = [g for g in golds if g.sentence_id not in held]
                val = [golds_by_id[sid] for sid in sorted(held)]
                model = _train(approach, train, encoder, config,
                               sentences_by_id, category=cat)
                report = _evaluate_model(model, val, sentences_by_id, [cat],
                                         config.threshold)
                fold_reports[i][cat] = report[cat]
    else:
        folds = unstratified_kfold(golds, k=k, seed=config.seed)
        for i, fold_ids in enumerate(folds):
            held = set(fold_ids)
            train = [g for g in golds if g.sentence_id not in held]
            val = [golds_by_id[sid] for sid in sorted(held)]
            model = _train(approach, train, encoder, config, sentences_by_id)
            fold_reports[i] = _evaluate_model(model, val, sentences_by_id,
                                              categories, config.threshold)
    per_category = {}
    for cat in categories:
        scores = [fold[cat].f1_macro for fold in fold_reports]
        per_category[cat] = CategorySummary(
            mean=sum(scores) / len(scores), min=min(scores), max=max(scores)
        )
    return CVReport(
        approach=approach,
        k=k,
        seed=config.seed,
        per_category=per_category,
        fold_reports=fold_reports,
    )


def run_ablation(train_golds, test_golds, encoder, config, sentences_by_id,
                 chunk=500, approach="multilabel", category=None,
                 categories=None):
    """Learning curve over cumulative chunks of one fixed seeded shuffle.

    Every curve point trains a fresh model on a prefix of the shuffled
    training set and evaluates on the identical held-out test set.
    """
    categories = list(categories or CATEGORIES)
    if approach == "binary" and category is None:
        raise ValueError("binary ablation requires a category")
    ordered = sorted(train_golds, key=lambda g: g.sentence_id)
    rng = random.Random(config.seed)
    rng.shuffle(ordered)
    test_ids = frozenset(g.sentence_id for g in test_golds)
    sizes = list(range(chunk, len(ordered), chunk)) + [len(ordered)]
    points = []
    for size in sizes:
        model = _train(approach, ordered[:size], encoder, config,
                       sentences_by_id, category=category)
        eval_cats = [category] if approach == "binary" else categories
        reports = _evaluate_model(model, test_golds, sentences_by_id,
                                  eval_cats, config.threshold)
        points.append(CurvePoint(
            train_size=size,
            scores={c: r.f1_macro for c, r in reports.items()},
            test_ids=test_ids,
        ))
    return LearningCurve(points=points, seed=config.seed)


def compare_encoders(golds, encoder_ids, config, sentences_by_id,
                     models_dir="models", test_fraction=0.2,
                     categories=None):
    """Multi-label fine-tuning per encoder on one fixed split.

    Returns {encoder_id: {Category: EvalReport, 'average': macro-F1}}.
    """
    categories = list(categories or CATEGORIES)
    golds_by_id = {g.sentence_id: g for g in golds}
    folds = unstratified_kfold(golds, k=max(2, round(1 / test_fraction)),
                               seed=config.seed)
    test_ids = set(folds[0])
    train = [g for g in golds if g.sentence_id not in test_ids]
    test = [golds_by_id[sid] for sid in sorted(test_ids)]
    table = {}
    for encoder_id in encoder_ids:
        encoder = load_encoder(encoder_id, models_dir=models_dir)
        model = train_multilabel(train, encoder, config, sentences_by_id)
        reports = _evaluate_model(model, test, sentences_by_id, categories,
                                  config.threshold)
        average = sum(r.f1_macro for r in reports.values()) / len(reports)
        table[encoder_id] = {"reports": reports, "average": average}
    return table


def compare_training_sets(golds, category, encoder, config, sentences_by_id,
                          test_fraction=0.2):
    """Majority-label training vs full-agreement-only training, both
    evaluated on the identical all-sentences test set."""
    split = stratified_holdout(golds, category, test_fraction,
                               seed=config.seed)
    golds_by_id = {g.sentence_id: g for g in golds}
    train = [golds_by_id[sid] for sid in split.train_ids]
    test = [golds_by_id[sid] for sid in split.test_ids]
    full_train = filter_full_agreement(train, category)
    if len({g.labels[category] for g in full_train}) < 2:
        raise DegenerateStratum(
            f"full-agreement subset for {category.value} is one-class"
        )
    out = {}
    for tag, subset in (("majority", train), ("full_agreement", full_train)):
        model = train_binary(subset, category, encoder, config,
                             sentences_by_id)
        out[tag] = _evaluate_model(model, test, sentences_by_id, [category],
                                   config.threshold)[category]
    return out


def compare_context(golds, context_labels, encoder, config, sentences_by_id,
                    window=1, test_fraction=0.2):
    """Rationale on the target sentence vs rationale-and-context on a
    context-window input; combined label = target OR context."""
    from .corpus import GoldLabel

    cat = Category.Rationale
    split = stratified_holdout(golds, cat, test_fraction, seed=config.seed)
    golds_by_id = {g.sentence_id: g for g in golds}

    by_review = {}
    for sentence in sentences_by_id.values():
        by_review.setdefault(sentence.review_id, []).append(sentence)
    for sentences in by_review.values():
        sentences.sort(key=lambda s: s.position)
    context_sentences = {}
    for review_sentences in by_review.values():
        for i, sentence in enumerate(review_sentences):
            text = build_context_input(review_sentences, i, window=window)
            context_sentences[sentence.sentence_id] = dataclasses.replace(
                sentence, text=text
            )

    combined_golds_by_id = {}
    for g in golds:
        combined = g.labels[cat] or int(context_labels.get(g.sentence_id, 0))
        labels = dict(g.labels)
        labels[cat] = combined
        if combined and not (labels[Category.Positive]
                             or labels[Category.Negative]):
            labels[Category.Positive] = 1  # keep the record gate-consistent
        combined_golds_by_id[g.sentence_id] = GoldLabel(
            sentence_id=g.sentence_id,
            labels=labels,
            agreement=g.agreement,
            n_annotators=g.n_annotators,
        )

    out = {}
    variants = (
        ("target_only", golds_by_id, sentences_by_id),
        ("with_context", combined_golds_by_id, context_sentences),
    )
    for tag, gold_map, sentence_map in variants:
        train = [gold_map[sid] for sid in split.train_ids]
        test = [gold_map[sid] for sid in split.test_ids]
        model = train_binary(train, cat, encoder, config, sentence_map)
        out[tag] = _evaluate_model(model, test, sentence_map, [cat],
                                   config.threshold)[cat]
    return out


def file_hashes(paths):
    hashes = {}
    for path in paths:
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        hashes[str(path)] = digest
    return hashes


def write_manifest(out_dir, command, config, input_paths, extra=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "seed": config.seed,
        "config": config.to_json(),
        "inputs": file_hashes(input_paths),
    }
    manifest.update(extra or {})
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def write_results_csv(out_dir, header, rows):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "results.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                f"{v:.6f}" if isinstance(v, float) else v for v in row
            ])
    return path


def cv_results_rows(report):
    rows = []
    for cat, summary in report.per_category.items():
        rows.append([cat.value, summary.mean, summary.min, summary.max])
    return rows


def curve_results_rows(curve):
    rows = []
    for point in curve.points:
        for cat, score in point.scores.items():
            rows.append([point.train_size, cat.value, score])
    return rows
