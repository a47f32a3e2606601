"""Review-level prevalence, corpus summaries and annotated-vs-predicted
correspondence.

Rationale prevalence is conditional: only sentences predicted Positive or
Negative keep their Rationale prediction, and only those sentences enter
the denominator. Reviews without any such sentence have an undefined
Rationale prevalence, excluded from means and histograms.
"""

import csv
import json
from collections import defaultdict
from dataclasses import dataclass

from .categories import CATEGORIES, Category
from .errors import MissingCategoryPrediction
from .agreement import pearson_r


@dataclass(frozen=True)
class ReviewPrevalence:
    review_id: str
    n_sentences: int
    prevalence: dict  # Category -> float; Rationale may be None (undefined)
    n_posneg: int


def review_prevalence(predictions_by_review):
    """Per-review prevalence from {review_id: {sentence_id: {Category: 0|1}}}.

    Empty reviews are skipped.
    """
    out = []
    for review_id in sorted(predictions_by_review):
        sentences = predictions_by_review[review_id]
        if not sentences:
            continue
        n = len(sentences)
        for sid, labels in sentences.items():
            missing = [c for c in CATEGORIES if c not in labels]
            if missing:
                raise MissingCategoryPrediction(
                    f"sentence {sid} lacks {[c.value for c in missing]}"
                )
        prevalence = {}
        for cat in CATEGORIES:
            if cat is Category.Rationale:
                continue
            prevalence[cat] = sum(
                labels[cat] for labels in sentences.values()
            ) / n
        posneg = [
            labels for labels in sentences.values()
            if labels[Category.Positive] == 1 or labels[Category.Negative] == 1
        ]
        if posneg:
            prevalence[Category.Rationale] = sum(
                labels[Category.Rationale] for labels in posneg
            ) / len(posneg)
        else:
            prevalence[Category.Rationale] = None
        out.append(
            ReviewPrevalence(
                review_id=review_id,
                n_sentences=n,
                prevalence=prevalence,
                n_posneg=len(posneg),
            )
        )
    return out


@dataclass
class PrevalenceSummary:
    means: dict  # Category -> float
    histograms: dict  # Category -> list of bin counts
    bin_width: float
    tail_counts: dict  # Category -> {"below": int, "above": int}
    low_threshold: float
    high_threshold: float
    n_reviews: int

    def to_json(self):
        return {
            "n_reviews": self.n_reviews,
            "bin_width": self.bin_width,
            "low_threshold": self.low_threshold,
            "high_threshold": self.high_threshold,
            "means": {c.value: m for c, m in self.means.items()},
            "histograms": {c.value: h for c, h in self.histograms.items()},
            "tail_counts": {c.value: t for c, t in self.tail_counts.items()},
        }


def prevalence_summary(reviews, bin_width=0.05, low_threshold=0.05,
                       high_threshold=0.50):
    """Means, fixed-width histograms and tail counts over reviews.

    Rationale aggregates only reviews where its prevalence is defined.
    """
    if not reviews:
        raise ValueError("no reviews")
    n_bins = int(round(1.0 / bin_width))
    means = {}
    histograms = {}
    tails = {}
    for cat in CATEGORIES:
        values = [
            r.prevalence[cat] for r in reviews if r.prevalence[cat] is not None
        ]
        means[cat] = sum(values) / len(values) if values else None
        hist = [0] * n_bins
        for v in values:
            idx = min(int(v / bin_width), n_bins - 1)
            hist[idx] += 1
        histograms[cat] = hist
        tails[cat] = {
            "below": sum(1 for v in values if v < low_threshold),
            "above": sum(1 for v in values if v > high_threshold),
        }
    return PrevalenceSummary(
        means=means,
        histograms=histograms,
        bin_width=bin_width,
        tail_counts=tails,
        low_threshold=low_threshold,
        high_threshold=high_threshold,
        n_reviews=len(reviews),
    )


def compare_annotated_vs_predicted(gold_shares, predicted_shares):
    """Pearson r over the 12 paired category shares."""
    missing = [c for c in CATEGORIES
               if c not in gold_shares or c not in predicted_shares]
    if missing:
        raise MissingCategoryPrediction(
            f"shares missing categories: {[c.value for c in missing]}"
        )
    xs = [gold_shares[c] for c in CATEGORIES]
    ys = [predicted_shares[c] for c in CATEGORIES]
    return pearson_r(xs, ys)


def write_prevalence_csv(path, reviews):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["review_id", "n_sentences"]
            + [c.value for c in CATEGORIES]
            + ["n_posneg"]
        )
        for r in reviews:
            row = [r.review_id, r.n_sentences]
            for cat in CATEGORIES:
                v = r.prevalence[cat]
                row.append("" if v is None else f"{v:.6f}")
            row.append(r.n_posneg)
            writer.writerow(row)


def write_summary_json(path, summary):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary.to_json(), fh, indent=2)
