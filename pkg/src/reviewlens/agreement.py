"""Inter-annotator agreement, prevalence and difficulty-survey statistics."""

import csv
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .categories import CATEGORIES, Category
from .errors import InsufficientAnnotators, OutOfRangeScore, ZeroVariance


@dataclass(frozen=True)
class CategoryAgreement:
    full_agreement_rate: float
    prevalence_majority: float
    prevalence_full: float


@dataclass
class AgreementReport:
    per_category: dict  # Category -> CategoryAgreement
    per_round: dict  # round_id -> {Category -> full agreement rate}
    n_sentences: int

    def to_json(self):
        return {
            "n_sentences": self.n_sentences,
            "per_category": {
                c.value: {
                    "full_agreement_rate": a.full_agreement_rate,
                    "prevalence_majority": a.prevalence_majority,
                    "prevalence_full": a.prevalence_full,
                }
                for c, a in self.per_category.items()
            },
            "per_round": {
                rid: {c.value: rate for c, rate in rates.items()}
                for rid, rates in self.per_round.items()
            },
        }

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["category", "full_agreement_rate", "prevalence_majority",
                 "prevalence_full"]
            )
            for cat, a in self.per_category.items():
                writer.writerow(
                    [cat.value, f"{a.full_agreement_rate:.6f}",
                     f"{a.prevalence_majority:.6f}", f"{a.prevalence_full:.6f}"]
                )


def agreement_stats(records, panel_size=3, quorum=2):
    """Full-agreement rates and prevalence per category.

    Unanimity counts either value (all-1 or all-0). Each sentence must
    carry exactly `panel_size` records.
    """
    by_sentence = defaultdict(list)
    for record in records:
        by_sentence[record.sentence_id].append(record)
    for sid, recs in by_sentence.items():
        if len(recs) != panel_size:
            raise InsufficientAnnotators(
                f"sentence {sid} has {len(recs)} records, expected {panel_size}"
            )
    n = len(by_sentence)
    per_category = {}
    for cat in CATEGORIES:
        full = majority_pos = full_pos = 0
        for recs in by_sentence.values():
            votes = [r.labels[cat] for r in recs]
            ones = sum(votes)
            if ones in (0, len(votes)):
                full += 1
                if ones:
                    full_pos += 1
            if ones >= quorum:
                majority_pos += 1
        per_category[cat] = CategoryAgreement(
            full_agreement_rate=full / n if n else 0.0,
            prevalence_majority=majority_pos / n if n else 0.0,
            prevalence_full=full_pos / n if n else 0.0,
        )
    per_round = {}
    rounds = defaultdict(lambda: defaultdict(list))
    for record in records:
        rounds[record.round_id][record.sentence_id].append(record)
    for rid, sentences in sorted(rounds.items()):
        complete = [recs for recs in sentences.values()
                    if len(recs) == panel_size]
        rates = {}
        for cat in CATEGORIES:
            full = sum(
                1 for recs in complete
                if sum(r.labels[cat] for r in recs) in (0, len(recs))
            )
            rates[cat] = full / len(complete) if complete else 0.0
        per_round[rid] = rates
    return AgreementReport(per_category=per_category, per_round=per_round,
                           n_sentences=n)


def category_count_distribution(golds):
    """Histogram over the number of categories per sentence (0..12)."""
    if not golds:
        raise ValueError("empty gold set")
    hist = Counter()
    for gold in golds:
        hist[sum(gold.labels.values())] += 1
    return {k: hist.get(k, 0) for k in range(13)}


def prevalence_shares(golds):
    if not golds:
        raise ValueError("empty gold set")
    n = len(golds)
    return {
        cat: sum(g.labels[cat] for g in golds) / n for cat in CATEGORIES
    }


def pearson_r(xs, ys):
    """Product-moment correlation."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need two equal-length series of length >= 2")
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("an input series is constant")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


@dataclass
class DifficultySurvey:
    scores: dict  # (annotator_id, Category) -> int in 1..10
    means: dict = field(default_factory=dict)  # Category -> float

    def __post_init__(self):
        by_cat = defaultdict(list)
        for (_, cat), score in self.scores.items():
            by_cat[cat].append(score)
        self.means = {
            cat: sum(v) / len(v) for cat, v in by_cat.items()
        }

    def to_json(self):
        return {
            "means": {c.value: m for c, m in self.means.items()},
            "scores": [
                {"annotator_id": aid, "category": c.value, "score": s}
                for (aid, c), s in sorted(self.scores.items(),
                                          key=lambda kv: (kv[0][0], kv[0][1].value))
            ],
        }


def ingest_survey(path):
    """Read survey.csv with header annotator_id,category,score."""
    scores = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            score = int(row["score"])
            if not 1 <= score <= 10:
                raise OutOfRangeScore(
                    f"score {score} for {row['annotator_id']}/{row['category']}"
                )
            cat = Category(row["category"])
            scores[(row["annotator_id"], cat)] = score
    return DifficultySurvey(scores=scores)
