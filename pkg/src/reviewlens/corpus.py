"""Data model, ingestion, normalization, segmentation, label aggregation
and dataset splitting."""

import html
import json
import random
import re
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

from .categories import CATEGORIES, Category
from .errors import (
    DegenerateStratum,
    DuplicateRecord,
    GatingViolation,
    InsufficientAnnotators,
    InsufficientPopulation,
    MalformedRecord,
)


class TextBox(Enum):
    TrackRecord = "track_record"
    Relevance = "relevance"
    Suitability = "suitability"
    Feasibility = "feasibility"
    OverallComment = "overall_comment"


class ResearchDomain(Enum):
    SSH = "SSH"
    MINT = "MINT"
    LS = "LS"


class AgreementLevel(Enum):
    Full = "full"
    Majority = "majority"
    NoAgreement = "none"


@dataclass(frozen=True)
class Sentence:
    sentence_id: str
    review_id: str
    position: int
    text: str
    text_box: TextBox
    research_domain: ResearchDomain = ResearchDomain.MINT
    language: str = "en"

    def to_json(self):
        return {
            "sentence_id": self.sentence_id,
            "review_id": self.review_id,
            "position": self.position,
            "text": self.text,
            "text_box": self.text_box.value,
            "research_domain": self.research_domain.value,
            "language": self.language,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            sentence_id=obj["sentence_id"],
            review_id=obj["review_id"],
            position=int(obj["position"]),
            text=obj["text"],
            text_box=TextBox(obj["text_box"]),
            research_domain=ResearchDomain(obj.get("research_domain", "MINT")),
            language=obj.get("language", "en"),
        )


@dataclass(frozen=True)
class AnnotationRecord:
    sentence_id: str
    annotator_id: str
    round_id: str
    labels: dict  # Category -> 0|1, covers all 12
    rationale_context: int | None = None

    def __post_init__(self):
        missing = [c for c in CATEGORIES if c not in self.labels]
        if missing:
            raise MalformedRecord(
                f"labels missing categories: {[c.value for c in missing]}"
            )
        if self.labels[Category.Rationale] == 1 and not (
            self.labels[Category.Positive] == 1 or self.labels[Category.Negative] == 1
        ):
            raise GatingViolation(
                f"sentence {self.sentence_id}: rationale without a positive "
                "or negative statement"
            )

    def to_json(self):
        obj = {
            "sentence_id": self.sentence_id,
            "annotator_id": self.annotator_id,
            "round_id": self.round_id,
            "labels": {c.value: self.labels[c] for c in CATEGORIES},
        }
        if self.rationale_context is not None:
            obj["rationale_context"] = self.rationale_context
        return obj

    @classmethod
    def from_json(cls, obj):
        labels = {Category(k): int(v) for k, v in obj["labels"].items()}
        rc = obj.get("rationale_context")
        return cls(
            sentence_id=obj["sentence_id"],
            annotator_id=obj["annotator_id"],
            round_id=obj["round_id"],
            labels=labels,
            rationale_context=None if rc is None else int(rc),
        )


@dataclass(frozen=True)
class GoldLabel:
    sentence_id: str
    labels: dict  # Category -> 0|1
    agreement: dict  # Category -> AgreementLevel
    n_annotators: int

    def to_json(self):
        return {
            "sentence_id": self.sentence_id,
            "labels": {c.value: self.labels[c] for c in CATEGORIES},
            "agreement": {c.value: self.agreement[c].value for c in CATEGORIES},
            "n_annotators": self.n_annotators,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            sentence_id=obj["sentence_id"],
            labels={Category(k): int(v) for k, v in obj["labels"].items()},
            agreement={
                Category(k): AgreementLevel(v) for k, v in obj["agreement"].items()
            },
            n_annotators=int(obj.get("n_annotators", 0)),
        )


@dataclass(frozen=True)
class Split:
    train_ids: frozenset
    test_ids: frozenset
    seed: int
    strat_category: Category
    folds: tuple = ()  # tuple of frozensets partitioning train_ids


# --- text normalization ------------------------------------------------

# Anonymization placeholders kept verbatim as single tokens.
PLACEHOLDERS = ("[UNK]", "REMOVE_DISCIPLINE", "REMOVE_INSTITUTION")

_TAG_RE = re.compile(r"<[^<>]+>")
_WS_RE = re.compile(r"\s+")


def normalize_text(raw):
    """Strip HTML tags and collapse whitespace; total and idempotent."""
    text = _TAG_RE.sub(" ", raw)
    text = html.unescape(text)
    text = _WS_RE.sub(" ", text)
    return text.strip()


# --- sentence segmentation ---------------------------------------------

# Tokens after which a period does not end a sentence.
ABBREVIATIONS = {
    "dr", "prof", "mr", "mrs", "ms", "e.g", "i.e", "al", "etc", "cf",
    "vs", "fig", "eq", "no", "vol", "pp", "approx", "ca", "resp",
    "univ", "dept", "ref",
}

_BOUNDARY_RE = re.compile(r"([.!?]+)(\s+)")


def _is_abbreviation(prefix):
    m = re.search(r"([A-Za-z][A-Za-z.]*)$", prefix)
    if not m:
        return False
    word = m.group(1).lower().rstrip(".")
    return word in ABBREVIATIONS or word.rstrip(".") in ABBREVIATIONS


def segment_review(review_text, review_id, text_box,
                   research_domain=ResearchDomain.MINT, language="en"):
    """Split a normalized text-box comment into ordered Sentence values."""
    text = review_text.strip()
    if not text:
        return []
    pieces = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end(1)
        nxt = text[m.end():m.end() + 1]
        if _is_abbreviation(text[start:m.start(1)]):
            continue
        # only break before something that can open a sentence
        if nxt and not (nxt.isupper() or nxt.isdigit() or nxt in "\"'([“"):
            continue
        pieces.append(text[start:end].strip())
        start = m.end()
    tail = text[start:].strip()
    if tail:
        pieces.append(tail)
    return [
        Sentence(
            sentence_id=f"{review_id}:{text_box.value}:{i}",
            review_id=review_id,
            position=i,
            text=piece,
            text_box=text_box,
            research_domain=research_domain,
            language=language,
        )
        for i, piece in enumerate(pieces)
    ]


# --- JSONL ingestion ----------------------------------------------------

def ingest_annotations(path):
    """Read annotations.jsonl, validating gating and uniqueness."""
    records = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(str(exc), line_no=line_no) from exc
            try:
                record = AnnotationRecord.from_json(obj)
            except GatingViolation:
                raise
            except (KeyError, ValueError, TypeError) as exc:
                raise MalformedRecord(str(exc), line_no=line_no) from exc
            key = (record.sentence_id, record.annotator_id, record.round_id)
            if key in seen:
                raise DuplicateRecord(f"duplicate record {key} at line {line_no}")
            seen.add(key)
            records.append(record)
    return records


def ingest_sentences(path):
    sentences = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                sentence = Sentence.from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise MalformedRecord(str(exc), line_no=line_no) from exc
            key = (sentence.review_id, sentence.position, sentence.text_box)
            if key in seen:
                raise DuplicateRecord(f"duplicate sentence {key} at line {line_no}")
            seen.add(key)
            sentences.append(sentence)
    return sentences


def ingest_gold(path):
    golds = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                golds.append(GoldLabel.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise MalformedRecord(str(exc), line_no=line_no) from exc
    return golds


def write_jsonl(path, items):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for item in items:
            obj = item.to_json() if hasattr(item, "to_json") else item
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


# --- majority aggregation ----------------------------------------------

def aggregate_majority(records, quorum=2):
    """Consensus labels: 1 iff at least `quorum` annotators voted 1.

    Rationale is aggregated independently of Positive/Negative; gating is
    enforced at annotation entry and at prevalence reporting instead.
    """
    if quorum < 1:
        raise ValueError("quorum must be >= 1")
    by_sentence = defaultdict(list)
    for record in records:
        by_sentence[record.sentence_id].append(record)
    golds = []
    for sentence_id in sorted(by_sentence):
        recs = by_sentence[sentence_id]
        if len(recs) < quorum:
            raise InsufficientAnnotators(
                f"sentence {sentence_id} has {len(recs)} records, quorum {quorum}"
            )
        labels = {}
        agreement = {}
        for cat in CATEGORIES:
            votes = [r.labels[cat] for r in recs]
            ones = sum(votes)
            labels[cat] = 1 if ones >= quorum else 0
            if ones == 0 or ones == len(votes):
                agreement[cat] = AgreementLevel.Full
            elif max(ones, len(votes) - ones) * 2 > len(votes):
                agreement[cat] = AgreementLevel.Majority
            else:
                agreement[cat] = AgreementLevel.NoAgreement
        golds.append(
            GoldLabel(
                sentence_id=sentence_id,
                labels=labels,
                agreement=agreement,
                n_annotators=len(recs),
            )
        )
    return golds


def filter_full_agreement(golds, category):
    """Sentences where all annotators agreed on `category` (either value)."""
    return [g for g in golds if g.agreement[category] == AgreementLevel.Full]


# --- splitting ----------------------------------------------------------

def _largest_remainder(counts, total):
    """Apportion `total` across strata proportionally to `counts`."""
    n = sum(counts)
    quotas = [c * total / n for c in counts]
    alloc = [int(q) for q in quotas]
    leftover = total - sum(alloc)
    order = sorted(range(len(counts)), key=lambda i: quotas[i] - alloc[i],
                   reverse=True)
    for i in order[:leftover]:
        alloc[i] += 1
    return alloc


def stratified_holdout(golds, category, test_fraction, seed=42):
    """Deterministic stratified train/test split on one category."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    pos = sorted(g.sentence_id for g in golds if g.labels[category] == 1)
    neg = sorted(g.sentence_id for g in golds if g.labels[category] == 0)
    if not pos or not neg:
        raise DegenerateStratum(
            f"category {category.value} has an empty class"
        )
    n = len(pos) + len(neg)
    test_total = round(n * test_fraction)
    test_pos, test_neg = _largest_remainder([len(pos), len(neg)], test_total)
    rng = random.Random(seed)
    rng.shuffle(pos)
    rng.shuffle(neg)
    test_ids = frozenset(pos[:test_pos] + neg[:test_neg])
    train_ids = frozenset(pos[test_pos:] + neg[test_neg:])
    return Split(train_ids=train_ids, test_ids=test_ids, seed=seed,
                 strat_category=category)


def stratified_kfold(golds, category, k=5, seed=42):
    """k disjoint stratified folds over the full id set of `golds`."""
    if k < 2:
        raise ValueError("k must be >= 2")
    pos = sorted(g.sentence_id for g in golds if g.labels[category] == 1)
    neg = sorted(g.sentence_id for g in golds if g.labels[category] == 0)
    if len(pos) < k or len(neg) < k:
        raise DegenerateStratum(
            f"category {category.value}: each class needs >= {k} members"
        )
    rng = random.Random(seed)
    rng.shuffle(pos)
    rng.shuffle(neg)
    folds = [[] for _ in range(k)]
    # continuous round-robin keeps fold sizes and per-class counts within 1
    for i, sid in enumerate(pos + neg):
        folds[i % k].append(sid)
    all_ids = frozenset(pos + neg)
    return Split(
        train_ids=all_ids,
        test_ids=frozenset(),
        seed=seed,
        strat_category=category,
        folds=tuple(frozenset(f) for f in folds),
    )


# --- round sampling -----------------------------------------------------

class SamplingMode(Enum):
    Random = "random"
    StratifiedByTextBox = "stratified_by_text_box"


@dataclass(frozen=True)
class SamplingSpec:
    mode: SamplingMode
    n_total: int | None = None
    n_per_box: int | None = None
    seed: int = 42


def sample_round(sentences, spec):
    """Sample sentences for an annotation round without replacement."""
    rng = random.Random(spec.seed)
    if spec.mode is SamplingMode.Random:
        if spec.n_total is None:
            raise ValueError("Random mode requires n_total")
        if spec.n_total > len(sentences):
            raise InsufficientPopulation(
                f"requested {spec.n_total}, have {len(sentences)}"
            )
        return rng.sample(list(sentences), spec.n_total)
    if spec.n_per_box is None:
        raise ValueError("StratifiedByTextBox mode requires n_per_box")
    by_box = defaultdict(list)
    for s in sentences:
        by_box[s.text_box].append(s)
    sampled = []
    for box in TextBox:
        pool = by_box.get(box, [])
        if len(pool) < spec.n_per_box:
            raise InsufficientPopulation(
                f"text box {box.value} has {len(pool)} sentences, "
                f"need {spec.n_per_box}"
            )
        sampled.extend(rng.sample(pool, spec.n_per_box))
    return sampled
