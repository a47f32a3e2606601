"""Shared synthetic fixtures for the test suite."""

import random

from reviewlens.categories import CATEGORIES, Category
from reviewlens.corpus import (
    AgreementLevel,
    AnnotationRecord,
    GoldLabel,
    Sentence,
    TextBox,
)

FILLER = [
    "the", "project", "plan", "research", "team", "work", "study",
    "analysis", "data", "results", "approach", "paper", "field",
    "grant", "review", "science", "effort", "idea", "goal", "topic",
]

# keyword injected three times keeps the synthetic task cleanly separable
KEYWORDS = {Category.Positive: "superb", Category.Negative: "flawed"}


def synthetic_corpus(n=400, categories=(Category.Positive,), seed=0,
                     sentences_per_review=10):
    """Keyword-separable corpus: label c = 1 iff its keyword was injected.

    Keywords are injected independently per category with probability 1/2,
    three times per sentence, at random positions.
    """
    rng = random.Random(seed)
    sentences = []
    golds = []
    for i in range(n):
        words = rng.choices(FILLER, k=rng.randint(4, 8))
        labels = {c: 0 for c in CATEGORIES}
        for cat in categories:
            if rng.random() < 0.5:
                labels[cat] = 1
                for _ in range(3):
                    words.insert(rng.randrange(len(words) + 1), KEYWORDS[cat])
        sid = f"syn{seed}-{i}"
        sentences.append(
            Sentence(
                sentence_id=sid,
                review_id=f"rev{seed}-{i // sentences_per_review}",
                position=i % sentences_per_review,
                text=" ".join(words),
                text_box=TextBox.OverallComment,
            )
        )
        golds.append(
            GoldLabel(
                sentence_id=sid,
                labels=labels,
                agreement={c: AgreementLevel.Full for c in CATEGORIES},
                n_annotators=3,
            )
        )
    return sentences, golds


def synthetic_multilabel_corpus(n=400, seed=0, sentences_per_review=10):
    """Corpus with two independent keywords driving all 12 outputs.

    Even-index categories follow keyword A, odd-index categories keyword
    B, so every output node carries signal (as in real data, where no
    category is constant) while only two independent keywords exist.
    Positive follows A and Negative follows B.
    """
    rng = random.Random(seed)
    kw_a = KEYWORDS[Category.Positive]
    kw_b = KEYWORDS[Category.Negative]
    sentences = []
    golds = []
    for i in range(n):
        words = rng.choices(FILLER, k=rng.randint(4, 8))
        a = rng.random() < 0.5
        b = rng.random() < 0.5
        for present, kw in ((a, kw_a), (b, kw_b)):
            if present:
                for _ in range(3):
                    words.insert(rng.randrange(len(words) + 1), kw)
        labels = {
            c: int(a) if k % 2 == 0 else int(b)
            for k, c in enumerate(CATEGORIES)
        }
        sid = f"synml{seed}-{i}"
        sentences.append(
            Sentence(
                sentence_id=sid,
                review_id=f"revml{seed}-{i // sentences_per_review}",
                position=i % sentences_per_review,
                text=" ".join(words),
                text_box=TextBox.OverallComment,
            )
        )
        golds.append(
            GoldLabel(
                sentence_id=sid,
                labels=labels,
                agreement={c: AgreementLevel.Full for c in CATEGORIES},
                n_annotators=3,
            )
        )
    return sentences, golds


# documented test configuration for the tiny encoder: learning rate x10
# and head init scale /10 relative to TrainConfig defaults, which are
# tuned for full-size encoders
def tiny_train_config(**overrides):
    from reviewlens.classify import TrainConfig

    base = dict(learning_rate=2e-4, head_init_scale=0.002, seed=42)
    base.update(overrides)
    return TrainConfig(**base)


def make_record(sentence_id, annotator_id, round_id="r1", positives=(),
                rationale_context=None):
    labels = {c: 1 if c in positives else 0 for c in CATEGORIES}
    return AnnotationRecord(
        sentence_id=sentence_id,
        annotator_id=annotator_id,
        round_id=round_id,
        labels=labels,
        rationale_context=rationale_context,
    )
