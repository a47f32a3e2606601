"""Explainability: tokenization, collocation detection and chi-squared
keyness ranking between two sentence groups."""

import math
import re
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyGroup

_WORD_RE = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")

# Placeholder forms reduced to a bare lowercase token before word matching.
_PLACEHOLDER_MAP = {
    "[UNK]": "unk",
    "REMOVE_DISCIPLINE": "remove_discipline",
    "REMOVE_INSTITUTION": "remove_institution",
}


def tokenize(text):
    """Lowercased word tokens; punctuation stripped; placeholders kept
    as single tokens."""
    for raw, repl in _PLACEHOLDER_MAP.items():
        text = text.replace(raw, f" {repl} ")
    text = text.lower()
    return [m.group(0) for m in re.finditer(r"[a-z0-9_]+(?:[-'][a-z0-9_]+)*", text)]


@dataclass(frozen=True)
class MultiwordExpression:
    tokens: tuple
    score: float
    count: int

    @property
    def joined(self):
        return "_".join(self.tokens)


def _ngram_score(count, unigram_counts, total, ngram):
    """z-scored log-odds of observed vs expected adjacent co-occurrence."""
    expected = total
    for tok in ngram:
        expected *= unigram_counts[tok] / total
    if expected <= 0:
        return 0.0
    lam = math.log(count / expected) if count > 0 else 0.0
    # delta-method standard error of the log count ratio
    se = math.sqrt(1.0 / count + 1.0 / expected)
    return lam / se


def detect_collocations(token_streams, min_count=10, z_threshold=3.0):
    """Bigrams/trigrams over-adjacent relative to independence.

    Returns expressions sorted by score descending. Use
    rewrite_collocations() to fold them back into token streams.
    """
    streams = [list(s) for s in token_streams]
    unigrams = Counter(tok for s in streams for tok in s)
    total = sum(unigrams.values())
    if total == 0:
        return []
    ngram_counts = Counter()
    for stream in streams:
        for i in range(len(stream) - 1):
            ngram_counts[tuple(stream[i:i + 2])] += 1
        for i in range(len(stream) - 2):
            ngram_counts[tuple(stream[i:i + 3])] += 1
    results = []
    for ngram, count in ngram_counts.items():
        if count < min_count:
            continue
        score = _ngram_score(count, unigrams, total, ngram)
        if score >= z_threshold:
            results.append(
                MultiwordExpression(tokens=ngram, score=score, count=count)
            )
    results.sort(key=lambda m: (-m.score, -m.count, m.tokens))
    return results


def rewrite_collocations(stream, expressions):
    """Greedy left-to-right rewrite of detected MWEs into single tokens.

    Longer expressions win at equal start positions.
    """
    by_prefix = {}
    for expr in expressions:
        by_prefix.setdefault(expr.tokens[0], []).append(expr.tokens)
    for prefix in by_prefix:
        by_prefix[prefix].sort(key=len, reverse=True)
    out = []
    i = 0
    stream = list(stream)
    while i < len(stream):
        matched = None
        for tokens in by_prefix.get(stream[i], ()):
            if tuple(stream[i:i + len(tokens)]) == tokens:
                matched = tokens
                break
        if matched:
            out.append("_".join(matched))
            i += len(matched)
        else:
            out.append(stream[i])
            i += 1
    return out


@dataclass(frozen=True)
class KeynessResult:
    term: str
    chi2: float
    direction: str  # "target" | "reference"
    freq_target: int
    freq_reference: int


def chi2_2x2(a, b, c, d, yates=False):
    """Chi-squared statistic of a 2x2 contingency table."""
    n = a + b + c + d
    denom = (a + b) * (c + d) * (a + c) * (b + d)
    if denom == 0:
        return 0.0
    diff = abs(a * d - b * c)
    if yates:
        diff = max(diff - n / 2, 0)
    return n * diff * diff / denom


def keyness_chi2(target_doc_freqs, reference_doc_freqs, n_target, n_reference,
                 yates=False):
    """Per-term 2x2 chi-squared keyness between two document groups.

    Frequencies are document counts (documents containing the term).
    Results are sorted descending by chi2 among target-direction terms,
    then reference-direction terms; ties break by higher target frequency,
    then lexicographically.
    """
    if n_target <= 0 or n_reference <= 0:
        raise EmptyGroup("both document groups must be non-empty")
    terms = set(target_doc_freqs) | set(reference_doc_freqs)
    results = []
    for term in terms:
        a = target_doc_freqs.get(term, 0)
        c = reference_doc_freqs.get(term, 0)
        if a > n_target or c > n_reference:
            raise ValueError(f"document frequency exceeds group size: {term}")
        b = n_target - a
        d = n_reference - c
        stat = chi2_2x2(a, b, c, d, yates=yates)
        direction = "target" if a / n_target > c / n_reference else "reference"
        results.append(
            KeynessResult(term=term, chi2=stat, direction=direction,
                          freq_target=a, freq_reference=c)
        )
    results.sort(
        key=lambda r: (r.direction != "target", -r.chi2, -r.freq_target, r.term)
    )
    return results


def top_terms(results, k=25):
    """First k target-direction terms of a ranked result list."""
    return [r.term for r in results if r.direction == "target"][:k]
