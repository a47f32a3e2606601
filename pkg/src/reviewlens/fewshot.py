"""Few-shot chat-prompt classification baseline: prompt construction,
completion parsing and batch evaluation against a pluggable local
text-generation endpoint."""

import hashlib
import json
import os
from dataclasses import dataclass, field

from .categories import CATEGORIES, Category
from .errors import ClientUnavailable, ParseFailure
from .metrics import evaluate

POSITIVE_TOKEN = "1"
NEGATIVE_TOKEN = "0"

DEFAULT_MODEL = "Meta-Llama-3-8B-Instruct"
LLM_URL_ENV = "REVIEWLENS_LLM_URL"


@dataclass(frozen=True)
class CategoryPromptSpec:
    category: Category
    description: str
    positive_example: str  # full-agreement sentence showing the category
    negative_example: str  # full-agreement sentence showing no category

    def __post_init__(self):
        if not self.description:
            raise ValueError("description must be non-empty")
        if self.positive_example == self.negative_example:
            raise ValueError("examples must be distinct")


@dataclass(frozen=True)
class PromptMessages:
    turns: tuple  # of (role, content)

    def __post_init__(self):
        roles = [role for role, _ in self.turns]
        if roles[0] != "system":
            raise ValueError("first turn must be system")
        for i, role in enumerate(roles[1:]):
            expected = "user" if i % 2 == 0 else "assistant"
            if role != expected:
                raise ValueError(
                    f"turn {i + 1}: expected {expected}, got {role}"
                )
        if roles[-1] != "user":
            raise ValueError("final turn must be the user turn to classify")

    def to_json(self):
        return [{"role": role, "content": content}
                for role, content in self.turns]

    def serialize(self):
        return json.dumps(self.to_json(), ensure_ascii=False, indent=2)


def default_specs(golds, sentences_by_id, categories=None):
    """One prompt spec per category from a gold-labeled corpus.

    The positive example is the first full-agreement sentence carrying
    the category; the negative example is the first full-agreement
    sentence carrying no category at all.  "First" follows sentence_id
    order so spec construction is deterministic.
    """
    from .corpus import AgreementLevel

    ordered = sorted(golds, key=lambda g: g.sentence_id)
    negative = None
    for g in ordered:
        if (not any(g.labels.values())
                and all(a is AgreementLevel.Full
                        for a in g.agreement.values())):
            negative = sentences_by_id[g.sentence_id].text
            break
    if negative is None:
        raise ValueError("no full-agreement no-category sentence available")
    specs = {}
    for cat in (CATEGORIES if categories is None else categories):
        positive = None
        for g in ordered:
            if (g.labels[cat] == 1
                    and g.agreement[cat] is AgreementLevel.Full):
                positive = sentences_by_id[g.sentence_id].text
                break
        if positive is None:
            raise ValueError(f"no full-agreement example for {cat.value}")
        specs[cat] = CategoryPromptSpec(
            category=cat,
            description=cat.description,
            positive_example=positive,
            negative_example=negative,
        )
    return specs


def build_prompt(spec, sentence_text):
    """Six turns: system framing, one worked positive exemplar, one
    worked negative exemplar, then the sentence to classify."""
    system = (
        "You classify single sentences from grant peer-review reports. "
        f"Decide whether the sentence belongs to the category "
        f"'{spec.category.display_name}'. "
        f"Category description: {spec.description} "
        f"Answer with exactly one token: {POSITIVE_TOKEN} if the sentence "
        f"belongs to the category, {NEGATIVE_TOKEN} if it does not."
    )
    return PromptMessages(turns=(
        ("system", system),
        ("user", spec.positive_example),
        ("assistant", POSITIVE_TOKEN),
        ("user", spec.negative_example),
        ("assistant", NEGATIVE_TOKEN),
        ("user", sentence_text),
    ))


def parse_label(completion, positive=POSITIVE_TOKEN, negative=NEGATIVE_TOKEN):
    """First occurrence of either label token, case-insensitive."""
    if not completion:
        raise ParseFailure("empty completion")
    lowered = completion.lower()
    pos = lowered.find(positive.lower())
    neg = lowered.find(negative.lower())
    if pos < 0 and neg < 0:
        raise ParseFailure(f"no label token in {completion!r}")
    if neg < 0 or (0 <= pos < neg):
        return 1
    return 0


class HttpClient:
    """POSTs chat messages to a local text-generation endpoint."""

    def __init__(self, url=None, model=DEFAULT_MODEL, temperature=0.0,
                 max_tokens=8, timeout=60.0):
        self.url = url or os.environ.get(LLM_URL_ENV)
        if not self.url:
            raise ClientUnavailable(
                f"no endpoint URL; set {LLM_URL_ENV} or pass url="
            )
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.timeout = timeout

    def complete(self, messages):
        import httpx

        payload = {
            "model": self.model,
            "messages": messages,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        try:
            response = httpx.post(self.url, json=payload,
                                  timeout=self.timeout)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise ClientUnavailable(str(exc)) from exc
        body = response.json()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ClientUnavailable(f"malformed response: {body}") from exc


@dataclass
class FewshotResult:
    predictions: dict  # sentence_id -> {Category -> 0|1}
    reports: dict  # Category -> EvalReport (only on labeled input)
    parse_failures: int = 0
    client_calls: int = 0


def _request_key(model_tag, messages):
    blob = json.dumps([model_tag, messages], sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def classify_fewshot(client, specs, sentences, golds_by_id=None, cache=None):
    """One generation per (category, sentence); responses cached by
    request hash so identical requests hit the client once."""
    cache = cache if cache is not None else {}
    model_tag = getattr(client, "model", "stub")
    predictions = {}
    failures = 0
    calls = 0
    cats = [c for c in CATEGORIES if c in specs]
    for sentence in sentences:
        predictions[sentence.sentence_id] = {}
        for cat in cats:
            prompt = build_prompt(specs[cat], sentence.text)
            messages = prompt.to_json()
            key = _request_key(model_tag, messages)
            if key not in cache:
                cache[key] = client.complete(messages)
                calls += 1
            try:
                label = parse_label(cache[key])
            except ParseFailure:
                failures += 1
                label = 0
            predictions[sentence.sentence_id][cat] = label
    reports = {}
    if golds_by_id:
        labeled = [s for s in sentences if s.sentence_id in golds_by_id]
        for cat in cats:
            y = [golds_by_id[s.sentence_id].labels[cat] for s in labeled]
            p = [predictions[s.sentence_id][cat] for s in labeled]
            reports[cat] = evaluate(y, p)
    return FewshotResult(
        predictions=predictions,
        reports=reports,
        parse_failures=failures,
        client_calls=calls,
    )


class StubClient:
    """Answers from a fixed mapping of final-turn sentence text to a
    per-category label; used for offline evaluation of the harness."""

    def __init__(self, answers):
        # answers: {(category display name present in system turn is not
        # inspected) -> ...}; keyed by (category, sentence text)
        self.answers = answers
        self.calls = 0

    def complete(self, messages):
        self.calls += 1
        system = messages[0]["content"]
        sentence = messages[-1]["content"]
        for cat in CATEGORIES:
            if f"'{cat.display_name}'" in system:
                return str(self.answers[(cat, sentence)])
        raise ClientUnavailable("no category in system turn")


class ConstantClient:
    """Always answers the same token."""

    def __init__(self, token=POSITIVE_TOKEN):
        self.token = token
        self.calls = 0

    def complete(self, messages):
        self.calls += 1
        return self.token


def oracle_client(golds_by_id, sentences):
    """Stub that echoes gold labels; yields all-perfect metrics."""
    text_by_id = {s.sentence_id: s.text for s in sentences}
    answers = {}
    for sid, gold in golds_by_id.items():
        if sid not in text_by_id:
            continue
        for cat in CATEGORIES:
            answers[(cat, text_by_id[sid])] = gold.labels[cat]
    return StubClient(answers)


def write_prompt_fixtures(specs, out_dir, sentence_text="<SENTENCE>"):
    """Serialized prompts, one file per category."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for cat, spec in specs.items():
        path = out / f"{cat.value}.txt"
        path.write_text(build_prompt(spec, sentence_text).serialize() + "\n",
                        encoding="utf-8")
        paths[cat] = path
    return paths
