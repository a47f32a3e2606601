"""End-to-end acceptance suite.

Each test covers one release criterion and finishes by printing a single
PASS line (run with `pytest -s` or `-v` to see them); a failing test is
the corresponding FAIL line.  The suite exercises only the library and
CLI — no network, no GPU — and is expected to finish in well under ten
minutes on CPU.
"""

import itertools
import json
import random
import threading
import time

import numpy as np
import pytest
import torch

from helpers import (
    make_record,
    synthetic_corpus,
    synthetic_multilabel_corpus,
    tiny_train_config,
)
from test_metrics import brute_force

from reviewlens.agreement import agreement_stats
from reviewlens.categories import CATEGORIES, Category
from reviewlens.classify import (
    classify_corpus,
    load_encoder,
    train_binary,
    train_multilabel,
    train_multitask,
)
from reviewlens.classify.heads import (
    ClassifierHead,
    bce_loss,
    head_gradients,
    sigmoid,
)
from reviewlens.corpus import (
    AgreementLevel,
    GoldLabel,
    SamplingMode,
    SamplingSpec,
    Sentence,
    TextBox,
    aggregate_majority,
    ingest_annotations,
    stratified_holdout,
    stratified_kfold,
    write_jsonl,
)
from reviewlens.errors import DuplicateSubmission, GatingViolation
from reviewlens.experiments import run_ablation
from reviewlens.fewshot import (
    CategoryPromptSpec,
    ConstantClient,
    build_prompt,
    classify_fewshot,
    oracle_client,
)
from reviewlens.keyness import chi2_2x2
from reviewlens.metrics import REPORT_COLUMNS, compute_metrics, evaluate
from reviewlens.prevalence import (
    compare_annotated_vs_predicted,
    review_prevalence,
)
from reviewlens.service import RoundStore

# Observed positive-label shares per category in the annotated corpus,
# in descending order; drives the stratification stress test.
CATEGORY_SHARES = {
    Category.Proposal: 0.409,
    Category.Positive: 0.371,
    Category.Applicant: 0.197,
    Category.Rationale: 0.184,
    Category.TrackRecord: 0.180,
    Category.RelevanceOriginalityTopicality: 0.171,
    Category.Method: 0.162,
    Category.Negative: 0.152,
    Category.Suitability: 0.085,
    Category.Feasibility: 0.063,
    Category.Suggestion: 0.045,
    Category.ApplicantQuantity: 0.016,
}


def _ok(line):
    print(f"PASS: {line}")


@pytest.fixture(scope="module")
def encoder():
    return load_encoder("tiny-test")


# --- 1. metrics oracle --------------------------------------------------

def _random_cases(n_cases, max_len=50, seed=77):
    rng = random.Random(seed)
    cases = []
    for _ in range(n_cases):
        n = rng.randint(1, max_len)
        cases.append(([rng.randint(0, 1) for _ in range(n)],
                      [rng.randint(0, 1) for _ in range(n)]))
    return cases


def test_metrics_match_independent_oracle():
    start = time.monotonic()
    worst = 0.0
    for labels, preds in _random_cases(1000):
        report = evaluate(labels, preds)
        expected = brute_force(labels, preds)
        for column in REPORT_COLUMNS:
            worst = max(worst,
                        abs(getattr(report, column) - expected[column]))
    elapsed = time.monotonic() - start
    assert worst <= 1e-12
    assert elapsed < 5.0
    _ok("metrics equal brute-force oracle on 1,000 random cases "
        f"(max abs diff {worst:.1e}, {elapsed:.2f}s)")


def test_micro_f1_equals_accuracy_exactly():
    for labels, preds in _random_cases(1000, seed=78):
        report = evaluate(labels, preds)
        assert report.f1_micro == report.accuracy
    _ok("micro F1 equals accuracy exactly on all 1,000 random cases")


# --- 2. majority aggregation and gating --------------------------------

def test_majority_vote_and_gating():
    for cat in CATEGORIES:
        for votes in itertools.product((0, 1), repeat=3):
            records = [
                make_record("s1", f"a{i}",
                            positives=((cat, Category.Positive) if v else ()))
                for i, v in enumerate(votes)
            ]
            gold = aggregate_majority(records)[0]
            assert gold.labels[cat] == (1 if sum(votes) >= 2 else 0)
            assert gold.agreement[cat] is (
                AgreementLevel.Full if sum(votes) in (0, 3)
                else AgreementLevel.Majority
            )
    # a rationale mark without a positive or negative one never enters
    with pytest.raises(GatingViolation):
        make_record("s1", "a1", positives=(Category.Rationale,))
    _ok("all 2^3 vote combinations per category follow the 2-of-3 rule; "
        "ungated rationale marks are rejected at entry")


# --- 3. stratified splitting -------------------------------------------

def _golds_with_positives(n, positive_ids, category):
    return [
        GoldLabel(
            sentence_id=f"s{i:04d}",
            labels={c: (1 if (c is category and i in positive_ids) else 0)
                    for c in CATEGORIES},
            agreement={c: AgreementLevel.Full for c in CATEGORIES},
            n_annotators=3,
        )
        for i in range(n)
    ]


def test_stratified_splits_hold_shares():
    n = 3000
    categories = list(CATEGORY_SHARES)
    for seed in range(100):
        category = categories[seed % len(categories)]
        share = CATEGORY_SHARES[category]
        n_pos = round(n * share)
        rng = random.Random(seed)
        positive_ids = set(rng.sample(range(n), n_pos))
        golds = _golds_with_positives(n, positive_ids, category)
        split = stratified_holdout(golds, category, 0.2, seed=seed)
        test_pos = sum(1 for sid in split.test_ids
                       if int(sid[1:]) in positive_ids)
        assert abs(test_pos - 0.2 * n_pos) <= 1, (seed, category)
        assert len(split.test_ids) == round(0.2 * n)
        assert split.train_ids | split.test_ids == {
            g.sentence_id for g in golds
        }
    # per-fold positive spread of k-fold splits stays within one sentence
    rng = random.Random(0)
    positive_ids = set(rng.sample(range(n), 510))
    golds = _golds_with_positives(n, positive_ids, Category.Positive)
    split = stratified_kfold(golds, Category.Positive, k=5, seed=9)
    fold_pos = [sum(1 for sid in fold if int(sid[1:]) in positive_ids)
                for fold in split.folds]
    assert max(fold_pos) - min(fold_pos) <= 1
    assert set().union(*split.folds) == {g.sentence_id for g in golds}
    _ok("100 seeded holdouts at n=3,000 keep test positives within +/-1 of "
        "the proportional share; k-fold positive spread <= 1")


# --- 4. gradient check --------------------------------------------------

def test_head_gradients_match_finite_differences():
    rng = np.random.default_rng(21)
    eps = 1e-6
    start = time.monotonic()
    worst = 0.0
    for _ in range(100):
        hidden = int(rng.integers(2, 8))
        out = int(rng.integers(1, 4))
        n = int(rng.integers(1, 6))
        head = ClassifierHead(W=rng.normal(scale=0.5, size=(out, hidden)),
                              b=rng.normal(scale=0.5, size=out),
                              variant="multilabel")
        h = rng.normal(size=(n, hidden))
        y = rng.integers(0, 2, size=(n, out)).astype(float)
        dW, db = head_gradients(head, h, y)

        def loss_at(W, b):
            return bce_loss(sigmoid(h @ W.T + b), y)

        num_dW = np.zeros_like(head.W)
        for i in range(out):
            for j in range(hidden):
                up, down = head.W.copy(), head.W.copy()
                up[i, j] += eps
                down[i, j] -= eps
                num_dW[i, j] = (loss_at(up, head.b)
                                - loss_at(down, head.b)) / (2 * eps)
        num_db = np.zeros_like(head.b)
        for i in range(out):
            up, down = head.b.copy(), head.b.copy()
            up[i] += eps
            down[i] -= eps
            num_db[i] = (loss_at(head.W, up)
                         - loss_at(head.W, down)) / (2 * eps)
        scale = max(np.abs(num_dW).max(), np.abs(num_db).max(), 1e-8)
        err = max(np.abs(dW - num_dW).max(), np.abs(db - num_db).max())
        worst = max(worst, err / scale)
    elapsed = time.monotonic() - start
    assert worst <= 1e-4
    assert elapsed < 10.0
    _ok("head gradients match central finite differences on 100 instances "
        f"(worst rel err {worst:.1e}, {elapsed:.2f}s)")


# --- 5. end-to-end training on a separable corpus ----------------------

def _macro_f1(predictions, golds, category):
    y = [g.labels[category] for g in golds]
    p = [predictions[g.sentence_id][category]["label"] for g in golds]
    return evaluate(y, p).f1_macro


def test_synthetic_training_reaches_thresholds(encoder):
    start = time.monotonic()
    config = tiny_train_config()

    train_s, train_g = synthetic_corpus(n=400, seed=2)
    test_s, test_g = synthetic_corpus(n=100, seed=102)
    by_id = {s.sentence_id: s for s in train_s}
    model = train_binary(train_g, Category.Positive, encoder, config, by_id)
    binary_f1 = _macro_f1(classify_corpus(model, test_s), test_g,
                          Category.Positive)
    assert binary_f1 >= 0.95

    train_s, train_g = synthetic_multilabel_corpus(n=400, seed=2)
    test_s, test_g = synthetic_multilabel_corpus(n=100, seed=102)
    by_id = {s.sentence_id: s for s in train_s}

    model = train_multilabel(train_g, encoder, config, by_id)
    predictions = classify_corpus(model, test_s)
    multilabel_f1 = float(np.mean(
        [_macro_f1(predictions, test_g, c) for c in CATEGORIES]
    ))
    assert multilabel_f1 >= 0.95

    before = encoder.parameter_state()
    model = train_multitask(train_g, encoder, config, by_id)
    after = encoder.parameter_state()
    assert before.keys() == after.keys()
    for key in before:
        assert torch.equal(before[key], after[key]), key
    predictions = classify_corpus(model, test_s)
    multitask_f1 = float(np.mean(
        [_macro_f1(predictions, test_g, c) for c in CATEGORIES]
    ))
    assert multitask_f1 >= 0.90

    elapsed = time.monotonic() - start
    assert elapsed < 600.0
    _ok("synthetic corpus: binary macro F1 "
        f"{binary_f1:.3f} >= 0.95, multi-label {multilabel_f1:.3f} >= 0.95, "
        f"multi-task {multitask_f1:.3f} >= 0.90 with encoder bit-frozen "
        f"({elapsed:.0f}s)")


# --- 6. ablation grid ---------------------------------------------------

def test_ablation_emits_fixed_grid(encoder):
    train_s, train_g = synthetic_corpus(n=2500, seed=7)
    test_s, test_g = synthetic_corpus(n=200, seed=107)
    by_id = {s.sentence_id: s for s in train_s + test_s}
    config = tiny_train_config(epochs=1)
    curve = run_ablation(train_g, test_g, encoder, config, by_id,
                         chunk=500, approach="binary",
                         category=Category.Positive)
    sizes = [p.train_size for p in curve.points]
    assert sizes == [500, 1000, 1500, 2000, 2500]
    test_ids = {p.test_ids for p in curve.points}
    assert len(test_ids) == 1
    assert next(iter(test_ids)) == frozenset(g.sentence_id for g in test_g)
    _ok("ablation emits exactly the points {500,1000,1500,2000,2500} "
        "with an identical test-set id set at every point")


# --- 7. keyness ---------------------------------------------------------

def test_keyness_fixture_and_properties():
    # 2x2 table 30/70 vs 10/190, n=300: chi2 = n(ad-bc)^2 / product of
    # the four marginals = 300 * 5000^2 / (100*200*40*260)
    expected = 300 * 5000**2 / (100 * 200 * 40 * 260)
    assert abs(round(expected, 4) - 36.0577) < 5e-5
    assert abs(chi2_2x2(30, 70, 10, 190) - expected) <= 1e-9
    # independent tables score zero
    assert chi2_2x2(20, 80, 40, 160) == 0.0
    assert chi2_2x2(5, 5, 50, 50) == 0.0
    # swapping the two groups leaves the statistic unchanged, exactly
    rng = random.Random(4)
    for _ in range(200):
        a, b, c, d = (rng.randint(0, 50) for _ in range(4))
        assert chi2_2x2(a, b, c, d) == chi2_2x2(c, d, a, b)
    _ok("chi-squared fixture within 1e-9 of the hand-derived 36.0577; "
        "zero on independence; group-swap symmetric")


# --- 8. prevalence ------------------------------------------------------

def _labels(**overrides):
    labels = {c: 0 for c in CATEGORIES}
    for name, value in overrides.items():
        labels[Category[name]] = value
    return labels


def test_prevalence_rules():
    # five sentences, two positive/negative, one rationale: the
    # rationale share is conditional (1/2), not global (1/5)
    reviews = review_prevalence({"r1": {
        "s0": _labels(Positive=1, Rationale=1),
        "s1": _labels(Negative=1),
        "s2": _labels(), "s3": _labels(), "s4": _labels(),
    }})
    assert reviews[0].prevalence[Category.Rationale] == 0.5
    assert reviews[0].prevalence[Category.Positive] == pytest.approx(0.2)
    # categories are not mutually exclusive: sums above 100% survive
    reviews = review_prevalence({"r1": {
        "s0": _labels(Positive=1, TrackRecord=1, Proposal=1),
        "s1": _labels(Negative=1, Method=1, Suitability=1),
    }})
    total = sum(v for c, v in reviews[0].prevalence.items()
                if c is not Category.Rationale)
    assert total == pytest.approx(3.0)
    # identical share vectors correlate perfectly
    shares = {c: CATEGORY_SHARES[c] for c in CATEGORIES}
    assert compare_annotated_vs_predicted(shares, dict(shares)) == \
        pytest.approx(1.0)
    _ok("rationale prevalence is conditional on positive/negative "
        "sentences (2-of-5 fixture gives 1/2); sums over 100% preserved; "
        "identical shares correlate at 1.0")


# --- 9. few-shot harness ------------------------------------------------

def _prompt_spec(category):
    return CategoryPromptSpec(
        category=category,
        description=category.description,
        positive_example="The applicant should add a power analysis.",
        negative_example="The proposal was submitted in March.",
    )


def test_fewshot_prompts_and_stub_clients(tmp_path):
    from pathlib import Path

    fixtures = Path(__file__).parent / "fixtures" / "prompts"
    for cat in CATEGORIES:
        expected = (fixtures / f"{cat.value}.txt").read_text(encoding="utf-8")
        actual = build_prompt(_prompt_spec(cat), "<SENTENCE>").serialize()
        assert actual + "\n" == expected, cat.value

    # sentence i carries category i (the rationale sentence also carries
    # Positive to satisfy gating); four extra sentences carry nothing
    sentences = [
        Sentence(sentence_id=f"s{i:02d}", review_id="r1", position=i,
                 text=f"sentence number {i}",
                 text_box=TextBox.OverallComment)
        for i in range(len(CATEGORIES) + 4)
    ]

    def positives(i):
        if i >= len(CATEGORIES):
            return set()
        marked = {CATEGORIES[i]}
        if CATEGORIES[i] is Category.Rationale:
            marked.add(Category.Positive)
        return marked

    golds = {
        s.sentence_id: GoldLabel(
            sentence_id=s.sentence_id,
            labels={c: (1 if c in positives(i) else 0)
                    for c in CATEGORIES},
            agreement={c: AgreementLevel.Full for c in CATEGORIES},
            n_annotators=3,
        )
        for i, s in enumerate(sentences)
    }
    specs = {c: _prompt_spec(c) for c in CATEGORIES}

    result = classify_fewshot(oracle_client(golds, sentences), specs,
                              sentences, golds_by_id=golds)
    for cat in CATEGORIES:
        assert result.reports[cat].accuracy == 1.0
        assert result.reports[cat].f1_macro == 1.0

    result = classify_fewshot(ConstantClient("1"), specs, sentences,
                              golds_by_id=golds)
    report = result.reports[Category.Positive]
    positive_share = sum(
        g.labels[Category.Positive] for g in golds.values()
    ) / len(sentences)
    assert report.recall_label1 == 1.0
    assert abs(report.precision_label1 - positive_share) <= 1e-12
    _ok("prompt golden files byte-stable; oracle stub scores 1.0 "
        "everywhere; always-positive stub gives recall 1.0 and precision "
        "equal to the positive share")


# --- 10. determinism ----------------------------------------------------

def test_training_is_deterministic(encoder, tmp_path):
    from reviewlens import experiments

    sentences, golds = synthetic_corpus(n=60, seed=5)
    by_id = {s.sentence_id: s for s in sentences}
    config = tiny_train_config(epochs=1)

    labels = []
    csvs = []
    for run in range(2):
        model = train_binary(golds, Category.Positive, encoder, config,
                             by_id)
        predictions = classify_corpus(model, sentences)
        labels.append({sid: cats[Category.Positive]["label"]
                       for sid, cats in predictions.items()})
        report = experiments.run_cv("binary", golds, encoder, config,
                                    by_id, k=2,
                                    categories=[Category.Positive])
        out = tmp_path / f"run{run}"
        experiments.write_results_csv(
            out, ["category", "mean", "min", "max"],
            experiments.cv_results_rows(report),
        )
        csvs.append((out / "results.csv").read_bytes())
    assert labels[0] == labels[1]
    assert csvs[0] == csvs[1]
    _ok("re-running training and cross-validation with the same seed "
        "reproduces identical labels and identical results.csv")


# --- 11. annotation service ---------------------------------------------

def test_service_round_trip_and_concurrency(tmp_path):
    sentences = [
        Sentence(sentence_id=f"s{i:03d}", review_id=f"r{i // 10}",
                 position=i % 10, text=f"sentence number {i}",
                 text_box=TextBox.OverallComment)
        for i in range(100)
    ]
    store = RoundStore()
    spec = SamplingSpec(mode=SamplingMode.Random, n_total=100, seed=13)
    info = store.create_round("round-1", sentences, spec, ["a", "b", "c"])
    assert info.n_sentences == 100

    for annotator in ("a", "b", "c"):
        for sentence in store.next_assignments("round-1", annotator,
                                               n=1000):
            pos = []
            if hash((sentence.sentence_id, annotator, "p")) % 2:
                pos.append(Category.Positive)
            if pos and hash((sentence.sentence_id, annotator, "r")) % 2:
                pos.append(Category.Rationale)
            store.submit_annotation(make_record(
                sentence.sentence_id, annotator, round_id="round-1",
                positives=tuple(pos),
            ))

    exported = store.export_round("round-1")
    path = tmp_path / "annotations.jsonl"
    path.write_text(exported, encoding="utf-8")
    records = ingest_annotations(path)
    assert len(records) == 300
    write_jsonl(tmp_path / "copy.jsonl", records)
    store2 = RoundStore()
    store2.create_round("round-1", sentences, spec, ["a", "b", "c"])
    for record in records:
        store2.submit_annotation(record)
    assert store2.export_round("round-1") == exported

    report, pending = store.round_agreement("round-1")
    assert pending == 0
    offline = agreement_stats(records)
    assert report.to_json() == offline.to_json()

    store3 = RoundStore()
    store3.create_round("round-2", sentences, spec, ["a", "b", "c"])
    target = store3.next_assignments("round-2", "a", n=1)[0]
    record = make_record(target.sentence_id, "a", round_id="round-2")
    outcomes = []

    def submit():
        try:
            store3.submit_annotation(record)
            outcomes.append("accepted")
        except DuplicateSubmission:
            outcomes.append("duplicate")

    threads = [threading.Thread(target=submit) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert outcomes.count("accepted") == 1
    _ok("export/ingest identity on a 100-sentence round; service "
        "agreement equals offline statistics bit-for-bit; concurrent "
        "duplicates accepted exactly once")
