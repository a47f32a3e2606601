import math

import pytest

from helpers import make_record
from reviewlens.agreement import (
    agreement_stats,
    category_count_distribution,
    ingest_survey,
    pearson_r,
    prevalence_shares,
)
from reviewlens.categories import CATEGORIES, Category
from reviewlens.corpus import aggregate_majority
from reviewlens.errors import InsufficientAnnotators, ZeroVariance


def _panel(sentence_id, votes, category=Category.Positive):
    return [
        make_record(sentence_id, f"a{i}",
                    positives=(category,) if v else ())
        for i, v in enumerate(votes)
    ]


def test_unanimous_fixture_rates_one():
    records = _panel("s1", (1, 1, 1)) + _panel("s2", (0, 0, 0))
    report = agreement_stats(records)
    assert report.n_sentences == 2
    stats = report.per_category[Category.Positive]
    assert stats.full_agreement_rate == 1.0
    assert stats.prevalence_majority == 0.5
    assert stats.prevalence_full == 0.5


def test_mixed_fixture_hand_computed():
    # s1 unanimous positive, s2 two-of-three, s3 unanimous absent
    records = (
        _panel("s1", (1, 1, 1)) + _panel("s2", (1, 1, 0))
        + _panel("s3", (0, 0, 0))
    )
    report = agreement_stats(records)
    stats = report.per_category[Category.Positive]
    assert stats.full_agreement_rate == pytest.approx(2 / 3)
    assert stats.prevalence_majority == pytest.approx(2 / 3)
    assert stats.prevalence_full == pytest.approx(1 / 3)
    # unanimity on an absent category counts as full agreement
    assert report.per_category[Category.Method].full_agreement_rate == 1.0


def test_partial_panel_rejected():
    records = _panel("s1", (1, 1))
    with pytest.raises(InsufficientAnnotators):
        agreement_stats(records)


def test_per_round_rates():
    records = []
    for i, votes in enumerate(((1, 1, 1), (1, 0, 0))):
        for j, v in enumerate(votes):
            records.append(make_record(
                f"s{i}", f"a{j}", round_id=f"round{i}",
                positives=(Category.Positive,) if v else (),
            ))
    report = agreement_stats(records)
    assert report.per_round["round0"][Category.Positive] == 1.0
    assert report.per_round["round1"][Category.Positive] == 0.0


def test_agreement_prevalence_matches_aggregation():
    """Majority prevalence equals the share of majority-aggregated 1s."""
    panels = [
        _panel("s1", (1, 1, 0)), _panel("s2", (1, 0, 0)),
        _panel("s3", (1, 1, 1)), _panel("s4", (0, 0, 0)),
    ]
    records = [r for panel in panels for r in panel]
    report = agreement_stats(records)
    golds = aggregate_majority(records)
    share = sum(g.labels[Category.Positive] for g in golds) / len(golds)
    assert report.per_category[Category.Positive].prevalence_majority == share


def test_category_count_distribution():
    records = (
        _panel("s1", (1, 1, 1))  # one category after aggregation
        + _panel("s2", (0, 0, 0))  # zero categories
    )
    golds = aggregate_majority(records)
    hist = category_count_distribution(golds)
    assert hist[0] == 1
    assert hist[1] == 1
    assert sum(hist.values()) == 2
    assert set(hist) == set(range(13))


def test_prevalence_shares():
    records = _panel("s1", (1, 1, 1)) + _panel("s2", (0, 0, 0))
    shares = prevalence_shares(aggregate_majority(records))
    assert shares[Category.Positive] == 0.5
    assert shares[Category.Method] == 0.0


def test_pearson_exact_line():
    assert pearson_r([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson_r([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0)


def test_pearson_hand_computed():
    xs = [1.0, 2.0, 4.0]
    ys = [1.0, 3.0, 2.0]
    # centered: x=(-4/3, -1/3, 5/3), y=(-1, 1, 0)
    expected = (4 / 3 - 1 / 3) / math.sqrt((16 / 9 + 1 / 9 + 25 / 9) * 2)
    assert pearson_r(xs, ys) == pytest.approx(expected)


def test_pearson_zero_variance():
    with pytest.raises(ZeroVariance):
        pearson_r([1, 1, 1], [1, 2, 3])


def test_survey_roundtrip(tmp_path):
    path = tmp_path / "survey.csv"
    path.write_text(
        "annotator_id,category,score\n"
        "a1,positive,2\n"
        "a2,positive,3\n"
        "a1,rationale,7\n",
        encoding="utf-8",
    )
    survey = ingest_survey(path)
    assert survey.means[Category.Positive] == pytest.approx(2.5)
    assert survey.means[Category.Rationale] == pytest.approx(7.0)


def test_survey_rejects_out_of_range(tmp_path):
    from reviewlens.errors import OutOfRangeScore

    path = tmp_path / "survey.csv"
    path.write_text(
        "annotator_id,category,score\na1,positive,11\n", encoding="utf-8"
    )
    with pytest.raises(OutOfRangeScore):
        ingest_survey(path)
