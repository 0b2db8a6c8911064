import math

import pytest
from hypothesis import given, settings, strategies as st

from recvariants.core import ConfigurationError, EvaluationError
from recvariants.topk import (
    ApAveraging,
    ApDenominator,
    Gain,
    HitRateVariant,
    IdealTruncation,
    NdcgParams,
    RecallDenominator,
    RrVariant,
    average_precision_at_k,
    hit_rate_at_k,
    mean_over_users,
    ndcg_at_k,
    precision_at_k,
    recall_at_k,
    reciprocal_rank_at_k,
)

BY_K = ApAveraging(ApDenominator.BY_K)
BY_R = ApAveraging(ApDenominator.BY_RELEVANT)
BY_MIN = ApAveraging(ApDenominator.BY_MIN)
DROPPED = ApAveraging(ApDenominator.BY_K, drop_hit_indicator=True)


def test_precision(hand_fixture):
    rec, rel, k = hand_fixture
    assert precision_at_k(rec, rel, k) == pytest.approx(0.4, abs=1e-12)
    assert precision_at_k(["x"], rel, k) == 0.0


def test_precision_divides_by_k_for_short_lists():
    assert precision_at_k(["a"], {"a"}, 20) == 1 / 20


def test_recall_denominators():
    rec = ["i1", "i2", "i3", "i4", "i5"]
    rel = {"i2", "i5", "x1", "x2", "x3", "x4", "x5", "x6"}
    assert recall_at_k(rec, rel, 5, RecallDenominator.TOTAL_RELEVANT) == 0.25
    assert recall_at_k(rec, rel, 5, RecallDenominator.MIN_OF_K_AND_RELEVANT) == 0.4


def test_recall_perfect_prefix():
    for denom in RecallDenominator:
        assert recall_at_k(["a", "b", "c"], {"a", "b"}, 3, denom) == 1.0


def test_hit_rate(hand_fixture):
    rec, rel, k = hand_fixture
    assert hit_rate_at_k(rec, rel, k, HitRateVariant.INDICATOR) == 1.0
    assert hit_rate_at_k(rec, rel, k, HitRateVariant.HIT_COUNT) == 2.0
    for v in HitRateVariant:
        assert hit_rate_at_k(["x"], rel, k, v) == 0.0


def test_reciprocal_rank(hand_fixture):
    rec, rel, k = hand_fixture
    assert reciprocal_rank_at_k(rec, rel, k, RrVariant.FIRST_HIT) == 0.5
    assert reciprocal_rank_at_k(rec, rel, k, RrVariant.SUM_OF_HITS) == pytest.approx(0.7, abs=1e-15)
    for v in RrVariant:
        assert reciprocal_rank_at_k([], rel, k, v) == 0.0


def test_average_precision(hand_fixture):
    rec, rel, k = hand_fixture
    assert average_precision_at_k(rec, rel, k, BY_R) == pytest.approx(0.45, abs=1e-15)
    assert average_precision_at_k(rec, rel, k, BY_K) == pytest.approx(0.18, abs=1e-15)
    assert average_precision_at_k(rec, rel, k, BY_MIN) == pytest.approx(0.45, abs=1e-15)
    # (0 + 1/2 + 1/3 + 1/4 + 2/5) / 5
    assert average_precision_at_k(rec, rel, k, DROPPED) == pytest.approx(89 / 300, abs=1e-15)
    assert average_precision_at_k(["x", "y"], rel, k, BY_R) == 0.0


def test_ap_dropped_indicator_requires_by_k():
    with pytest.raises(ConfigurationError):
        ApAveraging(ApDenominator.BY_MIN, drop_hit_indicator=True)


# values checked with mpmath at 30 digits
def test_ndcg_fixture_values(hand_fixture):
    rec, rel, k = hand_fixture
    assert ndcg_at_k(rec, rel, k, NdcgParams()) == pytest.approx(0.62405052000383778, abs=1e-12)
    weighted = NdcgParams(gain=Gain.EXPONENTIAL)
    assert ndcg_at_k(rec, rel, k, weighted) == pytest.approx(0.62549470496399358, abs=1e-12)
    raw = NdcgParams(normalize=False)
    assert ndcg_at_k(rec, rel, k, raw) == pytest.approx(1.01778256080599902, abs=1e-12)


def test_ndcg_full_test_ideal():
    rel = {"a": 5.0, "b": 5.0, "c": 5.0}
    at_k = ndcg_at_k(["a"], rel, 1, NdcgParams())
    full = ndcg_at_k(["a"], rel, 1, NdcgParams(ideal_truncation=IdealTruncation.FULL_TEST))
    assert at_k == 1.0
    assert full == pytest.approx(1 / (1 + 1 / math.log2(3) + 0.5), abs=1e-15)


def test_ndcg_exponential_needs_ratings():
    with pytest.raises(EvaluationError):
        ndcg_at_k(["a"], {"a": None}, 1, NdcgParams(gain=Gain.EXPONENTIAL))


def test_ndcg_bad_base():
    with pytest.raises(ConfigurationError):
        NdcgParams(log_base=1.0)


def test_list_longer_than_k_rejected():
    with pytest.raises(EvaluationError):
        precision_at_k(["a", "b"], {"a"}, 1)


def test_mean_over_users():
    assert mean_over_users({"u1": 1.0, "u2": 0.0}, ["u1", "u2"]) == 0.5
    assert mean_over_users({"u1": 0.6}, ["u1", "u2", "u3"]) == pytest.approx(0.2, abs=1e-15)
    assert mean_over_users({"u1": 0.37}, ["u1"]) == 0.37
    with pytest.raises(EvaluationError, match="no users"):
        mean_over_users({}, [])


def test_mean_over_users_order_independent():
    values = {f"u{n}": v for n, v in enumerate([1e16, 1.0, -1e16, 3.0, 0.1, 0.2])}
    users = list(values)
    assert mean_over_users(values, users) == mean_over_users(values, users[::-1]) == pytest.approx(4.3 / 6)


# -- properties ---------------------------------------------------------------

ITEMS = [f"i{n}" for n in range(30)]


@st.composite
def cases(draw, max_r=30):
    k = draw(st.sampled_from([1, 2, 5, 10, 20]))
    ranked = draw(st.permutations(ITEMS))[: draw(st.integers(0, k))]
    r = draw(st.integers(1, max_r))
    rel_items = draw(st.permutations(ITEMS))[:r]
    ratings = draw(st.lists(st.sampled_from([1.0, 2.5, 4.5, 5.0]), min_size=r, max_size=r))
    return ranked, dict(zip(rel_items, ratings)), k


@given(cases())
def test_hit_count_is_k_times_precision(case):
    rec, rel, k = case
    assert hit_rate_at_k(rec, rel, k, HitRateVariant.HIT_COUNT) == k * precision_at_k(rec, rel, k)


@given(cases(max_r=1))
def test_leave_one_out_collapse(case):
    rec, rel, k = case
    assert reciprocal_rank_at_k(rec, rel, k, RrVariant.FIRST_HIT) == reciprocal_rank_at_k(rec, rel, k, RrVariant.SUM_OF_HITS)
    total = recall_at_k(rec, rel, k, RecallDenominator.TOTAL_RELEVANT)
    assert total == recall_at_k(rec, rel, k, RecallDenominator.MIN_OF_K_AND_RELEVANT)
    assert total == hit_rate_at_k(rec, rel, k, HitRateVariant.INDICATOR)
    assert average_precision_at_k(rec, rel, k, BY_R) == average_precision_at_k(rec, rel, k, BY_MIN)


@given(cases())
def test_ap_by_min_dominates(case):
    rec, rel, k = case
    by_min = average_precision_at_k(rec, rel, k, BY_MIN)
    assert by_min >= average_precision_at_k(rec, rel, k, BY_K)
    assert by_min >= average_precision_at_k(rec, rel, k, BY_R)


@given(cases())
def test_perfect_prefix(case):
    _, rel, k = case
    ideal = sorted(rel, key=lambda i: -rel[i])[:k]
    assert recall_at_k(ideal, rel, k, RecallDenominator.MIN_OF_K_AND_RELEVANT) == 1.0
    assert average_precision_at_k(ideal, rel, k, BY_MIN) == pytest.approx(1.0, abs=1e-12)
    assert reciprocal_rank_at_k(ideal, rel, k, RrVariant.FIRST_HIT) == 1.0
    for gain in Gain:
        assert ndcg_at_k(ideal, rel, k, NdcgParams(gain=gain)) == pytest.approx(1.0, abs=1e-12)


@given(cases(), st.sampled_from(list(Gain)))
def test_log_base_invariance(case, gain):
    rec, rel, k = case
    values = [ndcg_at_k(rec, rel, k, NdcgParams(gain=gain, log_base=b)) for b in (2.0, math.e, 10.0, 1.5)]
    assert max(values) - min(values) <= 1e-12


@given(cases(), st.sampled_from([1.0, 4.5, 5.0]))
def test_constant_rating_weighted_equals_binary(case, rating):
    rec, rel, k = case
    rel = dict.fromkeys(rel, rating)
    weighted = ndcg_at_k(rec, rel, k, NdcgParams(gain=Gain.EXPONENTIAL))
    assert abs(weighted - ndcg_at_k(rec, rel, k, NdcgParams())) <= 1e-12


@settings(max_examples=50)
@given(st.permutations(ITEMS), st.sets(st.sampled_from(ITEMS), min_size=1))
def test_monotone_in_k(order, rel):
    prev_recall = prev_hits = -1.0
    for k in range(1, len(ITEMS) + 1):
        rec = order[:k]
        recall = recall_at_k(rec, rel, k)
        hits = hit_rate_at_k(rec, rel, k, HitRateVariant.HIT_COUNT)
        assert recall >= prev_recall and hits >= prev_hits
        prev_recall, prev_hits = recall, hits


@given(cases())
def test_bounded_variants_in_unit_interval(case):
    rec, rel, k = case
    values = [
        precision_at_k(rec, rel, k),
        recall_at_k(rec, rel, k),
        recall_at_k(rec, rel, k, RecallDenominator.MIN_OF_K_AND_RELEVANT),
        hit_rate_at_k(rec, rel, k),
        reciprocal_rank_at_k(rec, rel, k),
        average_precision_at_k(rec, rel, k, BY_MIN),
        ndcg_at_k(rec, rel, k),
        ndcg_at_k(rec, rel, k, NdcgParams(gain=Gain.EXPONENTIAL)),
    ]
    assert all(0.0 <= v <= 1.0 + 1e-12 for v in values)
