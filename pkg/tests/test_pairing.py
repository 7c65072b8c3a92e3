"""Pair enumeration vs the closed-form count laws, plus the compute model."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecpp import pairing
from ecpp.pairing import (
    STRATEGIES,
    compute_cost,
    enumerate_pairs,
    pairs_per_unit_compute,
    positive_pair_count,
)

SIZE_RATIO_96_224 = 96**2 / 224**2


def test_full_graph_k4_has_six_pairs():
    assert len(enumerate_pairs("full_graph", 4)) == 6


def test_multi_crop_k4_pairs_explicit():
    assert enumerate_pairs("multi_crop", 4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]


def test_core_view_k2_degenerates_to_two_view():
    assert enumerate_pairs("core_view", 2) == enumerate_pairs("two_view", 2) == [(0, 1)]


def test_pair_sets_have_no_duplicates_and_valid_indices():
    for strategy in STRATEGIES:
        for k in range(2, 13):
            if strategy == "two_view" and k != 2:
                continue
            pairs = enumerate_pairs(strategy, k)
            assert len(set(pairs)) == len(pairs)
            assert all(0 <= i < j < k for i, j in pairs)


def test_closed_form_counts_table_values():
    assert positive_pair_count("full_graph", 8, 1) == 28
    assert positive_pair_count("multi_crop", 8, 1) == 13
    assert positive_pair_count("two_view", 2, 5) == 5
    assert positive_pair_count("core_view", 6, 1) == 5


@given(k=st.integers(min_value=2, max_value=12), n=st.integers(min_value=1, max_value=10))
def test_count_law_matches_enumeration(k, n):
    for strategy in STRATEGIES:
        if strategy == "two_view" and k != 2:
            continue
        assert positive_pair_count(strategy, k, n) == n * len(enumerate_pairs(strategy, k))


@given(n=st.integers(min_value=1, max_value=50))
def test_count_is_linear_in_n(n):
    for strategy in STRATEGIES:
        k = 2 if strategy == "two_view" else 5
        assert positive_pair_count(strategy, k, n) == n * positive_pair_count(strategy, k, 1)


def test_multi_crop_count_is_row_sum_identity():
    for k in range(2, 13):
        assert positive_pair_count("multi_crop", k, 1) == (k - 1) + (k - 2)


def test_full_graph_and_ecpp_share_pair_sets():
    for k in range(2, 13):
        assert enumerate_pairs("full_graph", k) == enumerate_pairs("ecpp", k)


def test_compute_cost_values():
    assert compute_cost("ecpp", 6, 1, SIZE_RATIO_96_224) == pytest.approx(2.7346938775510203)
    assert compute_cost("full_graph", 6, 1, 0.5) == 6.0
    assert compute_cost("two_view", 2, 3, 1.0) == 6.0
    # ratio 1 collapses the small-view saving
    for k in range(2, 9):
        assert compute_cost("ecpp", k, 1, 1.0) == compute_cost("full_graph", k, 1, 1.0)


def test_pairs_per_unit_compute_values():
    assert pairs_per_unit_compute("two_view", 2, 1.0) == 0.5
    got = pairs_per_unit_compute("ecpp", 6, SIZE_RATIO_96_224)
    assert got == pytest.approx(15 / 2.7346938775510203)
    assert got == pytest.approx(5.485, abs=1e-3)


def test_efficiency_ordering_over_k_sweep():
    # ecpp dominates everything; core_view trails everything; full_graph vs
    # multi_crop flips with the size ratio (full_graph wins iff r >= 2/(k-1),
    # since (k-1)(2+(k-2)r) >= 2(2k-3) reduces to exactly that).
    for ratio in (0.1837, 0.5, 0.9):
        for k in range(3, 17):
            e = pairs_per_unit_compute("ecpp", k, ratio)
            f = pairs_per_unit_compute("full_graph", k, ratio)
            m = pairs_per_unit_compute("multi_crop", k, ratio)
            c = pairs_per_unit_compute("core_view", k, ratio)
            assert e >= f >= c
            assert e >= m >= c
            if ratio >= 2 / (k - 1):
                assert f >= m
            else:
                assert m >= f


def test_validation_errors():
    with pytest.raises(ValueError):
        enumerate_pairs("two_view", 3)
    with pytest.raises(ValueError):
        enumerate_pairs("full_graph", 1)
    with pytest.raises(ValueError):
        enumerate_pairs("ring", 4)
    with pytest.raises(ValueError):
        positive_pair_count("full_graph", 4, 0)
    with pytest.raises(ValueError):
        compute_cost("ecpp", 4, 1, 0.0)
    with pytest.raises(ValueError):
        compute_cost("ecpp", 4, 1, 1.5)


def test_multi_crop_and_ecpp_allow_k2():
    assert enumerate_pairs("multi_crop", 2) == [(0, 1)]
    assert enumerate_pairs("ecpp", 2) == [(0, 1)]


def test_strategies_registry():
    assert pairing.STRATEGIES == ("two_view", "core_view", "full_graph", "multi_crop", "ecpp")
