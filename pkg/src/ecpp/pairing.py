"""Positive-pairing strategies over K views.

A strategy decides which unordered view pairs (i, j) contribute a loss term.
This module enumerates those pairs and provides the closed-form pair-count
and relative-compute model used for efficiency comparisons. Pairs are
unordered here; the loss layer expands each into two ordered anchor terms.

View indices are 0-based.
"""

from __future__ import annotations

from itertools import combinations

TWO_VIEW = "two_view"
CORE_VIEW = "core_view"
FULL_GRAPH = "full_graph"
MULTI_CROP = "multi_crop"
ECPP = "ecpp"

STRATEGIES = (TWO_VIEW, CORE_VIEW, FULL_GRAPH, MULTI_CROP, ECPP)


def _validate(strategy: str, k: int) -> None:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if strategy == TWO_VIEW:
        if k != 2:
            raise ValueError("two_view requires exactly k=2")
    elif k < 2:
        raise ValueError(f"{strategy} requires k >= 2, got {k}")


def enumerate_pairs(strategy: str, k: int) -> list[tuple[int, int]]:
    """All unordered view pairs (i < j) that contribute loss terms."""
    _validate(strategy, k)
    if strategy == TWO_VIEW:
        return [(0, 1)]
    if strategy == CORE_VIEW:
        return [(0, j) for j in range(1, k)]
    if strategy == MULTI_CROP:
        # both full-resolution views pair with everything after them
        return [(i, j) for i in (0, 1) for j in range(i + 1, k)]
    return list(combinations(range(k), 2))  # full_graph and ecpp


def positive_pair_count(strategy: str, k: int, n: int) -> int:
    """Closed-form number of positive pairs per batch of n items."""
    _validate(strategy, k)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if strategy == TWO_VIEW:
        per_item = 1
    elif strategy == CORE_VIEW:
        per_item = k - 1
    elif strategy == MULTI_CROP:
        per_item = 2 * k - 3
    else:
        per_item = k * (k - 1) // 2
    return per_item * n


def compute_cost(strategy: str, k: int, n: int, size_ratio: float) -> float:
    """Forward compute per batch, in units of one full-resolution view.

    Strategies that keep every view at full resolution cost k*n; the
    small-additional-view strategies cost 2n for the two full views plus
    (k-2)*n scaled by the small/large pixel-area ratio.
    """
    _validate(strategy, k)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 < size_ratio <= 1:
        raise ValueError(f"size_ratio must be in (0, 1], got {size_ratio}")
    if strategy == TWO_VIEW:
        return 2.0 * n
    if strategy in (CORE_VIEW, FULL_GRAPH):
        return float(k * n)
    return 2.0 * n + (k - 2) * n * size_ratio  # multi_crop and ecpp


def pairs_per_unit_compute(strategy: str, k: int, size_ratio: float) -> float:
    """Positive pairs processed per unit of forward compute (the efficiency curve)."""
    return positive_pair_count(strategy, k, 1) / compute_cost(strategy, k, 1, size_ratio)
