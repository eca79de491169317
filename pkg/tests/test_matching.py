# SPDX-License-Identifier: MIT
"""Tests for the exact assignment, threshold matching and joint-visit solvers."""

from fractions import Fraction
from itertools import permutations

from hypothesis import given, settings
from hypothesis import strategies as st
import pytest

from pywmeq import matching
from pywmeq.types import AssignmentMode, CostMatrix


def _circle(a: Fraction, b: Fraction) -> Fraction:
    d = abs(a - b)
    return min(d, 1 - d)


def _line(a: Fraction, b: Fraction) -> Fraction:
    return abs(a - b)


rationals = st.builds(Fraction, st.integers(0, 30), st.integers(1, 8))
unit = st.integers(1, 24).flatmap(
    lambda q: st.builds(Fraction, st.integers(0, q - 1), st.just(q))
)


@st.composite
def cost_matrices(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    return CostMatrix.from_entries(
        [[draw(rationals) for _ in range(n)] for _ in range(n)]
    )


@st.composite
def point_pairs(draw, max_n=9):
    n = draw(st.integers(1, max_n))
    xs = draw(st.lists(unit, min_size=n, max_size=n))
    ys = draw(st.lists(unit, min_size=n, max_size=n))
    return xs, ys


def test_matching_small_example():
    """Test the solvers on a hand-checked 3x3 matrix."""
    cost = CostMatrix.from_entries([[4, 1, 3], [2, 0, 5], [3, 2, 2]])
    low = matching.solve_min_assignment(cost)
    assert low.total_cost == 5
    assert low.permutation == (1, 0, 2)
    high = matching.solve_max_assignment(cost)
    assert high.total_cost == 11
    assert matching.brute_force_assignment(cost, AssignmentMode.MAX).total_cost == 11
    assert matching.brute_force_assignment(cost, "min").permutation == (1, 0, 2)

    with pytest.raises(ValueError):
        matching.solve_min_assignment(CostMatrix(()))
    with pytest.raises(ValueError):
        matching.brute_force_assignment(CostMatrix.from_entries([[0] * 10] * 10))


@settings(max_examples=60, deadline=None)
@given(cost_matrices())
def test_matching_general_solvers_match_brute_force(cost):
    """Test the Hungarian solver against enumeration of all permutations."""
    low = matching.solve_min_assignment(cost)
    high = matching.solve_max_assignment(cost)
    assert low.total_cost == matching.brute_force_assignment(cost, AssignmentMode.MIN).total_cost
    assert high.total_cost == matching.brute_force_assignment(cost, AssignmentMode.MAX).total_cost
    # The returned permutation realises the reported cost
    assert sum(cost.entry(i, j) for i, j in enumerate(low.permutation)) == low.total_cost
    assert sum(cost.entry(i, j) for i, j in enumerate(high.permutation)) == high.total_cost


@settings(max_examples=60, deadline=None)
@given(cost_matrices(), rationals)
def test_matching_exceedance_matches_brute_force(cost, threshold):
    """Test the threshold matching count against enumeration."""
    want = min(
        sum(1 for i, j in enumerate(perm) if cost.entry(i, j) > threshold)
        for perm in permutations(range(cost.n))
    )
    assert matching.min_exceedance_count(cost, threshold) == want


@settings(max_examples=60, deadline=None)
@given(cost_matrices(), rationals, rationals)
def test_matching_exceedance_monotone_in_threshold(cost, a, b):
    """Test that raising the threshold never raises the count."""
    low, high = min(a, b), max(a, b)
    assert matching.min_exceedance_count(cost, high) <= matching.min_exceedance_count(cost, low)


@settings(max_examples=80, deadline=None)
@given(point_pairs())
def test_matching_sorted_line(pair):
    """Test the sorted line solver against the general solvers."""
    xs, ys = pair
    cost = matching.cost_matrix_from_points(xs, ys, _line)
    assert matching.solve_sorted_line(xs, ys).total_cost == matching.solve_min_assignment(cost).total_cost
    assert (
        matching.solve_sorted_line(xs, ys, True).total_cost
        == matching.solve_max_assignment(cost).total_cost
    )


@settings(max_examples=80, deadline=None)
@given(point_pairs())
def test_matching_sorted_circle(pair):
    """Test the sorted circle solver against the general solvers."""
    xs, ys = pair
    cost = matching.cost_matrix_from_points(xs, ys, _circle)
    low = matching.solve_sorted_circle(xs, ys, verify=True)
    high = matching.solve_sorted_circle(xs, ys, maximize=True, verify=True)
    assert low.total_cost == matching.solve_min_assignment(cost).total_cost
    assert high.total_cost == matching.solve_max_assignment(cost).total_cost
    assert sum(cost.entry(i, j) for i, j in enumerate(low.permutation)) == low.total_cost
    assert sum(cost.entry(i, j) for i, j in enumerate(high.permutation)) == high.total_cost


@settings(max_examples=80, deadline=None)
@given(point_pairs(), st.builds(Fraction, st.integers(0, 12), st.just(24)))
def test_matching_sorted_exceedance(pair, threshold):
    """Test the line and circle threshold counts against the general count."""
    xs, ys = pair
    assert matching.line_exceedance_count(xs, ys, threshold) == matching.min_exceedance_count(
        matching.cost_matrix_from_points(xs, ys, _line), threshold
    )
    assert matching.circle_exceedance_count(xs, ys, threshold) == matching.min_exceedance_count(
        matching.cost_matrix_from_points(xs, ys, _circle), threshold
    )


def test_matching_sorted_edge_cases():
    """Test input validation and the antipodal maximum on the circle."""
    half = Fraction(1, 2)
    assert matching.solve_sorted_circle([Fraction(0), half], [Fraction(0), half], True).total_cost == 1
    assert matching.solve_sorted_circle([Fraction(0), half], [half, Fraction(0)]).total_cost == 0
    assert matching.circle_exceedance_count([Fraction(0)], [half], half) == 0
    assert matching.circle_exceedance_count([Fraction(0)], [half], Fraction(1, 4)) == 1

    with pytest.raises(ValueError):
        matching.solve_sorted_line([Fraction(0)], [])
    with pytest.raises(ValueError):
        matching.solve_sorted_circle([Fraction(1)], [Fraction(0)])
    with pytest.raises(ValueError):
        matching.line_exceedance_count([Fraction(0)], [Fraction(0)], Fraction(-1))


def test_matching_maximum_matching_size():
    """Test Hopcroft-Karp on range neighbourhoods."""
    # Left u is adjacent to right vertices [u, u+2); a perfect matching exists
    assert matching.maximum_matching_size(4, 5, lambda u: [(u, u + 2)]) == 4
    # Everyone competes for right vertex 0
    assert matching.maximum_matching_size(3, 3, lambda u: [(0, 1)]) == 1
    # Split ranges
    assert matching.maximum_matching_size(2, 4, lambda u: [(0, 1), (3, 4)]) == 2
    assert matching.maximum_matching_size(3, 3, lambda u: []) == 0


def test_matching_joint_visits():
    """Test the closed forms of the joint-visit counts exhaustively for small n."""
    for n in range(0, 6):
        for a in range(n + 1):
            for b in range(n + 1):
                counts = [
                    sum(1 for i in range(a) if perm[i] < b) for perm in permutations(range(n))
                ]
                assert matching.min_joint_visit_count(a, b, n) == min(counts)
                assert matching.max_joint_visit_count(a, b, n) == max(counts)

    with pytest.raises(ValueError):
        matching.min_joint_visit_count(3, 1, 2)
    with pytest.raises(ValueError):
        matching.max_joint_visit_count(-1, 0, 2)
