# SPDX-License-Identifier: MIT
"""Tests for per-n statistics, pair relations, densities and observables."""

from fractions import Fraction

import pytest

from pywmeq import orbitstats, systems
from pywmeq.types import (
    CirclePoint,
    IntervalPoint,
    Observable,
    PeriodicRule,
    SamplerKind,
    SamplerStrategy,
    SegmentStat,
    SpaceDescriptor,
    StatKind,
    StatValue,
    SymbolPoint,
    SymbolStream,
    SystemDescriptor,
)
from pywmeq.utils import InvariantError

FIFTH = SystemDescriptor.rotation(Fraction(1, 5))


def _segments(system, x, y, n):
    return systems.orbit_segment(system, x, n), systems.orbit_segment(system, y, n)


def test_orbitstats_rotation_closed_forms():
    """Test points on one periodic rotation orbit."""
    # Same orbit: equal multisets at multiples of the period, constant pointwise distance
    seg_x, seg_y = _segments(FIFTH, CirclePoint(Fraction(0)), CirclePoint(Fraction(2, 5)), 10)
    assert orbitstats.weak_mean(seg_x, seg_y) == 0
    assert orbitstats.besicovitch(seg_x, seg_y) == Fraction(2, 5)
    assert orbitstats.sup_perm(seg_x, seg_y) == Fraction(2, 5)
    assert orbitstats.exceedance(seg_x, seg_y, Fraction(1, 10)) == 0
    share = orbitstats.segment_stat(
        seg_x, seg_y, SegmentStat(StatKind.BESICOVITCH_EXCEEDANCE, Fraction(1, 10))
    )
    assert share == StatValue(Fraction(1))

    # Off the period the multisets differ in two places
    assert orbitstats.weak_mean(seg_x.prefix(3), seg_y.prefix(3)) == Fraction(1, 5)


def test_orbitstats_doubling_and_shift():
    """Test weak-mean asymptotic pairs that stay apart pointwise."""
    doubling = SystemDescriptor.doubling()
    seg_x, seg_y = _segments(doubling, CirclePoint(Fraction(1, 3)), CirclePoint(Fraction(2, 3)), 4)
    assert orbitstats.weak_mean(seg_x, seg_y) == 0
    assert orbitstats.besicovitch(seg_x, seg_y) == Fraction(1, 3)

    shift = SystemDescriptor.full_shift(2, 16)
    x = SymbolPoint(SymbolStream(PeriodicRule((), (0, 1))))
    y = SymbolPoint(SymbolStream(PeriodicRule((), (1, 0))))
    seg_x, seg_y = _segments(shift, x, y, 8)
    assert orbitstats.weak_mean(seg_x, seg_y) == 0
    value = orbitstats.segment_stat(seg_x, seg_y, SegmentStat(StatKind.BESICOVITCH))
    assert value.value == 1 - Fraction(1, 1 << 16)
    assert value.bound == Fraction(1, 1 << 16)


def test_orbitstats_exceedance_truncation_bound():
    """Test that exceedance shares cover distances hidden by truncation."""
    shift = SystemDescriptor.full_shift(2, 8)
    zero = SymbolPoint(SymbolStream(PeriodicRule((), (0,))))
    # T y = 01000000 1^inf: truncated distance 1/4, true distance 1/4 + 1/256
    y = SymbolPoint(SymbolStream(PeriodicRule((0, 0, 1, 0, 0, 0, 0, 0, 0), (1,))))
    seg_x, seg_y = _segments(shift, zero, y, 1)
    assert orbitstats.segment_stat(seg_x, seg_y, SegmentStat(StatKind.WEAK_MEAN)) == StatValue(
        Fraction(1, 4), Fraction(1, 256)
    )
    for kind in (StatKind.EXCEEDANCE, StatKind.BESICOVITCH_EXCEEDANCE):
        share = orbitstats.segment_stat(seg_x, seg_y, SegmentStat(kind, Fraction(1, 4)))
        assert share == StatValue(Fraction(0), Fraction(1))
        # Far from the threshold the count is exact
        share = orbitstats.segment_stat(seg_x, seg_y, SegmentStat(kind, Fraction(1, 2)))
        assert share == StatValue(Fraction(0))

    # Thresholds below the bound count every pair
    share = orbitstats.segment_stat(seg_x, seg_y, SegmentStat(StatKind.EXCEEDANCE, Fraction(1, 512)))
    assert share == StatValue(Fraction(1))


@pytest.mark.parametrize(
    "system,x,y",
    [
        (SystemDescriptor.rotation(Fraction(34, 55)), CirclePoint(Fraction(1, 7)), CirclePoint(Fraction(5, 9))),
        (SystemDescriptor.tent(), IntervalPoint(Fraction(2, 9)), IntervalPoint(Fraction(7, 11))),
        (
            SystemDescriptor.full_shift(3, 10),
            SymbolPoint(SymbolStream(PeriodicRule((2,), (0, 1, 1), 3))),
            SymbolPoint(SymbolStream(PeriodicRule((), (2, 0), 3))),
        ),
    ],
)
def test_orbitstats_ordering(system, x, y):
    """Test that F_n <= B_n <= sup over permutations."""
    seg_x, seg_y = _segments(system, x, y, 24)
    for n in (1, 5, 12, 24):
        a, b = seg_x.prefix(n), seg_y.prefix(n)
        assert orbitstats.weak_mean(a, b) <= orbitstats.besicovitch(a, b) <= orbitstats.sup_perm(a, b)
        assert orbitstats.weak_mean(a, b) == orbitstats.weak_mean(b, a)


def test_orbitstats_segment_checks():
    """Test that mismatched segments are rejected."""
    seg_x = systems.orbit_segment(FIFTH, CirclePoint(Fraction(0)), 4)
    with pytest.raises(ValueError):
        orbitstats.weak_mean(seg_x, systems.orbit_segment(FIFTH, CirclePoint(Fraction(0)), 5))
    with pytest.raises(ValueError):
        orbitstats.weak_mean(
            seg_x, systems.orbit_segment(SystemDescriptor.rotation(Fraction(1, 3)), CirclePoint(Fraction(0)), 4)
        )


def test_orbitstats_estimate_limit():
    """Test sampling along a schedule."""
    est = orbitstats.estimate_limit(lambda n: Fraction(1, n), [1, 2, 4, 8])
    assert est.limsup_estimate == Fraction(1, 2)
    assert est.liminf_estimate == Fraction(1, 8)
    assert not est.converged

    est = orbitstats.estimate_limit(
        lambda n: StatValue(Fraction(1, 4), Fraction(1, n)), [2, 4, 8], tolerance=0
    )
    assert est.converged
    assert est.error_bound == Fraction(1, 2)

    with pytest.raises(ValueError):
        orbitstats.estimate_limit(lambda n: Fraction(0), [4, 2])
    with pytest.raises(ValueError):
        orbitstats.estimate_limit(lambda n: Fraction(0), [])


def test_orbitstats_pair_relation():
    """Test relation verdicts for a pair on one periodic orbit."""
    report = orbitstats.pair_relation(
        FIFTH, CirclePoint(Fraction(0)), CirclePoint(Fraction(2, 5)), [10, 20, 40]
    )
    assert report.weak_mean_asymptotic.consistent
    assert report.weak_mean_proximal.consistent
    assert not report.mean_asymptotic.consistent
    assert not report.strong_mean_proximal.consistent
    assert not report.proximal.consistent
    assert report.mean_asymptotic.estimate.limsup_estimate == Fraction(2, 5)

    # A pair compared with itself is in every relation
    report = orbitstats.pair_relation(FIFTH, CirclePoint(Fraction(1, 3)), CirclePoint(Fraction(1, 3)), [5, 10, 15])
    assert report.proximal.consistent
    assert report.mean_asymptotic.consistent


def test_orbitstats_densities():
    """Test upper and lower density estimates."""
    even = orbitstats.density_estimate(orbitstats.even_numbers(1000), [100, 200, 400, 800])
    assert even.limsup_estimate == even.liminf_estimate == Fraction(1, 2)
    assert even.converged

    # Blocks [4^k, 2*4^k) oscillate between about 1/3 and 2/3
    view = orbitstats.four_blocks(5000)
    est = orbitstats.density_estimate(view, [512, 1024, 2048, 4096])
    assert est.samples[0] == (512, Fraction(341, 512))
    assert est.limsup_estimate == Fraction(1365, 2048)
    assert est.liminf_estimate == Fraction(341, 1024)
    assert not est.converged

    # Upper density of F and lower density of its complement sum to 1
    rest = orbitstats.density_estimate(view.complement(), [512, 1024, 2048, 4096])
    assert est.limsup_estimate + rest.liminf_estimate == 1
    assert est.liminf_estimate + rest.limsup_estimate == 1

    with pytest.raises(ValueError):
        orbitstats.density_estimate(view, [8000])


def test_orbitstats_observables():
    """Test the registered observables."""
    circle = SpaceDescriptor.circle()
    interval = SpaceDescriptor.interval()
    assert orbitstats.coordinate_observable(circle).lipschitz is None
    assert orbitstats.coordinate_observable(interval).lipschitz == 1
    with pytest.raises(ValueError):
        orbitstats.coordinate_observable(SpaceDescriptor.product(circle, interval))

    half = CirclePoint(Fraction(1, 2))
    f = orbitstats.make_observable(circle, {"name": "distance_to", "point": half.to_payload()})
    assert f(CirclePoint(Fraction(0))) == Fraction(1, 2)
    assert f.value_range == (0, Fraction(1, 2))

    g = orbitstats.make_observable(circle, {"name": "smoothed_indicator", "point": half.to_payload(), "q": 8})
    assert g(CirclePoint(Fraction(1, 4))) == 1
    assert g(CirclePoint(Fraction(7, 16))) == Fraction(1, 2)
    assert g.lipschitz == 8

    assert orbitstats.make_observable(circle, {"name": "constant", "value": "1/3"})(half) == Fraction(1, 3)
    assert orbitstats.make_observable(interval, "coordinate")(IntervalPoint(Fraction(2, 3))) == Fraction(2, 3)
    with pytest.raises(ValueError):
        orbitstats.make_observable(circle, "temperature")

    assert [o.name for o in orbitstats.default_observables(circle)] == [
        "constant",
        "distance_to",
        "smoothed_indicator",
    ]
    assert "coordinate" in [o.name for o in orbitstats.default_observables(interval)]


def test_orbitstats_sandwich_check():
    """Test the observable exceedance sandwich."""
    f = orbitstats.coordinate_observable(FIFTH.space)
    seg_x, seg_y = _segments(FIFTH, CirclePoint(Fraction(0)), CirclePoint(Fraction(2, 5)), 3)
    report = orbitstats.stat_sandwich_check(seg_x, seg_y, f, Fraction(1, 10))
    assert report.exceedance_count == 2
    assert report.matched_sum == Fraction(3, 5)
    assert report.lower == Fraction(1, 5)
    assert report.upper == Fraction(21, 10)

    with pytest.raises(ValueError):
        orbitstats.stat_sandwich_check(seg_x, seg_y, f, 0)

    # An observable leaving its declared range breaks the upper bound
    bad = Observable("bad", lambda p: p.coordinate * 10, None, (Fraction(0), Fraction(1, 100)))
    with pytest.raises(InvariantError):
        orbitstats.stat_sandwich_check(seg_x, seg_y, bad, 1)


def test_orbitstats_observable_pseudometric_estimate():
    """Test the grid estimate of the observable pseudometric."""
    f = orbitstats.coordinate_observable(FIFTH.space)
    grid = [Fraction(1, 2), Fraction(1, 8), Fraction(1, 16)]
    schedule = [10, 20, 40]

    same_orbit = orbitstats.observable_pseudometric_estimate(
        FIFTH, CirclePoint(Fraction(0)), CirclePoint(Fraction(2, 5)), f, grid, schedule
    )
    assert same_orbit == Fraction(1, 16)

    # Coordinates stay exactly 1/10 apart
    offset = orbitstats.observable_pseudometric_estimate(
        FIFTH, CirclePoint(Fraction(0)), CirclePoint(Fraction(1, 10)), f, grid, schedule
    )
    assert offset == Fraction(1, 8)

    with pytest.raises(ValueError):
        orbitstats.observable_pseudometric_estimate(
            FIFTH, CirclePoint(Fraction(0)), CirclePoint(Fraction(0)), f, grid, []
        )


@pytest.mark.slow
def test_orbitstats_rotation_benchmark():
    """Test the golden rotation: constant B_n and vanishing F_n."""
    system = SystemDescriptor.rotation(systems.golden_angle())
    seg_x, seg_y = _segments(system, CirclePoint(Fraction(0)), CirclePoint(Fraction(1, 4)), 4096)
    for n in (256, 1024, 4096):
        assert orbitstats.besicovitch(seg_x.prefix(n), seg_y.prefix(n)) == Fraction(1, 4)
    assert orbitstats.weak_mean(seg_x, seg_y) <= Fraction(1, 50)


@pytest.mark.slow
def test_orbitstats_doubling_benchmark():
    """Test a typical doubling orbit against the fixed point."""
    system = SystemDescriptor.doubling()
    x = systems.sample_state(system, SamplerStrategy(SamplerKind.STREAM), 0)
    seg_x, seg_y = _segments(system, x, CirclePoint(Fraction(0)), 4096)
    value = orbitstats.segment_stat(seg_x, seg_y, SegmentStat(StatKind.WEAK_MEAN))
    assert Fraction(1, 5) <= value.value <= Fraction(3, 10)
    assert value.bound <= Fraction(1, 1 << 63)


def test_orbitstats_density_benchmark():
    """Test the four-block set up to 4^10."""
    view = orbitstats.four_blocks(4**10)
    est = orbitstats.density_estimate(view, [2 * 4**8, 4**9, 2 * 4**9, 4**10])
    assert est.limsup_estimate >= Fraction(63, 100)
    assert est.liminf_estimate <= Fraction(37, 100)
