# SPDX-License-Identifier: MIT
"""Tests for the point probes, sensitivity searches, tuple search and dichotomy."""

from dataclasses import replace
from fractions import Fraction

import pytest

from pywmeq import classify, orbitstats, systems
from pywmeq.types import (
    CirclePoint,
    DichotomySide,
    IntervalPoint,
    ProbeConfig,
    SamplerKind,
    SamplerStrategy,
    SegmentStat,
    SensitivityMode,
    StatKind,
    SymbolPoint,
    SystemDescriptor,
    TupleKind,
    Verdict,
    constant_stream,
)

ROTATION = SystemDescriptor.rotation(Fraction(89, 144))
DOUBLING = SystemDescriptor.doubling()

RADII = [Fraction(1, 8), Fraction(1, 32), Fraction(1, 128), Fraction(1, 512)]


@pytest.fixture
def isometry_config():
    """Small probe configuration for the rotation."""
    return ProbeConfig(
        delta_grid=RADII,
        schedule=[144, 288, 576],
        samples_per_ball=4,
        centers=2,
        late_n=288,
    )


@pytest.fixture
def expanding_config():
    """Probe configuration for the doubling map; dyadic candidates collapse onto 0."""
    return ProbeConfig(
        delta_grid=RADII,
        schedule=[256, 512, 1024],
        samplers=[SamplerStrategy(SamplerKind.DYADIC), SamplerStrategy(SamplerKind.STREAM)],
        samples_per_ball=4,
        centers=2,
        tolerance=Fraction(1, 10),
        late_n=512,
    )


def test_classify_rotation_points(isometry_config):
    """Test that rotation points pass every point probe."""
    x = CirclePoint(Fraction(1, 3))
    weak = classify.probe_weak_mean_equicontinuous_point(ROTATION, x, isometry_config)
    assert weak.verdict == Verdict.EQUICONTINUOUS
    assert weak.witnesses == []
    assert classify.probe_equicontinuous_in_mean_point(ROTATION, x, isometry_config).verdict == Verdict.EQUICONTINUOUS
    assert classify.probe_pair_in_ball(ROTATION, x, Fraction(1, 10), isometry_config).verdict == Verdict.EQUICONTINUOUS
    assert (
        classify.probe_pair_in_ball(ROTATION, x, Fraction(1, 10), isometry_config, star=True).verdict
        == Verdict.EQUICONTINUOUS
    )
    assert classify.probe_density_t_equicontinuity(ROTATION, x, Fraction(1, 2), isometry_config).verdict == (
        Verdict.EQUICONTINUOUS
    )

    # t = 0 makes every cell trivial
    trivial = classify.probe_density_t_equicontinuity(ROTATION, x, 0, isometry_config)
    assert trivial.verdict == Verdict.EQUICONTINUOUS
    assert all(d.get("trivial") for d in trivial.diagnostics)

    with pytest.raises(ValueError):
        classify.probe_density_t_equicontinuity(ROTATION, x, 2, isometry_config)
    with pytest.raises(TypeError):
        classify.probe_weak_mean_equicontinuous_point(ROTATION, IntervalPoint(Fraction(0)), isometry_config)


def test_classify_observable_probe(isometry_config):
    """Test observable probes and the contraction check."""
    x = CirclePoint(Fraction(1, 3))
    f = orbitstats.distance_to_observable(ROTATION.space, CirclePoint(Fraction(0)))
    verdict = classify.probe_observable_equicontinuity(ROTATION, x, f, isometry_config)
    assert verdict.verdict == Verdict.EQUICONTINUOUS
    assert verdict.diagnostics[-1]["contraction"]["checked"] > 0

    g = orbitstats.coordinate_observable(ROTATION.space)
    verdict = classify.probe_observable_equicontinuity(ROTATION, x, g, isometry_config, "inMean")
    assert "contraction" not in verdict.diagnostics[-1]


def test_classify_observable_cross_check(isometry_config):
    """Test that every Lipschitz observable passes at a weakly mean equicontinuous point."""
    x = CirclePoint(Fraction(1, 3))
    f = orbitstats.coordinate_observable(ROTATION.space)
    for mode in ("mean", "inMean"):
        verdict = classify.probe_observable_equicontinuity(ROTATION, x, f, isometry_config, mode)
        check = next(d["crossCheck"] for d in verdict.diagnostics if "crossCheck" in d)
        assert check["weakMean"] == "equicontinuous-consistent"
        assert check["observables"] == {
            "constant": "equicontinuous-consistent",
            "distance_to": "equicontinuous-consistent",
            "smoothed_indicator": "equicontinuous-consistent",
        }
        assert check["consistent"]

    # No observables are probed when the point itself is not settled
    short = ProbeConfig(delta_grid=RADII, schedule=[8], samples_per_ball=2)
    verdict = classify.probe_observable_equicontinuity(ROTATION, x, f, short)
    check = next(d["crossCheck"] for d in verdict.diagnostics if "crossCheck" in d)
    assert check["weakMean"] == "inconclusive"
    assert check["observables"] == {}
    assert check["consistent"]


def test_classify_rotation_sensitivity(isometry_config):
    """Test that the rotation shows no sensitivity in any mode."""
    verdict = classify.estimate_sensitivity_constant(ROTATION, isometry_config)
    assert verdict.verdict == Verdict.EQUICONTINUOUS
    assert verdict.achieved_constant is None

    report = classify.check_mean_vs_in_mean_agreement(ROTATION, isometry_config)
    assert report.note == "agreement"
    assert report.strong_in_mean.verdict == Verdict.EQUICONTINUOUS
    assert report.mean_sensitive.verdict == Verdict.EQUICONTINUOUS

    # Without centres nothing can be concluded
    empty = ProbeConfig(delta_grid=RADII, schedule=[8, 16, 32], centers=0)
    assert classify.estimate_sensitivity_constant(ROTATION, empty).verdict == Verdict.INCONCLUSIVE


@pytest.mark.slow
def test_classify_doubling_sensitivity(expanding_config):
    """Test that the doubling map is strongly mean sensitive."""
    verdict = classify.estimate_sensitivity_constant(DOUBLING, expanding_config)
    assert verdict.verdict == Verdict.SENSITIVE
    assert Fraction(1, 5) <= verdict.achieved_constant < Fraction(1, 2)
    assert len(verdict.witnesses) == expanding_config.centers * len(RADII)
    for w in verdict.witnesses:
        assert w.value - w.bound > verdict.achieved_constant

    late = classify.estimate_sensitivity_constant(DOUBLING, expanding_config, SensitivityMode.STRONG_IN_MEAN)
    assert late.verdict == Verdict.SENSITIVE
    assert all(w.n >= expanding_config.late_n for w in late.witnesses)

    density = classify.probe_density_sensitivity(DOUBLING, expanding_config)
    assert density.verdict == Verdict.SENSITIVE
    assert density.achieved_constant >= Fraction(1, 5)


@pytest.mark.slow
def test_classify_doubling_point(expanding_config):
    """Test that a typical doubling point is not a weak-mean equicontinuity point."""
    x = systems.sample_state(DOUBLING, SamplerStrategy(SamplerKind.STREAM), 3)
    verdict = classify.probe_weak_mean_equicontinuous_point(DOUBLING, x, expanding_config)
    assert verdict.verdict == Verdict.SENSITIVE
    assert len(verdict.witnesses) == len(RADII)


@pytest.mark.slow
def test_classify_witnesses_recompute(expanding_config):
    """Test that sensitive witnesses reproduce their statistic from scratch."""
    report = classify.check_mean_vs_in_mean_agreement(DOUBLING, expanding_config)
    for mode, verdict in (
        (SensitivityMode.STRONG_MEAN, report.strong_mean),
        (SensitivityMode.MEAN_SENSITIVE, report.mean_sensitive),
    ):
        assert verdict.verdict == Verdict.SENSITIVE
        stat = SegmentStat(classify.SENSITIVITY_MODES[mode][0])
        for w in verdict.witnesses:
            seg_x = systems.orbit_segment(DOUBLING, w.x, w.n)
            seg_y = systems.orbit_segment(DOUBLING, w.y, w.n)
            fresh = orbitstats.segment_stat(seg_x, seg_y, stat)
            assert fresh.value == w.value
            assert fresh.bound <= w.bound
            assert fresh.value - w.bound > verdict.achieved_constant
            assert orbitstats.segment_stat(seg_x, seg_y, stat) == fresh


@pytest.mark.slow
def test_classify_in_mean_dominates(expanding_config):
    """Test that the in-mean searches witness every ball the limsup searches do."""
    # Every tail sample counts as late, so the late maximum bounds the limsup reading
    config = replace(expanding_config, late_n=expanding_config.schedule[0])
    report = classify.check_mean_vs_in_mean_agreement(DOUBLING, config)
    for strong, weak in (
        (report.strong_mean, report.strong_in_mean),
        (report.mean_sensitive, report.sensitive_in_mean),
    ):
        assert strong.verdict == Verdict.SENSITIVE
        assert weak.verdict == Verdict.SENSITIVE
        assert weak.achieved_constant >= strong.achieved_constant
        balls = [(w.x, w.radius) for w in weak.witnesses]
        assert all((w.x, w.radius) in balls for w in strong.witnesses)


def test_classify_frequencies_monotone_in_epsilon():
    """Test exceedance shares falling and joint-visit frequencies rising with epsilon."""
    grid = [Fraction(1, 50), Fraction(1, 20), Fraction(1, 10), Fraction(1, 4), Fraction(1, 2)]
    x = systems.sample_state(DOUBLING, SamplerStrategy(SamplerKind.STREAM), 1)
    y = systems.sample_state(DOUBLING, SamplerStrategy(SamplerKind.STREAM), 2)
    seg_x = systems.orbit_segment(DOUBLING, x, 512)
    seg_y = systems.orbit_segment(DOUBLING, y, 512)
    for kind in (StatKind.EXCEEDANCE, StatKind.BESICOVITCH_EXCEEDANCE):
        shares = [orbitstats.segment_stat(seg_x, seg_y, SegmentStat(kind, eps)) for eps in grid]
        assert all(a.value >= b.value for a, b in zip(shares, shares[1:]))
        assert all(a.value + a.bound >= b.value + b.bound for a, b in zip(shares, shares[1:]))

    # Truncated symbolic shares stay monotone with their bounds
    shift = SystemDescriptor.full_shift(2, 6)
    u = systems.sample_state(shift, SamplerStrategy(SamplerKind.STREAM), 1)
    v = systems.sample_state(shift, SamplerStrategy(SamplerKind.STREAM), 2)
    seg_u = systems.orbit_segment(shift, u, 64)
    seg_v = systems.orbit_segment(shift, v, 64)
    shares = [orbitstats.segment_stat(seg_u, seg_v, SegmentStat(StatKind.EXCEEDANCE, eps)) for eps in grid]
    assert all(a.value >= b.value for a, b in zip(shares, shares[1:]))
    assert all(a.value + a.bound >= b.value + b.bound for a, b in zip(shares, shares[1:]))

    anchor = (CirclePoint(Fraction(0)), CirclePoint(Fraction(1, 2)))
    visits = [classify.joint_visit_frequency(DOUBLING, x, y, anchor, eps, 512) for eps in reversed(grid)]
    assert all(a[0] <= b[0] and a[1] <= b[1] for a, b in zip(visits, visits[1:]))


def test_classify_joint_visit_frequency():
    """Test joint-visit frequencies on fixed points of the full shift."""
    shift = SystemDescriptor.full_shift(2, 16)
    zeros = SymbolPoint(constant_stream(0))
    ones = SymbolPoint(constant_stream(1))
    low, high = classify.joint_visit_frequency(shift, zeros, ones, (zeros, ones), Fraction(1, 4), 32)
    assert low == high == 1
    low, high = classify.joint_visit_frequency(shift, zeros, zeros, (zeros, ones), Fraction(1, 4), 32)
    assert low == high == 0


@pytest.mark.slow
def test_classify_tuple_search():
    """Test that the full shift has sensitive tuples and the rotation has none."""
    config = ProbeConfig(
        epsilon_grid=[Fraction(1, 4), Fraction(1, 10)],
        delta_grid=[Fraction(1, 8), Fraction(1, 32)],
        schedule=[256, 512, 1024],
        samples_per_ball=2,
        centers=2,
        tolerance=Fraction(1, 20),
        late_n=512,
    )
    shift = SystemDescriptor.full_shift(2, 16)
    zeros = SymbolPoint(constant_stream(0))
    ones = SymbolPoint(constant_stream(1))

    for kind in (TupleKind.MEAN, TupleKind.IN_MEAN, TupleKind.DENSITY, TupleKind.WEAK_IN_MEAN):
        found = classify.search_sensitive_tuples(shift, config, kind)
        fixed = [c for c in found if c.anchor == (zeros, ones)]
        assert len(fixed) == len(config.epsilon_grid)
        for candidate in fixed:
            assert candidate.frequency_bound > Fraction(9, 10)
            assert all(w.max_frequency >= w.frequency for w in candidate.witnesses)

    rotation = ProbeConfig(
        epsilon_grid=[Fraction(1, 10), Fraction(1, 20)],
        delta_grid=[Fraction(1, 8), Fraction(1, 32)],
        schedule=[144, 288, 576],
        samples_per_ball=2,
        centers=2,
    )
    assert classify.search_sensitive_tuples(ROTATION, rotation) == []
    golden = SystemDescriptor.rotation(systems.golden_angle())
    for kind in TupleKind:
        assert classify.search_sensitive_tuples(golden, rotation, kind) == []

    with pytest.raises(ValueError):
        classify.search_sensitive_tuples(ROTATION, ProbeConfig(schedule=[8], anchors=[]))


def test_classify_density_equivalence(isometry_config):
    """Test that weak-mean and density-t probes agree on the rotation."""
    report = classify.check_density_equivalence(ROTATION, isometry_config)
    assert report.agree
    assert not report.inconclusive
    assert len(report.rows) == isometry_config.centers
    assert all(row["weakMean"] == Verdict.EQUICONTINUOUS for row in report.rows)

    report = classify.check_density_equivalence(
        ROTATION, isometry_config, SamplerStrategy(SamplerKind.RATIONAL_GRID, 7)
    )
    assert report.agree


def test_classify_dichotomy_rotation(isometry_config):
    """Test the equicontinuous side of the dichotomy."""
    report = classify.dichotomy_report(ROTATION, isometry_config)
    assert report.side == DichotomySide.EQUICONTINUOUS
    assert report.mean_side == report.in_mean_side == DichotomySide.EQUICONTINUOUS
    assert len(report.point_verdicts) == 2 * isometry_config.centers
    assert {e["probe"] for e in report.evidence} >= {"weakMeanPoint", "inMeanPoint", "strongMean"}


@pytest.mark.slow
def test_classify_dichotomy_doubling(expanding_config):
    """Test the sensitive side of the dichotomy."""
    report = classify.dichotomy_report(DOUBLING, expanding_config)
    assert report.side == DichotomySide.SENSITIVE
    assert report.sensitivity["strongMean"].verdict == Verdict.SENSITIVE
    assert not any(v.verdict == Verdict.EQUICONTINUOUS for v in report.point_verdicts)
