# SPDX-License-Identifier: MIT
"""Tests for the dynamical maps, angles and system-aware samplers."""

from fractions import Fraction

import pytest

from pywmeq import spaces, systems
from pywmeq.types import (
    CirclePoint,
    IntervalPoint,
    PeriodicRule,
    ProductPoint,
    SamplerKind,
    SamplerStrategy,
    SeededRule,
    SymbolPoint,
    SymbolStream,
    SystemDescriptor,
    constant_stream,
    word_stream,
)


@pytest.fixture
def rotation():
    """Rotation by a Fibonacci ratio."""
    return SystemDescriptor.rotation(Fraction(34, 55))


def test_systems_step(rotation):
    """Test one application of every map."""
    assert systems.step(rotation, CirclePoint(Fraction(1, 2))) == CirclePoint(Fraction(13, 110))

    doubling = SystemDescriptor.doubling()
    assert systems.step(doubling, CirclePoint(Fraction(3, 4))) == CirclePoint(Fraction(1, 2))

    tent = SystemDescriptor.tent()
    assert systems.step(tent, IntervalPoint(Fraction(1, 3))) == IntervalPoint(Fraction(2, 3))
    assert systems.step(tent, IntervalPoint(Fraction(2, 3))) == IntervalPoint(Fraction(2, 3))
    assert systems.step(tent, IntervalPoint(Fraction(1))) == IntervalPoint(Fraction(0))

    shift = SystemDescriptor.full_shift()
    p = SymbolPoint(word_stream((1, 0, 1)))
    assert systems.step(shift, p).stream.word(3) == (0, 1, 0)

    product = SystemDescriptor.product(rotation, shift)
    q = systems.step(product, ProductPoint(CirclePoint(Fraction(0)), p))
    assert q.left == CirclePoint(Fraction(34, 55))
    assert q.right.stream.word(2) == (0, 1)

    with pytest.raises(TypeError):
        systems.step(rotation, IntervalPoint(Fraction(0)))


def test_systems_stream_backed_maps():
    """Test that doubling and tent act as shifts on binary expansions."""
    stream = SymbolStream(SeededRule(12))
    p = CirclePoint.from_stream(stream, 32)
    q = systems.iterate(SystemDescriptor.doubling(32), p, 5)
    assert q.stream.word(16) == stream.word(16, start=5)
    assert q.error == Fraction(1, 1 << 32)

    # Tent on expansions: shift, complemented after a leading 1
    x = IntervalPoint.from_stream(SymbolStream(PeriodicRule((1, 0), (0,))), 16)
    y = systems.step(SystemDescriptor.tent(16), x)
    assert x.coordinate == Fraction(1, 2)
    assert y.coordinate == 1 - Fraction(1, 1 << 16)
    assert abs(y.coordinate - 1) <= y.error


def test_systems_orbit_segment(rotation):
    """Test that orbit segments start at T^1 x."""
    seg = systems.orbit_segment(rotation, CirclePoint(Fraction(0)), 4)
    assert seg.length == 4
    assert seg.base == CirclePoint(Fraction(0))
    assert [s.coordinate for s in seg.states] == [Fraction(34 * k % 55, 55) for k in range(1, 5)]
    assert seg.prefix(2).states == seg.states[:2]
    assert seg.prefix(4) is seg

    with pytest.raises(ValueError):
        systems.orbit_segment(rotation, CirclePoint(Fraction(0)), 0)
    with pytest.raises(ValueError):
        seg.prefix(5)


def test_systems_angles():
    """Test the golden angle, continued fractions and convergents."""
    golden = systems.golden_angle(1000)
    assert golden == Fraction(987, 1597)
    assert systems.continued_fraction(golden)[:6] == [0, 1, 1, 1, 1, 1]
    assert systems.continued_fraction(Fraction(7, 3)) == [2, 3]
    assert systems.convergents([0, 1, 1, 1, 1]) == [
        Fraction(0),
        Fraction(1),
        Fraction(1, 2),
        Fraction(2, 3),
        Fraction(3, 5),
    ]
    assert systems.golden_angle().denominator > 10**18


def test_systems_sturmian():
    """Test rotation codings and sturmian sampling."""
    angle = Fraction(2, 5)
    assert systems.sturmian_code(angle, Fraction(0), 5) == (0, 0, 1, 0, 1)
    system = SystemDescriptor.sturmian(angle, 16)
    p = systems.sample_state(system, SamplerStrategy(SamplerKind.UNIFORM), 3)
    # Shifting a coding codes the rotated point
    start = p.stream.rule.start
    assert systems.step(system, p).stream.word(10) == systems.sturmian_code(angle, start + angle, 10)

    for seed in range(4):
        y = systems.sample_state_in_ball(system, p, Fraction(1, 16), SamplerStrategy(SamplerKind.DYADIC), seed)
        assert y.stream.word(5) == p.stream.word(5)
        assert y.stream.rule.angle == angle

    with pytest.raises(ValueError):
        systems.sample_state(system, SamplerStrategy(SamplerKind.PERIODIC_TAIL), 0)


def test_systems_sampling_in_balls():
    """Test system-aware ball sampling for products."""
    system = SystemDescriptor.product(SystemDescriptor.doubling(16), SystemDescriptor.full_shift(2, 16))
    center = systems.sample_state(system, SamplerStrategy(SamplerKind.UNIFORM), 0)
    for seed in range(6):
        y = systems.sample_state_in_ball(system, center, Fraction(1, 8), SamplerStrategy(SamplerKind.UNIFORM), seed)
        assert spaces.distance(system.space, center, y) + spaces.distance_bound(system.space, center, y) < Fraction(1, 8)


def test_systems_default_samplers():
    """Test the default centre and ball strategies."""
    center, balls = systems.default_samplers(SystemDescriptor.doubling())
    assert center.kind == SamplerKind.STREAM
    assert SamplerStrategy(SamplerKind.DYADIC) in balls

    center, balls = systems.default_samplers(SystemDescriptor.rotation(Fraction(1, 3)))
    assert center.kind == SamplerKind.UNIFORM

    product = SystemDescriptor.product(SystemDescriptor.tent(), SystemDescriptor.full_shift())
    center, balls = systems.default_samplers(product)
    assert balls
    for strategy in balls:
        center_point = systems.sample_state(product, SamplerStrategy(SamplerKind.UNIFORM), 1)
        systems.sample_state_in_ball(product, center_point, Fraction(1, 4), strategy, 2)


def test_systems_steer_into():
    """Test exact steering onto a target for shift-like maps."""
    doubling = SystemDescriptor.doubling()
    center = CirclePoint(Fraction(5, 7))
    target = CirclePoint(Fraction(1, 3))
    y, m = systems.steer_into(doubling, center, Fraction(1, 10), target)
    assert spaces.distance(doubling.space, center, y) < Fraction(1, 10)
    assert systems.iterate(doubling, y, m) == target

    shift = SystemDescriptor.full_shift(3, 16)
    center = SymbolPoint(SymbolStream(SeededRule(1, 3)))
    target = SymbolPoint(constant_stream(2, 3))
    y, m = systems.steer_into(shift, center, Fraction(1, 10), target)
    assert y.stream.word(m) == center.stream.word(m)
    assert systems.iterate(shift, y, m).stream.word(20) == (2,) * 20

    assert systems.steer_into(SystemDescriptor.rotation(Fraction(1, 3)), CirclePoint(Fraction(0)), Fraction(1, 4), CirclePoint(Fraction(0))) is None


def test_systems_anchor_grid():
    """Test the default tuple anchors."""
    assert len(systems.anchor_grid(SystemDescriptor.doubling())) == 6
    assert len(systems.anchor_grid(SystemDescriptor.tent())) == 10
    assert len(systems.anchor_grid(SystemDescriptor.full_shift(2))) == 6
    assert len(systems.anchor_grid(SystemDescriptor.sturmian(Fraction(2, 5)), 3)) == 6
    assert systems.is_expanding(SystemDescriptor.doubling())
    assert not systems.is_expanding(SystemDescriptor.rotation(Fraction(1, 3)))
    assert systems.is_expanding(
        SystemDescriptor.product(SystemDescriptor.rotation(Fraction(1, 3)), SystemDescriptor.tent())
    )
