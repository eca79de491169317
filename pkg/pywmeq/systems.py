# SPDX-License-Identifier: MIT
"""Dynamical maps, orbit segments and system-aware point samplers."""

from fractions import Fraction
from itertools import combinations
import logging
import random
from typing import List, Optional, Sequence, Tuple

from . import spaces
from .types import (
    CirclePoint,
    IntervalPoint,
    OrbitSegment,
    PeriodicRule,
    PrefixedRule,
    ProductPoint,
    SamplerKind,
    SamplerStrategy,
    StatePoint,
    SturmianRule,
    SymbolPoint,
    SymbolStream,
    SystemDescriptor,
    SystemKind,
    constant_stream,
)
from .utils import derive_seed

logger = logging.getLogger(__name__)

#: Default lower bound on the denominator of the golden rotation angle.
GOLDEN_MIN_DENOMINATOR = 10**18


def _step(system: SystemDescriptor, p) -> StatePoint:
    kind = system.kind
    if kind == SystemKind.ROTATION:
        return CirclePoint((p.coordinate + system.angle) % 1, error=p.error)
    if kind == SystemKind.DOUBLING:
        if p.stream is not None:
            return CirclePoint.from_stream(p.stream.shift(), p.depth)
        return CirclePoint((2 * p.coordinate) % 1, error=min(2 * p.error, Fraction(1, 2)))
    if kind == SystemKind.TENT:
        if p.stream is not None:
            stream = p.stream.shift()
            if p.stream.symbol(0) == 1:
                stream = stream.complement()
            return IntervalPoint.from_stream(stream, p.depth)
        c = p.coordinate
        return IntervalPoint(
            2 * c if c <= Fraction(1, 2) else 2 - 2 * c, error=min(2 * p.error, Fraction(1))
        )
    if kind in (SystemKind.FULL_SHIFT, SystemKind.STURMIAN):
        return SymbolPoint(p.stream.shift())
    return ProductPoint(_step(system.left, p.left), _step(system.right, p.right))  # type: ignore


def step(system: SystemDescriptor, p: StatePoint) -> StatePoint:
    """
    Apply the map T once.

    - rotation: ``(p + angle) mod 1``;
    - doubling: ``2p mod 1``, a left shift of the binary stream for stream-backed points;
    - tent: ``2p`` if ``p <= 1/2`` else ``2 - 2p``; on streams a shift, complemented
      when the leading bit is 1;
    - fullShift and sturmian: drop the first symbol;
    - product: componentwise.

    :raises TypeError: If ``p`` is not in the system's space.
    """
    spaces.check_point(system.space, p)
    return _step(system, p)


def iterate(system: SystemDescriptor, p: StatePoint, count: int) -> StatePoint:
    """Return T^count p."""
    if count < 0:
        raise ValueError("Iteration count must be non-negative")
    spaces.check_point(system.space, p)
    for _ in range(count):
        p = _step(system, p)
    return p


def orbit_segment(system: SystemDescriptor, x: StatePoint, n: int) -> OrbitSegment:
    """
    Return the segment T^1 x, ..., T^n x.

    :param system: The system.
    :param x: Base point; T^0 x is not part of the segment.
    :param n: Segment length.
    :raises ValueError: If n < 1.
    :raises TypeError: If ``x`` is not in the system's space.
    """
    if n < 1:
        raise ValueError("Orbit segments need n >= 1")
    spaces.check_point(system.space, x)
    states = []
    p = x
    for _ in range(n):
        p = _step(system, p)
        states.append(p)
    return OrbitSegment(system, x, tuple(states))


#
# Rotation codings and angles
#


def sturmian_code(angle: Fraction, x: Fraction, n: int) -> Tuple[int, ...]:
    """
    Binary coding of the rotation orbit of ``x``.

    Symbol j is 1 iff ``(x + j*angle) mod 1`` lies in ``[1 - angle, 1)``.

    :raises ValueError: If the angle is outside (0, 1) or n is negative.
    """
    if n < 0:
        raise ValueError("Word length must be non-negative")
    rule = SturmianRule(Fraction(angle), Fraction(x) % 1)
    return tuple(rule.symbol(j) for j in range(n))


def sturmian_point(angle: Fraction, x: Fraction) -> SymbolPoint:
    """The symbolic point coding the rotation orbit of ``x``."""
    return SymbolPoint(SymbolStream(SturmianRule(Fraction(angle), Fraction(x) % 1)))


def golden_angle(min_denominator: int = GOLDEN_MIN_DENOMINATOR) -> Fraction:
    """
    Fibonacci convergent F_k / F_{k+1} of (sqrt(5) - 1) / 2 with F_{k+1} > min_denominator.

    Used as the exact stand-in for the irrational golden rotation.
    """
    a, b = 1, 1
    while b <= min_denominator:
        a, b = b, a + b
    return Fraction(a, b)


def continued_fraction(x: Fraction, max_terms: int = 64) -> List[int]:
    """Continued-fraction terms [a0; a1, a2, ...] of a rational."""
    terms = []
    x = Fraction(x)
    while len(terms) < max_terms:
        a = x.numerator // x.denominator
        terms.append(a)
        x -= a
        if x == 0:
            break
        x = 1 / x
    return terms


def convergents(terms: Sequence[int]) -> List[Fraction]:
    """
    Convergents h_k / k_k of a continued fraction.

    :param terms: Terms [a0; a1, a2, ...].
    :returns: One convergent per term.
    """
    h_prev, h = 1, 0
    k_prev, k = 0, 1
    ret = []
    for a in terms:
        h_prev, h = a * h_prev + h, h_prev
        k_prev, k = a * k_prev + k, k_prev
        ret.append(Fraction(h_prev, k_prev))
    return ret


#
# System-aware sampling
#


def _sturmian_start(strategy: SamplerStrategy, seed: int) -> Fraction:
    rng = random.Random(derive_seed("sturmian", strategy.label, seed))
    if strategy.kind in (SamplerKind.UNIFORM, SamplerKind.STREAM):
        return Fraction(rng.getrandbits(spaces.UNIFORM_BITS), 1 << spaces.UNIFORM_BITS)
    if strategy.kind == SamplerKind.DYADIC:
        depth = strategy.parameter or spaces.DEFAULT_DYADIC_DEPTH
        return Fraction(rng.randrange(1 << depth), 1 << depth)
    if strategy.kind == SamplerKind.RATIONAL_GRID:
        q = strategy.parameter or spaces.DEFAULT_GRID_DENOMINATOR
        return Fraction(rng.randrange(q), q)
    raise ValueError(f"Sampler {strategy.label} is not supported on sturmian systems")


def sample_state(system: SystemDescriptor, strategy: SamplerStrategy, seed: int) -> StatePoint:
    """
    Draw a point of the system's phase space.

    Sturmian systems draw codings of sampled rotation points, so that samples
    lie in the subshift rather than in the full sequence space.

    :raises ValueError: On unsupported strategy/system combinations.
    """
    if system.kind == SystemKind.STURMIAN:
        return sturmian_point(system.angle, _sturmian_start(strategy, seed))  # type: ignore
    if system.kind == SystemKind.PRODUCT:
        return ProductPoint(
            sample_state(system.left, strategy, derive_seed(seed, "left")),  # type: ignore
            sample_state(system.right, strategy, derive_seed(seed, "right")),  # type: ignore
        )
    return spaces.sample_point(system.space, strategy, seed)


def _sturmian_ball_point(
    rule: SturmianRule, radius: Fraction, strategy: SamplerStrategy, seed: int
) -> SymbolPoint:
    """Perturb the coded point so that the first m symbols stay unchanged."""
    m = spaces.cylinder_depth(radius)
    gap = Fraction(1)
    for j in range(m):
        z = (rule.start + j * rule.angle) % 1
        boundary = 1 - rule.angle if z < 1 - rule.angle else Fraction(1)
        gap = min(gap, boundary - z)
    rng = random.Random(derive_seed("sturmian-ball", strategy.label, seed))
    if strategy.kind == SamplerKind.DYADIC:
        eta = gap / (1 << rng.randrange(1, 9))
    elif strategy.kind in (SamplerKind.UNIFORM, SamplerKind.STREAM):
        eta = gap * Fraction(rng.randrange(1, 1 << 32), 1 << 32)
    else:
        raise ValueError(f"Sampler {strategy.label} is not supported on sturmian systems")
    return sturmian_point(rule.angle, rule.start + eta)


def sample_state_in_ball(
    system: SystemDescriptor,
    center: StatePoint,
    radius: Fraction,
    strategy: SamplerStrategy,
    seed: int,
) -> StatePoint:
    """
    Draw a phase-space point y with d(center, y) < radius.

    :raises ValueError: On unsupported strategy/system combinations.
    """
    if system.kind == SystemKind.STURMIAN:
        stream = center.stream  # type: ignore
        if isinstance(stream.rule, SturmianRule) and not stream.complemented:
            rule = stream.rule
            start = (rule.start + stream.offset * rule.angle) % 1
            return _sturmian_ball_point(SturmianRule(rule.angle, start), radius, strategy, seed)
        return spaces.sample_in_ball(system.space, center, radius, strategy, seed)
    if system.kind == SystemKind.PRODUCT:
        half = radius / 2
        return ProductPoint(
            sample_state_in_ball(system.left, center.left, half, strategy, derive_seed(seed, "left")),  # type: ignore
            sample_state_in_ball(system.right, center.right, half, strategy, derive_seed(seed, "right")),  # type: ignore
        )
    return spaces.sample_in_ball(system.space, center, radius, strategy, seed)


def default_samplers(system: SystemDescriptor) -> Tuple[SamplerStrategy, List[SamplerStrategy]]:
    """
    Default (centre strategy, in-ball candidate strategies) for a system.

    Expanding maps mix typical stream-backed candidates with dyadic and
    eventually periodic ones, whose orbits collapse onto periodic orbits.

    :returns: Tuple of (centre strategy, ball strategies).
    """
    kind = system.kind
    if kind in (SystemKind.ROTATION, SystemKind.STURMIAN):
        return SamplerStrategy(SamplerKind.UNIFORM), [
            SamplerStrategy(SamplerKind.UNIFORM),
            SamplerStrategy(SamplerKind.DYADIC),
        ]
    if kind == SystemKind.FULL_SHIFT:
        return SamplerStrategy(SamplerKind.UNIFORM), [
            SamplerStrategy(SamplerKind.PERIODIC_TAIL),
            SamplerStrategy(SamplerKind.COMPLEMENT),
            SamplerStrategy(SamplerKind.UNIFORM),
        ]
    if kind == SystemKind.PRODUCT:
        left_center, left_balls = default_samplers(system.left)  # type: ignore
        right_center, right_balls = default_samplers(system.right)  # type: ignore
        if SystemKind.STURMIAN in (system.left.kind, system.right.kind):  # type: ignore
            return SamplerStrategy(SamplerKind.UNIFORM), [
                SamplerStrategy(SamplerKind.UNIFORM),
                SamplerStrategy(SamplerKind.DYADIC),
            ]
        shared = [s for s in left_balls if s in right_balls]
        center = left_center if left_center == right_center else SamplerStrategy(SamplerKind.UNIFORM)
        return center, shared or [SamplerStrategy(SamplerKind.UNIFORM)]
    return SamplerStrategy(SamplerKind.STREAM), [
        SamplerStrategy(SamplerKind.DYADIC),
        SamplerStrategy(SamplerKind.PERIODIC_TAIL),
        SamplerStrategy(SamplerKind.STREAM),
        SamplerStrategy(SamplerKind.UNIFORM),
    ]


#
# Steering and anchors
#


def steer_into(
    system: SystemDescriptor, center: StatePoint, radius: Fraction, target: StatePoint
) -> Optional[Tuple[StatePoint, int]]:
    """
    Find y in B(center, radius) and m with T^m y = target exactly.

    Available for the doubling map and the full shift, where y is the centre's
    length-m prefix followed by the expansion of the target.

    :returns: Tuple of (y, m), or None when the system is not shift-like.
    """
    spaces.check_point(system.space, center)
    spaces.check_point(system.space, target)
    m = spaces.cylinder_depth(radius)

    if system.kind == SystemKind.DOUBLING:
        prefix = spaces.leading_bits(center, m)
        if target.stream is not None:  # type: ignore
            bits = tuple((prefix >> (m - 1 - i)) & 1 for i in range(m))
            stream = SymbolStream(PrefixedRule(bits, target.stream))  # type: ignore
            return CirclePoint.from_stream(stream, target.depth), m  # type: ignore
        return CirclePoint((prefix + target.coordinate) / (1 << m)), m  # type: ignore

    if system.kind == SystemKind.FULL_SHIFT:
        stream = SymbolStream(PrefixedRule(center.stream.word(m), target.stream))  # type: ignore
        return SymbolPoint(stream), m

    logger.debug("No exact steering for %s systems", system.kind)
    return None


def anchor_grid(system: SystemDescriptor, seed: int = 0) -> List[Tuple[StatePoint, StatePoint]]:
    """
    Default tuple anchors: unordered pairs of distinct reference points.

    - circle: the dyadic points of depth 2;
    - interval: the dyadic points of depth 2, endpoints included;
    - full shift: the constant streams plus (01)^inf and (10)^inf;
    - sturmian and products: four sampled points.
    """
    space = system.space
    if system.kind in (SystemKind.ROTATION, SystemKind.DOUBLING, SystemKind.TENT):
        points = spaces.grid_points(space, SamplerStrategy(SamplerKind.DYADIC, 2))
    elif system.kind == SystemKind.FULL_SHIFT:
        k = space.alphabet_size
        points = [SymbolPoint(constant_stream(s, k)) for s in range(k)]
        points += [
            SymbolPoint(SymbolStream(PeriodicRule((), (0, 1), k))),
            SymbolPoint(SymbolStream(PeriodicRule((), (1, 0), k))),
        ]
    else:
        strategy = SamplerStrategy(SamplerKind.UNIFORM)
        points = [sample_state(system, strategy, derive_seed("anchor", seed, i)) for i in range(4)]
    return list(combinations(points, 2))


def is_expanding(system: SystemDescriptor) -> bool:
    """Whether the system is one of the expanding maps (doubling, tent, full shift)."""
    if system.kind == SystemKind.PRODUCT:
        return is_expanding(system.left) or is_expanding(system.right)  # type: ignore
    return system.kind in (SystemKind.DOUBLING, SystemKind.TENT, SystemKind.FULL_SHIFT)
