# SPDX-License-Identifier: MIT
"""Metrics, diameters and point samplers for the supported state spaces."""

from fractions import Fraction
from functools import reduce
from math import floor, lcm
import random
from typing import List, Sequence, Tuple

from .types import (
    CirclePoint,
    CostMatrix,
    IntervalPoint,
    PeriodicRule,
    PrefixedRule,
    ProductPoint,
    SamplerKind,
    SamplerStrategy,
    SeededRule,
    SpaceDescriptor,
    SpaceKind,
    StatePoint,
    StatValue,
    SymbolPoint,
    SymbolStream,
    constant_stream,
    word_stream,
)
from .utils import derive_seed, scale_to_integers

#: Bits of the fixed denominator used by uniform sampling.
UNIFORM_BITS = 64

#: Default parameters of the parametrized samplers.
DEFAULT_DYADIC_DEPTH = 8
DEFAULT_GRID_DENOMINATOR = 7
DEFAULT_PERIOD = 3

#: Largest grid :func:`grid_points` enumerates.
GRID_LIMIT = 4096

_POINT_TYPES = {
    SpaceKind.CIRCLE: CirclePoint,
    SpaceKind.INTERVAL: IntervalPoint,
    SpaceKind.SYMBOLIC: SymbolPoint,
    SpaceKind.PRODUCT: ProductPoint,
}


def check_point(space: SpaceDescriptor, p: StatePoint):
    """
    Check that ``p`` belongs to ``space``.

    :raises TypeError: If the point kind does not match the space kind.
    :raises ValueError: If a symbolic point uses the wrong alphabet.
    """
    if not isinstance(p, _POINT_TYPES[space.kind]):
        raise TypeError(f"{type(p).__name__} does not belong to {space!r}")
    if space.kind == SpaceKind.SYMBOLIC and p.alphabet_size != space.alphabet_size:  # type: ignore
        raise ValueError(
            f"Point alphabet {p.alphabet_size} differs from space alphabet "  # type: ignore
            f"{space.alphabet_size}"
        )
    if space.kind == SpaceKind.PRODUCT:
        check_point(space.left, p.left)  # type: ignore
        check_point(space.right, p.right)  # type: ignore


def contains(space: SpaceDescriptor, p: StatePoint) -> bool:
    """Return whether ``p`` belongs to ``space``."""
    try:
        check_point(space, p)
    except (TypeError, ValueError):
        return False
    return True


def diameter(space: SpaceDescriptor) -> Fraction:
    """Return the diameter of ``space``."""
    return space.diameter


def _symbol_difference(space: SpaceDescriptor, a: SymbolPoint, b: SymbolPoint) -> int:
    """Bitmask of the positions < K where ``a`` and ``b`` differ (bit K-1-i for position i)."""
    depth = space.truncation_depth
    if space.alphabet_size == 2:
        return _word_value(a.stream, depth) ^ _word_value(b.stream, depth)
    mask = 0
    for pa, pb in zip(a.stream.symbol_planes(depth), b.stream.symbol_planes(depth)):
        mask |= pa ^ pb
    return mask


def _word_value(stream: SymbolStream, depth: int) -> int:
    value = 0
    for s in stream.word(depth):
        value = (value << 1) | s
    return value


def distance(space: SpaceDescriptor, a: StatePoint, b: StatePoint) -> Fraction:
    """
    Exact distance between two points of ``space``.

    Circle: ``min(|a-b|, 1-|a-b|)``. Interval: ``|a-b|``. Symbolic: the series
    ``sum_{i<K} [a_i != b_i] 2^-(i+1)``. Product: sum of component distances.
    Stream-backed coordinates and symbolic points are evaluated on their
    truncations; see :func:`distance_bound` for the error.

    :raises TypeError: If a point does not belong to the space.
    """
    check_point(space, a)
    check_point(space, b)
    return _distance(space, a, b)


def _distance(space: SpaceDescriptor, a, b) -> Fraction:
    if space.kind == SpaceKind.CIRCLE:
        d = abs(a.coordinate - b.coordinate)
        return min(d, 1 - d)
    if space.kind == SpaceKind.INTERVAL:
        return abs(a.coordinate - b.coordinate)
    if space.kind == SpaceKind.SYMBOLIC:
        return Fraction(_symbol_difference(space, a, b), 1 << space.truncation_depth)
    return _distance(space.left, a.left, b.left) + _distance(space.right, a.right, b.right)  # type: ignore


def distance_bound(space: SpaceDescriptor, a: StatePoint, b: StatePoint) -> Fraction:
    """Upper bound on |true distance - :func:`distance`| for the pair."""
    if space.kind in (SpaceKind.CIRCLE, SpaceKind.INTERVAL):
        return a.error + b.error  # type: ignore
    if space.kind == SpaceKind.SYMBOLIC:
        return space.truncation_bound
    return distance_bound(space.left, a.left, b.left) + distance_bound(  # type: ignore
        space.right, a.right, b.right  # type: ignore
    )


def measure(space: SpaceDescriptor, a: StatePoint, b: StatePoint) -> StatValue:
    """Return the distance together with its truncation bound."""
    return StatValue(distance(space, a, b), distance_bound(space, a, b))


def coordinate(p: StatePoint) -> Fraction:
    """Return the coordinate of a circle or interval point."""
    if not isinstance(p, (CirclePoint, IntervalPoint)):
        raise TypeError(f"{type(p).__name__} has no coordinate")
    return p.coordinate


#
# Integer cost rows for the general solvers
#


def _integer_rows(
    space: SpaceDescriptor, xs: Sequence[StatePoint], ys: Sequence[StatePoint]
) -> Tuple[List[List[int]], int]:
    if space.kind in (SpaceKind.CIRCLE, SpaceKind.INTERVAL):
        values, den = scale_to_integers([p.coordinate for p in list(xs) + list(ys)])  # type: ignore
        a, b = values[: len(xs)], values[len(xs) :]
        if space.kind == SpaceKind.INTERVAL:
            return [[abs(x - y) for y in b] for x in a], den
        rows = []
        for x in a:
            row = []
            for y in b:
                d = abs(x - y)
                row.append(min(d, den - d))
            rows.append(row)
        return rows, den
    if space.kind == SpaceKind.SYMBOLIC:
        depth = space.truncation_depth
        if space.alphabet_size == 2:
            a = [_word_value(p.stream, depth) for p in xs]  # type: ignore
            b = [_word_value(p.stream, depth) for p in ys]  # type: ignore
            return [[x ^ y for y in b] for x in a], 1 << depth
        pa = [p.stream.symbol_planes(depth) for p in xs]  # type: ignore
        pb = [p.stream.symbol_planes(depth) for p in ys]  # type: ignore
        rows = [
            [reduce(lambda m, pair: m | (pair[0] ^ pair[1]), zip(x, y), 0) for y in pb]
            for x in pa
        ]
        return rows, 1 << depth

    left, den_l = _integer_rows(space.left, [p.left for p in xs], [p.left for p in ys])  # type: ignore
    right, den_r = _integer_rows(space.right, [p.right for p in xs], [p.right for p in ys])  # type: ignore
    den = lcm(den_l, den_r)
    fl, fr = den // den_l, den // den_r
    return [
        [fl * el + fr * er for el, er in zip(row_l, row_r)] for row_l, row_r in zip(left, right)
    ], den


def cost_matrix(
    space: SpaceDescriptor, xs: Sequence[StatePoint], ys: Sequence[StatePoint]
) -> CostMatrix:
    """
    Build the exact matrix ``distance(xs[i], ys[j])``.

    Every point is encoded once, so building the matrix costs O(n) encodings
    plus n^2 integer operations.

    :raises ValueError: On length mismatch.
    """
    if len(xs) != len(ys):
        raise ValueError(f"Length mismatch: {len(xs)} vs {len(ys)}")
    for p in list(xs) + list(ys):
        check_point(space, p)
    rows, den = _integer_rows(space, xs, ys)
    return CostMatrix(tuple(tuple(row) for row in rows), den)


#
# Sampling
#


def _rng(strategy: SamplerStrategy, *parts) -> random.Random:
    return random.Random(derive_seed(strategy.label, *parts))


def _random_word(rng: random.Random, length: int, alphabet_size: int) -> Tuple[int, ...]:
    return tuple(rng.randrange(alphabet_size) for _ in range(length))


def _periodic_word(strategy: SamplerStrategy, rng: random.Random, alphabet_size: int):
    if strategy.tail is not None:
        return strategy.tail
    return _random_word(rng, strategy.parameter or DEFAULT_PERIOD, alphabet_size)


def _periodic_fraction(word: Tuple[int, ...]) -> Fraction:
    """Value in [0, 1) of the binary expansion ``word word word ...``."""
    value = 0
    for s in word:
        value = (value << 1) | s
    top = (1 << len(word)) - 1
    # all-ones expands to 1; wrap it to 0
    return Fraction(value % top, top) if top else Fraction(0)


def sample_point(
    space: SpaceDescriptor, strategy: SamplerStrategy, seed: int
) -> StatePoint:
    """
    Draw a point of ``space``; deterministic in (strategy, seed).

    :param space: Target space.
    :param strategy: Sampling strategy.
    :param seed: Seed of the draw.
    :returns: The sampled point.
    :raises ValueError: On unsupported strategy/space combinations.
    """
    rng = _rng(strategy, seed)
    kind = strategy.kind

    if space.kind == SpaceKind.PRODUCT:
        return ProductPoint(
            sample_point(space.left, strategy, derive_seed(seed, "left")),  # type: ignore
            sample_point(space.right, strategy, derive_seed(seed, "right")),  # type: ignore
        )

    if space.kind == SpaceKind.SYMBOLIC:
        k = space.alphabet_size
        if kind in (SamplerKind.UNIFORM, SamplerKind.STREAM):
            return SymbolPoint(SymbolStream(SeededRule(derive_seed(strategy.label, seed), k)))
        if kind == SamplerKind.DYADIC:
            word = _random_word(rng, strategy.parameter or DEFAULT_DYADIC_DEPTH, k)
            return SymbolPoint(word_stream(word, alphabet_size=k))
        if kind == SamplerKind.PERIODIC_TAIL:
            return SymbolPoint(SymbolStream(PeriodicRule((), _periodic_word(strategy, rng, k), k)))
        raise ValueError(f"Sampler {strategy.label} is not supported on {space!r}")

    point_cls = CirclePoint if space.kind == SpaceKind.CIRCLE else IntervalPoint
    if kind == SamplerKind.UNIFORM:
        return point_cls(Fraction(rng.getrandbits(UNIFORM_BITS), 1 << UNIFORM_BITS))
    if kind == SamplerKind.DYADIC:
        depth = strategy.parameter or DEFAULT_DYADIC_DEPTH
        return point_cls(Fraction(rng.randrange(1 << depth), 1 << depth))
    if kind == SamplerKind.RATIONAL_GRID:
        q = strategy.parameter or DEFAULT_GRID_DENOMINATOR
        return point_cls(Fraction(rng.randrange(q), q))
    if kind == SamplerKind.PERIODIC_TAIL:
        return point_cls(_periodic_fraction(_periodic_word(strategy, rng, 2)))
    if kind == SamplerKind.STREAM:
        stream = SymbolStream(SeededRule(derive_seed(strategy.label, seed)))
        return point_cls.from_stream(stream, space.truncation_depth)
    raise ValueError(f"Sampler {strategy.label} needs a ball centre")


def grid_points(space: SpaceDescriptor, strategy: SamplerStrategy) -> List[StatePoint]:
    """
    Enumerate the finite grid of a ``dyadic`` or ``rationalGrid`` strategy.

    :raises ValueError: For other strategies, products, or grids above the size limit.
    """
    if strategy.kind == SamplerKind.DYADIC:
        depth = strategy.parameter or DEFAULT_DYADIC_DEPTH
        if space.kind == SpaceKind.SYMBOLIC:
            k = space.alphabet_size
            if k**depth > GRID_LIMIT:
                raise ValueError(f"Grid of {k}^{depth} words exceeds {GRID_LIMIT}")
            words = [()]
            for _ in range(depth):
                words = [w + (s,) for w in words for s in range(k)]
            return [SymbolPoint(word_stream(w, alphabet_size=k)) for w in words]
        q = 1 << depth
    elif strategy.kind == SamplerKind.RATIONAL_GRID:
        q = strategy.parameter or DEFAULT_GRID_DENOMINATOR
        if space.kind == SpaceKind.SYMBOLIC:
            raise ValueError("Rational grids are not defined on symbolic spaces")
    else:
        raise ValueError(f"Sampler {strategy.label} has no finite grid")

    if q > GRID_LIMIT:
        raise ValueError(f"Grid of {q} points exceeds {GRID_LIMIT}")
    if space.kind == SpaceKind.CIRCLE:
        return [CirclePoint(Fraction(i, q)) for i in range(q)]
    if space.kind == SpaceKind.INTERVAL:
        return [IntervalPoint(Fraction(i, q)) for i in range(q + 1)]
    raise ValueError(f"No grid on {space!r}")


def cylinder_depth(radius: Fraction) -> int:
    """Smallest m >= 1 with 2^-m < radius."""
    if radius <= 0:
        raise ValueError("Ball radius must be positive")
    m = 1
    while Fraction(1, 1 << m) >= radius:
        m += 1
    return m


def leading_bits(p, m: int) -> int:
    """First m binary digits of a circle or interval point as an integer."""
    if p.stream is not None:
        return _word_value(p.stream, m)
    return min(floor(p.coordinate * (1 << m)), (1 << m) - 1)


def sample_in_ball(
    space: SpaceDescriptor,
    center: StatePoint,
    radius: Fraction,
    strategy: SamplerStrategy,
    seed: int,
) -> StatePoint:
    """
    Draw a point y with true distance d(center, y) < radius.

    Circle, interval and symbolic points keep the first m binary digits (or
    symbols) of the centre, with 2^-m < radius, and continue with a tail chosen
    by the strategy:

    - ``dyadic``: a short random word followed by zeros;
    - ``uniform``: 64 random bits (a seeded stream on symbolic spaces);
    - ``rationalGrid``: a random multiple of 1/q (circle and interval only);
    - ``periodicTail``: an eventually periodic expansion;
    - ``stream``: a seeded random stream, giving a stream-backed point;
    - ``complement``: the complement of the centre's own tail.

    Product balls split the radius evenly between the factors.

    :raises ValueError: On a non-positive radius or unsupported combinations.
    """
    check_point(space, center)
    rng = _rng(strategy, seed, "ball")
    kind = strategy.kind

    if space.kind == SpaceKind.PRODUCT:
        half = radius / 2
        return ProductPoint(
            sample_in_ball(space.left, center.left, half, strategy, derive_seed(seed, "left")),  # type: ignore
            sample_in_ball(space.right, center.right, half, strategy, derive_seed(seed, "right")),  # type: ignore
        )

    m = cylinder_depth(radius)

    if space.kind == SpaceKind.SYMBOLIC:
        k = space.alphabet_size
        stream = center.stream  # type: ignore
        if kind == SamplerKind.DYADIC:
            tail = word_stream(_random_word(rng, strategy.parameter or 4, k), alphabet_size=k)
        elif kind in (SamplerKind.UNIFORM, SamplerKind.STREAM):
            tail = SymbolStream(SeededRule(derive_seed(strategy.label, seed, "tail"), k))
        elif kind == SamplerKind.PERIODIC_TAIL:
            tail = SymbolStream(PeriodicRule((), _periodic_word(strategy, rng, k), k))
        elif kind == SamplerKind.COMPLEMENT:
            tail = stream.shift(m).complement()
        else:
            raise ValueError(f"Sampler {strategy.label} is not supported on {space!r}")
        return SymbolPoint(SymbolStream(PrefixedRule(stream.word(m), tail)))

    point_cls = CirclePoint if space.kind == SpaceKind.CIRCLE else IntervalPoint
    prefix = leading_bits(center, m)
    scale = Fraction(1, 1 << m)

    if kind == SamplerKind.STREAM or (
        kind == SamplerKind.COMPLEMENT and center.stream is not None  # type: ignore
    ):
        bits = tuple((prefix >> (m - 1 - i)) & 1 for i in range(m))
        if kind == SamplerKind.STREAM:
            tail = SymbolStream(SeededRule(derive_seed(strategy.label, seed, "tail")))
        else:
            tail = center.stream.shift(m).complement()  # type: ignore
        return point_cls.from_stream(
            SymbolStream(PrefixedRule(bits, tail)), space.truncation_depth
        )

    if kind == SamplerKind.DYADIC:
        depth = strategy.parameter or 4
        offset = Fraction(rng.randrange(1 << depth), 1 << depth)
    elif kind == SamplerKind.UNIFORM:
        offset = Fraction(rng.getrandbits(UNIFORM_BITS), 1 << UNIFORM_BITS)
    elif kind == SamplerKind.RATIONAL_GRID:
        q = strategy.parameter or DEFAULT_GRID_DENOMINATOR
        offset = Fraction(rng.randrange(q), q)
    elif kind == SamplerKind.PERIODIC_TAIL:
        offset = _periodic_fraction(_periodic_word(strategy, rng, 2))
    else:
        # complement of a rational centre: reflect its position inside the cylinder
        offset = 1 - (center.coordinate * (1 << m) - prefix)  # type: ignore

    value = (prefix + offset) * scale
    if space.kind == SpaceKind.CIRCLE:
        value %= 1
    return point_cls(value)


def fixed_point(space: SpaceDescriptor, symbol: int = 0) -> StatePoint:
    """Return the constant point (coordinate 0, or the constant stream) of ``space``."""
    if space.kind == SpaceKind.CIRCLE:
        return CirclePoint(Fraction(0))
    if space.kind == SpaceKind.INTERVAL:
        return IntervalPoint(Fraction(0))
    if space.kind == SpaceKind.SYMBOLIC:
        return SymbolPoint(constant_stream(symbol, space.alphabet_size))
    return ProductPoint(fixed_point(space.left, symbol), fixed_point(space.right, symbol))  # type: ignore
