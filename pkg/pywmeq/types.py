# SPDX-License-Identifier: MIT
"""Dataclasses representing spaces, points, systems, statistics and verdicts."""

from bisect import bisect_left
from dataclasses import dataclass, field, replace
from enum_tools.documentation import document_enum
from fractions import Fraction
from functools import lru_cache
import random
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Optional,
    Tuple,
    Union,
)
import sys

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

try:  # Python >= 3.11
    from enum import StrEnum
except ImportError:
    from strenum import StrEnum  # type: ignore

from .utils import (
    InvariantError,
    common_denominator,
    fraction_payload,
    to_fraction,
    unroll_payload,
)

#: Default number of symbols compared by the truncated symbolic metric.
DEFAULT_TRUNCATION_DEPTH = 64

#: Number of symbols produced per block of a seeded stream.
SEEDED_BLOCK = 64

#: Number of leading symbols written to a symbolic point's payload for readability.
PAYLOAD_PREFIX = 16

ZERO = Fraction(0)


#
# Enums
#


@document_enum
class SpaceKind(StrEnum):
    """Enum for the supported compact metric spaces."""

    #: The circle [0, 1) with the geodesic metric min(|a-b|, 1-|a-b|).
    CIRCLE = "circle"
    #: The unit interval [0, 1] with the metric |a-b|.
    INTERVAL = "interval"
    #: One-sided sequences over {0..k-1} with the weighted Hamming series metric.
    SYMBOLIC = "symbolic"
    #: Binary product with the sum metric.
    PRODUCT = "product"


@document_enum
class SystemKind(StrEnum):
    """Enum for the supported dynamical maps."""

    ROTATION = "rotation"  # doc: Rotation of the circle by a rational angle.
    DOUBLING = "doubling"  # doc: The doubling map p -> 2p mod 1 on the circle.
    TENT = "tent"  # doc: The tent map on the interval.
    FULL_SHIFT = "fullShift"  # doc: The left shift on the full k-symbol sequence space.
    STURMIAN = "sturmian"  # doc: The shift acting on rotation codings.
    PRODUCT = "product"  # doc: Componentwise product of two systems.


@document_enum
class SamplerKind(StrEnum):
    """Enum for point sampling strategies."""

    #: Exact rationals with denominator 2^64 (seeded symbol streams on symbolic spaces).
    UNIFORM = "uniform"
    #: Dyadic rationals k/2^depth; eventually-zero streams on symbolic spaces.
    DYADIC = "dyadic"
    #: Rationals k/q.
    RATIONAL_GRID = "rationalGrid"
    #: Eventually periodic binary expansions or symbol streams.
    PERIODIC_TAIL = "periodicTail"
    #: Stream-backed points carrying a fresh random symbol stream.
    STREAM = "stream"
    #: Centre prefix followed by the complement of the centre's tail.
    COMPLEMENT = "complement"


@document_enum
class StatKind(StrEnum):
    """Enum for per-n statistics on a pair of orbit segments."""

    #: F_n: minimum over permutations of the mean matched distance.
    WEAK_MEAN = "weakMean"
    #: B_n: mean distance under the identity pairing.
    BESICOVITCH = "besicovitch"
    #: Maximum over permutations of the mean matched distance.
    SUP_PERM = "supPerm"
    #: Minimum over permutations of the share of matched distances above epsilon.
    EXCEEDANCE = "exceedance"
    #: Share of identity-paired distances above epsilon.
    BESICOVITCH_EXCEEDANCE = "besicovitchExceedance"
    #: d_f^n: minimum over permutations of the mean matched observable difference.
    OBSERVABLE = "observable"
    #: Minimum over permutations of the share of observable differences above epsilon.
    OBSERVABLE_EXCEEDANCE = "observableExceedance"


#: Statistic kinds that require an epsilon.
THRESHOLD_KINDS = (
    StatKind.EXCEEDANCE,
    StatKind.BESICOVITCH_EXCEEDANCE,
    StatKind.OBSERVABLE_EXCEEDANCE,
)

#: Statistic kinds that require an observable.
OBSERVABLE_KINDS = (StatKind.OBSERVABLE, StatKind.OBSERVABLE_EXCEEDANCE)


@document_enum
class AssignmentMode(StrEnum):
    """Enum for the direction of an assignment problem."""

    MIN = "min"  # doc: Minimize the total cost.
    MAX = "max"  # doc: Maximize the total cost.


@document_enum
class Verdict(StrEnum):
    """Enum for probe outcomes."""

    #: Every probed grid cell passed.
    EQUICONTINUOUS = "equicontinuous-consistent"
    #: A concrete witness exceeds the claimed constant.
    SENSITIVE = "sensitive-witnessed"
    #: The evidence supports neither side (usually non-converged estimates).
    INCONCLUSIVE = "inconclusive"


@document_enum
class SensitivityMode(StrEnum):
    """Enum for sensitivity-constant search modes."""

    #: Converged limsup estimate of F_n.
    STRONG_MEAN = "strongMean"
    #: Some late n of F_n (arbitrarily-late single-n form).
    STRONG_IN_MEAN = "strongInMean"
    #: Converged limsup estimate of B_n.
    MEAN_SENSITIVE = "meanSensitive"
    #: Some late n of B_n.
    SENSITIVE_IN_MEAN = "sensitiveInMean"


@document_enum
class ObservableMode(StrEnum):
    """Enum for observable probe aggregation."""

    MEAN = "mean"  # doc: Converged limsup estimate of d_f^n.
    IN_MEAN = "inMean"  # doc: Running maximum of d_f^n over the schedule.


@document_enum
class TupleKind(StrEnum):
    """Enum for the sensitive-tuple notions searched by the tuple search."""

    #: Converged limsup of the joint-visit frequency above a uniform constant.
    MEAN = "meanTuple"
    #: Some late n of the schedule with joint-visit frequency above a uniform constant.
    IN_MEAN = "inMeanTuple"
    #: Like IN_MEAN, but the pair only needs to be close rather than share a ball.
    WEAK_IN_MEAN = "weakInMeanTuple"
    #: Positive converged limsup frequency in every probed ball.
    DENSITY = "densityTuple"


@document_enum
class DichotomySide(StrEnum):
    """Enum for system-level dichotomy outcomes."""

    EQUICONTINUOUS = "consistent with equicontinuous side"
    SENSITIVE = "consistent with sensitive side"
    INCONCLUSIVE = "inconclusive"


@document_enum
class VerifyLevel(StrEnum):
    """Enum for the depth of the built-in verification suites."""

    QUICK = "quick"  # doc: Small instance counts; a few seconds.
    FULL = "full"  # doc: Acceptance-sized instance counts and brute-force oracles up to n = 7.


#
# Symbol streams
#


@lru_cache(maxsize=8192)
def _seeded_block(seed: int, alphabet_size: int, block: int) -> Tuple[int, ...]:
    """Return one block of a seeded stream; blocks are independent and cached."""
    rng = random.Random(f"{seed}:{alphabet_size}:{block}")
    if alphabet_size == 2:
        bits = rng.getrandbits(SEEDED_BLOCK)
        return tuple((bits >> (SEEDED_BLOCK - 1 - i)) & 1 for i in range(SEEDED_BLOCK))
    return tuple(rng.randrange(alphabet_size) for _ in range(SEEDED_BLOCK))


def _check_word(word: Tuple[int, ...], alphabet_size: int, what: str):
    for s in word:
        if not isinstance(s, int) or not 0 <= s < alphabet_size:
            raise ValueError(f"{what}: symbol {s!r} outside alphabet of size {alphabet_size}")


@dataclass(frozen=True)
class SeededRule:
    """Pseudo-random stream; symbol j depends only on (seed, j)."""

    #: Seed of the stream.
    seed: int
    #: Alphabet size k.
    alphabet_size: int = 2

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("Alphabet size must be at least 2")

    def symbol(self, position: int) -> int:  # noqa: D102
        block, index = divmod(position, SEEDED_BLOCK)
        return _seeded_block(self.seed, self.alphabet_size, block)[index]

    def to_payload(self) -> dict:  # noqa: D102
        return {"kind": "seeded", "seed": self.seed, "alphabet": self.alphabet_size}


@dataclass(frozen=True)
class PeriodicRule:
    """Eventually periodic stream: ``prefix`` followed by ``period`` repeated forever."""

    #: Pre-periodic part.
    prefix: Tuple[int, ...]
    #: Repeating part; must be non-empty.
    period: Tuple[int, ...]
    #: Alphabet size k.
    alphabet_size: int = 2

    def __post_init__(self):
        if not self.period:
            raise ValueError("Periodic stream needs a non-empty period")
        _check_word(self.prefix, self.alphabet_size, "periodic prefix")
        _check_word(self.period, self.alphabet_size, "periodic period")

    def symbol(self, position: int) -> int:  # noqa: D102
        if position < len(self.prefix):
            return self.prefix[position]
        return self.period[(position - len(self.prefix)) % len(self.period)]

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "kind": "periodic",
            "prefix": list(self.prefix),
            "period": list(self.period),
            "alphabet": self.alphabet_size,
        }


@dataclass(frozen=True)
class PrefixedRule:
    """A finite word followed by another stream."""

    #: Leading word.
    prefix: Tuple[int, ...]
    #: Stream read after the prefix.
    tail: "SymbolStream"

    def __post_init__(self):
        _check_word(self.prefix, self.alphabet_size, "prefixed word")

    @property
    def alphabet_size(self) -> int:  # noqa: D102
        return self.tail.alphabet_size

    def symbol(self, position: int) -> int:  # noqa: D102
        if position < len(self.prefix):
            return self.prefix[position]
        return self.tail.symbol(position - len(self.prefix))

    def to_payload(self) -> dict:  # noqa: D102
        return {"kind": "prefixed", "prefix": list(self.prefix), "tail": self.tail.to_payload()}


@dataclass(frozen=True)
class PatchedRule:
    """Another stream with explicit symbols overridden at given positions."""

    #: Underlying stream.
    base: "SymbolStream"
    #: Sorted (position, symbol) overrides.
    patches: Tuple[Tuple[int, int], ...]
    _lookup: Dict[int, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        _check_word(tuple(s for _, s in self.patches), self.alphabet_size, "patch")
        object.__setattr__(self, "_lookup", dict(self.patches))

    @property
    def alphabet_size(self) -> int:  # noqa: D102
        return self.base.alphabet_size

    def symbol(self, position: int) -> int:  # noqa: D102
        if position in self._lookup:
            return self._lookup[position]
        return self.base.symbol(position)

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "kind": "patched",
            "base": self.base.to_payload(),
            "patches": [list(p) for p in self.patches],
        }


@dataclass(frozen=True)
class SturmianRule:
    """
    Binary coding of a rotation orbit.

    Symbol j is 1 iff ``(start + j*angle) mod 1`` lies in ``[1 - angle, 1)``; the
    cells are left-closed, so boundary hits go to the cell on their right.
    """

    #: Rotation angle in (0, 1).
    angle: Fraction
    #: Circle coordinate of the coded point.
    start: Fraction

    def __post_init__(self):
        if not 0 < self.angle < 1:
            raise ValueError("Sturmian angle must lie in (0, 1)")
        if not 0 <= self.start < 1:
            raise ValueError("Sturmian start must lie in [0, 1)")

    @property
    def alphabet_size(self) -> int:  # noqa: D102
        return 2

    def symbol(self, position: int) -> int:  # noqa: D102
        return 1 if (self.start + position * self.angle) % 1 >= 1 - self.angle else 0

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "kind": "sturmian",
            "angle": fraction_payload(self.angle),
            "start": fraction_payload(self.start),
        }


StreamRule = Union[SeededRule, PeriodicRule, PrefixedRule, PatchedRule, SturmianRule]


def rule_from_payload(payload: dict) -> StreamRule:
    """
    Rebuild a stream rule from its JSON payload.

    :param payload: Dictionary containing the JSON payload.
    :returns: The resulting rule.
    :raises ValueError: On unknown rule kinds.
    """
    kind = payload.get("kind")
    if kind == "seeded":
        return SeededRule(int(payload["seed"]), int(payload.get("alphabet", 2)))
    if kind == "periodic":
        return PeriodicRule(
            tuple(int(s) for s in payload.get("prefix", ())),
            tuple(int(s) for s in payload["period"]),
            int(payload.get("alphabet", 2)),
        )
    if kind == "prefixed":
        return PrefixedRule(
            tuple(int(s) for s in payload["prefix"]),
            SymbolStream.from_payload(payload["tail"]),
        )
    if kind == "patched":
        return PatchedRule(
            SymbolStream.from_payload(payload["base"]),
            tuple(sorted((int(p), int(s)) for p, s in payload["patches"])),
        )
    if kind == "sturmian":
        return SturmianRule(to_fraction(payload["angle"]), to_fraction(payload["start"]))
    raise ValueError(f"Unknown stream rule kind {kind!r}")


@dataclass(frozen=True)
class SymbolStream:
    """
    Deterministic, random-access infinite symbol sequence.

    Extension is idempotent: reading position j always yields the same symbol,
    regardless of what was read before.
    """

    #: Rule producing the underlying sequence.
    rule: StreamRule
    #: Number of leading symbols dropped (shift count).
    offset: int = 0
    #: Whether every symbol s is replaced by k-1-s.
    complemented: bool = False

    @property
    def alphabet_size(self) -> int:
        """Alphabet size k of the stream."""
        return self.rule.alphabet_size

    def symbol(self, index: int) -> int:
        """Return the symbol at ``index`` (0-based, after the shift)."""
        s = self.rule.symbol(self.offset + index)
        return self.alphabet_size - 1 - s if self.complemented else s

    def word(self, length: int, start: int = 0) -> Tuple[int, ...]:
        """Return ``length`` consecutive symbols starting at ``start``."""
        return tuple(self.symbol(start + i) for i in range(length))

    def shift(self, count: int = 1) -> "SymbolStream":
        """Return the stream with its first ``count`` symbols dropped."""
        return replace(self, offset=self.offset + count)

    def complement(self) -> "SymbolStream":
        """Return the symbolwise complement of the stream."""
        return replace(self, complemented=not self.complemented)

    def binary_value(self, depth: int) -> Fraction:
        """
        Return the truncated binary coordinate ``sum_{i<depth} s_i 2^-(i+1)``.

        :param depth: Number of bits read.
        :raises ValueError: If the stream is not binary.
        """
        if self.alphabet_size != 2:
            raise ValueError("Only binary streams have a binary coordinate")
        value = 0
        for s in self.word(depth):
            value = (value << 1) | s
        return Fraction(value, 1 << depth)

    def symbol_planes(self, depth: int) -> Tuple[int, ...]:
        """
        Return one bitmask per symbol value over the first ``depth`` positions.

        Bit ``depth-1-i`` of plane v is set iff symbol i equals v, so the
        positions where two streams differ are the union of the XORs of their
        planes.
        """
        planes = [0] * self.alphabet_size
        for i, s in enumerate(self.word(depth)):
            planes[s] |= 1 << (depth - 1 - i)
        return tuple(planes)

    def to_payload(self) -> dict:
        """Serialize the stream."""
        return {
            "rule": self.rule.to_payload(),
            "offset": self.offset,
            "complemented": self.complemented,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into a SymbolStream object.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting SymbolStream object.
        """
        return cls(
            rule_from_payload(payload["rule"]),
            int(payload.get("offset", 0)),
            bool(payload.get("complemented", False)),
        )

    def __repr__(self):
        head = "".join(str(s) for s in self.word(8))
        return f"<SymbolStream: {head}... ({type(self.rule).__name__}, offset {self.offset})>"


def constant_stream(symbol: int, alphabet_size: int = 2) -> SymbolStream:
    """Return the constant stream ``symbol symbol symbol ...``."""
    return SymbolStream(PeriodicRule((), (symbol,), alphabet_size))


def word_stream(
    prefix: Tuple[int, ...], tail: Optional[SymbolStream] = None, alphabet_size: int = 2
) -> SymbolStream:
    """Return ``prefix`` followed by ``tail`` (all zeros when omitted)."""
    if tail is None:
        return SymbolStream(PeriodicRule(tuple(prefix), (0,), alphabet_size))
    return SymbolStream(PrefixedRule(tuple(prefix), tail))


#
# Points
#


def _stream_coordinate_payload(point) -> dict:
    ret: Dict[str, Any] = {"kind": str(point.kind), **fraction_payload(point.coordinate)}
    if point.stream is not None:
        ret["stream"] = point.stream.to_payload()
        ret["depth"] = point.depth
    elif point.error:
        ret["error"] = fraction_payload(point.error)
    return ret


@dataclass(frozen=True)
class CirclePoint:
    """
    A point of the circle [0, 1).

    The point is either an exact rational or backed by a binary symbol stream.
    A stream-backed point stores its ``depth``-bit truncation as ``coordinate``
    and reports the truncation error in ``error``.
    """

    #: Exact coordinate, reduced mod 1.
    coordinate: Fraction
    #: Binary expansion of the point, if it is stream-backed.
    stream: Optional[SymbolStream] = None
    #: Upper bound on |true coordinate - coordinate|.
    error: Fraction = ZERO
    #: Number of bits read from the stream.
    depth: int = DEFAULT_TRUNCATION_DEPTH

    kind = SpaceKind.CIRCLE

    def __post_init__(self):
        if not 0 <= self.coordinate < 1:
            raise ValueError(f"Circle coordinate {self.coordinate} outside [0, 1)")
        if self.error < 0:
            raise ValueError("Coordinate error must be non-negative")
        if self.stream is not None and self.stream.alphabet_size != 2:
            raise ValueError("Circle points can only be backed by binary streams")

    @classmethod
    def from_stream(cls, stream: SymbolStream, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:
        """Build a stream-backed point from its binary expansion."""
        return cls(stream.binary_value(depth), stream, Fraction(1, 1 << depth), depth)

    def to_payload(self) -> dict:  # noqa: D102
        return _stream_coordinate_payload(self)

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into a CirclePoint object.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting CirclePoint object.
        """
        if payload.get("kind") != "circle":
            raise ValueError(f"Not a circle point: {payload.get('kind')!r}")
        if "stream" in payload:
            return cls.from_stream(
                SymbolStream.from_payload(payload["stream"]),
                int(payload.get("depth", DEFAULT_TRUNCATION_DEPTH)),
            )
        return cls(
            to_fraction(payload) % 1,
            error=to_fraction(payload["error"]) if "error" in payload else ZERO,
        )

    def __repr__(self):
        backing = ", stream-backed" if self.stream is not None else ""
        return f"<CirclePoint: {self.coordinate}{backing}>"


@dataclass(frozen=True)
class IntervalPoint:
    """A point of the interval [0, 1]; optionally stream-backed like :class:`CirclePoint`."""

    #: Exact coordinate in [0, 1].
    coordinate: Fraction
    #: Binary expansion of the point, if it is stream-backed.
    stream: Optional[SymbolStream] = None
    #: Upper bound on |true coordinate - coordinate|.
    error: Fraction = ZERO
    #: Number of bits read from the stream.
    depth: int = DEFAULT_TRUNCATION_DEPTH

    kind = SpaceKind.INTERVAL

    def __post_init__(self):
        if not 0 <= self.coordinate <= 1:
            raise ValueError(f"Interval coordinate {self.coordinate} outside [0, 1]")
        if self.error < 0:
            raise ValueError("Coordinate error must be non-negative")
        if self.stream is not None and self.stream.alphabet_size != 2:
            raise ValueError("Interval points can only be backed by binary streams")

    @classmethod
    def from_stream(cls, stream: SymbolStream, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:
        """Build a stream-backed point from its binary expansion."""
        return cls(stream.binary_value(depth), stream, Fraction(1, 1 << depth), depth)

    def to_payload(self) -> dict:  # noqa: D102
        return _stream_coordinate_payload(self)

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into an IntervalPoint object.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting IntervalPoint object.
        """
        if payload.get("kind") != "interval":
            raise ValueError(f"Not an interval point: {payload.get('kind')!r}")
        if "stream" in payload:
            return cls.from_stream(
                SymbolStream.from_payload(payload["stream"]),
                int(payload.get("depth", DEFAULT_TRUNCATION_DEPTH)),
            )
        return cls(
            to_fraction(payload),
            error=to_fraction(payload["error"]) if "error" in payload else ZERO,
        )

    def __repr__(self):
        backing = ", stream-backed" if self.stream is not None else ""
        return f"<IntervalPoint: {self.coordinate}{backing}>"


@dataclass(frozen=True)
class SymbolPoint:
    """A point of a symbolic space: an infinite symbol stream."""

    #: The sequence itself.
    stream: SymbolStream

    kind = SpaceKind.SYMBOLIC

    @property
    def alphabet_size(self) -> int:  # noqa: D102
        return self.stream.alphabet_size

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "kind": "symbolic",
            "prefix": list(self.stream.word(PAYLOAD_PREFIX)),
            **self.stream.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into a SymbolPoint object.

        Without a ``rule``, the ``prefix`` is continued by zeros.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting SymbolPoint object.
        """
        if payload.get("kind") != "symbolic":
            raise ValueError(f"Not a symbolic point: {payload.get('kind')!r}")
        if "rule" in payload:
            return cls(SymbolStream.from_payload(payload))
        return cls(
            word_stream(
                tuple(int(s) for s in payload.get("prefix", ())),
                alphabet_size=int(payload.get("alphabet", 2)),
            )
        )

    def __repr__(self):
        head = "".join(str(s) for s in self.stream.word(12))
        return f"<SymbolPoint: {head}...>"


@dataclass(frozen=True)
class ProductPoint:
    """A point of a product space."""

    #: Component in the left factor.
    left: "StatePoint"
    #: Component in the right factor.
    right: "StatePoint"

    kind = SpaceKind.PRODUCT

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "kind": "product",
            "left": self.left.to_payload(),
            "right": self.right.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into a ProductPoint object.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting ProductPoint object.
        """
        if payload.get("kind") != "product":
            raise ValueError(f"Not a product point: {payload.get('kind')!r}")
        return cls(point_from_payload(payload["left"]), point_from_payload(payload["right"]))

    def __repr__(self):
        return f"<ProductPoint: ({self.left!r}, {self.right!r})>"


StatePoint = Union[CirclePoint, IntervalPoint, SymbolPoint, ProductPoint]

_POINT_CLASSES = {
    "circle": CirclePoint,
    "interval": IntervalPoint,
    "symbolic": SymbolPoint,
    "product": ProductPoint,
}


def point_from_payload(payload: dict) -> StatePoint:
    """
    Rebuild any state point from its JSON payload.

    :param payload: Dictionary containing the JSON payload.
    :returns: The resulting point.
    :raises ValueError: On unknown point kinds.
    """
    if not isinstance(payload, dict):
        raise ValueError(f"Point payload must be an object, got {payload!r}")
    try:
        point_cls = _POINT_CLASSES[payload["kind"]]
    except KeyError as e:
        raise ValueError(f"Unknown or missing point kind in {payload!r}") from e
    return point_cls.from_payload(payload)


#
# Spaces and systems
#


@dataclass(frozen=True)
class SpaceDescriptor:
    """Describes a compact metric space and its metric."""

    #: Kind of the space.
    kind: SpaceKind
    #: Alphabet size k (symbolic spaces only).
    alphabet_size: int = 2
    #: Number of symbols (or bits, for stream-backed points) read by the metric.
    truncation_depth: int = DEFAULT_TRUNCATION_DEPTH
    #: Left factor (products only).
    left: Optional["SpaceDescriptor"] = None
    #: Right factor (products only).
    right: Optional["SpaceDescriptor"] = None

    def __post_init__(self):
        if self.kind == SpaceKind.PRODUCT:
            if self.left is None or self.right is None:
                raise ValueError("Product spaces need both factors")
        elif self.left is not None or self.right is not None:
            raise ValueError("Only product spaces have factors")
        if self.alphabet_size < 2:
            raise ValueError("Alphabet size must be at least 2")
        if self.truncation_depth < 1:
            raise ValueError("Truncation depth must be positive")

    @classmethod
    def circle(cls, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:  # noqa: D102
        return cls(SpaceKind.CIRCLE, truncation_depth=depth)

    @classmethod
    def interval(cls, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:  # noqa: D102
        return cls(SpaceKind.INTERVAL, truncation_depth=depth)

    @classmethod
    def symbolic(cls, alphabet_size: int = 2, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:  # noqa: D102
        return cls(SpaceKind.SYMBOLIC, alphabet_size=alphabet_size, truncation_depth=depth)

    @classmethod
    def product(cls, left: "SpaceDescriptor", right: "SpaceDescriptor") -> Self:  # noqa: D102
        return cls(SpaceKind.PRODUCT, left=left, right=right)

    @property
    def diameter(self) -> Fraction:
        """
        Diameter of the space.

        For symbolic spaces this is the truncated series sum plus the declared
        truncation bound, which equals the diameter of the untruncated metric.
        """
        if self.kind == SpaceKind.CIRCLE:
            return Fraction(1, 2)
        if self.kind == SpaceKind.INTERVAL:
            return Fraction(1)
        if self.kind == SpaceKind.SYMBOLIC:
            return (1 - Fraction(1, 1 << self.truncation_depth)) + self.truncation_bound
        return self.left.diameter + self.right.diameter  # type: ignore

    @property
    def truncation_bound(self) -> Fraction:
        """Bound on the error of the truncated symbolic metric (0 for other kinds)."""
        if self.kind == SpaceKind.SYMBOLIC:
            return Fraction(1, 1 << self.truncation_depth)
        if self.kind == SpaceKind.PRODUCT:
            return self.left.truncation_bound + self.right.truncation_bound  # type: ignore
        return ZERO

    def to_payload(self) -> dict:  # noqa: D102
        if self.kind == SpaceKind.PRODUCT:
            return {
                "kind": "product",
                "left": self.left.to_payload(),  # type: ignore
                "right": self.right.to_payload(),  # type: ignore
            }
        ret: Dict[str, Any] = {"kind": str(self.kind), "depth": self.truncation_depth}
        if self.kind == SpaceKind.SYMBOLIC:
            ret["alphabet"] = self.alphabet_size
        return ret

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into a SpaceDescriptor object.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting SpaceDescriptor object.
        """
        kind = SpaceKind(payload["kind"])
        if kind == SpaceKind.PRODUCT:
            return cls.product(
                cls.from_payload(payload["left"]), cls.from_payload(payload["right"])
            )
        return cls(
            kind,
            alphabet_size=int(payload.get("alphabet", 2)),
            truncation_depth=int(payload.get("depth", DEFAULT_TRUNCATION_DEPTH)),
        )

    def __repr__(self):
        if self.kind == SpaceKind.PRODUCT:
            return f"<SpaceDescriptor: product({self.left!r}, {self.right!r})>"
        if self.kind == SpaceKind.SYMBOLIC:
            return f"<SpaceDescriptor: symbolic(k={self.alphabet_size}, K={self.truncation_depth})>"
        return f"<SpaceDescriptor: {self.kind}>"


@dataclass(frozen=True)
class SystemDescriptor:
    """Describes a dynamical map T together with its state space."""

    #: Kind of the map.
    kind: SystemKind
    #: State space the map acts on.
    space: SpaceDescriptor
    #: Rotation angle (rotation and sturmian systems only).
    angle: Optional[Fraction] = None
    #: Left factor (products only).
    left: Optional["SystemDescriptor"] = None
    #: Right factor (products only).
    right: Optional["SystemDescriptor"] = None

    def __post_init__(self):
        expected = {
            SystemKind.ROTATION: SpaceKind.CIRCLE,
            SystemKind.DOUBLING: SpaceKind.CIRCLE,
            SystemKind.TENT: SpaceKind.INTERVAL,
            SystemKind.FULL_SHIFT: SpaceKind.SYMBOLIC,
            SystemKind.STURMIAN: SpaceKind.SYMBOLIC,
            SystemKind.PRODUCT: SpaceKind.PRODUCT,
        }[self.kind]
        if self.space.kind != expected:
            raise ValueError(f"{self.kind} systems act on {expected} spaces, not {self.space.kind}")
        if self.kind in (SystemKind.ROTATION, SystemKind.STURMIAN):
            if self.angle is None or not 0 < self.angle < 1:
                raise ValueError(f"{self.kind} angle must lie in (0, 1)")
        if self.kind == SystemKind.STURMIAN and self.space.alphabet_size != 2:
            raise ValueError("Sturmian systems act on binary sequences")
        if self.kind == SystemKind.PRODUCT:
            if self.left is None or self.right is None:
                raise ValueError("Product systems need both factors")
            if self.space != SpaceDescriptor.product(self.left.space, self.right.space):
                raise ValueError("Product system space must be the product of the factor spaces")

    @classmethod
    def rotation(cls, angle: Fraction, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:  # noqa: D102
        return cls(SystemKind.ROTATION, SpaceDescriptor.circle(depth), angle=Fraction(angle))

    @classmethod
    def doubling(cls, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:  # noqa: D102
        return cls(SystemKind.DOUBLING, SpaceDescriptor.circle(depth))

    @classmethod
    def tent(cls, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:  # noqa: D102
        return cls(SystemKind.TENT, SpaceDescriptor.interval(depth))

    @classmethod
    def full_shift(cls, alphabet_size: int = 2, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:  # noqa: D102
        return cls(SystemKind.FULL_SHIFT, SpaceDescriptor.symbolic(alphabet_size, depth))

    @classmethod
    def sturmian(cls, angle: Fraction, depth: int = DEFAULT_TRUNCATION_DEPTH) -> Self:  # noqa: D102
        return cls(SystemKind.STURMIAN, SpaceDescriptor.symbolic(2, depth), angle=Fraction(angle))

    @classmethod
    def product(cls, left: "SystemDescriptor", right: "SystemDescriptor") -> Self:  # noqa: D102
        return cls(
            SystemKind.PRODUCT,
            SpaceDescriptor.product(left.space, right.space),
            left=left,
            right=right,
        )

    def to_payload(self) -> dict:  # noqa: D102
        if self.kind == SystemKind.PRODUCT:
            return {
                "kind": "product",
                "left": self.left.to_payload(),  # type: ignore
                "right": self.right.to_payload(),  # type: ignore
            }
        ret: Dict[str, Any] = {"kind": str(self.kind), "depth": self.space.truncation_depth}
        if self.angle is not None:
            ret["angle"] = fraction_payload(self.angle)
        if self.kind == SystemKind.FULL_SHIFT:
            ret["alphabet"] = self.space.alphabet_size
        return ret

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into a SystemDescriptor object.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting SystemDescriptor object.
        :raises ValueError: On unknown kinds or missing parameters.
        """
        if not isinstance(payload, dict) or "kind" not in payload:
            raise ValueError("System payload must be an object with a 'kind'")
        kind = SystemKind(payload["kind"])
        depth = int(payload.get("depth", DEFAULT_TRUNCATION_DEPTH))
        if kind == SystemKind.ROTATION:
            return cls.rotation(to_fraction(payload["angle"]), depth)
        if kind == SystemKind.DOUBLING:
            return cls.doubling(depth)
        if kind == SystemKind.TENT:
            return cls.tent(depth)
        if kind == SystemKind.FULL_SHIFT:
            return cls.full_shift(int(payload.get("alphabet", 2)), depth)
        if kind == SystemKind.STURMIAN:
            return cls.sturmian(to_fraction(payload["angle"]), depth)
        return cls.product(cls.from_payload(payload["left"]), cls.from_payload(payload["right"]))

    def __repr__(self):
        if self.kind == SystemKind.PRODUCT:
            return f"<SystemDescriptor: product({self.left!r}, {self.right!r})>"
        if self.angle is not None:
            return f"<SystemDescriptor: {self.kind}({self.angle})>"
        return f"<SystemDescriptor: {self.kind}>"


@dataclass(frozen=True)
class OrbitSegment:
    """The iterates T^1 x, ..., T^n x of a base point (the base itself is excluded)."""

    #: System generating the orbit.
    system: SystemDescriptor
    #: Base point x.
    base: StatePoint
    #: ``states[k-1]`` is T^k x.
    states: Tuple[StatePoint, ...]

    def __post_init__(self):
        if not self.states:
            raise ValueError("Orbit segments hold at least one state")

    @property
    def length(self) -> int:
        """Number of states n."""
        return len(self.states)

    def prefix(self, n: int) -> "OrbitSegment":
        """Return the segment T^1 x, ..., T^n x of this one."""
        if not 1 <= n <= self.length:
            raise ValueError(f"Prefix length {n} outside [1, {self.length}]")
        if n == self.length:
            return self
        return OrbitSegment(self.system, self.base, self.states[:n])

    def __repr__(self):
        return f"<OrbitSegment: {self.length} states of {self.system!r}>"


#
# Matching
#


@dataclass(frozen=True)
class CostMatrix:
    """
    Square matrix of non-negative exact costs.

    Entries are stored as integer numerators over one common denominator so
    that solvers run on Python integers without rounding.
    """

    #: Row-major numerators.
    numerators: Tuple[Tuple[int, ...], ...]
    #: Common positive denominator.
    denominator: int = 1

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("Cost matrix denominator must be positive")
        n = len(self.numerators)
        for row in self.numerators:
            if len(row) != n:
                raise ValueError("Cost matrix must be square")
            for entry in row:
                if entry < 0:
                    raise ValueError("Cost matrix entries must be non-negative")

    @classmethod
    def from_entries(cls, entries) -> Self:
        """
        Build a cost matrix from rational-like entries.

        :param entries: n x n grid of rationals (or values accepted by
                        :func:`pywmeq.utils.to_fraction`).
        :returns: The resulting CostMatrix.
        """
        rows = [[to_fraction(e) for e in row] for row in entries]
        den = common_denominator(e for row in rows for e in row)
        return cls(
            tuple(tuple(e.numerator * (den // e.denominator) for e in row) for row in rows),
            den,
        )

    @property
    def n(self) -> int:
        """Size of the matrix."""
        return len(self.numerators)

    def entry(self, i: int, j: int) -> Fraction:
        """Return the exact cost of pairing row ``i`` with column ``j``."""
        return Fraction(self.numerators[i][j], self.denominator)

    @property
    def entries(self) -> List[List[Fraction]]:
        """All entries as rationals."""
        return [[Fraction(e, self.denominator) for e in row] for row in self.numerators]

    def transpose(self) -> "CostMatrix":
        """Return the transposed matrix."""
        return CostMatrix(tuple(zip(*self.numerators)), self.denominator)

    def trace(self) -> Fraction:
        """Return the cost of the identity pairing."""
        return Fraction(sum(self.numerators[i][i] for i in range(self.n)), self.denominator)

    def __repr__(self):
        return f"<CostMatrix: {self.n}x{self.n} over {self.denominator}>"


@dataclass(frozen=True)
class Matching:
    """A permutation pairing rows with columns, with its exact cost."""

    #: ``permutation[i]`` is the column paired with row ``i`` (0-based).
    permutation: Tuple[int, ...]
    #: Sum of the selected entries.
    total_cost: Fraction

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError(f"Not a permutation: {self.permutation}")

    @property
    def n(self) -> int:  # noqa: D102
        return len(self.permutation)

    @property
    def mean_cost(self) -> Fraction:
        """``total_cost / n``."""
        return self.total_cost / self.n

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "permutation": list(self.permutation),
            "total_cost": fraction_payload(self.total_cost),
            "mean_cost": fraction_payload(self.mean_cost),
        }

    def __repr__(self):
        return f"<Matching: n={self.n}, total {self.total_cost}>"


#
# Statistics
#


@dataclass(frozen=True, eq=False)
class Observable:
    """A bounded real-valued function on a state space, evaluated exactly."""

    #: Registry name.
    name: str
    #: Exact evaluator.
    evaluator: Callable[[StatePoint], Fraction] = field(repr=False)
    #: Declared Lipschitz bound, if any.
    lipschitz: Optional[Fraction]
    #: Declared (min, max) range of values.
    value_range: Tuple[Fraction, Fraction]
    #: Parameters the observable was built from (its payload).
    params: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, p: StatePoint) -> Fraction:
        return self.evaluator(p)

    @property
    def spread(self) -> Fraction:
        """Width of the declared value range."""
        return self.value_range[1] - self.value_range[0]

    def to_payload(self) -> dict:  # noqa: D102
        return {"name": self.name, **self.params}

    def __repr__(self):
        return f"<Observable: {self.name} (Lipschitz {self.lipschitz})>"


@dataclass(frozen=True)
class SegmentStat:
    """A statistic kind together with its parameters."""

    #: Kind of statistic.
    kind: StatKind
    #: Threshold for exceedance kinds.
    epsilon: Optional[Fraction] = None
    #: Observable for observable kinds.
    observable: Optional[Observable] = None

    def __post_init__(self):
        if self.kind in THRESHOLD_KINDS:
            if self.epsilon is None or self.epsilon < 0:
                raise ValueError(f"{self.kind} needs a non-negative epsilon")
        if self.kind in OBSERVABLE_KINDS and self.observable is None:
            raise ValueError(f"{self.kind} needs an observable")

    @property
    def label(self) -> str:
        """Short human-readable label, e.g. ``exceedance(1/10)``."""
        args = []
        if self.observable is not None:
            args.append(self.observable.name)
        if self.epsilon is not None:
            args.append(str(self.epsilon))
        return f"{self.kind}({', '.join(args)})" if args else str(self.kind)

    def to_payload(self) -> dict:  # noqa: D102
        ret: Dict[str, Any] = {"kind": str(self.kind)}
        if self.epsilon is not None:
            ret["epsilon"] = fraction_payload(self.epsilon)
        if self.observable is not None:
            ret["observable"] = self.observable.to_payload()
        return ret


@dataclass(frozen=True)
class StatValue:
    """An exact statistic value with its truncation-error bound."""

    #: Exact value computed on truncated points.
    value: Fraction
    #: Upper bound on |true value - value|.
    bound: Fraction = ZERO

    def to_payload(self) -> dict:  # noqa: D102
        return {"value": fraction_payload(self.value), "bound": fraction_payload(self.bound)}


@dataclass(frozen=True)
class LimitEstimate:
    """Samples of a statistic along an n-schedule with limsup/liminf estimates."""

    #: (n, value) samples in schedule order.
    samples: Tuple[Tuple[int, Fraction], ...]
    #: Number of trailing samples used for the estimates.
    tail_window: int
    #: Maximum tail oscillation for the estimate to count as converged.
    tolerance: Fraction
    #: Largest truncation-error bound among the samples.
    error_bound: Fraction = ZERO

    def __post_init__(self):
        if not self.samples:
            raise ValueError("Limit estimates need at least one sample")
        if self.tail_window < 1:
            raise ValueError("Tail window must be positive")

    @property
    def schedule(self) -> Tuple[int, ...]:  # noqa: D102
        return tuple(n for n, _ in self.samples)

    @property
    def tail(self) -> Tuple[Tuple[int, Fraction], ...]:
        """The last ``tail_window`` samples (all of them on short schedules)."""
        return self.samples[-self.tail_window :]

    @property
    def limsup_estimate(self) -> Fraction:  # noqa: D102
        return max(v for _, v in self.tail)

    @property
    def liminf_estimate(self) -> Fraction:  # noqa: D102
        return min(v for _, v in self.tail)

    @property
    def converged(self) -> bool:
        """Whether the tail is complete and oscillates by at most ``tolerance``."""
        if len(self.samples) < self.tail_window:
            return False
        return self.limsup_estimate - self.liminf_estimate <= self.tolerance

    @property
    def limsup_sample(self) -> Tuple[int, Fraction]:
        """The (n, value) sample attaining the limsup estimate (earliest on ties)."""
        best = self.limsup_estimate
        return next(s for s in self.tail if s[1] == best)

    @property
    def sup_sample(self) -> Tuple[int, Fraction]:
        """The (n, value) sample attaining the maximum over the whole schedule."""
        best = max(v for _, v in self.samples)
        return next(s for s in self.samples if s[1] == best)

    def late_sup_sample(self, late_n: int) -> Optional[Tuple[int, Fraction]]:
        """The largest sample with n >= ``late_n``, or None if there is none."""
        late = [s for s in self.samples if s[0] >= late_n]
        if not late:
            return None
        best = max(v for _, v in late)
        return next(s for s in late if s[1] == best)

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "samples": [{"n": n, **fraction_payload(v)} for n, v in self.samples],
            "tail_window": self.tail_window,
            "tolerance": fraction_payload(self.tolerance),
            "limsup_estimate": fraction_payload(self.limsup_estimate),
            "liminf_estimate": fraction_payload(self.liminf_estimate),
            "converged": self.converged,
            "error_bound": fraction_payload(self.error_bound),
        }

    def __repr__(self):
        state = "converged" if self.converged else "non-converged"
        return (
            f"<LimitEstimate: limsup {self.limsup_estimate}, liminf {self.liminf_estimate}, "
            f"{state}>"
        )


@dataclass(frozen=True, eq=False)
class IntegerSetView:
    """
    A subset F of {0, ..., horizon-1}.

    Exactly one of ``indices``, ``intervals`` or ``predicate`` describes the set.
    """

    #: Exclusive upper end N of the observed range.
    horizon: int
    #: Sorted explicit members.
    indices: Optional[Tuple[int, ...]] = None
    #: Sorted, disjoint half-open ranges [a, b).
    intervals: Optional[Tuple[Tuple[int, int], ...]] = None
    #: Membership predicate.
    predicate: Optional[Callable[[int], bool]] = field(default=None, repr=False)
    #: Whether the view describes the complement of the above.
    complemented: bool = False

    def __post_init__(self):
        given = [x is not None for x in (self.indices, self.intervals, self.predicate)]
        if sum(given) != 1:
            raise ValueError("Give exactly one of indices, intervals or predicate")
        if self.horizon < 0:
            raise ValueError("Horizon must be non-negative")
        if self.indices is not None:
            if list(self.indices) != sorted(set(self.indices)):
                raise ValueError("Indices must be sorted and distinct")
            if self.indices and not 0 <= self.indices[0] <= self.indices[-1] < self.horizon:
                raise ValueError("Indices must lie in [0, horizon)")

    @classmethod
    def from_indices(cls, indices, horizon: int) -> Self:  # noqa: D102
        return cls(horizon, indices=tuple(sorted(set(indices))))

    @classmethod
    def from_intervals(cls, intervals, horizon: int) -> Self:  # noqa: D102
        clipped = []
        for a, b in sorted(intervals):
            a, b = max(0, a), min(b, horizon)
            if a < b:
                if clipped and a < clipped[-1][1]:
                    raise ValueError("Intervals must be disjoint")
                clipped.append((a, b))
        return cls(horizon, intervals=tuple(clipped))

    @classmethod
    def from_predicate(cls, predicate: Callable[[int], bool], horizon: int) -> Self:  # noqa: D102
        return cls(horizon, predicate=predicate)

    def complement(self) -> "IntegerSetView":
        """Return the view of {0..N-1} minus this set."""
        return replace(self, complemented=not self.complemented)

    def count_below(self, n: int) -> int:
        """Return #(F intersected with [0, n))."""
        if n > self.horizon:
            raise ValueError(f"n = {n} exceeds the horizon {self.horizon}")
        if self.indices is not None:
            count = bisect_left(self.indices, n)
        elif self.intervals is not None:
            count = sum(max(0, min(b, n) - a) for a, b in self.intervals if a < n)
        else:
            count = sum(1 for i in range(n) if self.predicate(i))  # type: ignore
        return n - count if self.complemented else count

    def __repr__(self):
        return f"<IntegerSetView: horizon {self.horizon}{', complemented' if self.complemented else ''}>"


@dataclass(frozen=True)
class SandwichReport:
    """The three quantities of the observable sandwich inequality."""

    #: Threshold delta.
    delta: Fraction
    #: Segment length n.
    n: int
    #: Minimum over permutations of the number of differences above delta.
    exceedance_count: int
    #: Minimum over permutations of the summed differences.
    matched_sum: Fraction
    #: delta * exceedance_count.
    lower: Fraction
    #: spread * exceedance_count + delta * (n - exceedance_count).
    upper: Fraction

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "delta": fraction_payload(self.delta),
            "n": self.n,
            "exceedance_count": self.exceedance_count,
            "matched_sum": fraction_payload(self.matched_sum),
            "lower": fraction_payload(self.lower),
            "upper": fraction_payload(self.upper),
        }


@dataclass(frozen=True)
class RelationVerdict:
    """A pair-relation verdict with the estimate it is based on."""

    #: Relation name, e.g. ``weakMeanAsymptotic``.
    name: str
    #: Whether the estimate is within tolerance.
    consistent: bool
    #: Underlying estimate.
    estimate: LimitEstimate

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "name": self.name,
            "consistent": self.consistent,
            "estimate": self.estimate.to_payload(),
        }


@dataclass(frozen=True)
class PairRelationReport:
    """Verdicts for the asymptotic and proximal relations of one pair."""

    #: lim F_n = 0.
    weak_mean_asymptotic: RelationVerdict
    #: liminf F_n = 0.
    weak_mean_proximal: RelationVerdict
    #: liminf of the maximum over permutations = 0.
    strong_mean_proximal: RelationVerdict
    #: lim B_n = 0.
    mean_asymptotic: RelationVerdict
    #: liminf d(T^n x, T^n y) = 0, on the running minimum of pointwise distances.
    proximal: RelationVerdict

    @property
    def relations(self) -> List[RelationVerdict]:  # noqa: D102
        return [
            self.weak_mean_asymptotic,
            self.weak_mean_proximal,
            self.strong_mean_proximal,
            self.mean_asymptotic,
            self.proximal,
        ]

    def to_payload(self) -> dict:  # noqa: D102
        return {r.name: r.to_payload() for r in self.relations}


#
# Classification
#


@dataclass(frozen=True)
class SamplerStrategy:
    """A sampling strategy with its parameter."""

    #: Kind of strategy.
    kind: SamplerKind
    #: Depth (dyadic), denominator q (rationalGrid) or period (periodicTail).
    parameter: Optional[int] = None
    #: Explicit repeating word for periodicTail.
    tail: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.parameter is not None and self.parameter < 1:
            raise ValueError(f"{self.kind} parameter must be positive")
        if self.tail is not None and not self.tail:
            raise ValueError("Explicit tails must be non-empty")

    @property
    def label(self) -> str:  # noqa: D102
        if self.tail is not None:
            return f"{self.kind}({''.join(str(s) for s in self.tail)})"
        if self.parameter is not None:
            return f"{self.kind}({self.parameter})"
        return str(self.kind)

    def to_payload(self) -> dict:  # noqa: D102
        ret: Dict[str, Any] = {"kind": str(self.kind)}
        if self.parameter is not None:
            ret["parameter"] = self.parameter
        if self.tail is not None:
            ret["tail"] = list(self.tail)
        return ret

    @classmethod
    def from_payload(cls, payload: Union[str, dict]) -> Self:
        """
        Convert a JSON payload into a SamplerStrategy; a bare kind string is accepted.

        :param payload: Strategy kind string or dictionary.
        :returns: The resulting SamplerStrategy object.
        """
        if isinstance(payload, str):
            return cls(SamplerKind(payload))
        return unroll_payload(cls, payload)


def _fractions(*values) -> List[Fraction]:
    return [Fraction(v) for v in values]


@dataclass
class ProbeConfig:
    """Grids, schedules and sampling budgets shared by the classification probes."""

    #: Decreasing epsilon grid.
    epsilon_grid: List[Fraction] = field(
        default_factory=lambda: _fractions("1/4", "1/10", "1/20")
    )
    #: Decreasing delta (ball radius) grid.
    delta_grid: List[Fraction] = field(
        default_factory=lambda: _fractions("1/8", "1/32", "1/128")
    )
    #: Strictly increasing n-schedule.
    schedule: List[int] = field(default_factory=lambda: [2**j for j in range(4, 13)])
    #: Candidate samplers inside balls; empty means the system's defaults.
    samplers: List[SamplerStrategy] = field(default_factory=list)
    #: Number of candidates per ball.
    samples_per_ball: int = 8
    #: Base seed.
    seed: int = 0
    #: Convergence and consistency tolerance.
    tolerance: Fraction = Fraction(1, 100)
    #: Tail window of the limit estimates.
    tail_window: int = 3
    #: Number of sampled ball centres for system-level searches.
    centers: int = 4
    #: Strategy for ball centres; None means the system's default.
    center_strategy: Optional[SamplerStrategy] = None
    #: Smallest n counted as late by the single-n (in-the-mean) forms.
    late_n: int = 256
    #: Decreasing candidate sensitivity constants.
    constant_grid: List[Fraction] = field(
        default_factory=lambda: _fractions(
            "1/2", "2/5", "3/10", "1/4", "1/5", "3/20", "1/10", "1/20", "1/50"
        )
    )
    #: Grid of t values for density-t probes.
    t_grid: List[Fraction] = field(default_factory=lambda: _fractions(0, "1/2", "9/10"))
    #: Frequency a tuple must exceed (densityTuple uses 0).
    tuple_threshold: Fraction = Fraction(1, 100)
    #: Explicit tuple anchors; None means the system's default grid.
    anchors: Optional[List[Tuple[StatePoint, StatePoint]]] = None

    def __post_init__(self):
        for name in ("epsilon_grid", "delta_grid", "constant_grid"):
            grid = getattr(self, name)
            if not grid:
                raise ValueError(f"{name} must be non-empty")
            if any(a <= b for a, b in zip(grid, grid[1:])):
                raise ValueError(f"{name} must be strictly decreasing")
            if grid[-1] <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.schedule or any(a >= b for a, b in zip(self.schedule, self.schedule[1:])):
            raise ValueError("schedule must be non-empty and strictly increasing")
        if self.schedule[0] < 1:
            raise ValueError("schedule entries must be positive")
        if self.samples_per_ball < 1:
            raise ValueError("samples_per_ball must be at least 1")
        if self.centers < 0:
            raise ValueError("centers must be non-negative")
        if self.tail_window < 1:
            raise ValueError("tail_window must be positive")
        if self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")
        if any(not 0 <= t <= 1 for t in self.t_grid):
            raise ValueError("t_grid values must lie in [0, 1]")

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "epsilon_grid": [fraction_payload(e) for e in self.epsilon_grid],
            "delta_grid": [fraction_payload(d) for d in self.delta_grid],
            "schedule": list(self.schedule),
            "samplers": [s.to_payload() for s in self.samplers],
            "samples_per_ball": self.samples_per_ball,
            "seed": self.seed,
            "tolerance": fraction_payload(self.tolerance),
            "tail_window": self.tail_window,
            "centers": self.centers,
            "center_strategy": (
                self.center_strategy.to_payload() if self.center_strategy else None
            ),
            "late_n": self.late_n,
            "constant_grid": [fraction_payload(c) for c in self.constant_grid],
            "t_grid": [fraction_payload(t) for t in self.t_grid],
            "tuple_threshold": fraction_payload(self.tuple_threshold),
            "anchors": (
                [[a.to_payload(), b.to_payload()] for a, b in self.anchors]
                if self.anchors is not None
                else None
            ),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> Self:
        """
        Convert a JSON payload (provided as a dict) into a ProbeConfig object.

        :param payload: Dictionary containing the JSON payload.
        :returns: The resulting ProbeConfig object.
        """
        payload_parsed = payload.copy()
        anchors = payload_parsed.pop("anchors", None)
        ret = unroll_payload(cls, payload_parsed)
        if anchors is not None:
            ret.anchors = [(point_from_payload(a), point_from_payload(b)) for a, b in anchors]
        return ret


@dataclass(frozen=True)
class Witness:
    """A concrete pair whose statistic supports a verdict."""

    #: First point of the pair.
    x: StatePoint
    #: Second point of the pair.
    y: StatePoint
    #: Orbit length at which the statistic was evaluated.
    n: int
    #: Exact statistic value.
    value: Fraction
    #: Truncation bound attached to the value.
    bound: Fraction
    #: Statistic label.
    statistic: str
    #: Radius of the ball the pair was drawn from.
    radius: Optional[Fraction] = None

    def to_payload(self) -> dict:  # noqa: D102
        ret = {
            "x": self.x.to_payload(),
            "y": self.y.to_payload(),
            "n": self.n,
            "value": fraction_payload(self.value),
            "bound": fraction_payload(self.bound),
            "statistic": self.statistic,
        }
        if self.radius is not None:
            ret["radius"] = fraction_payload(self.radius)
        return ret


@dataclass
class ProbeVerdict:
    """Outcome of a probe with its witnesses and per-grid-cell diagnostics."""

    #: Name of the probe that produced the verdict.
    probe: str
    #: The verdict.
    verdict: Verdict
    #: Witness pairs.
    witnesses: List[Witness] = field(default_factory=list)
    #: Constant the witnesses exceed (sensitive verdicts).
    achieved_constant: Optional[Fraction] = None
    #: Per-grid-cell records.
    diagnostics: List[dict] = field(default_factory=list)
    #: Config that produced the verdict.
    config: Optional[ProbeConfig] = None

    def __post_init__(self):
        if self.verdict == Verdict.SENSITIVE:
            if self.achieved_constant is None or not any(
                w.value - w.bound > self.achieved_constant for w in self.witnesses
            ):
                raise InvariantError(
                    f"{self.probe}: sensitive verdict without a witness exceeding its constant"
                )

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "probe": self.probe,
            "verdict": str(self.verdict),
            "witnesses": [w.to_payload() for w in self.witnesses],
            "achieved_constant": (
                fraction_payload(self.achieved_constant)
                if self.achieved_constant is not None
                else None
            ),
            "diagnostics": self.diagnostics,
            "config": self.config.to_payload() if self.config else None,
        }

    def __repr__(self):
        return f"<ProbeVerdict: {self.probe} {self.verdict} ({len(self.witnesses)} witnesses)>"


@dataclass(frozen=True)
class TupleWitness:
    """Best pair found in one probed ball (or closeness scale) of a tuple search."""

    #: Centre of the probed ball.
    center: StatePoint
    #: Ball radius (closeness scale for weak in-the-mean tuples).
    radius: Fraction
    #: Orbit steered towards the first anchor.
    y1: StatePoint
    #: Orbit steered towards the second anchor.
    y2: StatePoint
    #: Orbit length at which the frequency was read.
    n: int
    #: Minimum over permutations of the joint-visit count, over n.
    frequency: Fraction
    #: Maximum over permutations of the joint-visit count, over n.
    max_frequency: Fraction

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "center": self.center.to_payload(),
            "radius": fraction_payload(self.radius),
            "y1": self.y1.to_payload(),
            "y2": self.y2.to_payload(),
            "n": self.n,
            "frequency": fraction_payload(self.frequency),
            "max_frequency": fraction_payload(self.max_frequency),
        }


@dataclass(frozen=True)
class TupleCandidate:
    """An anchor pair that passed a tuple search, with its witnesses."""

    #: Tuple notion searched.
    kind: TupleKind
    #: Anchor points (x1, x2).
    anchor: Tuple[StatePoint, StatePoint]
    #: Radius of the anchor balls.
    epsilon: Fraction
    #: Empirical lower bound c on the frequency.
    frequency_bound: Fraction
    #: Best pair per probed ball.
    witnesses: Tuple[TupleWitness, ...]

    def __post_init__(self):
        if self.frequency_bound <= 0:
            raise ValueError("Tuple candidates need a positive frequency bound")

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "kind": str(self.kind),
            "anchor": [self.anchor[0].to_payload(), self.anchor[1].to_payload()],
            "epsilon": fraction_payload(self.epsilon),
            "frequency_bound": fraction_payload(self.frequency_bound),
            "witnesses": [w.to_payload() for w in self.witnesses],
        }


@dataclass
class AgreementReport:
    """Cross-check of the limsup and single-n sensitivity forms."""

    #: Strong mean sensitivity (F_n, limsup form).
    strong_mean: ProbeVerdict
    #: Strong sensitivity in the mean (F_n, late single-n form).
    strong_in_mean: ProbeVerdict
    #: Mean sensitivity (B_n, limsup form).
    mean_sensitive: ProbeVerdict
    #: Sensitivity in the mean (B_n, late single-n form).
    sensitive_in_mean: ProbeVerdict

    @property
    def agree(self) -> bool:
        """Whether the two F_n-based verdicts agree."""
        return self.strong_mean.verdict == self.strong_in_mean.verdict

    @property
    def besicovitch_agree(self) -> bool:
        """Whether the two B_n-based verdicts agree."""
        return self.mean_sensitive.verdict == self.sensitive_in_mean.verdict

    @property
    def note(self) -> str:  # noqa: D102
        if self.agree and self.besicovitch_agree:
            return "agreement"
        return "resolution insufficient"

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "agree": self.agree,
            "besicovitch_agree": self.besicovitch_agree,
            "note": self.note,
            "strong_mean": self.strong_mean.to_payload(),
            "strong_in_mean": self.strong_in_mean.to_payload(),
            "mean_sensitive": self.mean_sensitive.to_payload(),
            "sensitive_in_mean": self.sensitive_in_mean.to_payload(),
        }


@dataclass
class DensityEquivalenceReport:
    """Per-centre comparison of weak-mean and density-t probe verdicts."""

    #: One row per sampled centre.
    rows: List[dict] = field(default_factory=list)
    #: Rows whose verdicts contradict each other.
    disagreements: List[dict] = field(default_factory=list)
    #: Whether any probe was inconclusive.
    inconclusive: bool = False

    @property
    def agree(self) -> bool:  # noqa: D102
        return not self.disagreements

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "agree": self.agree,
            "inconclusive": self.inconclusive,
            "rows": self.rows,
            "disagreements": self.disagreements,
        }


@dataclass
class DichotomyReport:
    """System-level verdict aggregated from point probes and sensitivity searches."""

    #: Overall side.
    side: DichotomySide
    #: Side according to weak mean equicontinuity vs strong mean sensitivity.
    mean_side: DichotomySide
    #: Side according to equicontinuity in the mean vs strong sensitivity in the mean.
    in_mean_side: DichotomySide
    #: Sensitivity searches by mode.
    sensitivity: Dict[str, ProbeVerdict] = field(default_factory=dict)
    #: Point probes at the sampled centres.
    point_verdicts: List[ProbeVerdict] = field(default_factory=list)
    #: Flat evidence table.
    evidence: List[dict] = field(default_factory=list)

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "side": str(self.side),
            "mean_side": str(self.mean_side),
            "in_mean_side": str(self.in_mean_side),
            "sensitivity": {k: v.to_payload() for k, v in self.sensitivity.items()},
            "point_verdicts": [v.to_payload() for v in self.point_verdicts],
            "evidence": self.evidence,
        }

    def __repr__(self):
        return f"<DichotomyReport: {self.side}>"


#
# Verification
#


@dataclass
class SuiteResult:
    """Outcome of one invariant suite."""

    #: Suite name.
    name: str
    #: Number of individual checks evaluated.
    checks: int = 0
    #: Descriptions of the failed checks.
    failures: List[str] = field(default_factory=list)
    #: Error raised by the suite itself, if any.
    error: Optional[str] = None

    @property
    def passed(self) -> bool:  # noqa: D102
        return not self.failures and self.error is None

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            "error": self.error,
        }


@dataclass
class VerifyReport:
    """Outcome of a verification run."""

    #: Level the suites ran at.
    level: VerifyLevel
    #: Seed of the random instances.
    seed: int
    #: One result per suite, in run order.
    suites: List[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:  # noqa: D102
        return all(s.passed for s in self.suites)

    @property
    def failed_suites(self) -> List[str]:  # noqa: D102
        return [s.name for s in self.suites if not s.passed]

    def to_payload(self) -> dict:  # noqa: D102
        return {
            "level": str(self.level),
            "seed": self.seed,
            "passed": self.passed,
            "suites": [s.to_payload() for s in self.suites],
        }

    def __repr__(self):
        state = "passed" if self.passed else f"failed: {', '.join(self.failed_suites)}"
        return f"<VerifyReport: {self.level} {state}>"
