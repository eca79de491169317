# SPDX-License-Identifier: MIT
"""Tests for the payload and rational helpers."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import pytest

from pywmeq.types import SamplerKind, SamplerStrategy
from pywmeq.utils import (
    approx,
    canonical_json,
    content_hash,
    derive_seed,
    fraction_payload,
    payload_cast,
    scale_to_integers,
    to_fraction,
    unroll_payload,
)


@dataclass
class _Sample:
    name: str
    ratio: Fraction
    grid: List[Fraction] = field(default_factory=list)
    sampler: Optional[SamplerStrategy] = None
    count: int = 1


def test_utils_to_fraction():
    """Test conversion of payload values to exact rationals."""
    assert to_fraction(3) == Fraction(3)
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(" 0.125 ") == Fraction(1, 8)
    assert to_fraction({"num": "2", "den": "6"}) == Fraction(1, 3)
    assert to_fraction(Fraction(5, 7)) == Fraction(5, 7)

    # Floats and booleans would introduce silent rounding or confusion
    with pytest.raises(TypeError):
        to_fraction(0.5)
    with pytest.raises(TypeError):
        to_fraction(True)
    with pytest.raises(ValueError):
        to_fraction({"num": "1"})
    with pytest.raises(ZeroDivisionError):
        to_fraction("1/0")


def test_utils_fraction_payload():
    """Test the rational payload and its decimal rendering."""
    assert fraction_payload(Fraction(-3, 9)) == {"num": "-1", "den": "3"}
    assert to_fraction(fraction_payload(Fraction(22, 7))) == Fraction(22, 7)
    assert approx(Fraction(1, 3)) == "0.333333"
    assert approx(Fraction(0)) == "0"


def test_utils_scale_to_integers():
    """Test rewriting rationals over a common denominator."""
    values, den = scale_to_integers([Fraction(1, 2), Fraction(1, 3), Fraction(0)])
    assert den == 6
    assert values == [3, 2, 0]


def test_utils_canonical_json_and_hash():
    """Test that hashing is independent of key order and sensitive to content."""
    a = {"b": 1, "a": [1, 2, {"y": "z", "x": None}]}
    b = {"a": [1, 2, {"x": None, "y": "z"}], "b": 1}
    assert canonical_json(a) == canonical_json(b)
    assert canonical_json(a) == '{"a":[1,2,{"x":null,"y":"z"}],"b":1}'
    assert content_hash(a) == content_hash(b)
    assert content_hash(a) != content_hash({"b": 2, "a": [1, 2, {"y": "z", "x": None}]})
    assert len(content_hash(a)) == 64


def test_utils_derive_seed():
    """Test that derived seeds are deterministic and separate their inputs."""
    assert derive_seed(1, "center", 0) == derive_seed(1, "center", 0)
    assert derive_seed(1, "center", 0) != derive_seed(1, "center", 1)
    assert derive_seed(1, "center", 0) != derive_seed(2, "center", 0)
    assert 0 <= derive_seed("x") < 2**64


def test_utils_payload_cast():
    """Test recursive casting of payload values."""
    assert payload_cast(["1/2", 1], List[Fraction]) == [Fraction(1, 2), Fraction(1)]
    assert payload_cast(None, Optional[int]) is None
    assert payload_cast("7", Optional[int]) == 7
    assert payload_cast("dyadic", SamplerKind) == SamplerKind.DYADIC
    assert payload_cast("uniform", SamplerStrategy) == SamplerStrategy(SamplerKind.UNIFORM)

    with pytest.raises(TypeError):
        payload_cast(1.5, int)
    with pytest.raises(TypeError):
        payload_cast("abc", List[int])


def test_utils_unroll_payload():
    """Test conversion of payloads into dataclasses."""
    ret = unroll_payload(
        _Sample,
        {
            "name": "a",
            "ratio": {"num": "1", "den": "4"},
            "grid": ["1/2", "1/3"],
            "sampler": {"kind": "dyadic", "parameter": 3},
        },
    )
    assert ret.name == "a"
    assert ret.ratio == Fraction(1, 4)
    assert ret.grid == [Fraction(1, 2), Fraction(1, 3)]
    assert ret.sampler == SamplerStrategy(SamplerKind.DYADIC, 3)
    assert ret.count == 1

    # Renamed attributes
    ret = unroll_payload(_Sample, {"label": "b", "ratio": 1}, {"label": "name"})
    assert ret.name == "b"

    with pytest.raises(ValueError, match="unknown field"):
        unroll_payload(_Sample, {"name": "a", "ratio": 1, "extra": 0})
    with pytest.raises(ValueError, match="_Sample.ratio"):
        unroll_payload(_Sample, {"name": "a", "ratio": 0.5})
    with pytest.raises(TypeError, match="missing"):
        unroll_payload(_Sample, {"name": "a"})
    with pytest.raises(TypeError):
        unroll_payload(_Sample, ["not", "a", "dict"])
