# SPDX-License-Identifier: MIT
"""Common utility functions used in pyWMEq."""

import dataclasses
from enum import Enum, IntEnum
from fractions import Fraction
import hashlib
import json
from math import lcm
from typing import Any, Iterable, List, Optional, Tuple, Union, cast, get_type_hints

#: Number of significant digits used for human-readable decimal renderings.
APPROX_DIGITS = 6


class ConfigError(ValueError):
    """Raised when an experiment configuration cannot be parsed or validated."""


class InvariantError(RuntimeError):
    """
    Raised when a checked mathematical invariant fails.

    This always indicates a bug in a solver or estimator, never bad input.
    """


RationalLike = Union[Fraction, int, str, dict]


def to_fraction(value: RationalLike) -> Fraction:
    """
    Convert a payload value into an exact rational.

    Accepts :class:`fractions.Fraction`, integers, ``"p/q"`` or decimal strings
    and ``{"num": "...", "den": "..."}`` dicts. Floats are rejected, since they
    would silently introduce rounding.

    :param value: Value to convert.
    :returns: The exact rational.
    :raises TypeError: On floats and unsupported types.
    :raises ValueError: On malformed strings or zero denominators.
    """
    if isinstance(value, bool):
        raise TypeError("Booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, dict):
        try:
            return Fraction(int(value["num"]), int(value["den"]))
        except KeyError as e:
            raise ValueError(f"Rational payload is missing {e}") from e
    raise TypeError(f"Cannot convert {type(value).__name__} to an exact rational")


def fraction_payload(value: Fraction) -> dict:
    """Serialize a rational as decimal strings of its numerator and denominator."""
    return {"num": str(value.numerator), "den": str(value.denominator)}


def approx(value: Fraction, digits: int = APPROX_DIGITS) -> str:
    """Render a rational as a decimal with the given number of significant digits."""
    return f"{float(value):.{digits}g}"


def common_denominator(values: Iterable[Fraction]) -> int:
    """Return the least common multiple of the denominators of the given rationals."""
    den = 1
    for v in values:
        den = lcm(den, v.denominator)
    return den


def scale_to_integers(values: List[Fraction]) -> Tuple[List[int], int]:
    """
    Rewrite rationals over their common denominator.

    :param values: Rationals to rescale.
    :returns: Tuple of (numerators over the common denominator, common denominator).
    """
    den = common_denominator(values)
    return [v.numerator * (den // v.denominator) for v in values], den


def canonical_json(payload: Any) -> str:
    """Dump a payload as canonical JSON (sorted keys, no whitespace)."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_hash(payload: Any) -> str:
    """Return the SHA-256 hex digest of the canonical JSON form of a payload."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def derive_seed(*parts: Any) -> int:
    """
    Derive a deterministic 64-bit seed from arbitrary printable parts.

    Used to give every sampled candidate its own reproducible stream without
    sharing a mutable random generator between probes.
    """
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def payload_cast(in_value: Any, out_type: Any) -> Any:
    """
    Perform a type cast from the input value to the target type.

    :param in_value: Value to convert.
    :param out_type: Desired output type.
    """
    origin = getattr(out_type, "__origin__", None)
    args = getattr(out_type, "__args__", ())

    # Optional[X] and other unions; None passes through, otherwise try X
    if origin is Union:
        if in_value is None:
            return None
        non_none = [a for a in args if a is not type(None)]
        last_error: Optional[Exception] = None
        for arg in non_none:
            try:
                return payload_cast(in_value, arg)
            except (TypeError, ValueError) as e:
                last_error = e
        raise ValueError(f"Value {in_value!r} matches none of {non_none}") from last_error

    # typing.List type with inner object type defined; cast recursively
    if origin is list:
        if not isinstance(in_value, (list, tuple)):
            raise TypeError(f"Expected a list, got {type(in_value).__name__}")
        return [payload_cast(i, args[0]) for i in in_value]

    # typing.Tuple; either homogeneous (X, ...) or fixed-length
    if origin is tuple:
        if not isinstance(in_value, (list, tuple)):
            raise TypeError(f"Expected a list, got {type(in_value).__name__}")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(payload_cast(i, args[0]) for i in in_value)
        if len(args) != len(in_value):
            raise ValueError(f"Expected {len(args)} items, got {len(in_value)}")
        return tuple(payload_cast(i, a) for i, a in zip(in_value, args))

    if origin is dict:
        return dict(in_value)

    try:
        is_intenum = issubclass(out_type, IntEnum)
    except TypeError:
        is_intenum = False

    try:
        is_enum = issubclass(out_type, Enum)
    except TypeError:
        is_enum = False

    is_dataclass_with_payload = dataclasses.is_dataclass(out_type)
    if is_dataclass_with_payload:
        is_dataclass_with_payload = hasattr(out_type, "from_payload")

    # Data class with from_payload method
    if is_dataclass_with_payload:
        if isinstance(in_value, out_type):
            return in_value
        return out_type.from_payload(in_value)  # type: ignore

    # Exact rationals
    elif out_type is Fraction:
        return to_fraction(in_value)

    # IntEnum (convert value to int first)
    elif is_intenum:
        return out_type(int(in_value))

    # Int and String as well as non-IntEnum Enum types
    elif out_type in (int, str) or is_enum:
        if out_type is int and isinstance(in_value, (bool, float)):
            raise TypeError(f"Expected an integer, got {in_value!r}")
        return out_type(in_value)

    # Boolean
    elif out_type is bool:
        val = in_value
        if type(val) is bool:
            return val
        elif type(val) is str:
            return False if val.lower() == "false" else True
        else:
            return bool(val)

    # Unknown type, return as-is
    return in_value


def unroll_payload(
    cls: type, payload: dict, payload_to_attr: Optional[dict] = None
) -> Any:
    """
    Perform type casts for values in the payload to match the attributes of the provided
    dataclass.

    :param cls: Dataclass that will be returned.
    :param payload: JSON payload as a dict.
    :param payload_to_attr: Dict of attributes to rename, where the key is
                            the name of the attribute in JSON, and the value
                            is the name of the target attribute in the class.
    :returns: Instance of `cls` filled with values from the payload.
    :raises ValueError: When a value cannot be converted or an unknown key is present.
    :raises TypeError: When a required attribute is missing.
    """
    if not isinstance(payload, dict):
        raise TypeError(f"{cls.__name__} payload must be an object, got {type(payload).__name__}")

    payload_parsed = {}
    attr_types = dict(
        [
            (field.name, cast(type, field.type))
            for field in dataclasses.fields(cls)
            if field.init
        ]
    )
    hints = _resolved_hints(cls)

    for payload_attr in payload.keys():
        if payload_to_attr and payload_attr in payload_to_attr:
            class_attr = payload_to_attr[payload_attr]
        else:
            class_attr = payload_attr

        if class_attr not in attr_types:
            raise ValueError(f"{cls.__name__}: unknown field '{payload_attr}'")

        class_attr_type = hints.get(class_attr, attr_types[class_attr])

        try:
            payload_parsed[class_attr] = payload_cast(
                payload[payload_attr], class_attr_type
            )
        except Exception as e:
            raise ValueError(
                f"{cls.__name__}.{class_attr}: failed to convert value {payload[payload_attr]!r} ({e})"
            ) from e

    try:
        return cls(**payload_parsed)
    except TypeError as e:
        raise TypeError(f"{cls.__name__}: payload missing required property ({e})") from e


def _resolved_hints(cls: type) -> dict:
    """Resolve string annotations (``from __future__`` style) of a dataclass."""
    try:
        return get_type_hints(cls)
    except Exception:
        return {}
