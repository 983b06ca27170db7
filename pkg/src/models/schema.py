"""Shared value types: the infinite-length sentinel and verdict enums."""
from __future__ import annotations

from enum import Enum
from typing import Union


class _InfiniteLength:
    """Length of a module that is not of finite length.

    Deliberately supports no arithmetic: callers must branch on it.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __str__(self):
        return "INF"

    def __reduce__(self):
        return (_InfiniteLength, ())


INFINITE = _InfiniteLength()

Length = Union[int, _InfiniteLength]


def is_finite(length: Length) -> bool:
    return length is not INFINITE


def length_to_json(length: Length):
    """JSON/CSV friendly form of a length: the integer, or the string 'INF'."""
    return "INF" if length is INFINITE else int(length)


def length_from_json(value) -> Length:
    if value == "INF":
        return INFINITE
    return int(value)


class FitVerdict(str, Enum):
    POLYNOMIAL = "POLYNOMIAL"
    NO_POLYNOMIAL_FOUND = "NO_POLYNOMIAL_FOUND"
    INFINITE_VALUES = "INFINITE_VALUES"


class Conclusion(str, Enum):
    CONFIRMED = "CONFIRMED"
    REFUTED = "REFUTED"
    INCONCLUSIVE = "INCONCLUSIVE"
