"""Outward-rounded interval arithmetic and certified range enclosure."""

from ._backend import BACKEND
from .core import Interval, IntervalDomainError, as_interval, interval_op
from .enclosure import (
    DEFAULT_LEAF_BUDGET,
    DEFAULT_MAX_DEPTH,
    EnclosureFn,
    LowerBoundResult,
    bisect_lower_bound,
    certify_lower_bound,
    enclose_range,
)

__all__ = [
    "BACKEND",
    "DEFAULT_LEAF_BUDGET",
    "DEFAULT_MAX_DEPTH",
    "EnclosureFn",
    "Interval",
    "IntervalDomainError",
    "LowerBoundResult",
    "as_interval",
    "bisect_lower_bound",
    "certify_lower_bound",
    "enclose_range",
    "interval_op",
]
