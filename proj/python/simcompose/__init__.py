"""Reduced-order abstractions of interconnected linear systems."""

from ._core import (
    DimensionError,
    NumericalError,
    ParseError,
    ValidationError,
    build_pipeline,
    bundled_example,
    check,
    compose,
    load,
    parse,
    reproduce_example,
    simulate,
)

__all__ = [
    "DimensionError",
    "NumericalError",
    "ParseError",
    "ValidationError",
    "build_pipeline",
    "bundled_example",
    "check",
    "compose",
    "load",
    "parse",
    "reproduce_example",
    "simulate",
]
