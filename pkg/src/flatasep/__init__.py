"""Exact Pfaffian formulas for flat ASEP, checked against independent oracles."""

__version__ = "0.1.0"


class DomainError(ValueError):
    """Arguments outside the region where a formula is defined."""


class TruncationError(RuntimeError):
    """A series or quadrature tail bound stayed above its tolerance."""
