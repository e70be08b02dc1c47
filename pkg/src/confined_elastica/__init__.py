"""Confined elastica: the delta^(1/3) law for curves in the unit disk."""

__version__ = "0.1.0"
