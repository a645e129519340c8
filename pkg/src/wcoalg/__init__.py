"""Finite-set engine for W-types in categories of coalgebras."""

__version__ = "0.1.0"
