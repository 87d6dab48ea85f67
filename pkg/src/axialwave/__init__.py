"""Numerical laboratory for odd-parity linear waves outside a Schwarzschild black hole."""

from __future__ import annotations

__version__ = "0.1.0"
