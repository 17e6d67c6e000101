"""Exhaustive elimination search for a strongly regular graph srg(85,14,3,2)."""

from __future__ import annotations

__version__ = "0.1.0"
