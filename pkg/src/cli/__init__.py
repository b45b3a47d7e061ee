"""CLI package for the sparse-recovery solvers."""

from __future__ import annotations

__all__ = ["__version__"]

__version__ = "0.1.0"
