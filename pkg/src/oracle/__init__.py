"""Exhaustive reference solvers for tiny test instances."""

from .enumeration import (
    OracleSolution,
    oracle_basis_pursuit_tiny,
    oracle_project_l1,
    oracle_solve_tiny,
)

__all__ = [
    "OracleSolution",
    "oracle_solve_tiny",
    "oracle_project_l1",
    "oracle_basis_pursuit_tiny",
]
