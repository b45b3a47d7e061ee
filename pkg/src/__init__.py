"""Constrained sparse recovery: primal-dual soft-thresholding solvers and the MEG experiment."""

__version__ = "0.1.0"
