"""Pair-approximation solvers, threshold estimators and Monte Carlo
simulation for the SIS model on networks."""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
