"""Nonparametric multivariate Hawkes analysis of order-flow event streams.

Pipeline: ingest or simulate marked event streams, map them to Hawkes
components by volume bin, estimate conditional laws on a lin-log grid,
solve the Wiener-Hopf system for the kernel matrix, and recover baselines
and exogeneity ratios from the stationarity relation.
"""

__version__ = "0.1.0"

from . import events, simulate, estimate, whsolve, report
from .grids import build_linlog_grid, build_quadrature

__all__ = ["events", "simulate", "estimate", "whsolve", "report",
           "build_linlog_grid", "build_quadrature", "__version__"]
