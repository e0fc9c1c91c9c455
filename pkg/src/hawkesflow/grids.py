"""Lin-log binning and quadrature grids.

Both the conditional-law histogram and the kernel quadrature use the same
two-regime layout: uniformly spaced edges near zero (where the short-lag
structure lives) followed by log-spaced edges out to the maximum lag.  The
histogram variant stores bin edges; the quadrature variant stores nodes
plus trapezoidal weights for integration over ``[0, x_max]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LinLogGrid",
    "QuadratureGrid",
    "build_linlog_grid",
    "build_quadrature",
    "CLAW_GRID_DEFAULTS",
    "QUADRATURE_DEFAULTS",
]

# Default conditional-law histogram: 50 linear bins up to 1 ms, 1500
# log bins up to 2e4 s.
CLAW_GRID_DEFAULTS = dict(h_min=1e-3, h_max=2e4, n_lin=50, n_log=1500)

# Default kernel quadrature: 80 linear bins up to 0.5 ms, 80 log bins
# up to 0.5 s.
QUADRATURE_DEFAULTS = dict(x_min=0.5e-3, x_max=0.5, n_lin=80, n_log=80)


def _linlog_edges(delta_lin: float, t_break: float, delta_log: float,
                  t_max: float, n_lin: int, n_log: int) -> np.ndarray:
    """Edges ``[0, d, 2d, ..., t_break, t_break*e^dl, ..., t_max]``."""
    if delta_lin <= 0:
        raise ValueError("linear step must be positive")
    if not (n_lin * delta_lin <= t_break * (1 + 1e-12)):
        raise ValueError(
            f"linear part overruns the breakpoint: "
            f"{n_lin} * {delta_lin} > {t_break}")
    if not (t_break < t_max):
        raise ValueError(f"breakpoint {t_break} must lie below maximum {t_max}")
    if delta_log <= 0:
        raise ValueError("log step must be positive")
    lin = np.arange(n_lin + 1, dtype=float) * delta_lin
    # Snap the end of the linear ramp onto the breakpoint when they agree,
    # and bridge with an extra edge when the caller left a gap.
    if math.isclose(lin[-1], t_break, rel_tol=1e-9):
        lin[-1] = t_break
    else:
        lin = np.append(lin, t_break)
    log = t_break * np.exp(delta_log * np.arange(1, n_log + 1))
    if math.isclose(log[-1], t_max, rel_tol=1e-9):
        log[-1] = t_max
    edges = np.concatenate([lin, log])
    if np.any(np.diff(edges) <= 0):
        raise ValueError("grid edges are not strictly increasing")
    return edges


@dataclass(frozen=True)
class LinLogGrid:
    """Histogram grid for lag binning: linear near 0, logarithmic beyond.

    ``edges[0] == 0``; bin ``b`` collects lags in ``(edges[b], edges[b+1]]``.
    """

    delta_lin: float
    h_min: float
    delta_log: float
    h_max: float
    n_lin: int
    n_log: int
    edges: np.ndarray = field(repr=False)

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        """Geometric-mean representative lag per bin (arithmetic for bin 0)."""
        left, right = self.edges[:-1], self.edges[1:]
        out = np.sqrt(np.where(left > 0, left, right / 4.0) * right)
        return out

    def bin_index(self, lags):
        """Bin index for each lag in ``(0, h_max]``; -1 when out of range."""
        lags = np.asarray(lags, dtype=float)
        # searchsorted with side='left' maps lag in (edges[b], edges[b+1]]
        # to b+1, hence the -1.
        idx = np.searchsorted(self.edges, lags, side="left") - 1
        out_of_range = (lags <= 0) | (lags > self.edges[-1])
        return np.where(out_of_range, -1, idx)

    def to_dict(self) -> dict:
        return {
            "delta_lin": self.delta_lin,
            "h_min": self.h_min,
            "delta_log": self.delta_log,
            "h_max": self.h_max,
            "n_lin": self.n_lin,
            "n_log": self.n_log,
        }


def build_linlog_grid(delta_lin: float | None = None,
                      h_min: float = CLAW_GRID_DEFAULTS["h_min"],
                      delta_log: float | None = None,
                      h_max: float = CLAW_GRID_DEFAULTS["h_max"],
                      n_lin: int = CLAW_GRID_DEFAULTS["n_lin"],
                      n_log: int = CLAW_GRID_DEFAULTS["n_log"]) -> LinLogGrid:
    """Build a lag-histogram grid.

    When ``delta_lin``/``delta_log`` are omitted they are derived so that the
    linear part spans ``[0, h_min]`` in ``n_lin`` bins and the log part spans
    ``[h_min, h_max]`` in ``n_log`` bins.
    """
    if h_min <= 0 or h_max <= h_min:
        raise ValueError(f"need 0 < h_min < h_max, got {h_min}, {h_max}")
    if n_lin < 1 or n_log < 1:
        raise ValueError("bin counts must be at least 1")
    if delta_lin is None:
        delta_lin = h_min / n_lin
    if delta_log is None:
        delta_log = math.log(h_max / h_min) / n_log
    edges = _linlog_edges(delta_lin, h_min, delta_log, h_max, n_lin, n_log)
    return LinLogGrid(delta_lin, h_min, delta_log, h_max, n_lin, n_log, edges)


@dataclass(frozen=True)
class QuadratureGrid:
    """Lin-log node/weight scheme for integration over ``[0, x_max]``.

    Weights are trapezoidal on the nonuniform node set, so they are positive
    and sum to ``x_max`` exactly (up to rounding).
    """

    eps_lin: float
    x_min: float
    eps_log: float
    x_max: float
    n_lin: int
    n_log: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def to_dict(self) -> dict:
        return {
            "eps_lin": self.eps_lin,
            "x_min": self.x_min,
            "eps_log": self.eps_log,
            "x_max": self.x_max,
            "n_lin": self.n_lin,
            "n_log": self.n_log,
        }


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    gaps = np.diff(nodes)
    w = np.zeros(len(nodes))
    w[:-1] += gaps / 2.0
    w[1:] += gaps / 2.0
    return w


def build_quadrature(eps_lin: float | None = None,
                     x_min: float = QUADRATURE_DEFAULTS["x_min"],
                     eps_log: float | None = None,
                     x_max: float = QUADRATURE_DEFAULTS["x_max"],
                     n_lin: int = QUADRATURE_DEFAULTS["n_lin"],
                     n_log: int = QUADRATURE_DEFAULTS["n_log"]) -> QuadratureGrid:
    """Build a quadrature grid; derived steps follow ``build_linlog_grid``."""
    if x_min <= 0 or x_max <= x_min:
        raise ValueError(f"need 0 < x_min < x_max, got {x_min}, {x_max}")
    if n_lin < 1 or n_log < 1:
        raise ValueError("node counts must be at least 1")
    if eps_lin is None:
        eps_lin = x_min / n_lin
    if eps_log is None:
        eps_log = math.log(x_max / x_min) / n_log
    nodes = _linlog_edges(eps_lin, x_min, eps_log, x_max, n_lin, n_log)
    return QuadratureGrid(eps_lin, x_min, eps_log, x_max, n_lin, n_log,
                          nodes, trapezoid_weights(nodes))
