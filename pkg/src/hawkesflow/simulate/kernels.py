"""Kernel function specifications for Hawkes models.

Every kernel is causal (zero for t < 0) and exposes its L1 norm, either in
closed form or by quadrature.  ``upper_bound_from(tau)`` returns a bound on
``sup_{u >= tau} phi(u)`` that is non-increasing in ``tau``; the thinning
simulator relies on it for its dominating rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelSpec",
    "ZeroKernel",
    "ExponentialKernel",
    "SumOfExponentialsKernel",
    "PowerLawKernel",
    "TabulatedKernel",
    "kernel_from_dict",
]


class KernelSpec:
    """Common interface; concrete kernels subclass this."""

    def value(self, t):
        raise NotImplementedError

    def norm(self) -> float:
        raise NotImplementedError

    def positive_norm(self) -> float:
        """Integral of ``max(phi, 0)``; used for positive-part stability."""
        raise NotImplementedError

    def nonnegative(self) -> bool:
        """Whether the kernel is pointwise nonnegative (linear models
        require it; positive-part models do not)."""
        end = self.support(1e-12)
        if end <= 0:
            return True
        t = np.linspace(0.0, end, 4001)
        return bool(np.min(self.value(t)) >= -1e-12)

    def support(self, eps: float = 1e-8) -> float:
        """Lag beyond which ``|phi|`` stays below ``eps``."""
        raise NotImplementedError

    def upper_bound_from(self, tau: float) -> float:
        raise NotImplementedError

    def upper_bound_from_vec(self, taus: np.ndarray) -> np.ndarray:
        return np.array([self.upper_bound_from(float(t)) for t in taus])

    def is_exponential_family(self) -> bool:
        return False

    def exp_terms(self) -> list[tuple[float, float]]:
        """(alpha, beta) pairs when the kernel is a sum of exponentials."""
        raise NotImplementedError(f"{type(self).__name__} is not exponential")

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroKernel(KernelSpec):
    def value(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def norm(self) -> float:
        return 0.0

    def positive_norm(self) -> float:
        return 0.0

    def support(self, eps: float = 1e-8) -> float:
        return 0.0

    def nonnegative(self) -> bool:
        return True

    def upper_bound_from(self, tau: float) -> float:
        return 0.0

    def upper_bound_from_vec(self, taus: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(taus, dtype=float))

    def is_exponential_family(self) -> bool:
        return True

    def exp_terms(self) -> list[tuple[float, float]]:
        return []

    def to_dict(self) -> dict:
        return {"type": "zero"}


@dataclass(frozen=True)
class ExponentialKernel(KernelSpec):
    """``phi(t) = alpha * beta * exp(-beta t)``; ``alpha`` is the L1 norm.

    ``alpha`` may be negative (inhibitory kernel for positive-part models).
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, self.alpha * self.beta * np.exp(-self.beta * t), 0.0)

    def norm(self) -> float:
        return self.alpha

    def positive_norm(self) -> float:
        return max(self.alpha, 0.0)

    def support(self, eps: float = 1e-8) -> float:
        peak = abs(self.alpha) * self.beta
        if peak <= eps:
            return 0.0
        return np.log(peak / eps) / self.beta

    def nonnegative(self) -> bool:
        return self.alpha >= 0.0

    def upper_bound_from(self, tau: float) -> float:
        if self.alpha <= 0:
            return 0.0
        return self.alpha * self.beta * np.exp(-self.beta * max(tau, 0.0))

    def upper_bound_from_vec(self, taus: np.ndarray) -> np.ndarray:
        taus = np.maximum(np.asarray(taus, dtype=float), 0.0)
        if self.alpha <= 0:
            return np.zeros_like(taus)
        return self.alpha * self.beta * np.exp(-self.beta * taus)

    def is_exponential_family(self) -> bool:
        return True

    def exp_terms(self) -> list[tuple[float, float]]:
        return [(self.alpha, self.beta)]

    def to_dict(self) -> dict:
        return {"type": "exponential", "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class SumOfExponentialsKernel(KernelSpec):
    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("need at least one (alpha, beta) term")
        if any(b <= 0 for _, b in self.terms):
            raise ValueError("beta must be positive")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for a, b in self.terms:
            out = out + a * b * np.exp(-b * t)
        return np.where(t >= 0, out, 0.0)

    def norm(self) -> float:
        return float(sum(a for a, _ in self.terms))

    def positive_norm(self) -> float:
        if all(a >= 0 for a, _ in self.terms):
            return self.norm()
        return _positive_norm_by_quadrature(self)

    def support(self, eps: float = 1e-8) -> float:
        return max(ExponentialKernel(a, b).support(eps) if a != 0 else 0.0
                   for a, b in self.terms)

    def upper_bound_from(self, tau: float) -> float:
        tau = max(tau, 0.0)
        return float(sum(a * b * np.exp(-b * tau) for a, b in self.terms if a > 0))

    def upper_bound_from_vec(self, taus: np.ndarray) -> np.ndarray:
        taus = np.maximum(np.asarray(taus, dtype=float), 0.0)
        out = np.zeros_like(taus)
        for a, b in self.terms:
            if a > 0:
                out += a * b * np.exp(-b * taus)
        return out

    def is_exponential_family(self) -> bool:
        return True

    def exp_terms(self) -> list[tuple[float, float]]:
        return list(self.terms)

    def to_dict(self) -> dict:
        return {"type": "sum_of_exponentials",
                "terms": [[a, b] for a, b in self.terms]}


@dataclass(frozen=True)
class PowerLawKernel(KernelSpec):
    """``phi(t) = c * (t + t0)^(-gamma)`` with ``gamma > 1``."""

    c: float
    gamma: float
    t0: float

    def __post_init__(self):
        if self.gamma <= 1:
            raise ValueError("gamma must exceed 1 for an integrable kernel")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, self.c * (np.maximum(t, 0.0) + self.t0) ** -self.gamma, 0.0)

    def norm(self) -> float:
        return self.c * self.t0 ** (1.0 - self.gamma) / (self.gamma - 1.0)

    def positive_norm(self) -> float:
        return max(self.norm(), 0.0)

    def nonnegative(self) -> bool:
        return self.c >= 0.0

    def support(self, eps: float = 1e-8) -> float:
        if self.c == 0:
            return 0.0
        return max((abs(self.c) / eps) ** (1.0 / self.gamma) - self.t0, 0.0)

    def upper_bound_from(self, tau: float) -> float:
        if self.c <= 0:
            return 0.0
        return self.c * (max(tau, 0.0) + self.t0) ** -self.gamma

    def upper_bound_from_vec(self, taus: np.ndarray) -> np.ndarray:
        taus = np.maximum(np.asarray(taus, dtype=float), 0.0)
        if self.c <= 0:
            return np.zeros_like(taus)
        return self.c * (taus + self.t0) ** -self.gamma

    def to_dict(self) -> dict:
        return {"type": "power_law", "c": self.c, "gamma": self.gamma,
                "t0": self.t0}


@dataclass(frozen=True)
class TabulatedKernel(KernelSpec):
    """Piecewise-linear kernel through ``(grid, values)``, zero outside
    ``[0, grid[-1]]``.  Values may be negative.
    """

    grid: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.grid) != len(self.values) or len(self.grid) < 2:
            raise ValueError("grid and values must match and have >= 2 points")
        g = np.asarray(self.grid)
        if g[0] < 0 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be nonnegative and strictly increasing")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.grid, self.values, left=0.0, right=0.0)
        return np.where((t >= 0) & (t <= self.grid[-1]), out, 0.0)

    def norm(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def positive_norm(self) -> float:
        return float(np.trapezoid(np.maximum(self.values, 0.0), self.grid))

    def nonnegative(self) -> bool:
        return bool(np.min(self.values) >= 0.0)

    def support(self, eps: float = 1e-8) -> float:
        v = np.abs(np.asarray(self.values))
        above = np.nonzero(v > eps)[0]
        if len(above) == 0:
            return 0.0
        last = min(int(above[-1]) + 1, len(self.grid) - 1)
        return float(self.grid[last])

    def upper_bound_from(self, tau: float) -> float:
        # piecewise-linear segments attain their maxima at the grid points
        v = np.asarray(self.values, dtype=float)
        g = np.asarray(self.grid)
        if tau >= g[-1]:
            return 0.0
        suffix = float(np.max(v[g >= tau], initial=0.0))
        return max(suffix, float(self.value(max(tau, 0.0))), 0.0)

    def upper_bound_from_vec(self, taus: np.ndarray) -> np.ndarray:
        taus = np.maximum(np.asarray(taus, dtype=float), 0.0)
        g = np.asarray(self.grid)
        v = np.asarray(self.values, dtype=float)
        suffix = np.maximum.accumulate(v[::-1])[::-1]
        idx = np.searchsorted(g, taus, side="left")
        out = np.where(idx < len(g), suffix[np.minimum(idx, len(g) - 1)], 0.0)
        out = np.maximum(out, self.value(taus))
        return np.where(taus >= g[-1], 0.0, np.maximum(out, 0.0))

    def to_dict(self) -> dict:
        return {"type": "tabulated", "grid": list(self.grid),
                "values": list(self.values)}


def _positive_norm_by_quadrature(kernel: KernelSpec, n: int = 20001) -> float:
    end = kernel.support(1e-10)
    if end <= 0:
        return 0.0
    t = np.linspace(0.0, end, n)
    return float(np.trapezoid(np.maximum(kernel.value(t), 0.0), t))


_KERNEL_TYPES = {
    "zero": lambda d: ZeroKernel(),
    "exponential": lambda d: ExponentialKernel(float(d["alpha"]), float(d["beta"])),
    "sum_of_exponentials": lambda d: SumOfExponentialsKernel(
        tuple((float(a), float(b)) for a, b in d["terms"])),
    "power_law": lambda d: PowerLawKernel(float(d["c"]), float(d["gamma"]),
                                          float(d["t0"])),
    "tabulated": lambda d: TabulatedKernel(tuple(float(x) for x in d["grid"]),
                                           tuple(float(x) for x in d["values"])),
}


def kernel_from_dict(d: dict) -> KernelSpec:
    try:
        return _KERNEL_TYPES[d["type"]](d)
    except KeyError as exc:
        raise ValueError(f"unknown kernel spec: {d!r}") from exc
