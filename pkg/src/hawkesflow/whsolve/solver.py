"""Nyström solve of the Wiener-Hopf system linking conditional laws to
Hawkes kernels, plus the derived quantities: kernel norms, rescaled norms,
baselines and exogeneity ratios.

For each target component i the unknowns are that row of the kernel matrix
sampled at the quadrature nodes, solving

    g[i,j](x_q) = phi[i,j](x_q) + sum_k sum_m w_m phi[i,k](x_m) g[k,j](x_q - x_m)

for all source components j and nodes x_q, with the conditional law looked
up piecewise-constant on its histogram grid and mirrored through the
time-reversal identity at negative arguments.  This is the convolution
order the true second-order statistics satisfy (a one-directional 2D model
keeps its driver component Poisson, forcing that diagonal law to vanish;
the opposite order would contradict it).  The same dense matrix serves
every row, so it is factorized once.  Solutions may be negative:
inhibition is information, not a defect, and no positivity projection is
applied.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from ..errors import SolverError
from ..estimate.claw import ConditionalLawMatrix
from ..grids import QuadratureGrid, build_quadrature

__all__ = [
    "KernelEstimate",
    "solve_wiener_hopf",
    "kernel_norms",
    "rescaled_norms",
    "recover_baseline",
    "exogeneity_ratios",
    "NegativityReport",
    "verify_negativity_propagation",
    "save_kernel_estimate",
]

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class KernelEstimate:
    """Kernel matrix on quadrature nodes with norms, baselines and solver
    diagnostics.  ``values[i, j, m]`` is the (i <- j) kernel at node m."""

    quad: QuadratureGrid
    values: np.ndarray          # (D, D, Q)
    stderr: np.ndarray | None   # (D, D, Q)
    lam: np.ndarray             # (D,)
    norms: np.ndarray           # (D, D)
    rescaled: np.ndarray        # (D, D)
    baseline: np.ndarray        # (D,)
    exogeneity_pct: np.ndarray  # (D,)
    residual: float
    condition_estimate: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.lam)


def kernel_norms(values_or_estimate, quad: QuadratureGrid | None = None) -> np.ndarray:
    """Norm matrix: quadrature integral of each kernel over [0, x_max]."""
    if isinstance(values_or_estimate, KernelEstimate):
        est = values_or_estimate
        values, weights = est.values, est.quad.weights
    else:
        if quad is None:
            raise ValueError("quadrature grid required with raw values")
        values, weights = np.asarray(values_or_estimate), quad.weights
    return values @ weights


def rescaled_norms(norms: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Fraction-of-intensity norms: (lam_j / lam_i) * n_ij."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ZeroDivisionError("rescaled norms need strictly positive rates")
    return norms * lam[None, :] / lam[:, None]


def recover_baseline(norms: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Baseline from the stationarity relation: mu = (I - N) Lambda.

    Negative entries are possible (norm truncation bias or inhibition) and
    are returned as-is; callers may inspect and flag them.
    """
    lam = np.asarray(lam, dtype=float)
    return (np.eye(len(lam)) - norms) @ lam


def exogeneity_ratios(baseline: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Exogenous fraction of each component's activity, in percent."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ZeroDivisionError("exogeneity ratios need strictly positive rates")
    return 100.0 * np.asarray(baseline, dtype=float) / lam


def _assemble_system(claw: ConditionalLawMatrix,
                     quad: QuadratureGrid) -> tuple[np.ndarray, np.ndarray]:
    """System matrix and right-hand sides, one RHS column per target row.

    Row blocks are indexed by (source j, node q), column blocks by the
    unknowns (source k, node m):  A[(j,q),(k,m)] = delta + w_m g[k,j](x_q - x_m).
    """
    d = claw.dimension
    q = quad.n_nodes
    nodes = quad.nodes
    lag = nodes[:, None] - nodes[None, :]
    a = np.zeros((d * q, d * q))
    eye = np.eye(q)
    for j in range(d):
        for k in range(d):
            block = quad.weights[None, :] * claw.value_at_lag(k, j, lag)
            if j == k:
                block = block + eye
            a[j * q:(j + 1) * q, k * q:(k + 1) * q] = block
    b = np.zeros((d * q, d))
    for i in range(d):
        for j in range(d):
            b[j * q:(j + 1) * q, i] = claw.value_at_lag(i, j, nodes, zero="right")
    return a, b


def solve_wiener_hopf(claw: ConditionalLawMatrix,
                      quad: QuadratureGrid | None = None,
                      compute_stderr: bool = True) -> KernelEstimate:
    """Solve for the kernel matrix on the quadrature grid.

    Requires ``quad.x_max <= claw.grid.h_max``.  Aborts with diagnostics
    instead of returning noise when the discretized system's condition
    estimate exceeds 1e12.
    """
    if quad is None:
        quad = build_quadrature()
    if quad.x_max > claw.grid.h_max * (1 + 1e-12):
        raise ValueError(
            f"quadrature reach {quad.x_max} exceeds conditional-law range "
            f"{claw.grid.h_max}")
    d = claw.dimension
    q = quad.n_nodes
    a, b = _assemble_system(claw, quad)

    anorm = np.linalg.norm(a, 1)
    lu, piv = sla.lu_factor(a)
    gecon = sla.get_lapack_funcs("gecon", (a,))
    rcond, _ = gecon(lu, anorm)
    condition = np.inf if rcond == 0 else 1.0 / rcond
    if condition > CONDITION_LIMIT:
        raise SolverError(
            f"discretized system is ill-conditioned (estimate {condition:.2e})",
            diagnostics={"condition_estimate": float(condition),
                         "size": d * q})

    sol = sla.lu_solve((lu, piv), b)
    resid = a @ sol - b
    bnorm = np.linalg.norm(b)
    residual = float(np.linalg.norm(resid) / bnorm) if bnorm > 0 else 0.0

    # sol[:, i] stacks the row phi[i, k](x_m) over (k, m)
    values = np.empty((d, d, q))
    for i in range(d):
        values[i, :, :] = sol[:, i].reshape(d, q)

    stderr = None
    if compute_stderr:
        inv = sla.lu_solve((lu, piv), np.eye(d * q))
        inv_sq = inv ** 2
        stderr = np.empty((d, d, q))
        for i in range(d):
            var_b = np.concatenate([
                claw.stderr_at_lag(i, j, quad.nodes) ** 2 for j in range(d)])
            var = inv_sq @ var_b
            stderr[i, :, :] = np.sqrt(np.maximum(var, 0.0)).reshape(d, q)

    norms = values @ quad.weights
    baseline = recover_baseline(norms, claw.lam)
    if np.any(claw.lam <= 0):
        # entries touching an event-free component are undefined, not the
        # whole matrix
        lam = claw.lam
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = lam[None, :] / lam[:, None]
            rescaled = np.where(np.isfinite(ratio), norms * ratio, np.nan)
            pct = np.where(lam > 0, 100.0 * baseline / lam, np.nan)
    else:
        rescaled = rescaled_norms(norms, claw.lam)
        pct = exogeneity_ratios(baseline, claw.lam)
    return KernelEstimate(
        quad=quad, values=values, stderr=stderr, lam=claw.lam.copy(),
        norms=norms, rescaled=rescaled, baseline=baseline,
        exogeneity_pct=pct, residual=residual,
        condition_estimate=float(condition),
        meta={"negative_baseline": bool(np.any(baseline < 0))},
    )


@dataclass(frozen=True)
class NegativityReport:
    """Outcome of the inhibition-propagation check."""

    hypothesis_holds: bool
    negative_found: bool
    min_value: float
    location: tuple[int, int, float] | None  # (target, source, node time)
    estimate: KernelEstimate | None


def verify_negativity_propagation(claw: ConditionalLawMatrix,
                                  quad: QuadratureGrid | None = None,
                                  ) -> NegativityReport:
    """Check that negative conditional laws force negative kernel values.

    The hypothesis requires every column (or every row) of the law matrix to
    dip strictly below zero somewhere within the solver's reach
    ``[0, x_max]``.  When it holds, the solved kernel matrix must attain a
    negative node value; a violation raises, as it would contradict the
    propagation property of the Wiener-Hopf solution.
    """
    if quad is None:
        quad = build_quadrature()
    d = claw.dimension
    in_reach = claw.grid.edges[:-1] < quad.x_max
    neg = np.zeros((d, d), dtype=bool)
    for i in range(d):
        for j in range(d):
            ok = claw.has_window[j] & in_reach
            neg[i, j] = bool(np.any(claw.values[i, j][ok] < 0.0))
    hypothesis = bool(np.all(neg.any(axis=0))) or bool(np.all(neg.any(axis=1)))
    if not hypothesis:
        return NegativityReport(False, False, float("nan"), None, None)

    est = solve_wiener_hopf(claw, quad, compute_stderr=False)
    flat = int(np.argmin(est.values))
    i, j, m = np.unravel_index(flat, est.values.shape)
    min_value = float(est.values[i, j, m])
    if min_value >= 0.0:
        raise AssertionError(
            "negativity did not propagate: conditional law dips below zero "
            "in every column yet the solved kernels are all nonnegative")
    return NegativityReport(True, True, min_value,
                            (int(i), int(j), float(est.quad.nodes[m])), est)


def save_kernel_estimate(est: KernelEstimate, out_dir,
                         labels: list[str] | None = None) -> list[Path]:
    """Write per-pair kernel CSVs, norm matrices, baseline table and a
    JSON manifest with grid parameters and solver diagnostics."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    d = est.dimension
    labels = labels or [str(i) for i in range(d)]
    if len(labels) != d:
        raise ValueError(f"{len(labels)} labels for dimension {d}")
    written = []
    for i in range(d):
        for j in range(d):
            path = out_dir / f"kernel_{i}_{j}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["node", "weight", "phi_value"])
                for m in range(est.quad.n_nodes):
                    w.writerow([repr(float(est.quad.nodes[m])),
                                repr(float(est.quad.weights[m])),
                                repr(float(est.values[i, j, m]))])
            written.append(path)
    for name, matrix in (("norms.csv", est.norms),
                         ("rescaled_norms.csv", est.rescaled)):
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + labels)
            for i in range(d):
                w.writerow([labels[i]] + [repr(float(v)) for v in matrix[i]])
        written.append(path)
    path = out_dir / "baseline.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["component", "baseline", "mean_intensity", "exogeneity_pct"])
        for i in range(d):
            w.writerow([labels[i], repr(float(est.baseline[i])),
                        repr(float(est.lam[i])),
                        repr(float(est.exogeneity_pct[i]))])
    written.append(path)
    manifest = {
        "dimension": d,
        "labels": labels,
        "quadrature": est.quad.to_dict(),
        "residual": est.residual,
        "condition_estimate": est.condition_estimate,
        "meta": est.meta,
    }
    mpath = out_dir / "kernel_manifest.json"
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    written.append(mpath)
    return written
