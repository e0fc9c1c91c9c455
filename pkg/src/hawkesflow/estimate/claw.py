"""Empirical conditional laws of a multivariate event stream.

For components i, j the conditional law is the excess rate of i-events at
lag t after a j-event, relative to the mean rate of i.  It is estimated by
histogramming ordered pair lags on a lin-log grid: for each j-event s and
bin (a, b], count i-events in (s + a, s + b], divide by the bin width times
the number of j-events whose full window fits inside the session, subtract
the mean intensity.  The pairing of an event with itself never enters: the
first bin is open at lag zero.

Pair counting is O(edges * (N_i + N_j log N_i)) per component pair via
sorted-array searches, not O(N^2) pair enumeration.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..grids import LinLogGrid, build_linlog_grid
from ..events.types import MultivariateEventStream, Session

__all__ = [
    "ConditionalLawMatrix",
    "estimate_mean_intensity",
    "estimate_conditional_law",
    "conditional_law_at_negative_lag",
    "save_claw",
    "load_claw",
]


def estimate_mean_intensity(stream: MultivariateEventStream) -> np.ndarray:
    """Events per second per component, pooled over sessions."""
    total = stream.total_time
    if total <= 0:
        raise ValueError("total session time must be positive")
    return stream.total_counts / total


@dataclass(frozen=True)
class ConditionalLawMatrix:
    """Estimated conditional laws on a lin-log grid.

    ``values[i, j, b]`` is the estimate for bin ``b`` of the (i <- j) law in
    1/s; ``pair_counts`` the raw pair counts behind it; ``admissible[j, b]``
    the number of j-events with a full observation window for that bin.
    Bins with no admissible window hold value 0 and are flagged via
    ``has_window``, which distinguishes "no data" from "measured zero".
    """

    grid: LinLogGrid
    values: np.ndarray        # (D, D, B)
    stderr: np.ndarray        # (D, D, B)
    pair_counts: np.ndarray   # (D, D, B) int64
    admissible: np.ndarray    # (D, B) int64
    lam: np.ndarray           # (D,)
    total_time: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dimension(self) -> int:
        return len(self.lam)

    @property
    def has_window(self) -> np.ndarray:
        """(D, B) mask per source component: True where data exists."""
        return self.admissible > 0

    def _bin_values(self, i: int, j: int, lags: np.ndarray,
                    arr: np.ndarray) -> np.ndarray:
        idx = self.grid.bin_index(lags)
        ok = idx >= 0
        out = np.zeros(lags.shape)
        out[ok] = arr[i, j][idx[ok]]
        return out

    def value_at_lag(self, i: int, j: int, lags, zero: str = "average") -> np.ndarray:
        """Piecewise-constant lookup of the (i <- j) law at signed lags.

        Negative lags use the time-reversal identity.  At exactly zero,
        ``zero="average"`` blends the two one-sided first bins (suited to a
        quadrature point sitting on the jump) while ``zero="right"``
        returns the right limit.
        """
        lags = np.asarray(lags, dtype=float)
        out = np.zeros(lags.shape)
        pos = lags > 0
        neg = lags < 0
        zer = ~pos & ~neg
        out[pos] = self._bin_values(i, j, lags[pos], self.values)
        # an event-free conditioning component has an identically zero law,
        # so its reflected contribution is zero rather than 0/0
        if neg.any() and self.lam[j] > 0:
            ratio = self.lam[i] / self.lam[j]
            out[neg] = ratio * self._bin_values(j, i, -lags[neg], self.values)
        if zer.any():
            right = self.values[i, j, 0]
            if zero == "right" or self.lam[j] == 0:
                out[zer] = right
            else:
                left = self.lam[i] / self.lam[j] * self.values[j, i, 0]
                out[zer] = 0.5 * (right + left)
        return out

    def stderr_at_lag(self, i: int, j: int, lags) -> np.ndarray:
        """First-order standard error matching ``value_at_lag`` lookups."""
        lags = np.asarray(lags, dtype=float)
        out = np.zeros(lags.shape)
        pos = lags > 0
        neg = lags < 0
        zer = ~pos & ~neg
        out[pos] = self._bin_values(i, j, lags[pos], self.stderr)
        if neg.any() and self.lam[j] > 0:
            ratio = self.lam[i] / self.lam[j]
            out[neg] = ratio * self._bin_values(j, i, -lags[neg], self.stderr)
        if zer.any():
            out[zer] = self.stderr[i, j, 0]
        return out

    @classmethod
    def from_function(cls, grid: LinLogGrid, func, lam,
                      samples_per_bin: int = 9) -> "ConditionalLawMatrix":
        """Synthetic law from callables ``func[i][j](t)``; bin values are the
        bin averages of the function.  Useful for solver tests and for
        negativity-propagation checks on hand-built laws."""
        lam = np.asarray(lam, dtype=float)
        d = len(lam)
        b = grid.n_bins
        values = np.zeros((d, d, b))
        for i in range(d):
            for j in range(d):
                g = func[i][j]
                for k in range(b):
                    ts = np.linspace(grid.edges[k], grid.edges[k + 1],
                                     samples_per_bin)
                    vals = np.asarray(g(ts), dtype=float)
                    values[i, j, k] = np.trapezoid(vals, ts) / (
                        grid.edges[k + 1] - grid.edges[k])
        big = np.full((d, d, b), 10 ** 12, dtype=np.int64)
        adm = np.full((d, b), 10 ** 12, dtype=np.int64)
        return cls(grid, values, np.zeros((d, d, b)), big, adm, lam,
                   total_time=1.0, meta={"synthetic": True})


def conditional_law_at_negative_lag(claw: ConditionalLawMatrix, i: int, j: int,
                                    bin_index: int) -> float:
    """Value of the (i <- j) law at the mirrored negative lag of a bin.

    The stationary covariance density obeys C^{ij}(-t) = C^{ji}(t) and the
    law divides it by the conditioning component's rate, so
    g^{ij}(-t) = (lam_i / lam_j) g^{ji}(t).
    """
    if claw.lam[i] == 0 or claw.lam[j] == 0:
        raise ZeroDivisionError(
            "negative-lag law undefined: a conditioning rate is zero")
    return float(claw.lam[i] / claw.lam[j] * claw.values[j, i, bin_index])


def _session_pair_counts(t_i: np.ndarray, t_j: np.ndarray, duration: float,
                         edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pair counts per bin and admissible j-event counts for one session."""
    n_bins = len(edges) - 1
    pairs = np.zeros(n_bins, dtype=np.int64)
    adm = np.searchsorted(t_j, duration - edges[1:], side="right").astype(np.int64)
    if len(t_j) == 0 or len(t_i) == 0:
        return pairs, adm
    # S_m(n): over the first n j-events, total count of i-events at or below
    # s + edge_m.  pairs[b] = S_{b+1}(adm[b]) - S_b(adm[b]); one search pass
    # per edge serves as the right side of bin b and the left side of b+1.
    counts = np.searchsorted(t_i, t_j + edges[0], side="right")
    left_sum = int(counts[: adm[0]].sum()) if adm[0] > 0 else 0
    for b in range(n_bins):
        counts = np.searchsorted(t_i, t_j + edges[b + 1], side="right")
        n_b = int(adm[b])
        right_sum = int(counts[:n_b].sum()) if n_b > 0 else 0
        pairs[b] = right_sum - left_sum
        if b + 1 < n_bins:
            n_next = int(adm[b + 1])  # n_next <= n_b: windows shrink
            left_sum = right_sum - int(counts[n_next:n_b].sum())
    return pairs, adm


def estimate_conditional_law(stream: MultivariateEventStream,
                             grid: LinLogGrid | None = None,
                             weighting: str = "events",
                             workers: int | None = None) -> ConditionalLawMatrix:
    """Estimate the full conditional-law matrix of a stream.

    ``weighting="events"`` pools pair counts across sessions (each session
    weighted by its admissible j-event count); ``weighting="sessions"``
    averages per-session estimates with equal weight instead.
    """
    if grid is None:
        grid = build_linlog_grid()
    if weighting not in ("events", "sessions"):
        raise ValueError(f"unknown weighting {weighting!r}")
    d = stream.dimension
    if d == 0 or not stream.sessions:
        raise ValueError("empty stream")
    n_bins = grid.n_bins
    widths = grid.widths
    lam = estimate_mean_intensity(stream)

    jobs = [(sess, i, j) for sess in stream.sessions
            for j in range(d) for i in range(d)]

    def run(job: tuple[Session, int, int]):
        sess, i, j = job
        return _session_pair_counts(sess.times[i], sess.times[j],
                                    sess.duration, grid.edges)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    pair_tot = np.zeros((d, d, n_bins), dtype=np.int64)
    adm_tot = np.zeros((d, n_bins), dtype=np.int64)
    per_session = {}
    for job, (pairs, adm) in zip(jobs, results):
        sess, i, j = job
        pair_tot[i, j] += pairs
        if i == 0:
            adm_tot[j] += adm
        per_session[(sess.session_id, i, j)] = (pairs, adm)

    values = np.zeros((d, d, n_bins))
    stderr = np.zeros((d, d, n_bins))
    if weighting == "events":
        for i in range(d):
            for j in range(d):
                ok = adm_tot[j] > 0
                denom = widths[ok] * adm_tot[j][ok]
                values[i, j, ok] = pair_tot[i, j][ok] / denom - lam[i]
                stderr[i, j, ok] = np.sqrt(pair_tot[i, j][ok]) / denom
    else:
        for i in range(d):
            for j in range(d):
                acc = np.zeros(n_bins)
                var = np.zeros(n_bins)
                n_ok = np.zeros(n_bins, dtype=np.int64)
                for sess in stream.sessions:
                    pairs, adm = per_session[(sess.session_id, i, j)]
                    ok = adm > 0
                    denom = widths[ok] * adm[ok]
                    acc[ok] += pairs[ok] / denom
                    var[ok] += pairs[ok] / denom ** 2
                    n_ok[ok] += 1
                ok = n_ok > 0
                values[i, j, ok] = acc[ok] / n_ok[ok] - lam[i]
                stderr[i, j, ok] = np.sqrt(var[ok]) / n_ok[ok]
        # flagging still keyed on pooled admissibility
    return ConditionalLawMatrix(
        grid, values, stderr, pair_tot, adm_tot, lam, stream.total_time,
        meta={"weighting": weighting, "sessions": len(stream.sessions)})


def save_claw(claw: ConditionalLawMatrix, out_dir) -> list[Path]:
    """One CSV per ordered pair plus a manifest with rates and grid."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    d = claw.dimension
    edges = claw.grid.edges
    for i in range(d):
        for j in range(d):
            path = out_dir / f"claw_{i}_{j}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["bin_left", "bin_right", "value", "stderr", "pairs"])
                for b in range(claw.grid.n_bins):
                    w.writerow([repr(float(edges[b])), repr(float(edges[b + 1])),
                                repr(float(claw.values[i, j, b])),
                                repr(float(claw.stderr[i, j, b])),
                                int(claw.pair_counts[i, j, b])])
            written.append(path)
    manifest = {
        "dimension": d,
        "mean_intensity": [float(v) for v in claw.lam],
        "total_time": claw.total_time,
        "grid": claw.grid.to_dict(),
        "meta": claw.meta,
        "admissible": claw.admissible.tolist(),
    }
    mpath = out_dir / "claw_manifest.json"
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    written.append(mpath)
    return written


def load_claw(in_dir) -> ConditionalLawMatrix:
    in_dir = Path(in_dir)
    with open(in_dir / "claw_manifest.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    grid = build_linlog_grid(**manifest["grid"])
    d = manifest["dimension"]
    b = grid.n_bins
    values = np.zeros((d, d, b))
    stderr = np.zeros((d, d, b))
    pairs = np.zeros((d, d, b), dtype=np.int64)
    for i in range(d):
        for j in range(d):
            with open(in_dir / f"claw_{i}_{j}.csv", "r", encoding="utf-8") as fh:
                rows = list(csv.reader(fh))[1:]
            values[i, j] = [float(r[2]) for r in rows]
            stderr[i, j] = [float(r[3]) for r in rows]
            pairs[i, j] = [int(r[4]) for r in rows]
    return ConditionalLawMatrix(
        grid, values, stderr, pairs,
        np.asarray(manifest["admissible"], dtype=np.int64),
        np.asarray(manifest["mean_intensity"]),
        manifest["total_time"], manifest.get("meta", {}))
