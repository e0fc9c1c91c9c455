"""Machine-readable presentation artifacts: norm tables, kernel and
conditional-law curves, flow histograms.

Everything is CSV plus one JSON manifest per bundle; numbers are printed in
shortest round-trip form so emitted files are lossless and diff-stable.
No images are rendered here: these files feed whatever plotting tool sits
downstream.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .estimate.claw import ConditionalLawMatrix
from .events.types import BinningScheme, FlowStatistics
from .whsolve.solver import KernelEstimate

__all__ = [
    "ReportBundle",
    "write_matrix_csv",
    "emit_norm_tables",
    "emit_kernel_curves",
    "emit_claw_curves",
    "emit_flow_report",
    "write_manifest",
]


def _fmt(x) -> str:
    return repr(float(x))


def write_matrix_csv(path: Path, matrix: np.ndarray, row_labels: list[str],
                  col_labels: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + list(col_labels))
        for label, row in zip(row_labels, matrix):
            w.writerow([label] + [_fmt(v) for v in row])


@dataclass
class ReportBundle:
    """Accumulates emitted files; ``finalize`` writes the manifest."""

    out_dir: Path
    metadata: dict = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)

    def add(self, paths) -> None:
        self.files.extend(Path(p) for p in paths)

    def finalize(self) -> Path:
        return write_manifest(self.out_dir, self.files, self.metadata)


def write_manifest(out_dir, files, metadata: dict) -> Path:
    out_dir = Path(out_dir)
    entries = []
    for p in sorted(set(Path(f) for f in files)):
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
        entries.append({"file": p.name, "sha256": digest})
    manifest = {"metadata": metadata, "files": entries}
    path = out_dir / "report_manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def emit_norm_tables(est: KernelEstimate, labels: list[str], out_dir,
                     scheme: BinningScheme | None = None) -> list[Path]:
    """Labeled norm and rescaled-norm tables, plus per-quadrant extracts
    (target side x source side) for signed and full-book schemes."""
    d = est.dimension
    if len(labels) != d:
        raise ValueError(f"{len(labels)} labels for dimension {d}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, matrix in (("norms.csv", est.norms),
                         ("rescaled_norms.csv", est.rescaled)):
        path = out_dir / name
        write_matrix_csv(path, matrix, labels, labels)
        written.append(path)
    blocks = scheme.side_blocks() if scheme is not None else None
    if blocks:
        for tgt_name, tgt_idx in blocks.items():
            for src_name, src_idx in blocks.items():
                sub = est.norms[np.ix_(tgt_idx, src_idx)]
                sub_resc = est.rescaled[np.ix_(tgt_idx, src_idx)]
                rows = [labels[i] for i in tgt_idx]
                cols = [labels[j] for j in src_idx]
                for prefix, m in (("norms", sub), ("rescaled_norms", sub_resc)):
                    path = out_dir / f"{prefix}_{tgt_name}_{src_name}.csv"
                    write_matrix_csv(path, m, rows, cols)
                    written.append(path)
    return written


def emit_kernel_curves(est: KernelEstimate, selection: list[tuple[int, int]],
                       out_dir, labels: list[str] | None = None) -> list[Path]:
    """Per-pair kernel curves ``node, phi, stderr`` for log-axis plotting."""
    d = est.dimension
    labels = labels or [str(i) for i in range(d)]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, j in selection:
        if not (0 <= i < d and 0 <= j < d):
            raise IndexError(f"kernel index ({i}, {j}) outside dimension {d}")
        path = out_dir / f"kernel_curve_{labels[i]}_from_{labels[j]}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", "phi", "stderr"])
            for m in range(est.quad.n_nodes):
                sd = est.stderr[i, j, m] if est.stderr is not None else 0.0
                w.writerow([_fmt(est.quad.nodes[m]),
                            _fmt(est.values[i, j, m]), _fmt(sd)])
        written.append(path)
    return written


def emit_claw_curves(claw: ConditionalLawMatrix,
                     selection: list[tuple[int, int]], out_dir,
                     labels: list[str] | None = None) -> list[Path]:
    """Per-pair conditional-law curves with error bars and pair counts."""
    d = claw.dimension
    labels = labels or [str(i) for i in range(d)]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    edges = claw.grid.edges
    for i, j in selection:
        if not (0 <= i < d and 0 <= j < d):
            raise IndexError(f"law index ({i}, {j}) outside dimension {d}")
        path = out_dir / f"claw_curve_{labels[i]}_from_{labels[j]}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_left", "bin_right", "value", "stderr", "pairs"])
            for b in range(claw.grid.n_bins):
                w.writerow([_fmt(edges[b]), _fmt(edges[b + 1]),
                            _fmt(claw.values[i, j, b]),
                            _fmt(claw.stderr[i, j, b]),
                            int(claw.pair_counts[i, j, b])])
        written.append(path)
    return written


def emit_flow_report(stats: FlowStatistics, out_dir,
                     labels: list[str] | None = None) -> list[Path]:
    """Duration histograms, signed volume histogram, autocorrelations and a
    per-component count summary with percentage fractions."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    d = len(stats.mean_intensity)
    labels = labels or [str(i) for i in range(d)]
    written = []

    path = out_dir / "duration_histogram.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "pooled"] + list(labels))
        for b in range(len(stats.duration_edges) - 1):
            row = [_fmt(stats.duration_edges[b]), _fmt(stats.duration_edges[b + 1]),
                   int(stats.pooled_duration_counts[b])]
            row += [int(stats.duration_counts[i, b]) for i in range(d)]
            w.writerow(row)
    written.append(path)

    # Table-style summary: events per component and their share of the total.
    total = int(stats.event_counts.sum())
    path = out_dir / "component_summary.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["component", "events", "fraction_pct", "mean_intensity"])
        for i in range(d):
            frac = 100.0 * stats.event_counts[i] / total if total else 0.0
            w.writerow([labels[i], int(stats.event_counts[i]), _fmt(frac),
                        _fmt(stats.mean_intensity[i])])
    written.append(path)

    if stats.volume_histogram is not None:
        path = out_dir / "volume_histogram.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["signed_volume", "count"])
            for vol, count in stats.volume_histogram.items():
                w.writerow([vol, count])
        written.append(path)

    if stats.sign_autocorr is not None:
        path = out_dir / "trade_autocorrelation.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lag", "sign_autocorr", "volume_autocorr"])
            for k in range(len(stats.sign_autocorr)):
                w.writerow([k, _fmt(stats.sign_autocorr[k]),
                            _fmt(stats.volume_autocorr[k])])
        written.append(path)
    return written
