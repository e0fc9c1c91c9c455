"""Command-line pipeline: simulate, estimate, report, roundtrip, robustness.

Grid and quadrature defaults are the standard ones (1 ms / 2e4 s lin-log
law grid with 50+1500 bins; 0.5 ms / 0.5 s quadrature with 80+80 bins) and
are echoed at startup so every run is self-documenting.  A saved config
file re-executes identically: flags override the config, which overrides
the defaults.  Exit codes: 0 success, 1 acceptance failure, 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import report as report_mod
from .acceptance import run_acceptance
from .errors import HawkesflowError, ParseError
from .estimate import build_linlog_grid, estimate_conditional_law, save_claw
from .events import (
    BinningScheme,
    MultivariateEventStream,
    OrderEvent,
    combine_streams,
    filter_session,
    flow_statistics,
    load_binning_scheme,
    randomize_timestamps,
    read_event_csv,
    write_event_csv,
)
from .events.stream import assign_components
from .events.types import MICROSECOND
from .grids import CLAW_GRID_DEFAULTS, QUADRATURE_DEFAULTS
from .simulate import load_model, simulate
from .whsolve import build_quadrature, save_kernel_estimate, solve_wiener_hopf

__all__ = ["main", "RunConfig"]


@dataclass
class RunConfig:
    """Serializable run parameters; saved alongside every output."""

    # conditional-law grid
    h_min: float = CLAW_GRID_DEFAULTS["h_min"]
    h_max: float = CLAW_GRID_DEFAULTS["h_max"]
    n_lin: int = CLAW_GRID_DEFAULTS["n_lin"]
    n_log: int = CLAW_GRID_DEFAULTS["n_log"]
    # quadrature
    x_min: float = QUADRATURE_DEFAULTS["x_min"]
    x_max: float = QUADRATURE_DEFAULTS["x_max"]
    quad_n_lin: int = QUADRATURE_DEFAULTS["n_lin"]
    quad_n_log: int = QUADRATURE_DEFAULTS["n_log"]
    # session handling
    window_start: float | None = None
    window_end: float | None = None
    randomize_round_us: float | None = None
    randomize_jitter_us: float | None = None
    weighting: str = "events"
    seed: int = 0
    threads: int = 1

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def overlay(self, args: argparse.Namespace) -> "RunConfig":
        out = RunConfig(**asdict(self))
        for f in fields(RunConfig):
            value = getattr(args, f.name, None)
            if value is not None:
                setattr(out, f.name, value)
        return out


def _echo_config(config: RunConfig) -> None:
    print("run configuration:")
    for key, value in sorted(asdict(config).items()):
        print(f"  {key} = {value}")


def _events_from_stream(stream: MultivariateEventStream,
                        scheme: BinningScheme) -> list[list[OrderEvent]]:
    """Translate component streams back into typed events, one list per
    session.  Microsecond rounding collisions within a component are bumped
    by 1 us to preserve per-component counts on re-ingestion."""
    out = []
    for sess in stream.sessions:
        tagged = []
        for comp, t in enumerate(sess.times):
            us = np.round(t / MICROSECOND).astype(np.int64)
            for k in range(1, len(us)):
                if us[k] <= us[k - 1]:
                    us[k] = us[k - 1] + 1
            etype, side, volume = scheme.event_template(comp)
            tagged.extend((int(u), comp, etype, side, volume) for u in us)
        tagged.sort(key=lambda r: (r[0], r[1]))
        out.append([OrderEvent(u, etype, side, volume)
                    for (u, _, etype, side, volume) in tagged])
    return out


def _ingest(paths: list[str], scheme: BinningScheme, duration: float | None,
            threads: int = 1) -> tuple[MultivariateEventStream,
                                       list[list[OrderEvent]]]:
    """Read session files (in parallel when asked) and map them onto
    components.  A metadata sidecar, when present, supplies the session
    duration and cross-checks the scheme dimension."""

    def load_one(idx_path):
        idx, path = idx_path
        events = read_event_csv(path)
        sidecar = Path(path).with_name("metadata.json")
        sess_duration = duration
        if sidecar.exists():
            with open(sidecar, "r", encoding="utf-8") as fh:
                meta = json.load(fh)
            if sess_duration is None:
                sess_duration = meta.get("horizon")
            recorded = meta.get("dimension")
            if recorded is not None and recorded != scheme.dimension:
                raise HawkesflowError(
                    f"{path}: data was written for dimension {recorded}, "
                    f"scheme has dimension {scheme.dimension}")
        stream = assign_components(events, scheme, sess_duration,
                                   session_id=f"session-{idx}")
        return stream, events

    items = list(enumerate(paths))
    if threads > 1 and len(items) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            loaded = list(pool.map(load_one, items))
    else:
        loaded = [load_one(item) for item in items]
    return (combine_streams([s for s, _ in loaded]),
            [ev for _, ev in loaded])


def _resolve_scheme(args) -> BinningScheme:
    if getattr(args, "scheme", None):
        return load_binning_scheme(args.scheme)
    if getattr(args, "dimension", None):
        return BinningScheme.canonical(args.dimension)
    raise HawkesflowError("need --scheme or --dimension to map events to "
                          "components")


def _prepare_stream(args, config: RunConfig):
    scheme = _resolve_scheme(args)
    stream, events = _ingest(args.input, scheme, getattr(args, "duration", None),
                             threads=config.threads)
    if config.window_start is not None or config.window_end is not None:
        start = config.window_start or 0.0
        end = config.window_end
        if end is None:
            end = min(s.duration for s in stream.sessions)
        stream = filter_session(stream, start, end)
    if config.randomize_round_us is not None:
        stream = randomize_timestamps(stream, config.randomize_round_us,
                                      config.randomize_jitter_us or 0.0,
                                      config.seed)
    return scheme, stream, events


def _estimate_pipeline(stream: MultivariateEventStream, config: RunConfig):
    grid = build_linlog_grid(h_min=config.h_min, h_max=config.h_max,
                             n_lin=config.n_lin, n_log=config.n_log)
    quad = build_quadrature(x_min=config.x_min, x_max=config.x_max,
                            n_lin=config.quad_n_lin, n_log=config.quad_n_log)
    claw = estimate_conditional_law(stream, grid, weighting=config.weighting,
                                    workers=config.threads)
    est = solve_wiener_hopf(claw, quad)
    return claw, est


def cmd_simulate(args, config: RunConfig) -> int:
    model = load_model(args.model)
    scheme = load_binning_scheme(args.scheme) if args.scheme \
        else BinningScheme.canonical(model.dimension)
    if scheme.dimension < model.dimension:
        raise HawkesflowError(
            f"scheme dimension {scheme.dimension} cannot hold model "
            f"dimension {model.dimension}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stream = simulate(model, args.horizon, config.seed)
    events = _events_from_stream(stream, scheme)[0]
    csv_path = out_dir / "events.csv"
    write_event_csv(events, csv_path)
    meta = dict(stream.sessions[0].meta)
    meta.update(dimension=scheme.dimension, model_dimension=model.dimension,
                scheme=scheme.to_dict(), events=len(events),
                model_file=str(args.model))
    with open(out_dir / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    config.save(out_dir / "config.json")
    print(f"wrote {len(events)} events to {csv_path}")
    return 0


def cmd_estimate(args, config: RunConfig) -> int:
    scheme, stream, _ = _prepare_stream(args, config)
    claw, est = _estimate_pipeline(stream, config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_claw(claw, out_dir / "claw")
    save_kernel_estimate(est, out_dir / "kernel", labels=scheme.labels())
    config.save(out_dir / "config.json")
    with np.printoptions(precision=4, suppress=True):
        print("mean intensity:", est.lam)
        print("kernel norms:")
        print(est.norms)
        print("baseline:", est.baseline)
        print("exogeneity %:", est.exogeneity_pct)
    print(f"solver residual {est.residual:.3e}, "
          f"condition estimate {est.condition_estimate:.3e}")
    return 0


def cmd_report(args, config: RunConfig) -> int:
    scheme, stream, events = _prepare_stream(args, config)
    claw, est = _estimate_pipeline(stream, config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = scheme.labels()
    bundle = report_mod.ReportBundle(out_dir, metadata={
        "config": asdict(config),
        "inputs": [str(p) for p in args.input],
        "dimension": stream.dimension,
    })
    bundle.add(report_mod.emit_norm_tables(est, labels, out_dir, scheme))
    if args.curves == "all":
        selection = [(i, j) for i in range(est.dimension)
                     for j in range(est.dimension)]
    else:
        selection = [(i, i) for i in range(est.dimension)]
    bundle.add(report_mod.emit_kernel_curves(est, selection, out_dir, labels))
    bundle.add(report_mod.emit_claw_curves(claw, selection, out_dir, labels))
    stats = flow_statistics(stream, events_by_session=events)
    bundle.add(report_mod.emit_flow_report(stats, out_dir, labels))
    manifest = bundle.finalize()
    config.save(out_dir / "config.json")
    print(f"report bundle: {len(bundle.files)} files, manifest {manifest}")
    return 0


def cmd_roundtrip(args, config: RunConfig) -> int:
    results = run_acceptance(tolerance_scale=args.tolerance_scale,
                             workers=config.threads,
                             criteria=args.criteria)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def cmd_robustness(args, config: RunConfig) -> int:
    scheme, stream, _ = _prepare_stream(args, config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = scheme.labels()
    _, base = _estimate_pipeline(stream, config)

    comparisons = {}
    round_us = args.round_us if args.round_us is not None else 10.0
    jitter_us = args.jitter_us if args.jitter_us is not None else 50.0
    randomized = randomize_timestamps(stream, round_us, jitter_us, config.seed)
    _, est_r = _estimate_pipeline(randomized, config)
    comparisons["randomized"] = est_r

    if args.compare_window:
        start, end = args.compare_window
        windowed = filter_session(stream, start, end)
        _, est_w = _estimate_pipeline(windowed, config)
        comparisons["windowed"] = est_w

    lines = []
    for name, est in comparisons.items():
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = (base.rescaled - est.rescaled) / base.rescaled
        path = out_dir / f"rescaled_norm_reldiff_{name}.csv"
        report_mod.write_matrix_csv(path, rel, labels, labels)
        finite = rel[np.isfinite(rel)]
        worst = float(np.max(np.abs(finite))) if finite.size else float("nan")
        lines.append(f"{name}: max |relative rescaled-norm difference| = {worst:.4g}")
    config.save(out_dir / "config.json")
    for line in lines:
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawkesflow",
        description="Nonparametric Hawkes analysis of order-flow event streams")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        p.add_argument("--config", help="JSON config file with RunConfig fields")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        if needs_input:
            p.add_argument("--input", nargs="+", required=True,
                           help="event CSV files, one per session")
            p.add_argument("--scheme", help="binning scheme JSON")
            p.add_argument("--dimension", type=int,
                           help="use the canonical scheme of this dimension")
            p.add_argument("--duration", type=float,
                           help="session duration in seconds")
            p.add_argument("--window-start", dest="window_start", type=float)
            p.add_argument("--window-end", dest="window_end", type=float)
            p.add_argument("--randomize-round-us", dest="randomize_round_us",
                           type=float)
            p.add_argument("--randomize-jitter-us", dest="randomize_jitter_us",
                           type=float)
            p.add_argument("--weighting", choices=["events", "sessions"],
                           default=None)
            for name in ("h-min", "h-max", "x-min", "x-max"):
                p.add_argument(f"--{name}", dest=name.replace("-", "_"),
                               type=float)
            for name in ("n-lin", "n-log", "quad-n-lin", "quad-n-log"):
                p.add_argument(f"--{name}", dest=name.replace("-", "_"),
                               type=int)

    p_sim = sub.add_parser("simulate", help="simulate a model to an event CSV")
    p_sim.add_argument("--model", required=True, help="model JSON file")
    p_sim.add_argument("--horizon", type=float, required=True,
                       help="session length in seconds")
    p_sim.add_argument("--scheme", help="binning scheme JSON for the "
                                        "component-to-event mapping")
    p_sim.add_argument("--out", required=True)
    common(p_sim, needs_input=False)
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate laws and kernels")
    p_est.add_argument("--out", required=True)
    common(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_rep = sub.add_parser("report", help="estimate and emit report bundle")
    p_rep.add_argument("--out", required=True)
    p_rep.add_argument("--curves", choices=["diag", "all"], default="diag")
    common(p_rep)
    p_rep.set_defaults(func=cmd_report)

    p_rt = sub.add_parser("roundtrip", help="run the acceptance suite")
    p_rt.add_argument("--tolerance-scale", dest="tolerance_scale", type=float,
                      default=1.0)
    p_rt.add_argument("--criteria", type=int, nargs="+",
                      help="subset of criterion numbers to run")
    common(p_rt, needs_input=False)
    p_rt.set_defaults(func=cmd_roundtrip)

    p_rob = sub.add_parser("robustness",
                           help="compare estimates on perturbed inputs")
    p_rob.add_argument("--out", required=True)
    p_rob.add_argument("--round-us", dest="round_us", type=float)
    p_rob.add_argument("--jitter-us", dest="jitter_us", type=float)
    p_rob.add_argument("--compare-window", dest="compare_window", type=float,
                       nargs=2, metavar=("START", "END"))
    common(p_rob)
    p_rob.set_defaults(func=cmd_robustness)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.load(args.config) if args.config else RunConfig()
        config = config.overlay(args)
        _echo_config(config)
        return args.func(args, config)
    except (HawkesflowError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
