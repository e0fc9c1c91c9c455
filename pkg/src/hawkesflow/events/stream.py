"""Building and transforming multivariate event streams."""

from __future__ import annotations

import math

import numpy as np

from .types import (
    BinningScheme,
    MICROSECOND,
    MultivariateEventStream,
    OrderEvent,
    Session,
)

__all__ = [
    "assign_components",
    "combine_streams",
    "randomize_timestamps",
    "filter_session",
]

# Tie-break step between equal integer timestamps within one component.
# Far below the feed's 10 us resolution yet, unlike finer steps, still
# resolvable in float64 seconds at end-of-session magnitudes (~5e4 s).
TIE_STEP_US = 2.0 ** -10


def _strictly_increasing(t: np.ndarray) -> np.ndarray:
    """Nudge any residual ties up by one ulp so the array is strict."""
    for k in range(1, len(t)):
        if t[k] <= t[k - 1]:
            t[k] = np.nextafter(t[k - 1], np.inf)
    return t


def _cap_strict(t: np.ndarray, cap: float) -> np.ndarray:
    """Pull values above ``cap`` back down while keeping strict order."""
    if len(t) == 0 or t[-1] <= cap:
        return t
    t[-1] = cap
    for k in range(len(t) - 2, -1, -1):
        if t[k] >= t[k + 1]:
            t[k] = np.nextafter(t[k + 1], -np.inf)
        else:
            break
    return t


def _to_seconds(ts_us: np.ndarray) -> np.ndarray:
    """Integer microseconds to float seconds with tie perturbation."""
    t = ts_us.astype(float)
    if len(t) > 1:
        # k-th event of a tied run gets + k * TIE_STEP_US microseconds
        new_run = np.concatenate([[True], np.diff(t) != 0])
        run_start = np.maximum.accumulate(np.where(new_run, np.arange(len(t)), 0))
        t = t + (np.arange(len(t)) - run_start) * TIE_STEP_US
    sec = t * MICROSECOND
    if len(sec) > 1 and np.any(np.diff(sec) <= 0):
        sec = _strictly_increasing(sec)
    return sec


def assign_components(events: list[OrderEvent], scheme: BinningScheme,
                      duration: float | None = None,
                      session_id: str = "session-0") -> MultivariateEventStream:
    """Route events to Hawkes components by type, side and volume bin.

    Trades-only schemes drop limit and cancel events.  ``duration`` is the
    session length in seconds; by default the last event time rounded up to
    the next whole second (1 s for an empty session).
    """
    per_comp_us: list[list[int]] = [[] for _ in range(scheme.dimension)]
    for e in events:
        if scheme.uses_event(e):
            per_comp_us[scheme.component(e)].append(e.timestamp_us)
    last = max((c[-1] for c in per_comp_us if c), default=0)
    if duration is None:
        duration = max(1.0, math.ceil(last * MICROSECOND))
    elif last * MICROSECOND > duration:
        raise ValueError(
            f"events extend to {last * MICROSECOND} s beyond the declared "
            f"session duration {duration} s")
    # boundary events may overshoot the duration by their tie perturbation
    times = tuple(
        _cap_strict(_to_seconds(np.asarray(c, dtype=np.int64)), duration)
        for c in per_comp_us
    )
    session = Session(session_id, float(duration), times)
    return MultivariateEventStream(scheme.dimension, (session,))


def combine_streams(streams: list[MultivariateEventStream]) -> MultivariateEventStream:
    if not streams:
        raise ValueError("no streams to combine")
    dim = streams[0].dimension
    sessions = []
    for s in streams:
        if s.dimension != dim:
            raise ValueError("streams have mismatched dimensions")
        sessions.extend(s.sessions)
    return MultivariateEventStream(dim, tuple(sessions))


def randomize_timestamps(stream: MultivariateEventStream, round_to_us: float,
                         jitter_width_us: float, seed: int) -> MultivariateEventStream:
    """Round each timestamp to the nearest ``round_to_us`` and subtract an
    independent uniform draw from ``[0, jitter_width_us)``.

    Deterministic given the seed.  Negative results are clamped to zero and
    counted in the session metadata.
    """
    if round_to_us <= 0:
        raise ValueError("round_to_us must be positive")
    if jitter_width_us < 0:
        raise ValueError("jitter_width_us must be nonnegative")
    rng = np.random.Generator(np.random.Philox(seed))
    sessions = []
    for sess in stream.sessions:
        clamped = 0
        new_times = []
        for t in sess.times:
            ts_us = t / MICROSECOND
            rounded = np.round(ts_us / round_to_us) * round_to_us
            if jitter_width_us > 0:
                rounded = rounded - rng.uniform(0.0, jitter_width_us, size=len(t))
            below = rounded < 0
            clamped += int(below.sum())
            rounded[below] = 0.0
            sec = np.sort(rounded * MICROSECOND)
            sec = np.minimum(sec, sess.duration)
            if len(sec) > 1 and np.any(np.diff(sec) <= 0):
                sec = _strictly_increasing(sec)
            new_times.append(sec)
        meta = dict(sess.meta)
        meta.update(randomize_round_to_us=round_to_us,
                    randomize_jitter_us=jitter_width_us,
                    randomize_seed=seed, clamped=clamped)
        sessions.append(Session(sess.session_id, sess.duration,
                                tuple(new_times), meta))
    return MultivariateEventStream(stream.dimension, tuple(sessions))


def filter_session(stream: MultivariateEventStream, window_start: float,
                   window_end: float) -> MultivariateEventStream:
    """Keep events with times in ``[window_start, window_end)``, re-based to
    the window start; session durations become ``window_end - window_start``.
    """
    sessions = []
    for sess in stream.sessions:
        if not (0.0 <= window_start < window_end <= sess.duration):
            raise ValueError(
                f"window [{window_start}, {window_end}) outside session "
                f"[0, {sess.duration}]")
        new_times = tuple(
            t[(t >= window_start) & (t < window_end)] - window_start
            for t in sess.times
        )
        sessions.append(Session(sess.session_id, window_end - window_start,
                                new_times, dict(sess.meta)))
    return MultivariateEventStream(stream.dimension, tuple(sessions))
