"""Domain types for order-flow event streams."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Side",
    "EventType",
    "RecordKind",
    "RawRecord",
    "OrderEvent",
    "BinningMode",
    "BinningScheme",
    "Session",
    "MultivariateEventStream",
    "FlowStatistics",
]

MICROSECOND = 1e-6  # seconds per microsecond


class Side(str, Enum):
    ASK = "a"
    BID = "b"


class EventType(str, Enum):
    LIMIT = "L"
    CANCEL = "C"
    TRADE = "T"


class RecordKind(str, Enum):
    QUOTE_SNAPSHOT = "Q"
    TRADE = "T"


@dataclass(frozen=True)
class RawRecord:
    """One line of normalized level-I market data.

    Quote snapshots carry the best quotes on both sides; trade records carry
    the executed price, volume and the side of the book that was hit.
    Timestamps are integer microseconds since the session start.
    """

    timestamp_us: int
    kind: RecordKind
    bid_price: int | None = None
    bid_size: int | None = None
    ask_price: int | None = None
    ask_size: int | None = None
    trade_price: int | None = None
    trade_volume: int | None = None
    trade_side: Side | None = None

    def validate(self) -> None:
        if self.timestamp_us < 0:
            raise ValueError("negative timestamp")
        if self.kind is RecordKind.QUOTE_SNAPSHOT:
            for name in ("bid_price", "bid_size", "ask_price", "ask_size"):
                v = getattr(self, name)
                if v is None or v <= 0:
                    raise ValueError(f"nonpositive {name}")
            if self.bid_price >= self.ask_price:
                raise ValueError("crossed quotes: bid_price >= ask_price")
        else:
            if self.trade_volume is None or self.trade_volume <= 0:
                raise ValueError("nonpositive volume")
            if self.trade_price is None or self.trade_price <= 0:
                raise ValueError("nonpositive trade_price")
            if self.trade_side is None:
                raise ValueError("missing trade side")


@dataclass(frozen=True)
class OrderEvent:
    """A typed first-level order-book event."""

    timestamp_us: int
    etype: EventType
    side: Side
    volume: int
    price: int | None = None

    def __post_init__(self):
        if self.volume < 1:
            raise ValueError("nonpositive volume")


class BinningMode(str, Enum):
    UNSIGNED_TRADES = "unsigned_trades"
    SIGNED_TRADES = "signed_trades"
    FULL_BOOK = "full_book"


# Component block layouts.  Signed trades: sell block (bid-side trades)
# first, then buy block.  Full book: ask block then bid block, each ordered
# limit bins, cancel bins, trade bins.
_FULL_BOOK_TYPE_ORDER = (EventType.LIMIT, EventType.CANCEL, EventType.TRADE)


@dataclass(frozen=True)
class BinningScheme:
    """Maps (event type, side, volume) to a Hawkes component index.

    ``edges`` are volume breakpoints: bins are ``[1, e1], (e1, e2], ...,
    (ek, inf)`` so the first bin is the singleton ``{1}`` whenever
    ``e1 == 1``.  An empty edge list means a single bin ``[1, inf)``,
    i.e. volume is ignored.
    """

    mode: BinningMode
    edges: tuple[int, ...]

    def __post_init__(self):
        if any(e < 1 for e in self.edges):
            raise ValueError("breakpoints must be >= 1")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def n_volume_bins(self) -> int:
        return len(self.edges) + 1

    @property
    def dimension(self) -> int:
        per_side = {
            BinningMode.UNSIGNED_TRADES: 1,
            BinningMode.SIGNED_TRADES: 2,
            BinningMode.FULL_BOOK: 6,
        }[self.mode]
        return per_side * self.n_volume_bins

    def volume_bin(self, volume: int) -> int:
        if volume < 1:
            raise ValueError("volume must be >= 1")
        return bisect.bisect_left(self.edges, volume)

    def uses_event(self, event: OrderEvent) -> bool:
        if self.mode is BinningMode.FULL_BOOK:
            return True
        return event.etype is EventType.TRADE

    def component(self, event: OrderEvent) -> int:
        """Component index of an event this scheme uses."""
        b = self.volume_bin(event.volume)
        k = self.n_volume_bins
        if self.mode is BinningMode.UNSIGNED_TRADES:
            return b
        if self.mode is BinningMode.SIGNED_TRADES:
            # sell = market order hitting the bid
            return b if event.side is Side.BID else k + b
        side_off = 0 if event.side is Side.ASK else 3 * k
        type_off = _FULL_BOOK_TYPE_ORDER.index(event.etype) * k
        return side_off + type_off + b

    def labels(self) -> list[str]:
        k = self.n_volume_bins
        bins = [str(i + 1) for i in range(k)]
        if self.mode is BinningMode.UNSIGNED_TRADES:
            return [f"B{i}" for i in bins]
        if self.mode is BinningMode.SIGNED_TRADES:
            return [f"S{i}" for i in bins] + [f"B{i}" for i in bins]
        out = []
        for side in ("a", "b"):
            for et in _FULL_BOOK_TYPE_ORDER:
                out.extend(f"{et.value}{side}{i}" for i in bins)
        return out

    def side_blocks(self) -> dict[str, list[int]] | None:
        """Component indices per book side, for quadrant reports."""
        k = self.n_volume_bins
        if self.mode is BinningMode.SIGNED_TRADES:
            return {"sell": list(range(k)), "buy": list(range(k, 2 * k))}
        if self.mode is BinningMode.FULL_BOOK:
            return {"ask": list(range(3 * k)), "bid": list(range(3 * k, 6 * k))}
        return None

    def representative_volume(self, bin_index: int) -> int:
        """Smallest volume that maps to the given volume bin."""
        if bin_index == 0:
            return 1
        return self.edges[bin_index - 1] + 1

    def event_template(self, comp: int) -> tuple[EventType, Side, int]:
        """(etype, side, volume) mapping back to the given component;
        inverse of :meth:`component` up to the representative volume."""
        if not 0 <= comp < self.dimension:
            raise IndexError(f"component {comp} outside dimension {self.dimension}")
        k = self.n_volume_bins
        if self.mode is BinningMode.UNSIGNED_TRADES:
            return EventType.TRADE, Side.ASK, self.representative_volume(comp)
        if self.mode is BinningMode.SIGNED_TRADES:
            side = Side.BID if comp < k else Side.ASK
            return EventType.TRADE, side, self.representative_volume(comp % k)
        side = Side.ASK if comp < 3 * k else Side.BID
        rem = comp % (3 * k)
        etype = _FULL_BOOK_TYPE_ORDER[rem // k]
        return etype, side, self.representative_volume(rem % k)

    def to_dict(self) -> dict:
        return {"mode": self.mode.value, "edges": list(self.edges)}

    @classmethod
    def from_dict(cls, d: dict) -> "BinningScheme":
        try:
            mode = BinningMode(d["mode"])
            edges = tuple(int(e) for e in d["edges"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"invalid binning scheme config: {exc}") from exc
        return cls(mode, edges)

    @classmethod
    def canonical(cls, dimension: int) -> "BinningScheme":
        """Unsigned scheme whose bins are {1}, {2}, ..., {D-1}, (D-1, inf).

        Used to round-trip purely synthetic D-component streams through the
        event CSV format: component ``i`` maps to trades of volume ``i + 1``.
        """
        if dimension < 1:
            raise ValueError("canonical scheme needs dimension >= 1")
        return cls(BinningMode.UNSIGNED_TRADES, tuple(range(1, dimension)))


@dataclass(frozen=True)
class Session:
    """One trading session of a multivariate point process.

    ``times`` holds one strictly increasing float64 array of event times in
    seconds per component, all within ``[0, duration]``.
    """

    session_id: str
    duration: float
    times: tuple[np.ndarray, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("session duration must be positive")
        for i, t in enumerate(self.times):
            if len(t) == 0:
                continue
            if t[0] < 0 or t[-1] > self.duration:
                raise ValueError(f"component {i}: times outside [0, duration]")
            if np.any(np.diff(t) <= 0):
                raise ValueError(f"component {i}: times not strictly increasing")

    @property
    def counts(self) -> np.ndarray:
        return np.array([len(t) for t in self.times])


@dataclass(frozen=True)
class MultivariateEventStream:
    """Per-session, per-component event timestamps; the estimator's input."""

    dimension: int
    sessions: tuple[Session, ...]

    def __post_init__(self):
        for s in self.sessions:
            if len(s.times) != self.dimension:
                raise ValueError(
                    f"session {s.session_id}: {len(s.times)} components, "
                    f"expected {self.dimension}")

    @property
    def total_time(self) -> float:
        return float(sum(s.duration for s in self.sessions))

    @property
    def total_counts(self) -> np.ndarray:
        out = np.zeros(self.dimension, dtype=np.int64)
        for s in self.sessions:
            out += s.counts
        return out

    def single(self) -> Session:
        if len(self.sessions) != 1:
            raise ValueError("stream holds more than one session")
        return self.sessions[0]


@dataclass(frozen=True)
class FlowStatistics:
    """Descriptive statistics of an event stream.

    Duration histograms are raw bin counts on ``duration_edges``; volume
    histogram maps signed volume (buy positive, sell negative) to count;
    autocorrelations are in trade time, index = lag.
    """

    mean_intensity: np.ndarray
    event_counts: np.ndarray             # per component
    duration_edges: np.ndarray
    duration_counts: np.ndarray          # (D, n_bins)
    pooled_duration_counts: np.ndarray   # (n_bins,)
    n_durations: np.ndarray              # per component
    volume_histogram: dict[int, int] | None = None
    sign_autocorr: np.ndarray | None = None
    volume_autocorr: np.ndarray | None = None
