"""Order reconstruction from level-I snapshot records.

Each best-quote transition is classified side by side:

* same price, size up -> limit order of the delta;
* same price, size down -> trade-explained part consumes coincident trade
  volume at that side and timestamp, any residual drop is a cancel;
* price improves (new best inside the old one) -> limit order of the
  displayed size at the new best;
* price recedes -> cancellation of the whole old best queue net of
  coincident trades; the newly revealed level generates no limit event,
  since depth beyond level I is unobservable.

Trade records always become trade events with their recorded volume.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import groupby

from .types import EventType, OrderEvent, RawRecord, RecordKind, Side

__all__ = [
    "ReconstructionDiagnostics",
    "reconstruct_orders",
    "aggregate_simultaneous",
]

logger = logging.getLogger(__name__)


@dataclass
class ReconstructionDiagnostics:
    """Counters for records the reconstruction had to skip."""

    skipped_records: int = 0
    inconsistent_transitions: int = 0
    messages: list[str] = field(default_factory=list)

    def note(self, message: str) -> None:
        self.inconsistent_transitions += 1
        self.skipped_records += 1
        if len(self.messages) < 100:
            self.messages.append(message)
        logger.warning("reconstruction: %s", message)


def _side_transition(side: Side, ts: int, old_price: int, old_size: int,
                     new_price: int, new_size: int,
                     avail: dict[Side, int]) -> list[OrderEvent]:
    events: list[OrderEvent] = []
    if side is Side.ASK:
        improves = new_price < old_price
    else:
        improves = new_price > old_price

    if new_price == old_price:
        delta = new_size - old_size
        if delta > 0:
            events.append(OrderEvent(ts, EventType.LIMIT, side, delta, new_price))
        elif delta < 0:
            drop = -delta
            consumed = min(drop, avail[side])
            avail[side] -= consumed
            residual = drop - consumed
            if residual > 0:
                events.append(OrderEvent(ts, EventType.CANCEL, side, residual, old_price))
    elif improves:
        events.append(OrderEvent(ts, EventType.LIMIT, side, new_size, new_price))
    else:
        # Old best queue gone: trades first, the rest was pulled.
        consumed = min(old_size, avail[side])
        avail[side] -= consumed
        residual = old_size - consumed
        if residual > 0:
            events.append(OrderEvent(ts, EventType.CANCEL, side, residual, old_price))
    return events


def reconstruct_orders(records: list[RawRecord],
                       diagnostics: ReconstructionDiagnostics | None = None,
                       ) -> list[OrderEvent]:
    """Classify snapshot transitions and trade records into order events.

    ``records`` must be sorted by timestamp and start with a quote snapshot.
    Inconsistent records are skipped and counted in ``diagnostics``.
    """
    if not records:
        return []
    if records[0].kind is not RecordKind.QUOTE_SNAPSHOT:
        raise ValueError("first record must be a quote snapshot")
    diag = diagnostics if diagnostics is not None else ReconstructionDiagnostics()

    events: list[OrderEvent] = []
    best: dict[Side, tuple[int, int]] = {}

    for ts, group_iter in groupby(records, key=lambda r: r.timestamp_us):
        group = list(group_iter)
        # Trade volume available to explain queue drops at this timestamp.
        avail = {Side.ASK: 0, Side.BID: 0}
        for rec in group:
            if rec.kind is RecordKind.TRADE:
                avail[rec.trade_side] += rec.trade_volume
                events.append(OrderEvent(ts, EventType.TRADE, rec.trade_side,
                                         rec.trade_volume, rec.trade_price))
        for rec in group:
            if rec.kind is not RecordKind.QUOTE_SNAPSHOT:
                continue
            new = {Side.ASK: (rec.ask_price, rec.ask_size),
                   Side.BID: (rec.bid_price, rec.bid_size)}
            if any(p is None or s is None or p <= 0 or s <= 0
                   for p, s in new.values()):
                diag.note(f"t={ts}: snapshot with nonpositive price or size")
                continue
            if best:
                for side in (Side.ASK, Side.BID):
                    events.extend(_side_transition(
                        side, ts, *best[side], *new[side], avail))
            best = new

    return events


def aggregate_simultaneous(events: list[OrderEvent]) -> list[OrderEvent]:
    """Merge events sharing (timestamp, side, type) by summing volumes.

    Simultaneous events on opposite sides, or of different types, are kept
    separate.  Idempotent; input must be sorted by timestamp.
    """
    out: list[OrderEvent] = []
    for ts, group_iter in groupby(events, key=lambda e: e.timestamp_us):
        merged: dict[tuple[Side, EventType], OrderEvent] = {}
        order: list[tuple[Side, EventType]] = []
        for e in group_iter:
            key = (e.side, e.etype)
            if key in merged:
                prev = merged[key]
                merged[key] = OrderEvent(ts, e.etype, e.side,
                                         prev.volume + e.volume, prev.price)
            else:
                merged[key] = e
                order.append(key)
        out.extend(merged[k] for k in order)
    return out
