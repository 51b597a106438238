"""Tick ingestion, one-second grid construction, and nearby/deferred pairing."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import IO, Iterable, Mapping

import numpy as np

from .calendars import EventCalendar, RollCalendar

TICK_HEADER = ("timestamp", "sequence", "contract", "price", "volume")


class EmptyGridError(ValueError):
    """No trades fell inside the session window."""


class PairSkippedError(ValueError):
    """A contract pair could not be formed for this day."""


@dataclass(frozen=True)
class TickRecord:
    timestamp: dt.datetime
    sequence: int
    contract_id: str
    price: Decimal  # exact as parsed; converted to float at grid build
    volume: int


@dataclass(frozen=True)
class SecondGrid:
    """One contract's session on a complete one-second grid.

    Seconds are offsets from midnight. `prices[i]` is the first trade of
    second `start_second + i`, forward-filled when no trade occurred; seconds
    before the first trade are NaN and excluded from estimation windows via
    `first_observed`.
    """

    session_date: dt.date
    contract_id: str
    start_second: int
    end_second: int
    prices: np.ndarray
    observed: np.ndarray
    total_volume: int

    def __post_init__(self):
        n = self.end_second - self.start_second + 1
        if len(self.prices) != n or len(self.observed) != n:
            raise ValueError("grid arrays must span the session exactly")

    @property
    def first_observed(self) -> int:
        idx = np.flatnonzero(self.observed)
        if len(idx) == 0:
            raise EmptyGridError(f"{self.contract_id} {self.session_date}: no trades")
        return int(idx[0])

    def valid_prices(self) -> np.ndarray:
        """Prices from the first trade onward (no fabricated leading values)."""
        return self.prices[self.first_observed:]

    def restrict(self, start: int, end: int) -> "SecondGrid":
        """Sub-grid over absolute seconds [start, end]."""
        if start < self.start_second or end > self.end_second or start > end:
            raise ValueError("restriction outside grid range")
        i, j = start - self.start_second, end - self.start_second + 1
        return SecondGrid(self.session_date, self.contract_id, start, end,
                          self.prices[i:j], self.observed[i:j], self.total_volume)

    def n_price_changes(self) -> int:
        """Observed seconds whose price differs from the previous grid second."""
        p = self.valid_prices()
        obs = self.observed[self.first_observed:]
        if len(p) < 2:
            return 0
        changed = p[1:] != p[:-1]
        return int(np.count_nonzero(changed & obs[1:]))


@dataclass(frozen=True)
class ContractPairDay:
    session_date: dt.date
    nearby_id: str
    deferred_id: str
    pair_index: int
    nearby_grid: SecondGrid
    deferred_grid: SecondGrid
    volume_share: float
    days_to_expiration: int
    backwardation: bool
    report_day: bool = False
    crash_window: bool = False

    def __post_init__(self):
        a, b = self.nearby_grid, self.deferred_grid
        if (a.start_second, a.end_second) != (b.start_second, b.end_second):
            raise ValueError("paired grids must cover identical second ranges")
        if not 0.0 <= self.volume_share <= 1.0:
            raise ValueError("volume_share outside [0, 1]")

    def price_matrix(self) -> np.ndarray:
        """(n, 2) float array of nearby and deferred prices over the common range."""
        return np.column_stack([self.nearby_grid.prices, self.deferred_grid.prices])


def parse_ticks(source: IO[str] | Iterable[str]) -> tuple[list[TickRecord], list[str]]:
    """Parse a tick CSV stream into sorted records plus per-row error messages.

    Malformed rows are reported with their 1-based line number and skipped;
    an empty file yields an empty record list.
    """
    records: list[TickRecord] = []
    errors: list[str] = []
    seen: set[tuple[str, dt.datetime, int]] = set()
    lines = iter(source)
    header = next(lines, None)
    if header is None:
        return [], []
    if tuple(h.strip() for h in header.rstrip("\n").split(",")) != TICK_HEADER:
        errors.append("line 1: unexpected header, expected " + ",".join(TICK_HEADER))
    for lineno, line in enumerate(lines, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            errors.append(f"line {lineno}: expected 5 fields, got {len(parts)}")
            continue
        ts_raw, seq_raw, contract, price_raw, vol_raw = (p.strip() for p in parts)
        try:
            ts = dt.datetime.fromisoformat(ts_raw)
            seq = int(seq_raw)
            price = Decimal(price_raw)
            volume = int(vol_raw)
        except (ValueError, InvalidOperation):
            errors.append(f"line {lineno}: unparseable row")
            continue
        if price <= 0:
            errors.append(f"non-positive price at line {lineno}")
            continue
        if volume < 0:
            errors.append(f"negative volume at line {lineno}")
            continue
        key = (contract, ts, seq)
        if key in seen:
            errors.append(f"line {lineno}: duplicate sequence {seq} for {contract} at {ts_raw}")
            continue
        seen.add(key)
        records.append(TickRecord(ts, seq, contract, price, volume))
    records.sort(key=lambda r: (r.timestamp, r.sequence))
    return records, errors


def _second_of_day(ts: dt.datetime) -> int:
    return ts.hour * 3600 + ts.minute * 60 + ts.second


def build_second_grid(ticks: list[TickRecord], session_date: dt.date,
                      contract_id: str, start_second: int, end_second: int) -> SecondGrid:
    """Aggregate one contract-session's ticks to the one-second grid.

    Within a second the first trade by sequence number wins; seconds without a
    trade carry the most recent prior price forward. Ticks outside the session
    window are dropped. Raises EmptyGridError when no trade survives.
    """
    n = end_second - start_second + 1
    if n <= 0:
        raise ValueError("session window is empty")
    first_price: dict[int, tuple[int, Decimal]] = {}
    total_volume = 0
    for t in ticks:
        if t.timestamp.date() != session_date or t.contract_id != contract_id:
            continue
        sec = _second_of_day(t.timestamp)
        if not start_second <= sec <= end_second:
            continue
        total_volume += t.volume
        slot = sec - start_second
        prior = first_price.get(slot)
        if prior is None or t.sequence < prior[0]:
            first_price[slot] = (t.sequence, t.price)
    if not first_price:
        raise EmptyGridError(f"{contract_id} {session_date}: no trades in session")
    prices = np.full(n, np.nan)
    observed = np.zeros(n, dtype=bool)
    last = np.nan
    for i in range(n):
        hit = first_price.get(i)
        if hit is not None:
            last = float(hit[1])
            observed[i] = True
        prices[i] = last
    return SecondGrid(session_date, contract_id, start_second, end_second,
                      prices, observed, total_volume)


def pair_contracts(grids: Mapping[str, SecondGrid], calendar: RollCalendar,
                   session_date: dt.date, k: int,
                   settlements: Mapping[str, float] | None = None,
                   events: EventCalendar | None = None) -> ContractPairDay:
    """Form the nearby / deferred-k pair for one session date.

    `grids` maps contract_id to that day's SecondGrid; `settlements` maps
    contract_id to the day's settlement price (last session trade is the
    documented fallback when absent).
    """
    nearby = calendar.nearby_on(session_date)
    deferred = calendar.deferred_on(session_date, k)
    if deferred is None:
        raise PairSkippedError(f"{session_date}: no deferred-{k} contract on the board")
    try:
        g1 = grids[nearby.contract_id]
        g2 = grids[deferred.contract_id]
    except KeyError as exc:
        raise PairSkippedError(f"{session_date}: missing grid for {exc.args[0]}") from None

    # Trim leading unfilled seconds rather than back-filling pre-trade prices.
    start = max(g1.start_second + g1.first_observed, g2.start_second + g2.first_observed)
    end = min(g1.end_second, g2.end_second)
    if start > end:
        raise PairSkippedError(f"{session_date}: grids do not overlap")
    g1r, g2r = g1.restrict(start, end), g2.restrict(start, end)

    total = g1.total_volume + g2.total_volume
    if total == 0:
        raise PairSkippedError(f"{session_date}: zero combined volume")
    volume_share = g1.total_volume / total

    def settle(grid: SecondGrid) -> float:
        if settlements is not None and grid.contract_id in settlements:
            return float(settlements[grid.contract_id])
        return float(grid.valid_prices()[-1])

    return ContractPairDay(
        session_date=session_date,
        nearby_id=nearby.contract_id,
        deferred_id=deferred.contract_id,
        pair_index=k,
        nearby_grid=g1r,
        deferred_grid=g2r,
        volume_share=volume_share,
        days_to_expiration=calendar.days_to_expiration(session_date),
        backwardation=settle(g2) < settle(g1),
        report_day=events.is_report_day(session_date) if events else False,
        crash_window=events.in_crash(session_date) if events else False,
    )


def is_estimable(pair: ContractPairDay, min_updates: int = 100) -> bool:
    """False when either leg updates too infrequently or is constant
    (limit-move or tranquil day)."""
    for grid in (pair.nearby_grid, pair.deferred_grid):
        if grid.n_price_changes() < min_updates:
            return False
        p = grid.valid_prices()
        if np.all(p == p[0]):
            return False
    return True
