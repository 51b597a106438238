"""Business-day arithmetic, contract expirations, roll calendar, and event calendar."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

# CME delivery-month letter codes, used when building contract ids.
MONTH_CODES = {
    1: "F", 2: "G", 3: "H", 4: "J", 5: "K", 6: "M",
    7: "N", 8: "Q", 9: "U", 10: "V", 11: "X", 12: "Z",
}


def is_business_day(day: dt.date, holidays: frozenset[dt.date] = frozenset()) -> bool:
    return day.weekday() < 5 and day not in holidays


def next_business_day(day: dt.date, holidays: frozenset[dt.date] = frozenset()) -> dt.date:
    day = day + dt.timedelta(days=1)
    while not is_business_day(day, holidays):
        day += dt.timedelta(days=1)
    return day


def previous_business_day(day: dt.date, holidays: frozenset[dt.date] = frozenset()) -> dt.date:
    day = day - dt.timedelta(days=1)
    while not is_business_day(day, holidays):
        day -= dt.timedelta(days=1)
    return day


def add_business_days(day: dt.date, n: int, holidays: frozenset[dt.date] = frozenset()) -> dt.date:
    if n < 0:
        raise ValueError("n must be non-negative")
    for _ in range(n):
        day = next_business_day(day, holidays)
    return day


def business_days_between(start: dt.date, end: dt.date,
                          holidays: frozenset[dt.date] = frozenset()) -> int:
    """Count business days in the half-open interval (start, end]."""
    if end < start:
        raise ValueError("end precedes start")
    count = 0
    day = start
    while day < end:
        day += dt.timedelta(days=1)
        if is_business_day(day, holidays):
            count += 1
    return count


def business_day_range(start: dt.date, end: dt.date,
                       holidays: frozenset[dt.date] = frozenset()) -> list[dt.date]:
    """All business days in [start, end]."""
    out = []
    day = start
    while day <= end:
        if is_business_day(day, holidays):
            out.append(day)
        day += dt.timedelta(days=1)
    return out


def expiration_business_day_before_15th(year: int, month: int,
                                        holidays: frozenset[dt.date] = frozenset()) -> dt.date:
    """Expiration rule used by corn: business day prior to the 15th calendar day."""
    return previous_business_day(dt.date(year, month, 15), holidays)


def expiration_last_business_day(year: int, month: int,
                                 holidays: frozenset[dt.date] = frozenset()) -> dt.date:
    """Expiration rule used by live cattle: last business day of the delivery month."""
    if month == 12:
        first_next = dt.date(year + 1, 1, 1)
    else:
        first_next = dt.date(year, month + 1, 1)
    return previous_business_day(first_next, holidays)


EXPIRATION_RULES = {
    "business_day_before_15th": expiration_business_day_before_15th,
    "last_business_day": expiration_last_business_day,
}


@dataclass(frozen=True, order=True)
class Contract:
    expiration: dt.date
    contract_id: str = field(compare=False)
    commodity: str = field(compare=False, default="")


class RollCalendarError(ValueError):
    pass


@dataclass(frozen=True)
class RollCalendar:
    """Ordered contract list; the nearby interval for a contract runs from the
    business day after the previous contract's expiration through its own
    expiration day (inclusive)."""

    contracts: tuple[Contract, ...]
    holidays: frozenset[dt.date] = frozenset()

    def __post_init__(self):
        exps = [c.expiration for c in self.contracts]
        if sorted(exps) != exps or len(set(exps)) != len(exps):
            raise RollCalendarError("contract expirations must be strictly increasing")
        if not self.contracts:
            raise RollCalendarError("empty contract list")

    def nearby_index(self, day: dt.date) -> int:
        """Index of the nearby contract on `day`; raises if outside the sample."""
        for i, c in enumerate(self.contracts):
            if day <= c.expiration:
                return i
        raise RollCalendarError(f"no contract covers {day}")

    def nearby_on(self, day: dt.date) -> Contract:
        return self.contracts[self.nearby_index(day)]

    def deferred_on(self, day: dt.date, k: int) -> Contract | None:
        """The k-th deferred contract on `day`, or None if it does not exist."""
        i = self.nearby_index(day) + k
        return self.contracts[i] if i < len(self.contracts) else None

    def days_to_expiration(self, day: dt.date) -> int:
        """Business days from `day` (exclusive) to the nearby expiration (inclusive)."""
        return business_days_between(day, self.nearby_on(day).expiration, self.holidays)

    @classmethod
    def from_rule(cls, commodity: str, delivery_months: list[int], rule: str,
                  first_year: int, last_year: int,
                  holidays: frozenset[dt.date] = frozenset()) -> "RollCalendar":
        try:
            rule_fn = EXPIRATION_RULES[rule]
        except KeyError:
            raise RollCalendarError(f"unknown expiration rule {rule!r}") from None
        contracts = []
        for year in range(first_year, last_year + 1):
            for month in sorted(delivery_months):
                cid = f"{commodity}_{year}{MONTH_CODES[month]}"
                contracts.append(Contract(rule_fn(year, month, holidays), cid, commodity))
        return cls(tuple(sorted(contracts)), holidays)

    @classmethod
    def from_csv(cls, path: Path | str,
                 holidays: frozenset[dt.date] = frozenset()) -> "RollCalendar":
        """Load explicit contracts from a `contract,expiration` CSV."""
        contracts = []
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                contracts.append(Contract(
                    dt.date.fromisoformat(row["expiration"].strip()),
                    row["contract"].strip(),
                ))
        return cls(tuple(sorted(contracts)), holidays)


@dataclass(frozen=True)
class EventCalendar:
    """Report release dates and crash windows.

    `next_day_reports` lists report types whose dummy fires on the trading day
    following the release (Cattle on Feed is released after the day session).
    """

    report_dates: dict[str, frozenset[dt.date]] = field(default_factory=dict)
    crash_windows: tuple[tuple[dt.date, dt.date], ...] = ()
    next_day_reports: frozenset[str] = frozenset()
    holidays: frozenset[dt.date] = frozenset()

    def effective_report_dates(self, report_type: str) -> frozenset[dt.date]:
        """Dates on which the dummy for `report_type` equals 1."""
        dates = self.report_dates.get(report_type, frozenset())
        if report_type in self.next_day_reports:
            return frozenset(next_business_day(d, self.holidays) for d in dates)
        return dates

    def is_report_day(self, day: dt.date, report_type: str | None = None) -> bool:
        types = [report_type] if report_type else list(self.report_dates)
        return any(day in self.effective_report_dates(t) for t in types)

    def in_crash(self, day: dt.date) -> bool:
        return any(a <= day <= b for a, b in self.crash_windows)

    @classmethod
    def from_csv(cls, path: Path | str, crash_windows=(),
                 next_day_reports: frozenset[str] = frozenset(),
                 holidays: frozenset[dt.date] = frozenset()) -> "EventCalendar":
        """Load a `date,report_type` CSV."""
        dates: dict[str, set[dt.date]] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                dates.setdefault(row["report_type"].strip(), set()).add(
                    dt.date.fromisoformat(row["date"].strip()))
        return cls({k: frozenset(v) for k, v in dates.items()},
                   tuple(crash_windows), next_day_reports, holidays)
