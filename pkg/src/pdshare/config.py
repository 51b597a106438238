"""Run configuration: one TOML file, explicit paths, no hidden state."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .calendars import EXPIRATION_RULES, EventCalendar, RollCalendar
from .simulate import ScenarioConfig


class ConfigError(ValueError):
    """Invalid or missing configuration; maps to exit code 2."""


def _parse_time_seconds(raw: str) -> int:
    try:
        t = dt.time.fromisoformat(raw)
    except ValueError:
        raise ConfigError(f"bad time {raw!r}, expected HH:MM:SS") from None
    return t.hour * 3600 + t.minute * 60 + t.second


def _parse_date(raw: str, where: str) -> dt.date:
    try:
        return dt.date.fromisoformat(raw)
    except ValueError:
        raise ConfigError(f"bad date {raw!r} in {where}") from None


def _parse_windows(raw, where: str) -> tuple[tuple[dt.date, dt.date], ...]:
    out = []
    for pair in raw:
        if len(pair) != 2:
            raise ConfigError(f"{where}: each window needs [start, end]")
        a, b = (_parse_date(str(p), where) for p in pair)
        if b < a:
            raise ConfigError(f"{where}: window end precedes start")
        out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class RunConfig:
    commodity: str
    session_start: int
    session_end: int
    holidays: frozenset[dt.date]
    tick_dir: Path | None
    contracts_file: Path | None
    delivery_months: tuple[int, ...]
    expiration_rule: str | None
    first_year: int | None
    last_year: int | None
    settlements_file: Path | None
    reports_file: Path | None
    min_updates: int
    lag_range: tuple[int, int]
    pairs: tuple[int, ...]
    template: str
    crash_windows: tuple[tuple[dt.date, dt.date], ...]
    next_day_reports: frozenset[str]
    scenario: ScenarioConfig | None
    output_dir: Path

    def roll_calendar(self) -> RollCalendar:
        if self.contracts_file is not None:
            if not self.contracts_file.exists():
                raise ConfigError(f"contracts file not found: {self.contracts_file}")
            return RollCalendar.from_csv(self.contracts_file, self.holidays)
        if self.expiration_rule is None:
            raise ConfigError("config needs either commodity.contracts_file or an "
                              "expiration_rule with delivery_months and years")
        return RollCalendar.from_rule(self.commodity, list(self.delivery_months),
                                      self.expiration_rule, self.first_year,
                                      self.last_year, self.holidays)

    def event_calendar(self) -> EventCalendar:
        if self.reports_file is not None:
            if not self.reports_file.exists():
                raise ConfigError(f"reports file not found: {self.reports_file}")
            return EventCalendar.from_csv(self.reports_file, self.crash_windows,
                                          self.next_day_reports, self.holidays)
        return EventCalendar({}, self.crash_windows, self.next_day_reports, self.holidays)


def load_config(path: Path | str) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config not found: {path}")
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error: {exc}") from None
    base = path.parent

    def resolve(p: str | None) -> Path | None:
        if p is None:
            return None
        q = Path(p)
        return q if q.is_absolute() else base / q

    com = raw.get("commodity", {})
    session_start = _parse_time_seconds(str(com.get("session_start", "09:30:00")))
    session_end = _parse_time_seconds(str(com.get("session_end", "16:00:00")))
    if session_end <= session_start:
        raise ConfigError("session_end must be after session_start")
    rule = com.get("expiration_rule")
    if rule is not None and rule not in EXPIRATION_RULES:
        raise ConfigError(f"unknown expiration_rule {rule!r}; "
                          f"choose from {sorted(EXPIRATION_RULES)}")

    paths = raw.get("paths", {})
    holidays = frozenset(_parse_date(str(d), "paths.holidays")
                         for d in paths.get("holidays", []))

    pipe = raw.get("pipeline", {})
    lag_min = int(pipe.get("lag_min", 1))
    lag_max = int(pipe.get("lag_max", 10))
    if not 1 <= lag_min <= lag_max:
        raise ConfigError("pipeline lag range must satisfy 1 <= lag_min <= lag_max")
    min_updates = int(pipe.get("min_updates", 100))
    if min_updates < 1:
        raise ConfigError("min_updates must be positive")
    pairs = tuple(int(k) for k in pipe.get("pairs", [1]))
    if any(k < 1 for k in pairs):
        raise ConfigError("pair indices must be >= 1")

    reg = raw.get("regression", {})
    template = str(reg.get("template", "corn"))

    scenario = None
    if "scenario" in raw:
        s = raw["scenario"]
        n_seconds = session_end - session_start + 1
        scenario = ScenarioConfig(
            start_date=_parse_date(str(s.get("start_date", "2020-01-06")), "scenario"),
            n_contracts=int(s.get("n_contracts", 3)),
            expiration_spacing=int(s.get("expiration_spacing", 20)),
            max_pair_index=max(pairs),
            commodity=str(com.get("name", "SIM")),
            session_start=session_start,
            n_seconds=n_seconds,
            sigma_mu=float(s.get("sigma_mu", 0.02)),
            sigma_s=(float(s.get("sigma_s1", 0.05)), float(s.get("sigma_s2", 0.05))),
            delay_nearby=int(s.get("delay_nearby", 0)),
            delay_gap=int(s.get("delay_gap", 5)),
            total_volume=int(s.get("total_volume", 10000)),
            volume_share_start=float(s.get("volume_share_start", 0.8)),
            volume_share_end=float(s.get("volume_share_end", 0.2)),
            deferred_volume_decay=float(s.get("deferred_volume_decay", 0.5)),
            contango_offset=float(s.get("contango_offset", 2.0)),
            base_price=float(s.get("base_price", 400.0)),
            backwardation_windows=_parse_windows(s.get("backwardation", []),
                                                 "scenario.backwardation"),
            report_dates=tuple(_parse_date(str(d), "scenario.report_dates")
                               for d in s.get("report_dates", [])),
            crash_windows=_parse_windows(s.get("crash", []), "scenario.crash"),
            holidays=holidays,
            seed=int(s.get("seed", 0)),
            tick_size=float(s.get("tick_size", 0.25)),
        )

    out = raw.get("output", {})
    output_dir = resolve(str(out.get("dir", "out")))

    return RunConfig(
        commodity=str(com.get("name", "SIM")),
        session_start=session_start,
        session_end=session_end,
        holidays=holidays,
        tick_dir=resolve(paths.get("ticks")),
        contracts_file=resolve(com.get("contracts_file")),
        delivery_months=tuple(int(m) for m in com.get("delivery_months", [])),
        expiration_rule=rule,
        first_year=int(com["first_year"]) if "first_year" in com else None,
        last_year=int(com["last_year"]) if "last_year" in com else None,
        settlements_file=resolve(paths.get("settlements")),
        reports_file=resolve(paths.get("reports")),
        min_updates=min_updates,
        lag_range=(lag_min, lag_max),
        pairs=pairs,
        template=template,
        crash_windows=_parse_windows(reg.get("crash_windows", []),
                                     "regression.crash_windows"),
        next_day_reports=frozenset(str(r) for r in reg.get("next_day_reports", [])),
        scenario=scenario,
        output_dir=output_dir,
    )
