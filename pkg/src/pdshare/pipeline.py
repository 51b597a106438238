"""Batch orchestration: ingest tick files, run the daily pipeline over every
session and pair, aggregate, and write deterministic outputs."""

from __future__ import annotations

import csv
import datetime as dt
import json
from collections import defaultdict
from pathlib import Path

import pandas as pd

from . import market_data as md
from .calendars import RollCalendar
from .config import ConfigError, RunConfig
from .metrics import (DiscoveryShares, PipelineSettings, aggregate_shares,
                      daily_pipeline, shares_to_frame)

DAILY_COLUMNS = ["date", "commodity", "pair_index", "category", "gs1", "cs1",
                 "is1", "ils1", "combined_ps", "volume_share",
                 "days_to_expiration", "backwardation"]


class AnalysisError(RuntimeError):
    pass


def load_tick_dir(tick_dir: Path) -> tuple[dict[tuple[dt.date, str], list], list[str]]:
    """Read every CSV in the tick directory, grouped by (session date, contract)."""
    if not tick_dir.is_dir():
        raise AnalysisError(f"tick directory not found: {tick_dir}")
    grouped: dict[tuple[dt.date, str], list] = defaultdict(list)
    errors: list[str] = []
    for path in sorted(tick_dir.glob("*.csv")):
        with open(path, encoding="utf-8") as fh:
            records, errs = md.parse_ticks(fh)
        errors.extend(f"{path.name}: {e}" for e in errs)
        for rec in records:
            grouped[(rec.timestamp.date(), rec.contract_id)].append(rec)
    return dict(grouped), errors


def load_settlements(path: Path | None) -> dict[dt.date, dict[str, float]]:
    if path is None or not path.exists():
        return {}
    out: dict[dt.date, dict[str, float]] = defaultdict(dict)
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            day = dt.date.fromisoformat(row["date"].strip())
            out[day][row["contract"].strip()] = float(row["settle"])
    return dict(out)


def run_analyze(cfg: RunConfig, out_dir: Path,
                pairs: tuple[int, ...] | None = None) -> pd.DataFrame:
    """Full analysis pass; writes the daily CSV, summary tables, the rank-test
    category table, the roll profile, and an exclusion log. Returns the daily
    shares frame."""
    if cfg.tick_dir is None:
        raise ConfigError("config has no paths.ticks entry")
    pairs = pairs or cfg.pairs
    calendar = cfg.roll_calendar()
    events = cfg.event_calendar()
    settlements = load_settlements(cfg.settlements_file)
    grouped, parse_errors = load_tick_dir(cfg.tick_dir)
    if not grouped:
        raise AnalysisError(f"no tick data under {cfg.tick_dir}")

    settings = PipelineSettings(cfg.min_updates, cfg.lag_range)
    by_date: dict[dt.date, dict[str, list]] = defaultdict(dict)
    for (day, contract), records in grouped.items():
        by_date[day][contract] = records

    results: list[DiscoveryShares] = []
    exclusions: list[str] = list(parse_errors)
    for day in sorted(by_date):
        grids: dict[str, md.SecondGrid] = {}
        for contract, records in by_date[day].items():
            try:
                grids[contract] = md.build_second_grid(
                    records, day, contract, cfg.session_start, cfg.session_end)
            except md.EmptyGridError as exc:
                exclusions.append(str(exc))
        for k in pairs:
            try:
                pair = md.pair_contracts(grids, calendar, day, k,
                                         settlements.get(day), events)
            except (md.PairSkippedError, md.EmptyGridError) as exc:
                exclusions.append(f"pair {k}: {exc}")
                continue
            row = daily_pipeline(pair, settings)
            results.append(row)
            if row.category is None:
                exclusions.append(f"{day} pair {k}: excluded ({row.reason})")

    if not any(r.category is not None for r in results):
        raise AnalysisError("no estimable days in the sample; check session "
                            "hours, min_updates, and tick data coverage")

    out_dir.mkdir(parents=True, exist_ok=True)
    daily = shares_to_frame(results)
    daily.insert(1, "commodity", cfg.commodity)
    daily_out = daily[daily["category"].notna()][DAILY_COLUMNS]
    daily_out.to_csv(out_dir / "daily_shares.csv", index=False, float_format="%.6f")

    summary = aggregate_shares(results)
    summary.by_pair.to_csv(out_dir / "summary_by_pair.csv", index=False,
                           float_format="%.6f")
    with open(out_dir / "summary_by_pair.json", "w", encoding="utf-8") as fh:
        json.dump(summary.by_pair.round(6).to_dict(orient="records"), fh,
                  indent=2, sort_keys=True)
        fh.write("\n")
    summary.categories.to_csv(out_dir / "category_table.csv", index=False,
                              float_format="%.4f")
    summary.by_expiration.to_csv(out_dir / "expiration_profile.csv", index=False,
                                 float_format="%.6f")
    with open(out_dir / "exclusions.log", "w", encoding="utf-8") as fh:
        for line in exclusions:
            fh.write(line + "\n")
    return daily


def run_rollpoint(cfg: RunConfig, daily_path: Path, out_dir: Path) -> pd.DataFrame:
    """Per nearby period, the first session whose nearby volume share is below
    0.5 and the first whose price-discovery share is below 0.5."""
    if not daily_path.exists():
        raise AnalysisError(f"daily shares file not found: {daily_path} "
                            "(run analyze first)")
    daily = pd.read_csv(daily_path, parse_dates=["date"])
    daily = daily[daily["pair_index"] == 1]
    if daily.empty:
        raise AnalysisError("no pair-1 rows in the daily shares file")
    calendar = cfg.roll_calendar()

    rows = []
    daily = daily.sort_values("date")
    nearby_ids = [calendar.nearby_on(d.date()).contract_id for d in daily["date"]]
    daily = daily.assign(nearby=nearby_ids)
    for contract, group in daily.groupby("nearby", sort=False):
        exp = next(c.expiration for c in calendar.contracts
                   if c.contract_id == contract)
        vol_cross = group[group["volume_share"] < 0.5]["date"]
        ps_cross = group[group["combined_ps"] < 0.5]["date"]
        rows.append({
            "contract": contract,
            "expiration": exp.isoformat(),
            "volume_roll_date": vol_cross.iloc[0].date().isoformat()
                                if len(vol_cross) else "no-roll-signal",
            "ps_roll_date": ps_cross.iloc[0].date().isoformat()
                            if len(ps_cross) else "no-roll-signal",
        })
    frame = pd.DataFrame(rows).sort_values("expiration").reset_index(drop=True)
    out_dir.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_dir / "rollpoints.csv", index=False)
    return frame
