"""Synthetic market generator: a shared random-walk fundamental observed with
per-contract delay and noise, composed into full multi-contract samples with
roll cycles, volume migration, backwardation spells, and event flags."""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field, asdict
from decimal import Decimal
from pathlib import Path

import numpy as np

from .calendars import Contract, RollCalendar, add_business_days, business_day_range
from .market_data import SecondGrid


@dataclass(frozen=True)
class StructuralConfig:
    """One simulated session for a two-leg pair.

    Prices track a common random-walk fundamental with per-leg delay (seconds)
    and additive i.i.d. Gaussian noise. Innovations are Gaussian; the RNG is
    numpy's default_rng (PCG64), fixed so thresholds downstream stay stable.
    """

    sigma_mu: float = 0.02
    delays: tuple[int, int] = (0, 0)
    sigma_s: tuple[float, float] = (0.05, 0.05)
    n_seconds: int = 23400
    seed: int = 0
    trade_thinning: tuple[float, float] = (1.0, 1.0)
    volume_mean: tuple[float, float] = (5.0, 5.0)
    total_volume: tuple[int, int] | None = None  # exact totals when set
    base_price: tuple[float, float] = (400.0, 400.0)

    def __post_init__(self):
        if self.sigma_mu < 0 or min(self.sigma_s) < 0:
            raise ValueError("standard deviations must be non-negative")
        if min(self.delays) < 0:
            raise ValueError("delays must be non-negative")
        if self.n_seconds <= max(self.delays) + 100:
            raise ValueError("session too short for the configured delays")


@dataclass(frozen=True)
class DayTruth:
    delays: tuple[int, int]
    sigma_s: tuple[float, float]
    sigma_mu: float
    leader: int | None  # 1 or 2 = smaller delay, None when tied


def _deterministic_volumes(total: int, observed: np.ndarray) -> np.ndarray:
    """Spread `total` over observed seconds: floor share everywhere, remainder
    one-by-one from the front."""
    vols = np.zeros(len(observed), dtype=int)
    idx = np.flatnonzero(observed)
    if len(idx) == 0 or total <= 0:
        return vols
    base, rem = divmod(total, len(idx))
    vols[idx] = base
    vols[idx[:rem]] += 1
    return vols


def simulate_day(cfg: StructuralConfig,
                 session_date: dt.date = dt.date(2020, 1, 6),
                 contract_ids: tuple[str, str] = ("SIM1", "SIM2"),
                 start_second: int = 34200) -> tuple[SecondGrid, SecondGrid, DayTruth]:
    """Draw one session: fundamental path once, then per-leg delayed prices,
    trade thinning, and volumes. Unobserved seconds carry the prior price
    forward, matching the ingestion fill rule."""
    rng = np.random.default_rng(cfg.seed)
    T = cfg.n_seconds
    maxd = max(cfg.delays)
    fundamental = np.cumsum(rng.normal(0.0, cfg.sigma_mu, T + maxd)) if cfg.sigma_mu > 0 \
        else np.zeros(T + maxd)

    grids = []
    for leg in (0, 1):
        d = cfg.delays[leg]
        prices = (cfg.base_price[leg]
                  + fundamental[maxd - d:maxd - d + T]
                  + rng.normal(0.0, cfg.sigma_s[leg], T))
        thin = cfg.trade_thinning[leg]
        observed = rng.random(T) < thin if thin < 1.0 else np.ones(T, dtype=bool)
        if not observed.any():
            observed[0] = True
        if cfg.total_volume is not None:
            vols = _deterministic_volumes(cfg.total_volume[leg], observed)
        else:
            vols = np.where(observed, 1 + rng.poisson(max(cfg.volume_mean[leg] - 1, 0), T), 0)
        # forward-fill prices on unobserved seconds; leading gap stays NaN
        filled = prices.copy()
        first = int(np.flatnonzero(observed)[0])
        filled[:first] = np.nan
        for i in range(first + 1, T):
            if not observed[i]:
                filled[i] = filled[i - 1]
        grids.append(SecondGrid(session_date, contract_ids[leg], start_second,
                                start_second + T - 1, filled, observed,
                                int(vols.sum())))

    d1, d2 = cfg.delays
    leader = None if d1 == d2 else (1 if d1 < d2 else 2)
    truth = DayTruth(cfg.delays, cfg.sigma_s, cfg.sigma_mu, leader)
    return grids[0], grids[1], truth


def day_seed(master_seed: int, day_index: int) -> int:
    """Deterministic per-day seed derived from the master seed."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(day_index,))
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class ScenarioConfig:
    """A multi-contract sample: contracts expiring every `expiration_spacing`
    business days, per-pair leadership delays, a linear volume-share ramp over
    each nearby period, and optional backwardation / report / crash windows."""

    start_date: dt.date = dt.date(2020, 1, 6)
    n_contracts: int = 3
    expiration_spacing: int = 20     # business days between expirations
    max_pair_index: int = 1
    commodity: str = "SIM"
    session_start: int = 34200       # 09:30:00
    n_seconds: int = 23400
    sigma_mu: float = 0.02
    sigma_s: tuple[float, float] = (0.05, 0.05)
    delay_nearby: int = 0
    delay_gap: int = 5               # deferred-k delay = delay_nearby + k * delay_gap
    total_volume: int = 10000        # nearby + deferred-1 combined, per day
    volume_share_start: float = 0.8  # nearby share at the start of its period
    volume_share_end: float = 0.2    # nearby share on expiration day
    deferred_volume_decay: float = 0.5
    contango_offset: float = 2.0     # per curve position; negated in backwardation
    base_price: float = 400.0
    backwardation_windows: tuple[tuple[dt.date, dt.date], ...] = ()
    report_dates: tuple[dt.date, ...] = ()
    crash_windows: tuple[tuple[dt.date, dt.date], ...] = ()
    holidays: frozenset[dt.date] = frozenset()
    seed: int = 0
    tick_size: float = 0.25

    def roll_calendar(self) -> RollCalendar:
        contracts = []
        for i in range(self.n_contracts):
            exp = add_business_days(self.start_date,
                                    (i + 1) * self.expiration_spacing, self.holidays)
            cid = f"{self.commodity}_{i + 1:02d}"
            contracts.append(Contract(exp, cid, self.commodity))
        return RollCalendar(tuple(contracts), self.holidays)

    def sample_days(self) -> list[dt.date]:
        """Business days for which the full requested curve exists."""
        cal = self.roll_calendar()
        last_nearby = self.n_contracts - 1 - self.max_pair_index
        if last_nearby < 0:
            raise ValueError("not enough contracts for the requested pair depth")
        first = add_business_days(self.start_date, 1, self.holidays)
        end = cal.contracts[last_nearby].expiration
        return business_day_range(first, end, self.holidays)


def _in_windows(day, windows) -> bool:
    return any(a <= day <= b for a, b in windows)


def _nearby_share(cfg: ScenarioConfig, days_to_exp: int) -> float:
    """Linear ramp over the nearby period, hitting volume_share_end at expiration."""
    span = max(cfg.expiration_spacing - 1, 1)
    frac = min(max(days_to_exp, 0), span) / span
    return cfg.volume_share_end + frac * (cfg.volume_share_start - cfg.volume_share_end)


def simulate_sample(cfg: ScenarioConfig, out_dir: Path | str) -> dict:
    """Emit per-contract-per-day tick CSVs, a settlements CSV, a contracts CSV,
    and a JSON manifest of per-day ground truth. Returns the manifest."""
    out = Path(out_dir)
    tick_dir = out / "ticks"
    tick_dir.mkdir(parents=True, exist_ok=True)
    cal = cfg.roll_calendar()
    quantum = Decimal(str(cfg.tick_size))

    manifest_days = []
    settle_rows = []
    for day_index, day in enumerate(cfg.sample_days()):
        nearby_idx = cal.nearby_index(day)
        curve = [cal.contracts[nearby_idx + k]
                 for k in range(cfg.max_pair_index + 1)
                 if nearby_idx + k < len(cal.contracts)]
        dte = cal.days_to_expiration(day)
        backward = _in_windows(day, cfg.backwardation_windows)

        share = _nearby_share(cfg, dte)
        nearby_vol = round(share * cfg.total_volume)
        deferred1_vol = cfg.total_volume - nearby_vol
        volumes = [nearby_vol]
        for k in range(1, len(curve)):
            volumes.append(max(int(round(deferred1_vol
                                         * cfg.deferred_volume_decay ** (k - 1))), 1))

        rng_seed = day_seed(cfg.seed, day_index)
        rng = np.random.default_rng(rng_seed)
        T = cfg.n_seconds
        delays = [cfg.delay_nearby + k * cfg.delay_gap for k in range(len(curve))]
        maxd = max(delays)
        fundamental = np.cumsum(rng.normal(0.0, cfg.sigma_mu, T + maxd))

        day_volumes = {}
        day_settles = {}
        for pos, contract in enumerate(curve):
            offset = (-cfg.contango_offset if backward else cfg.contango_offset) * pos
            sigma_s = cfg.sigma_s[0] if pos == 0 else cfg.sigma_s[1]
            d = delays[pos]
            prices = (cfg.base_price + offset
                      + fundamental[maxd - d:maxd - d + T]
                      + rng.normal(0.0, sigma_s, T))
            observed = np.ones(T, dtype=bool)
            vols = _deterministic_volumes(volumes[pos], observed)
            _write_tick_csv(tick_dir, day, contract.contract_id, cfg.session_start,
                            prices, vols, quantum)
            day_volumes[contract.contract_id] = int(vols.sum())
            day_settles[contract.contract_id] = float(
                Decimal(str(round(prices[-1] / cfg.tick_size) * cfg.tick_size))
                .quantize(quantum))
            settle_rows.append((day, contract.contract_id,
                                day_settles[contract.contract_id]))

        total_pair1 = day_volumes[curve[0].contract_id] + day_volumes[curve[1].contract_id] \
            if len(curve) > 1 else day_volumes[curve[0].contract_id]
        manifest_days.append({
            "date": day.isoformat(),
            "nearby": curve[0].contract_id,
            "contracts": [c.contract_id for c in curve],
            "delays": delays,
            "days_to_expiration": dte,
            "volumes": day_volumes,
            "volume_share_pair1": day_volumes[curve[0].contract_id] / total_pair1,
            "backwardation": backward,
            "report_day": day in set(cfg.report_dates),
            "crash": _in_windows(day, cfg.crash_windows),
            "leader": 1 if cfg.delay_gap > 0 else None,
            "seed": rng_seed,
        })

    with open(out / "contracts.csv", "w", encoding="utf-8") as fh:
        fh.write("contract,expiration\n")
        for c in cal.contracts:
            fh.write(f"{c.contract_id},{c.expiration.isoformat()}\n")
    with open(out / "settlements.csv", "w", encoding="utf-8") as fh:
        fh.write("date,contract,settle\n")
        for day, cid, settle in settle_rows:
            fh.write(f"{day.isoformat()},{cid},{settle:.2f}\n")

    manifest = {
        "commodity": cfg.commodity,
        "seed": cfg.seed,
        "session_start": cfg.session_start,
        "n_seconds": cfg.n_seconds,
        "days": manifest_days,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _write_tick_csv(tick_dir: Path, day: dt.date, contract_id: str,
                    session_start: int, prices: np.ndarray, volumes: np.ndarray,
                    quantum: Decimal) -> None:
    path = tick_dir / f"{day.isoformat()}_{contract_id}.csv"
    tick = float(quantum)
    midnight = dt.datetime.combine(day, dt.time())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("timestamp,sequence,contract,price,volume\n")
        for i, (p, v) in enumerate(zip(prices, volumes)):
            ts = midnight + dt.timedelta(seconds=session_start + i)
            quantized = Decimal(str(round(p / tick) * tick)).quantize(quantum)
            fh.write(f"{ts.isoformat()},{1},{contract_id},{quantized},{int(v)}\n")
