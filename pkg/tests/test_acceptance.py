"""Acceptance suite: one test per release criterion, each printing a single
PASS/FAIL line with the measured values."""

import time
import warnings

import numpy as np
import pandas as pd
import pytest

from pdshare import econometrics as ec
from pdshare import metrics, regression
from pdshare.calendars import (EventCalendar, business_day_range,
                               business_days_between, previous_business_day)
from pdshare.cli import main
from pdshare.metrics import (aggregate_shares, component_share,
                             gs_fit_from_prices, information_leadership_share,
                             information_share)
from pdshare.simulate import StructuralConfig, simulate_day


def report(capsys, num, name, ok, detail=""):
    with capsys.disabled():
        status = "PASS" if ok else "FAIL"
        suffix = f" [{detail}]" if detail else ""
        print(f"criterion {num:2d} ({name}): {status}{suffix}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def random_fit(rng):
    alpha = np.array([rng.uniform(-1.0, -1e-3), rng.uniform(1e-3, 1.0)])
    s1, s2 = rng.uniform(0.1, 5.0, 2)
    rho = rng.uniform(-0.95, 0.95)
    sigma = np.array([[s1 * s1, rho * s1 * s2], [rho * s1 * s2, s2 * s2]])
    return ec.VecmFit(alpha, np.array([1.0, -1.0]), 0.0, np.zeros((1, 2, 2)),
                      1, sigma, 1000, 0.0)


def classify_and_share(g1, g2, lag_range=(1, 10)):
    """The daily estimation path: BIC lag, rank test, shares when rank 1."""
    lags = ec.select_lag_bic(g1.prices, g2.prices, lag_range)
    decision = ec.johansen_trace(g1.prices, g2.prices, lags)
    if decision.category != ec.CATEGORY_COINTEGRATION:
        return decision.category, None, None
    fit = ec.fit_vecm(g1.prices, g2.prices, lag_range)
    _, info, (ils1, _) = metrics.shares_from_vecm(fit)
    return decision.category, ils1, info


def test_criterion_1_share_identities(capsys):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    in_range = True
    for _ in range(1000):
        fit = random_fit(rng)
        cs1, cs2 = component_share(fit)
        info = information_share(fit)
        ils1, ils2 = information_leadership_share((info.is1, info.is2), (cs1, cs2))
        for a, b in ((cs1, cs2), (info.is1, info.is2), (ils1, ils2)):
            worst = max(worst, abs(a + b - 1.0))
            in_range &= 0.0 <= a <= 1.0 and 0.0 <= b <= 1.0
    elapsed = time.perf_counter() - start
    ok = worst < 1e-12 and in_range and elapsed < 1.0
    report(capsys, 1, "share identities", ok,
           f"max |sum-1| {worst:.1e}, {elapsed:.2f}s")


def test_criterion_2_cholesky(capsys):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        A = rng.normal(size=(2, 2))
        sigma = A @ A.T + 0.01 * np.eye(2)
        M = metrics._cholesky_lower(sigma)
        worst = max(worst, float(np.max(np.abs(M @ M.T - sigma))))
    report(capsys, 2, "Cholesky factor", worst < 1e-12, f"max error {worst:.1e}")


def test_criterion_3_leadership_recovery(capsys):
    start = time.perf_counter()
    coint = 0
    ils = []
    for i in range(100):
        g1, g2, _ = simulate_day(StructuralConfig(delays=(0, 5),
                                                  n_seconds=23400, seed=i))
        category, ils1, _ = classify_and_share(g1, g2)
        if category == ec.CATEGORY_COINTEGRATION:
            coint += 1
            ils.append(ils1)
    elapsed = time.perf_counter() - start
    mean_ils = float(np.mean(ils))
    ok = coint >= 90 and mean_ils >= 0.8 and elapsed < 120.0
    report(capsys, 3, "leadership recovery", ok,
           f"{coint}/100 cointegrated, mean ils1 {mean_ils:.3f}, {elapsed:.0f}s")


def test_criterion_4_noise_robustness(capsys):
    ils, single = [], []
    for i in range(200):
        g1, g2, _ = simulate_day(StructuralConfig(delays=(2, 2),
                                                  sigma_s=(0.05, 0.15),
                                                  n_seconds=10000, seed=i))
        category, ils1, info = classify_and_share(g1, g2)
        if category == ec.CATEGORY_COINTEGRATION:
            ils.append(ils1)
            single.append(info.is1_by_ordering[0])
    mean_ils = float(np.mean(ils))
    mean_single = float(np.mean(single))
    # series 1 is the less noisy leg, so the one-ordering bias is upward
    ok = 0.4 <= mean_ils <= 0.6 and mean_single > 0.55
    report(capsys, 4, "noise robustness", ok,
           f"mean ils1 {mean_ils:.3f}, single-ordering is1 {mean_single:.3f}")


def test_criterion_5_gs_oracle(capsys):
    rng = np.random.default_rng(5)
    reps, T = 100, 20000
    p1 = np.full(reps, 100.0)
    p2 = np.full(reps, 100.0)
    path1 = np.empty((T, reps))
    path2 = np.empty((T, reps))
    for t in range(T):
        path1[t] = p1
        path2[t] = p2
        s = p1 - p2
        p1 = p1 - 0.1 * s + rng.normal(0, 0.1, reps)
        p2 = p2 + 0.3 * s + rng.normal(0, 0.1, reps)
    shares, truncations = [], 0
    for r in range(reps):
        fit = gs_fit_from_prices(path1[:, r], path2[:, r])
        if any(fit.truncated):
            truncations += 1
        shares.append(fit.beta2 / (fit.beta1 + fit.beta2))
    mean_gs = float(np.mean(shares))
    ok = abs(mean_gs - 0.75) <= 0.05 and truncations <= 0.05 * reps
    report(capsys, 5, "GS oracle", ok,
           f"mean gs1 {mean_gs:.4f}, {truncations} truncations")


def test_criterion_6_johansen_calibration(capsys):
    rng = np.random.default_rng(6)
    reps, T = 500, 5000
    ok_rw = ok_coint = ok_wn = 0
    for i in range(reps):
        y1, y2 = np.cumsum(rng.normal(0, 1, T)), np.cumsum(rng.normal(0, 1, T))
        if ec.johansen_trace(y1, y2, 2).category == ec.CATEGORY_NON_COINTEGRATION:
            ok_rw += 1
        g1, g2, _ = simulate_day(StructuralConfig(delays=(0, 5), n_seconds=T,
                                                  seed=1000 + i))
        lags = ec.select_lag_bic(g1.prices, g2.prices, (1, 10))
        if ec.johansen_trace(g1.prices, g2.prices,
                             lags).category == ec.CATEGORY_COINTEGRATION:
            ok_coint += 1
        w1, w2 = 100 + rng.normal(0, 1, T), 100 + rng.normal(0, 1, T)
        if ec.johansen_trace(w1, w2, 2).category == ec.CATEGORY_STATIONARITY:
            ok_wn += 1
    ok = min(ok_rw, ok_coint, ok_wn) >= 0.9 * reps
    report(capsys, 6, "Johansen calibration", ok,
           f"walks {ok_rw}/{reps}, cointegrated {ok_coint}/{reps}, "
           f"noise {ok_wn}/{reps}")


def test_criterion_7_regression_recovery(capsys):
    rng = np.random.default_rng(7)
    n = 1900
    import datetime as dt
    dates = business_day_range(dt.date(2008, 1, 1),
                               dt.date(2008, 1, 1) + dt.timedelta(days=3000))[:n]
    crash_lo, crash_hi = dates[1400], dates[1590]
    crash = np.array([1.0 if crash_lo <= d <= crash_hi else 0.0 for d in dates])
    vol = rng.uniform(0.2, 0.8, n)
    shares = pd.DataFrame({
        "date": dates,
        "pair_index": 1,
        "category": ec.CATEGORY_COINTEGRATION,
        "combined_ps": 0.1 + 0.7 * vol - 0.05 * crash + rng.normal(0, 0.05, n),
        "volume_share": vol,
        "days_to_expiration": np.tile(np.arange(20, 0, -1), n // 20)[:n],
        "backwardation": rng.random(n) < 0.3,
    })
    events = EventCalendar(crash_windows=((crash_lo, crash_hi),))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # report dummies constant; dropped
        design = regression.build_design(shares, "corn", events)
    result = regression.estimate(design)
    coef = dict(zip(result.names, result.coefficients))
    ok = (abs(coef["Volumeshare"] - 0.7) <= 0.05
          and abs(coef["Crash"] - (-0.05)) <= 0.03
          and np.all(np.isfinite(result.std_errors))
          and np.all(result.std_errors > 0))
    report(capsys, 7, "regression recovery", ok,
           f"b(Volumeshare) {coef['Volumeshare']:.3f}, b(Crash) {coef['Crash']:.3f}")


def test_criterion_8_term_structure_monotonicity(capsys):
    gaps = {1: 1, 2: 2, 3: 4, 4: 8}
    rows = []
    import datetime as dt
    base_day = dt.date(2020, 1, 6)
    for k, gap in gaps.items():
        for i in range(15):
            g1, g2, _ = simulate_day(
                StructuralConfig(delays=(0, gap), n_seconds=8000,
                                 seed=7000 + 100 * k + i),
                session_date=base_day + dt.timedelta(days=i))
            category, ils1, _ = classify_and_share(g1, g2)
            if category != ec.CATEGORY_COINTEGRATION:
                continue
            rows.append(metrics.DiscoveryShares(
                g1.session_date, k, category, ils1=ils1, combined_ps=ils1,
                volume_share=0.5, days_to_expiration=10, backwardation=False))
    by_pair = aggregate_shares(rows).by_pair.sort_values("pair_index")
    means = by_pair["mean_combined_ps"].to_numpy()
    ok = len(means) == 4 and bool(np.all(np.diff(means) > 0))
    report(capsys, 8, "term-structure monotonicity", ok,
           "mean ps " + " -> ".join(f"{m:.3f}" for m in means))


ROLL_CONFIG = """\
[commodity]
name = "SIM"
session_start = "09:30:00"
session_end = "09:49:59"
contracts_file = "out/contracts.csv"

[paths]
ticks = "out/ticks"
settlements = "out/settlements.csv"

[pipeline]
pairs = [1]
min_updates = 100
lag_min = 1
lag_max = 5

[scenario]
start_date = "2020-01-06"
n_contracts = 3
expiration_spacing = 30
sigma_mu = 0.05
delay_gap = 4
total_volume = 10000
volume_share_start = 0.762
volume_share_end = 0.2
seed = 11

[output]
dir = "out"
"""


def run_scenario(root):
    root.mkdir(parents=True, exist_ok=True)
    (root / "config.toml").write_text(ROLL_CONFIG)
    cfg = str(root / "config.toml")
    assert main(["simulate", "--config", cfg]) == 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert main(["analyze", "--config", cfg]) == 0
        assert main(["rollpoint", "--config", cfg]) == 0
    return root / "out"


def test_criterion_9_roll_point(capsys, tmp_path):
    # the volume ramp crosses 0.5 on the day 15 business days before expiration
    out = run_scenario(tmp_path)
    frame = pd.read_csv(out / "rollpoints.csv")
    import datetime as dt
    ok = len(frame) == 2
    observed = []
    for _, row in frame.iterrows():
        exp = dt.date.fromisoformat(row["expiration"])
        expected = exp
        for _ in range(15):
            expected = previous_business_day(expected)
        observed.append(f"{row['contract']} {row['volume_roll_date']}")
        ok &= row["volume_roll_date"] == expected.isoformat()
        ok &= business_days_between(
            dt.date.fromisoformat(row["volume_roll_date"]), exp) == 15
    report(capsys, 9, "roll-point detection", ok, "; ".join(observed))


def test_criterion_10_determinism(capsys, tmp_path):
    out_a = run_scenario(tmp_path / "a")
    out_b = run_scenario(tmp_path / "b")
    files_a = sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(out_b) for p in out_b.rglob("*") if p.is_file())
    ok = files_a == files_b and len(files_a) > 0
    if ok:
        ok = all((out_a / f).read_bytes() == (out_b / f).read_bytes()
                 for f in files_a)
    report(capsys, 10, "determinism", ok, f"{len(files_a)} files compared")
