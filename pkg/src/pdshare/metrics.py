"""Daily price-discovery shares: GS on stationary days, CS/IS/ILS on
cointegrated days, plus batch aggregation."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import econometrics as ec
from .market_data import ContractPairDay, is_estimable

REASON_NOT_ESTIMABLE = "not-estimable"
REASON_GS_DEGENERATE = "gs-both-truncated"
REASON_CS_DEGENERATE = "cs-equal-adjustment"
REASON_SIGMA_SINGULAR = "sigma-singular"
REASON_ILS_DEGENERATE = "ils-degenerate"
REASON_RANK_FAILED = "rank-test-failed"


class ShareUndefinedError(ValueError):
    """A share has no defined value; `reason` carries the machine code."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class GsFit:
    alpha1: float
    alpha2: float
    beta1: float  # adjustment of the nearby toward the spread, >= 0 after truncation
    beta2: float
    truncated: tuple[bool, bool]


@dataclass(frozen=True)
class InfoShares:
    is1: float  # ordering-averaged
    is2: float
    is1_by_ordering: tuple[float, float]  # (nearby first, deferred first)


@dataclass(frozen=True)
class DiscoveryShares:
    session_date: dt.date
    pair_index: int
    category: str | None
    gs1: float | None = None
    cs1: float | None = None
    is1: float | None = None
    ils1: float | None = None
    combined_ps: float | None = None
    volume_share: float | None = None
    days_to_expiration: int | None = None
    backwardation: bool | None = None
    lag_count: int | None = None
    reason: str | None = None
    is1_single_ordering: float | None = None


@dataclass(frozen=True)
class PipelineSettings:
    min_updates: int = 100
    lag_range: tuple[int, int] = (1, 10)


def gs_fit_from_prices(p1: np.ndarray, p2: np.ndarray) -> GsFit:
    """Lead-lag adjustment coefficients: each price difference regressed on an
    intercept and the lagged spread; negative adjustments truncated to zero."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    spread = p1[:-1] - p2[:-1]
    X = np.column_stack([np.ones(len(spread)), spread])
    fit1 = ec.ols(np.diff(p1), X)
    fit2 = ec.ols(np.diff(p2), X)
    b1_raw = -fit1.coefficients[1]  # nearby adjusts down when above the deferred
    b2_raw = fit2.coefficients[1]
    b1, b2 = max(b1_raw, 0.0), max(b2_raw, 0.0)
    return GsFit(float(fit1.coefficients[0]), float(fit2.coefficients[0]),
                 float(b1), float(b2), (b1_raw < 0, b2_raw < 0))


def gs_share(pair: ContractPairDay) -> tuple[GsFit, float]:
    fit = gs_fit_from_prices(pair.nearby_grid.prices, pair.deferred_grid.prices)
    total = fit.beta1 + fit.beta2
    if total <= 0:
        raise ShareUndefinedError(REASON_GS_DEGENERATE)
    return fit, fit.beta2 / total


def component_share(fit: ec.VecmFit) -> tuple[float, float]:
    """Normalized orthogonal complement of the error-correction loadings."""
    a1, a2 = float(fit.alpha[0]), float(fit.alpha[1])
    if a1 == a2:
        raise ShareUndefinedError(REASON_CS_DEGENERATE)
    cs1 = a2 / (a2 - a1)
    return cs1, 1.0 - cs1


def _cholesky_lower(sigma: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise ShareUndefinedError(REASON_SIGMA_SINGULAR) from None


def _is_one_ordering(gamma: tuple[float, float], sigma: np.ndarray) -> tuple[float, float]:
    """Variance attribution under one Cholesky ordering; returns the pair
    (first series, second series) in the ordering's own labeling."""
    M = _cholesky_lower(sigma)
    if M[1, 1] <= 0:
        raise ShareUndefinedError(REASON_SIGMA_SINGULAR)
    g1, g2 = gamma
    first = (g1 * M[0, 0] + g2 * M[1, 0]) ** 2
    second = (g2 * M[1, 1]) ** 2
    denom = first + second
    if denom <= 0:
        raise ShareUndefinedError(REASON_SIGMA_SINGULAR)
    return first / denom, second / denom


def information_share(fit: ec.VecmFit) -> InfoShares:
    """Cholesky-based variance attribution, averaged over both series
    orderings to remove the factorization's ordering effect."""
    cs1, cs2 = component_share(fit)
    sigma = np.asarray(fit.sigma, float)
    is1_a, _ = _is_one_ordering((cs1, cs2), sigma)
    swapped = sigma[::-1, ::-1]
    _, is1_b = _is_one_ordering((cs2, cs1), swapped)
    is1 = 0.5 * (is1_a + is1_b)
    return InfoShares(is1, 1.0 - is1, (float(is1_a), float(is1_b)))


def information_leadership_share(info: tuple[float, float],
                                 cs: tuple[float, float]) -> tuple[float, float]:
    """Ratio combination of the variance-attribution and adjustment shares;
    zero components are resolved by their continuous limits."""
    is1, is2 = info
    cs1, cs2 = cs
    num = abs(is1 * cs2)
    den = abs(is2 * cs1)
    if num == 0 and den == 0:
        raise ShareUndefinedError(REASON_ILS_DEGENERATE)
    if den == 0:
        return 1.0, 0.0
    if num == 0:
        return 0.0, 1.0
    il1 = num / den
    ils1 = il1 * il1 / (il1 * il1 + 1.0)  # il2 = 1/il1
    return ils1, 1.0 - ils1


def shares_from_vecm(fit: ec.VecmFit) -> tuple[float, InfoShares, tuple[float, float]]:
    """cs1, info shares, and (ils1, ils2) for one fitted day."""
    cs1, cs2 = component_share(fit)
    info = information_share(fit)
    ils = information_leadership_share((info.is1, info.is2), (cs1, cs2))
    return cs1, info, ils


def daily_pipeline(pair: ContractPairDay,
                   settings: PipelineSettings = PipelineSettings()) -> DiscoveryShares:
    """Classify one day's pair and compute the shares its category admits.

    Never raises for a bad day: exclusions and undefined shares come back as
    reason-coded rows so a batch keeps going.
    """
    base = dict(
        session_date=pair.session_date,
        pair_index=pair.pair_index,
        volume_share=pair.volume_share,
        days_to_expiration=pair.days_to_expiration,
        backwardation=pair.backwardation,
    )
    if not is_estimable(pair, settings.min_updates):
        return DiscoveryShares(category=None, reason=REASON_NOT_ESTIMABLE, **base)

    p = pair.price_matrix()
    try:
        lags = ec.select_lag_bic(p[:, 0], p[:, 1], settings.lag_range)
        decision = ec.johansen_trace(p[:, 0], p[:, 1], lags)
    except ec.NonEstimableError:
        return DiscoveryShares(category=None, reason=REASON_RANK_FAILED, **base)

    if decision.category == ec.CATEGORY_NON_COINTEGRATION:
        return DiscoveryShares(category=decision.category, **base)

    if decision.category == ec.CATEGORY_STATIONARITY:
        try:
            _, gs1 = gs_share(pair)
        except ShareUndefinedError as exc:
            return DiscoveryShares(category=decision.category, reason=exc.reason, **base)
        return DiscoveryShares(category=decision.category, gs1=gs1,
                               combined_ps=gs1, **base)

    try:
        fit = ec.fit_vecm(p[:, 0], p[:, 1], settings.lag_range)
        cs1, info, (ils1, _) = shares_from_vecm(fit)
    except (ec.NonEstimableError, ShareUndefinedError) as exc:
        reason = getattr(exc, "reason", REASON_RANK_FAILED)
        return DiscoveryShares(category=decision.category, reason=reason, **base)
    return DiscoveryShares(category=decision.category, cs1=cs1, is1=info.is1,
                           ils1=ils1, combined_ps=ils1, lag_count=fit.lag_count,
                           is1_single_ordering=info.is1_by_ordering[0], **base)


def shares_to_frame(results: list[DiscoveryShares]) -> pd.DataFrame:
    rows = []
    for r in results:
        rows.append({
            "date": r.session_date,
            "pair_index": r.pair_index,
            "category": r.category,
            "gs1": r.gs1,
            "cs1": r.cs1,
            "is1": r.is1,
            "ils1": r.ils1,
            "combined_ps": r.combined_ps,
            "volume_share": r.volume_share,
            "days_to_expiration": r.days_to_expiration,
            "backwardation": r.backwardation,
            "reason": r.reason,
        })
    df = pd.DataFrame(rows)
    if len(df):
        df = df.sort_values(["date", "pair_index"]).reset_index(drop=True)
    return df


@dataclass(frozen=True)
class ShareSummary:
    by_pair: pd.DataFrame          # mean shares per pair index
    categories: pd.DataFrame       # category percentages per pair index
    by_expiration: pd.DataFrame    # mean shares per (pair index, days to expiration)


def aggregate_shares(results: list[DiscoveryShares]) -> ShareSummary:
    """Unweighted day means per pair, category percentages, and the
    days-to-expiration roll profile."""
    df = shares_to_frame(results)
    if df.empty:
        empty = pd.DataFrame()
        return ShareSummary(empty, empty, empty)
    classified = df[df["category"].notna()]

    metric_cols = ["ils1", "gs1", "combined_ps", "volume_share"]
    by_pair = (classified.groupby("pair_index")[metric_cols]
               .mean().reset_index()
               .rename(columns={"ils1": "mean_ils1", "gs1": "mean_gs1",
                                "combined_ps": "mean_combined_ps",
                                "volume_share": "mean_volume_share"}))
    counts = classified.groupby("pair_index").size().rename("n_days")
    by_pair = by_pair.merge(counts, on="pair_index")

    cat = (classified.groupby(["pair_index", "category"]).size()
           .unstack(fill_value=0))
    categories = (cat.div(cat.sum(axis=1), axis=0) * 100.0).reset_index()
    categories["n_days"] = cat.sum(axis=1).values

    by_exp = (classified.groupby(["pair_index", "days_to_expiration"])
              [["combined_ps", "volume_share"]].mean().reset_index())
    return ShareSummary(by_pair, categories, by_exp)
