"""Determinant regressions: daily price-discovery share on volume share,
expiration terms, backwardation, report dummies, crash, and stationarity,
with Newey-West standard errors."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import econometrics as ec
from .calendars import EventCalendar

# Report dummies per template; order matters for the table layout.
TEMPLATES = {
    "corn": ("WASDE&CP", "Grainstocks"),
    "cattle": ("CF",),
}


@dataclass(frozen=True)
class RegressionDesign:
    y: np.ndarray
    X: np.ndarray
    names: tuple[str, ...]
    dates: tuple
    dropped: tuple[str, ...] = ()


@dataclass(frozen=True)
class RegressionResult:
    names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    bandwidth: int
    adj_r2: float
    n_obs: int
    dropped: tuple[str, ...] = ()

    @property
    def t_stats(self) -> np.ndarray:
        return self.coefficients / self.std_errors

    @property
    def p_values(self) -> np.ndarray:
        from math import erf, sqrt
        z = np.abs(self.t_stats)
        return np.array([2.0 * (1.0 - 0.5 * (1.0 + erf(v / sqrt(2.0)))) for v in z])

    def stars(self) -> list[str]:
        out = []
        for p in self.p_values:
            out.append("***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else "")
        return out


def build_design(shares: pd.DataFrame, template: str,
                 events: EventCalendar | None = None) -> RegressionDesign:
    """Materialize y and X from a daily-shares frame for one contract pair.

    Rows are days with a defined combined price-discovery share. Regressors
    constant over the sample are dropped with a warning (a template without
    any report day, for example).
    """
    if template not in TEMPLATES:
        raise ValueError(f"unknown template {template!r}; choose from {sorted(TEMPLATES)}")
    df = shares[shares["combined_ps"].notna()].copy()
    if df.empty:
        raise ValueError("no days with a defined price discovery share")
    df = df.sort_values("date")

    dates = pd.to_datetime(df["date"]).dt.date
    exp = df["days_to_expiration"].astype(float).to_numpy()
    cols: dict[str, np.ndarray] = {
        "Intercept": np.ones(len(df)),
        "Volumeshare": df["volume_share"].astype(float).to_numpy(),
        "Expiration": exp,
        "Expiration2": exp ** 2,
        "Backwardation": df["backwardation"].astype(bool).to_numpy().astype(float),
    }
    for report in TEMPLATES[template]:
        flag_dates = events.effective_report_dates(report) if events else frozenset()
        cols[report] = np.array([1.0 if d in flag_dates else 0.0 for d in dates])
    cols["Crash"] = np.array([1.0 if events and events.in_crash(d) else 0.0 for d in dates])
    cols["Stationarity"] = (df["category"] == ec.CATEGORY_STATIONARITY).to_numpy().astype(float)

    names, kept, dropped = [], [], []
    for name, col in cols.items():
        if name != "Intercept" and np.ptp(col) == 0:
            dropped.append(name)
            warnings.warn(f"regressor {name!r} constant over sample; dropped", stacklevel=2)
            continue
        names.append(name)
        kept.append(col)
    y = df["combined_ps"].astype(float).to_numpy()
    return RegressionDesign(y, np.column_stack(kept), tuple(names),
                            tuple(dates), tuple(dropped))


def estimate(design: RegressionDesign) -> RegressionResult:
    """OLS with Newey-West covariance; residuals are put in date order before
    bandwidth selection, so estimates are invariant to input row order."""
    order = np.argsort(np.array(design.dates, dtype="datetime64[D]"), kind="stable")
    y = design.y[order]
    X = design.X[order]
    fit = ec.ols(y, X, names=list(design.names))
    hac = ec.newey_west(X, fit.residuals)
    n, k = X.shape
    tss = float(np.sum((y - y.mean()) ** 2))
    rss = float(fit.residuals @ fit.residuals)
    if tss <= 0:
        adj_r2 = 0.0
    else:
        adj_r2 = 1.0 - (rss / (n - k)) / (tss / (n - 1))
    return RegressionResult(design.names, fit.coefficients, hac.std_errors,
                            hac.bandwidth, adj_r2, n, design.dropped)


def result_to_dict(result: RegressionResult) -> dict:
    return {
        "coefficients": {n: float(c) for n, c in zip(result.names, result.coefficients)},
        "std_errors": {n: float(s) for n, s in zip(result.names, result.std_errors)},
        "stars": dict(zip(result.names, result.stars())),
        "bandwidth": result.bandwidth,
        "adj_r2": float(result.adj_r2),
        "n_obs": result.n_obs,
        "dropped": list(result.dropped),
    }


def report_table(results: dict[str, RegressionResult]) -> str:
    """Aligned plain-text table: one column per contract pair, coefficient over
    its standard error in parentheses, values rounded to three decimals."""
    if not results:
        raise ValueError("no regression results to report")
    row_names: list[str] = []
    for res in results.values():
        for n in res.names:
            if n not in row_names:
                row_names.append(n)
    headers = list(results)
    width = max(18, *(len(h) + 2 for h in headers))
    label_w = max(len(n) for n in row_names + ["Adjusted R2", "Observations"]) + 2

    lines = ["".ljust(label_w) + "".join(h.rjust(width) for h in headers)]
    for name in row_names:
        coef_cells, se_cells = [], []
        for res in results.values():
            if name in res.names:
                i = res.names.index(name)
                coef_cells.append(f"{res.coefficients[i]:.3f}{res.stars()[i]}")
                se_cells.append(f"({res.std_errors[i]:.3f})")
            else:
                coef_cells.append("")
                se_cells.append("")
        lines.append(name.ljust(label_w) + "".join(c.rjust(width) for c in coef_cells))
        lines.append("".ljust(label_w) + "".join(c.rjust(width) for c in se_cells))
    lines.append("Adjusted R2".ljust(label_w)
                 + "".join(f"{r.adj_r2:.3f}".rjust(width) for r in results.values()))
    lines.append("Observations".ljust(label_w)
                 + "".join(str(r.n_obs).rjust(width) for r in results.values()))
    return "\n".join(lines) + "\n"


def report_frame(results: dict[str, RegressionResult]) -> pd.DataFrame:
    """Long-form coefficient table for CSV output."""
    rows = []
    for pair, res in results.items():
        stars = res.stars()
        for i, name in enumerate(res.names):
            rows.append({"pair": pair, "regressor": name,
                         "coefficient": round(float(res.coefficients[i]), 6),
                         "std_error": round(float(res.std_errors[i]), 6),
                         "stars": stars[i]})
        rows.append({"pair": pair, "regressor": "adj_r2",
                     "coefficient": round(res.adj_r2, 6), "std_error": np.nan, "stars": ""})
        rows.append({"pair": pair, "regressor": "n_obs",
                     "coefficient": res.n_obs, "std_error": np.nan, "stars": ""})
    return pd.DataFrame(rows)
