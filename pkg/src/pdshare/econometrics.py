"""Econometric kernels: OLS, Newey-West HAC covariance, Johansen rank testing,
and bivariate VECM estimation with a restricted long-run constant."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CATEGORY_STATIONARITY = "Stationarity"
CATEGORY_COINTEGRATION = "Cointegration"
CATEGORY_NON_COINTEGRATION = "NonCointegration"

# 5% trace-test critical values for the case with the constant restricted to
# the cointegrating relation, indexed by n - r (Osterwald-Lenum 1992, Table 1*).
TRACE_CRIT_5PCT = {1: 9.24, 2: 19.96}


class SingularDesignError(ValueError):
    """Design matrix is rank deficient."""


class NonEstimableError(ValueError):
    """Series unfit for rank testing or VECM estimation (singular moments,
    constant series, or too few observations)."""


@dataclass(frozen=True)
class OlsResult:
    coefficients: np.ndarray
    residuals: np.ndarray
    covariance: np.ndarray  # classical, sigma^2 (X'X)^-1
    xtx_inv: np.ndarray
    n_obs: int

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


@dataclass(frozen=True)
class HacCovariance:
    covariance: np.ndarray
    bandwidth: int
    method: str = "newey-west-1994-automatic"

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


@dataclass(frozen=True)
class RankDecision:
    trace_statistics: tuple[float, float]  # H0: r=0, H0: r<=1
    critical_values: tuple[float, float]
    category: str
    eigenvalues: tuple[float, ...] = ()


@dataclass(frozen=True)
class VecmFit:
    alpha: np.ndarray       # error-correction loadings, shape (2,)
    beta: np.ndarray        # cointegrating vector normalized to beta[0] = 1
    mu: float               # long-run constant (carrying charge)
    gammas: np.ndarray      # short-run coefficient stack, shape (J, 2, 2)
    lag_count: int
    sigma: np.ndarray       # residual covariance, shape (2, 2)
    n_obs: int
    bic: float

    @property
    def rho(self) -> float:
        return float(self.sigma[0, 1] / math.sqrt(self.sigma[0, 0] * self.sigma[1, 1]))


def _collinear_columns(X: np.ndarray) -> list[int]:
    """Columns that add no rank when appended left to right."""
    bad, rank = [], 0
    for j in range(X.shape[1]):
        r = np.linalg.matrix_rank(X[:, :j + 1])
        if r == rank:
            bad.append(j)
        rank = r
    return bad


def ols(y: np.ndarray, X: np.ndarray, names: list[str] | None = None) -> OlsResult:
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if n <= k:
        raise SingularDesignError(f"need more rows ({n}) than columns ({k})")
    if np.linalg.matrix_rank(X) < k:
        bad = _collinear_columns(X)
        labels = [names[j] if names else f"col{j}" for j in bad]
        raise SingularDesignError("collinear columns: " + ", ".join(labels))
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    xtx_inv = np.linalg.inv(X.T @ X)
    sigma2 = float(resid @ resid) / (n - k)
    return OlsResult(coef, resid, sigma2 * xtx_inv, xtx_inv, n)


def _nw_auto_bandwidth(scores: np.ndarray) -> int:
    """Newey-West (1994) automatic plug-in bandwidth for the Bartlett kernel.

    Uses the score series weighted by a vector of ones, except that columns
    constant over the sample (the intercept) get weight zero.
    """
    T, k = scores.shape
    w = np.ones(k)
    spread = np.ptp(scores, axis=0)
    if np.any(spread > 0):
        w[spread == 0] = 0.0
    f = scores @ w
    n = int(math.floor(4.0 * (T / 100.0) ** (2.0 / 9.0)))
    n = max(min(n, T - 1), 0)
    sigma0 = float(f @ f) / T
    s0, s1 = sigma0, 0.0
    for j in range(1, n + 1):
        sj = float(f[j:] @ f[:-j]) / T
        s0 += 2.0 * sj
        s1 += 2.0 * j * sj
    if s0 <= 0 or s1 == 0:
        return 0
    gamma = 1.1447 * abs(s1 / s0) ** (2.0 / 3.0)
    return min(int(math.floor(gamma * T ** (1.0 / 3.0))), T - 1)


def newey_west(X: np.ndarray, residuals: np.ndarray,
               bandwidth: int | None = None) -> HacCovariance:
    """Bartlett-kernel HAC coefficient covariance.

    With bandwidth 0 the kernel degenerates to the White
    heteroskedasticity-only estimator.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    u = np.asarray(residuals, dtype=float).ravel()
    T = len(u)
    scores = X * u[:, None]
    if bandwidth is None:
        bandwidth = _nw_auto_bandwidth(scores)
    S = scores.T @ scores / T
    for j in range(1, bandwidth + 1):
        w = 1.0 - j / (bandwidth + 1.0)
        gamma_j = scores[j:].T @ scores[:-j] / T
        S += w * (gamma_j + gamma_j.T)
    xtx_inv = np.linalg.inv(X.T @ X)
    cov = T * xtx_inv @ S @ xtx_inv
    cov = (cov + cov.T) / 2.0
    return HacCovariance(cov, bandwidth)


def _ecm_blocks(Y: np.ndarray, lags: int, trim: int | None = None):
    """Design blocks for the VECM in error-correction form.

    Z0 = differences at t, Z1 = (levels at t-1, 1), Z2 = lagged differences.
    `trim` fixes the estimation start so samples are comparable across lag
    candidates.
    """
    trim = lags if trim is None else trim
    if trim < lags:
        raise ValueError("trim must be >= lags")
    dY = np.diff(Y, axis=0)
    Z0 = dY[trim:]
    levels = Y[trim:-1]
    Z1 = np.column_stack([levels, np.ones(len(levels))])
    if lags > 0:
        Z2 = np.column_stack([dY[trim - j:len(dY) - j] for j in range(1, lags + 1)])
    else:
        Z2 = np.empty((len(Z0), 0))
    return Z0, Z1, Z2


def _partial_out(Z: np.ndarray, Z2: np.ndarray) -> np.ndarray:
    if Z2.shape[1] == 0:
        return Z
    B, _, _, _ = np.linalg.lstsq(Z2, Z, rcond=None)
    return Z - Z2 @ B


def _reduced_rank(Y: np.ndarray, lags: int, trim: int | None = None):
    """Solve the Johansen eigenproblem via symmetric whitening of S11.

    Returns eigenvalues (descending), eigenvectors in original coordinates
    (columns, normalized so v' S11 v = 1), S01, and the design blocks.
    """
    Z0, Z1, Z2 = _ecm_blocks(Y, lags, trim)
    N = len(Z0)
    R0 = _partial_out(Z0, Z2)
    R1 = _partial_out(Z1, Z2)
    S00 = R0.T @ R0 / N
    S11 = R1.T @ R1 / N
    S01 = R0.T @ R1 / N
    w00 = np.linalg.eigvalsh(S00)
    w11, V11 = np.linalg.eigh(S11)
    tiny = 1e-12
    if w00[0] <= tiny * max(w00[-1], 1.0) or w11[0] <= tiny * max(w11[-1], 1.0):
        raise NonEstimableError("singular moment matrices")
    S11_inv_half = V11 @ np.diag(1.0 / np.sqrt(w11)) @ V11.T
    A = S11_inv_half @ S01.T @ np.linalg.solve(S00, S01) @ S11_inv_half
    A = (A + A.T) / 2.0
    lam, V = np.linalg.eigh(A)
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, 1.0 - 1e-15)
    vecs = S11_inv_half @ V[:, order]
    return lam, vecs, S01, Z0, Z1, Z2, N


def johansen_trace(y1: np.ndarray, y2: np.ndarray, lags: int) -> RankDecision:
    """Trace test for cointegration rank with the constant restricted to the
    cointegrating relation, at the 5% level."""
    Y = np.column_stack([np.asarray(y1, float), np.asarray(y2, float)])
    if len(Y) <= 20 * max(lags, 1):
        raise NonEstimableError(f"series too short for {lags} lags")
    if np.ptp(Y[:, 0]) == 0 or np.ptp(Y[:, 1]) == 0:
        raise NonEstimableError("constant price series")
    # Demeaning leaves the statistics unchanged (the restricted constant
    # absorbs level shifts) but keeps S11 well conditioned at large price levels.
    Y = Y - Y.mean(axis=0)
    lam, _, _, _, _, _, N = _reduced_rank(Y, lags)
    log1m = np.log(1.0 - lam)
    trace_r0 = float(-N * log1m.sum())
    trace_r1 = float(-N * log1m[1:].sum())
    crit = (TRACE_CRIT_5PCT[2], TRACE_CRIT_5PCT[1])
    category = classify_rank(trace_r0, trace_r1, crit)
    return RankDecision((trace_r0, trace_r1), crit, category, tuple(lam))


def classify_rank(trace_r0: float, trace_r1: float,
                  critical_values: tuple[float, float] = (TRACE_CRIT_5PCT[2],
                                                          TRACE_CRIT_5PCT[1])) -> str:
    """Sequential rank decision: stop at the first null not rejected."""
    c0, c1 = critical_values
    if trace_r0 <= c0:
        return CATEGORY_NON_COINTEGRATION
    if trace_r1 <= c1:
        return CATEGORY_COINTEGRATION
    return CATEGORY_STATIONARITY


def _rank_one_fit(Y: np.ndarray, lags: int, trim: int | None = None):
    """Rank-1 reduced-rank regression; returns parameters and residuals."""
    lam, vecs, S01, Z0, Z1, Z2, N = _reduced_rank(Y, lags, trim)
    v = vecs[:, 0]  # (beta1, beta2, -mu_times_beta_scale)
    alpha_raw = S01 @ v
    ect = Z1 @ v
    target = Z0 - np.outer(ect, alpha_raw)
    if Z2.shape[1] > 0:
        G, _, _, _ = np.linalg.lstsq(Z2, target, rcond=None)
        resid = target - Z2 @ G
    else:
        G = np.empty((0, 2))
        resid = target
    sigma = resid.T @ resid / N
    return v, alpha_raw, G, sigma, N


def _bic(sigma: np.ndarray, n_params: int, n_obs: int) -> float:
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        return math.inf
    return logdet + n_params * math.log(n_obs) / n_obs


def select_lag_bic(y1: np.ndarray, y2: np.ndarray,
                   lag_range: tuple[int, int] = (1, 10)) -> int:
    """BIC lag choice on the rank-unrestricted error-correction regression,
    over a common estimation sample (ties go to the smaller lag)."""
    Y = np.column_stack([np.asarray(y1, float), np.asarray(y2, float)])
    Y = Y - Y.mean(axis=0)
    lo, hi = lag_range
    best_j, best_bic = lo, math.inf
    for j in range(lo, hi + 1):
        Z0, Z1, Z2 = _ecm_blocks(Y, j, trim=hi)
        X = np.hstack([Z1, Z2])
        B, _, _, _ = np.linalg.lstsq(X, Z0, rcond=None)
        resid = Z0 - X @ B
        N = len(Z0)
        bic = _bic(resid.T @ resid / N, 2 * X.shape[1], N)
        if bic < best_bic:
            best_j, best_bic = j, bic
    return best_j


def fit_vecm(y1: np.ndarray, y2: np.ndarray,
             lag_range: tuple[int, int] = (1, 10)) -> VecmFit:
    """Johansen MLE of the bivariate rank-1 VECM with restricted constant.

    The lag count minimizes BIC over `lag_range` on a common sample; the
    cointegrating vector is normalized so its first element is 1.
    """
    Y = np.column_stack([np.asarray(y1, float), np.asarray(y2, float)])
    lo, hi = lag_range
    if len(Y) <= 20 * hi:
        raise NonEstimableError(f"series too short for lag range {lag_range}")
    # Estimate on demeaned levels for conditioning; the long-run constant is
    # shifted back to the original scale below.
    means = Y.mean(axis=0)
    Y = Y - means
    best_j, best_bic = None, math.inf
    for j in range(lo, hi + 1):
        try:
            _, _, _, sigma, N = _rank_one_fit(Y, j, trim=hi)
        except NonEstimableError:
            continue
        bic = _bic(sigma, 4 * j + 5, N)
        if bic < best_bic:
            best_j, best_bic = j, bic
    if best_j is None:
        raise NonEstimableError("all candidate lag fits were singular")

    v, alpha_raw, G, sigma, N = _rank_one_fit(Y, best_j, trim=best_j)
    scale = v[0]
    if abs(scale) < 1e-12:
        raise NonEstimableError("cointegrating vector not normalizable")
    beta = v[:2] / scale
    mu = float(-v[2] / scale) + float(beta @ means)
    alpha = alpha_raw * scale
    gammas = np.stack([G[2 * j:2 * j + 2].T for j in range(best_j)]) \
        if best_j > 0 else np.empty((0, 2, 2))
    sigma = (sigma + sigma.T) / 2.0
    bic = _bic(sigma, 4 * best_j + 5, N)
    return VecmFit(alpha, beta, mu, gammas, best_j, sigma, N, bic)
