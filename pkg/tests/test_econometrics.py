import math

import numpy as np
import pytest

from pdshare import econometrics as ec


class TestOls:
    def test_exact_fit(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(30, 2))
        y = X @ np.array([2.0, -1.0])
        fit = ec.ols(y, X)
        np.testing.assert_allclose(fit.coefficients, [2.0, -1.0], atol=1e-12)
        np.testing.assert_allclose(fit.residuals, 0.0, atol=1e-12)

    def test_intercept_only_recovers_constant(self):
        y = np.full(20, 3.5)
        fit = ec.ols(y, np.ones((20, 1)))
        assert fit.coefficients[0] == pytest.approx(3.5)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(50, 3))
        y = rng.normal(size=50)
        oracle = np.linalg.solve(X.T @ X, X.T @ y)
        fit = ec.ols(y, X)
        np.testing.assert_allclose(fit.coefficients, oracle, atol=1e-10)

    def test_residuals_orthogonal_to_design(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(40, 3))
        fit = ec.ols(rng.normal(size=40), X)
        np.testing.assert_allclose(X.T @ fit.residuals, 0.0, atol=1e-9)

    def test_singular_design_names_columns(self):
        X = np.ones((30, 3))
        X[:, 1] = np.arange(30)
        X[:, 2] = 2 * X[:, 1]
        with pytest.raises(ec.SingularDesignError, match="slope2"):
            ec.ols(np.zeros(30), X, names=["const", "slope", "slope2"])


class TestNeweyWest:
    def test_bandwidth_zero_equals_white(self):
        rng = np.random.default_rng(1)
        X = np.column_stack([np.ones(200), rng.normal(size=200)])
        fit = ec.ols(rng.normal(size=200), X)
        hac = ec.newey_west(X, fit.residuals, bandwidth=0)
        u = fit.residuals
        meat = (X * u[:, None] ** 2).T @ X
        white = fit.xtx_inv @ meat @ fit.xtx_inv
        np.testing.assert_allclose(hac.covariance, white, rtol=1e-10)

    def test_iid_close_to_classical(self):
        rng = np.random.default_rng(2)
        T = 20000
        X = np.column_stack([np.ones(T), rng.normal(size=T)])
        y = X @ np.array([1.0, 0.5]) + rng.normal(size=T)
        fit = ec.ols(y, X)
        hac = ec.newey_west(X, fit.residuals)
        ratio = hac.std_errors / fit.std_errors
        np.testing.assert_allclose(ratio, 1.0, atol=0.1)

    def test_ar1_residuals_inflate_variance(self):
        # phi=0.5 long-run variance factor (1+phi)/(1-phi) = 3 for the mean
        rng = np.random.default_rng(3)
        T = 20000
        u = np.zeros(T)
        eps = rng.normal(size=T)
        for t in range(1, T):
            u[t] = 0.5 * u[t - 1] + eps[t]
        X = np.ones((T, 1))
        fit = ec.ols(u, X)
        hac = ec.newey_west(X, fit.residuals)
        assert hac.covariance[0, 0] > 2.0 * fit.covariance[0, 0]
        assert hac.bandwidth > 0

    def test_covariance_symmetric_psd(self):
        rng = np.random.default_rng(4)
        X = np.column_stack([np.ones(500), rng.normal(size=(500, 2))])
        fit = ec.ols(rng.normal(size=500), X)
        cov = ec.newey_west(X, fit.residuals).covariance
        np.testing.assert_allclose(cov, cov.T, atol=1e-14)
        assert np.all(np.linalg.eigvalsh(cov) > -1e-12)


def random_walk_pair(rng, T):
    return np.cumsum(rng.normal(0, 1, T)), np.cumsum(rng.normal(0, 1, T))


def cointegrated_pair(rng, T, mu=2.0):
    w = np.cumsum(rng.normal(0, 1, T))
    return 100 + w + rng.normal(0, 1, T), 100 - mu + w + rng.normal(0, 1, T)


class TestClassifyRank:
    CRIT = (ec.TRACE_CRIT_5PCT[2], ec.TRACE_CRIT_5PCT[1])

    def test_stops_at_first_non_rejection(self):
        assert ec.classify_rank(5.0, 1.0, self.CRIT) == ec.CATEGORY_NON_COINTEGRATION

    def test_rank_one(self):
        assert ec.classify_rank(50.0, 5.0, self.CRIT) == ec.CATEGORY_COINTEGRATION

    def test_rank_two(self):
        assert ec.classify_rank(500.0, 50.0, self.CRIT) == ec.CATEGORY_STATIONARITY


class TestJohansenTrace:
    def test_critical_values_embedded(self):
        rng = np.random.default_rng(0)
        dec = ec.johansen_trace(*cointegrated_pair(rng, 2000), lags=2)
        assert dec.critical_values == (19.96, 9.24)

    def test_cointegrated_pair_detected(self):
        rng = np.random.default_rng(11)
        hits = sum(
            ec.johansen_trace(*cointegrated_pair(rng, 2000), lags=2).category
            == ec.CATEGORY_COINTEGRATION
            for _ in range(40))
        assert hits >= 34

    def test_independent_walks_not_cointegrated(self):
        rng = np.random.default_rng(12)
        hits = sum(
            ec.johansen_trace(*random_walk_pair(rng, 2000), lags=2).category
            == ec.CATEGORY_NON_COINTEGRATION
            for _ in range(40))
        assert hits >= 34

    def test_white_noise_classified_stationary(self):
        rng = np.random.default_rng(13)
        hits = sum(
            ec.johansen_trace(100 + rng.normal(size=2000),
                              100 + rng.normal(size=2000), lags=2).category
            == ec.CATEGORY_STATIONARITY
            for _ in range(40))
        assert hits >= 36

    def test_constant_series_rejected(self):
        with pytest.raises(ec.NonEstimableError):
            ec.johansen_trace(np.ones(1000), np.cumsum(np.ones(1000)), lags=2)

    def test_short_series_rejected(self):
        with pytest.raises(ec.NonEstimableError):
            ec.johansen_trace(np.arange(30.0), np.arange(30.0) ** 0.5, lags=2)

    def test_label_invariant_category(self):
        rng = np.random.default_rng(14)
        y1, y2 = cointegrated_pair(rng, 3000)
        a = ec.johansen_trace(y1, y2, lags=2)
        b = ec.johansen_trace(y2, y1, lags=2)
        assert a.category == b.category
        np.testing.assert_allclose(a.trace_statistics, b.trace_statistics, rtol=1e-8)

    def test_scale_invariant_statistics(self):
        rng = np.random.default_rng(15)
        y1, y2 = cointegrated_pair(rng, 3000)
        a = ec.johansen_trace(y1, y2, lags=3)
        b = ec.johansen_trace(7.5 * y1, 7.5 * y2, lags=3)
        np.testing.assert_allclose(a.trace_statistics, b.trace_statistics, rtol=1e-8)
        assert a.category == b.category


def simulate_vecm(rng, T, alpha=(-0.2, 0.1), mu=2.0, gamma=0.2):
    """Direct draw from the error-correction form with beta = (1, -1)."""
    p = np.zeros((T, 2))
    p[0] = (100.0, 100.0 - mu)
    dprev = np.zeros(2)
    a = np.array(alpha)
    for t in range(1, T):
        ect = p[t - 1, 0] - p[t - 1, 1] - mu
        d = a * ect + gamma * dprev + rng.normal(0, 0.5, 2)
        p[t] = p[t - 1] + d
        dprev = d
    return p[:, 0], p[:, 1]


class TestFitVecm:
    def test_recovers_known_alpha(self):
        rng = np.random.default_rng(21)
        y1, y2 = simulate_vecm(rng, 20000)
        fit = ec.fit_vecm(y1, y2, (1, 5))
        np.testing.assert_allclose(fit.alpha, [-0.2, 0.1], atol=0.05)
        assert fit.beta[0] == 1.0
        assert fit.beta[1] == pytest.approx(-1.0, abs=0.05)
        assert fit.mu == pytest.approx(2.0, abs=0.5)

    def test_sigma_symmetric_psd_rho_bounded(self):
        rng = np.random.default_rng(22)
        y1, y2 = simulate_vecm(rng, 5000)
        fit = ec.fit_vecm(y1, y2, (1, 4))
        np.testing.assert_allclose(fit.sigma, fit.sigma.T)
        assert np.all(np.linalg.eigvalsh(fit.sigma) >= 0)
        assert abs(fit.rho) <= 1.0

    def test_bic_prefers_small_lag_for_short_memory(self):
        rng = np.random.default_rng(23)
        small = 0
        for _ in range(10):
            y1, y2 = simulate_vecm(rng, 4000)
            if ec.fit_vecm(y1, y2, (1, 10)).lag_count <= 2:
                small += 1
        assert small >= 6

    def test_lag_selection_deterministic(self):
        rng = np.random.default_rng(24)
        y1, y2 = simulate_vecm(rng, 4000)
        fits = [ec.fit_vecm(y1, y2, (1, 10)) for _ in range(2)]
        assert fits[0].lag_count == fits[1].lag_count
        np.testing.assert_array_equal(fits[0].alpha, fits[1].alpha)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(25)
        y1, y2 = simulate_vecm(rng, 5000)
        base = ec.fit_vecm(y1, y2, (2, 2))
        scaled = ec.fit_vecm(3.0 * y1, 3.0 * y2, (2, 2))
        np.testing.assert_allclose(scaled.alpha, base.alpha, atol=1e-8)
        assert scaled.rho == pytest.approx(base.rho, abs=1e-8)

    def test_level_shift_changes_only_mu(self):
        rng = np.random.default_rng(26)
        y1, y2 = simulate_vecm(rng, 5000)
        base = ec.fit_vecm(y1, y2, (2, 2))
        shifted = ec.fit_vecm(y1 + 50.0, y2 + 50.0, (2, 2))
        np.testing.assert_allclose(shifted.alpha, base.alpha, atol=1e-6)
        np.testing.assert_allclose(shifted.beta, base.beta, atol=1e-6)
        expected_mu = base.mu + 50.0 * (1.0 + base.beta[1])
        assert shifted.mu == pytest.approx(expected_mu, abs=1e-4)

    def test_too_short_raises(self):
        with pytest.raises(ec.NonEstimableError):
            ec.fit_vecm(np.arange(50.0), np.arange(50.0) * 1.1, (1, 10))


class TestSelectLag:
    def test_within_range_and_deterministic(self):
        rng = np.random.default_rng(31)
        y1, y2 = simulate_vecm(rng, 3000)
        j = ec.select_lag_bic(y1, y2, (1, 10))
        assert 1 <= j <= 10
        assert j == ec.select_lag_bic(y1, y2, (1, 10))
