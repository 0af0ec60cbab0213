"""Embedded two-site chain moments and the statistical test helpers."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from trapwalk import (
    InsufficientData,
    ThreeStateChain,
    WindowTooSmall,
    chain_from_walk,
    chain_moments,
    chain_moments_mc,
    chain_moments_solve,
    compute_rho,
    hill_fit,
    ks_statistic_discrete,
    ks_test,
    ks_two_sample,
    pearson,
    poisson_count_test,
    sample_environment,
)

# Chain with all entries distinct, solved by hand through the fundamental
# matrix: N = (I - Q)^{-1} for Q = [[0.4, 0.6], [0.3, 0.5]].
HAND_CHAIN = ThreeStateChain(p_bar=0.4, q_bar=0.6, q_dbar=0.3, p_dbar=0.5, eps=0.2)


class TestChainMoments:
    def test_hand_solved_fundamental_matrix(self):
        m = chain_moments(HAND_CHAIN)
        assert m.u1 == pytest.approx(25.0 / 6.0, rel=1e-12)
        assert m.u2 == pytest.approx(2.5, rel=1e-12)
        assert m.v1 == pytest.approx(5.0, rel=1e-12)
        assert m.cov == pytest.approx(12.5, rel=1e-12)
        assert m.corr == pytest.approx(0.7694837640638655, rel=1e-12)

    def test_closed_form_matches_linear_solve(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            q_bar = rng.uniform(0.05, 0.95)
            eps = rng.uniform(0.05, 0.9)
            q_dbar = rng.uniform(0.0, 1.0 - eps)
            chain = ThreeStateChain(
                p_bar=1.0 - q_bar,
                q_bar=q_bar,
                q_dbar=q_dbar,
                p_dbar=1.0 - eps - q_dbar,
                eps=eps,
            )
            a = chain_moments(chain)
            b = chain_moments_solve(chain)
            for field in ("u1", "u2", "v1", "v2", "w1", "w2", "cov", "corr"):
                va, vb = getattr(a, field), getattr(b, field)
                assert va == pytest.approx(vb, rel=1e-10, abs=1e-12), field

    def test_monte_carlo_agrees_within_4se(self):
        m = chain_moments(HAND_CHAIN)
        mc = chain_moments_mc(HAND_CHAIN, n_runs=200_000, seed=55)
        assert abs(mc.u1 - m.u1) < 4.0 * mc.u1_se
        assert abs(mc.v1 - m.v1) < 4.0 * mc.v1_se
        assert abs(mc.cov - m.cov) < 4.0 * mc.cov_se

    def test_row_sum_validation(self):
        with pytest.raises(ValueError):
            ThreeStateChain(p_bar=0.5, q_bar=0.6, q_dbar=0.3, p_dbar=0.5, eps=0.2)
        with pytest.raises(ValueError):
            ThreeStateChain(p_bar=0.4, q_bar=0.6, q_dbar=0.3, p_dbar=0.7, eps=0.0)

    def test_unreachable_second_state_rejected(self):
        with pytest.raises(ValueError):
            ThreeStateChain(p_bar=1.0, q_bar=0.0, q_dbar=0.3, p_dbar=0.5, eps=0.2)


class TestChainFromWalk:
    def test_constant_env_adjacent_sites(self, model_const):
        env = sample_environment(model_const, -4, 16, 3)
        chain = chain_from_walk(env, 0, 1)
        assert chain.p_bar == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert chain.q_bar == pytest.approx(2.0 / 3.0, abs=1e-9)
        assert chain.q_dbar == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert chain.p_dbar == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert chain.eps == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_profile_reuse_matches_fresh(self, model_s2):
        env = sample_environment(model_s2, -4, 40, 21)
        prof = compute_rho(env, 20, tol=1e-10)
        a = chain_from_walk(env, 3, 7, profile=prof)
        b = chain_from_walk(env, 3, 7)
        assert a.q_bar == pytest.approx(b.q_bar, rel=1e-6)
        assert a.eps == pytest.approx(b.eps, rel=1e-6)

    def test_bad_site_order(self, model_const):
        env = sample_environment(model_const, -4, 16, 3)
        with pytest.raises(WindowTooSmall):
            chain_from_walk(env, 5, 5)
        with pytest.raises(WindowTooSmall):
            chain_from_walk(env, -1, 5)


class TestReportHelpers:
    def test_two_sample_same_law_passes(self):
        rng = np.random.default_rng(8)
        r = ks_two_sample(rng.normal(size=4000), rng.normal(size=4000))
        assert r.passed and r.p_value > 0.01
        assert r.mode == "p_above"

    def test_two_sample_shifted_fails(self):
        rng = np.random.default_rng(9)
        r = ks_two_sample(rng.normal(size=4000), rng.normal(size=4000) + 0.4)
        assert not r.passed

    def test_ks_test_against_callable(self):
        rng = np.random.default_rng(10)
        from scipy import stats as sps

        r = ks_test(rng.standard_exponential(5000), sps.expon.cdf)
        assert r.passed

    def test_report_serializes(self):
        rng = np.random.default_rng(11)
        r = ks_two_sample(rng.normal(size=100), rng.normal(size=100))
        blob = json.dumps(r.to_dict())
        back = json.loads(blob)
        assert back["name"] == "ks2"
        assert back["passed"] is True


class TestDiscreteKS:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(12)
        ratio = 0.6
        sample = rng.geometric(1.0 - ratio, size=5000)
        support_max = int(sample.max()) + 3
        ks_range = np.arange(support_max + 1)
        cdf_at = 1.0 - ratio**ks_range  # P(X <= k), X geometric from 1
        got = ks_statistic_discrete(sample, cdf_at, support_max)
        brute = max(
            abs(np.mean(sample <= k) - cdf_at[k]) for k in range(support_max + 1)
        )
        assert got == pytest.approx(brute, abs=1e-14)

    def test_detects_wrong_ratio(self):
        rng = np.random.default_rng(13)
        sample = rng.geometric(0.5, size=20000)
        support_max = int(sample.max()) + 3
        ks_range = np.arange(support_max + 1)
        wrong = 1.0 - 0.65**ks_range
        right = 1.0 - 0.5**ks_range
        assert ks_statistic_discrete(sample, wrong, support_max) > 0.05
        assert ks_statistic_discrete(sample, right, support_max) < 0.02


class TestCountAndTailHelpers:
    def test_poisson_counts_pass_and_shifted_fail(self):
        rng = np.random.default_rng(14)
        counts = rng.poisson(7.0, size=600)
        assert poisson_count_test(counts).passed
        assert not poisson_count_test(counts + 4).passed

    def test_poisson_needs_enough_observations(self):
        with pytest.raises(InsufficientData):
            poisson_count_test(np.arange(10))

    def test_hill_recovers_pareto_index(self):
        rng = np.random.default_rng(15)
        s_true = 1.5
        x = rng.random(40_000) ** (-1.0 / s_true)
        fit = hill_fit(x, k_top=2000)
        assert fit.ci_lo < s_true < fit.ci_hi
        assert fit.s_hat == pytest.approx(s_true, rel=0.1)
        assert fit.c_hat == pytest.approx(1.0, rel=0.35)

    def test_hill_needs_data(self):
        with pytest.raises(InsufficientData):
            hill_fit(np.ones(30), k_top=10)

    def test_pearson_exact_line(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        r, p = pearson(x, 3.0 * x - 1.0)
        assert r == pytest.approx(1.0, abs=1e-12)
        rng = np.random.default_rng(16)
        a, b = rng.normal(size=300), rng.normal(size=300)
        r2, _ = pearson(a, b)
        assert r2 == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-12)
