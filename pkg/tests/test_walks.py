"""Trajectory samplers, occupation identities, and normalization."""

from __future__ import annotations

import numpy as np
import pytest

from trapwalk import (
    RegimeMismatch,
    StepBudgetExceeded,
    calibrate_buffer,
    compute_rho,
    ks_statistic_discrete,
    ks_two_sample,
    normalize,
    normalized_t,
    normalized_u,
    sample_environment,
    sample_walks,
    simulate_crossings_fast,
    simulate_walk,
)


class TestSingleWalkIdentities:
    @pytest.mark.parametrize("runner", [simulate_walk, simulate_crossings_fast])
    def test_occupation_identities(self, model_s2, runner):
        env = sample_environment(model_s2, 0, 60, 404)
        out = runner(env, 50, seed=7)
        assert out.T_N == out.xi.sum()
        assert out.T_tilde_N % 2 == 50 % 2
        assert out.xi_star == max(int(out.xi.max()), out.xi_target)
        assert out.xi[0] >= 1
        assert not out.truncated
        assert out.T_tilde_N <= out.T_N + out.xi_target  # hit before absorption

    @pytest.mark.parametrize("runner", [simulate_walk, simulate_crossings_fast])
    def test_determinism(self, model_s2, runner):
        env = sample_environment(model_s2, 0, 40, 11)
        a = runner(env, 30, seed=99)
        b = runner(env, 30, seed=99)
        np.testing.assert_array_equal(a.xi, b.xi)
        assert (a.T_N, a.T_tilde_N, a.xi_star) == (b.T_N, b.T_tilde_N, b.xi_star)
        c = runner(env, 30, seed=100)
        assert c.T_N != a.T_N or not np.array_equal(c.xi, a.xi)

    def test_step_budget_raises(self, model_s2):
        env = sample_environment(model_s2, 0, 3000, 5)
        with pytest.raises(StepBudgetExceeded):
            simulate_walk(env, 2000, seed=1, step_cap=40)


class TestVisitLaw:
    def test_interior_visits_are_geometric(self, model_const):
        # Constant p: the chance of ever returning to an interior site is
        # q (from the left, sure hit) plus p * (q/p) (from the right),
        # i.e. 2q, so visit counts are geometric on {1, 2, ...}.
        env = sample_environment(model_const, 0, 64, 17)
        batch = sample_walks(
            env, 40, n_walks=20_000, seed=31, sampler="direct",
            tracked_sites=np.array([20]),
        )
        xi = batch.tracked_xi[:, 0]
        assert xi.min() >= 1
        ratio = 2.0 * (1.0 - 2.0 / 3.0)
        support_max = int(xi.max()) + 3
        cdf_at = 1.0 - ratio ** np.arange(support_max + 1)
        assert ks_statistic_discrete(xi, cdf_at, support_max) < 0.02

    def test_mean_visits_match_occupation_density(self, model_s2):
        env = sample_environment(model_s2, 0, 80, 2222)
        prof = compute_rho(env, 60, tol=1e-9)
        sites = np.array([10, 25, 40])
        batch = sample_walks(
            env, 60, n_walks=6000, seed=13, sampler="fast", tracked_sites=sites
        )
        for j, n in enumerate(sites):
            xi = batch.tracked_xi[:, j]
            se = xi.std(ddof=1) / np.sqrt(len(xi))
            assert abs(xi.mean() - prof.rho[n]) < 4.0 * se


class TestBatchSampling:
    def test_samplers_agree_in_law(self, model_s2):
        env = sample_environment(model_s2, 0, 90, 321)
        fast = sample_walks(env, 70, n_walks=3000, seed=41, sampler="fast")
        direct = sample_walks(env, 70, n_walks=3000, seed=42, sampler="direct")
        assert ks_two_sample(fast.T_N, direct.T_N, name="T").passed
        assert ks_two_sample(fast.xi_star, direct.xi_star, name="xi_star").passed
        assert ks_two_sample(fast.T_tilde_N, direct.T_tilde_N, name="Tt").passed

    def test_batch_determinism_and_parity(self, model_s2):
        env = sample_environment(model_s2, 0, 50, 77)
        a = sample_walks(env, 40, n_walks=200, seed=3)
        b = sample_walks(env, 40, n_walks=200, seed=3)
        np.testing.assert_array_equal(a.T_N, b.T_N)
        assert np.all(a.T_tilde_N % 2 == 40 % 2)
        assert a.n_discarded == 0

    def test_cap_flags_discarded_rows(self, model_s2):
        env = sample_environment(model_s2, 0, 400, 404)
        batch = sample_walks(env, 300, n_walks=60, seed=5, sampler="direct", cap=200)
        assert batch.n_discarded == 60  # 300 sites cannot be crossed in 200 steps
        assert np.all(batch.T_N[batch.discarded] == 0)

    def test_tracked_site_validation(self, model_s2):
        env = sample_environment(model_s2, 0, 30, 1)
        with pytest.raises(ValueError):
            sample_walks(env, 20, 10, seed=1, tracked_sites=np.array([25]))
        with pytest.raises(ValueError):
            sample_walks(env, 20, 10, seed=1, sampler="other")

    def test_calibrated_buffer_is_reused(self, model_s2):
        env = sample_environment(model_s2, 0, 60, 8)
        buffer, profile = calibrate_buffer(env, 40)
        assert buffer >= 50
        assert profile.n_sites >= 40 + buffer
        batch = sample_walks(env, 40, n_walks=10, seed=2, buffer=buffer)
        assert batch.buffer == buffer


class TestNormalization:
    def test_scaling_formulas(self):
        T = np.array([1000.0, 2000.0])
        n = 400
        sub = normalized_t(T, 55.0, n, "s<1", 0.7)
        np.testing.assert_allclose(sub, T / n ** (1.0 / 0.7), rtol=1e-13)
        mid = normalized_t(T, 55.0, n, "1<s<2", 1.5)
        np.testing.assert_allclose(mid, (T - 55.0) / n ** (1.0 / 1.5), rtol=1e-13)
        two = normalized_t(T, 55.0, n, "s=2", 2.0)
        np.testing.assert_allclose(
            two, (T - 55.0) / np.sqrt(n * np.log(n)), rtol=1e-13
        )

    def test_u_requires_annealed_inputs(self):
        with pytest.raises(ValueError):
            normalized_u(100.0, 400, "1<s<2", 1.5)
        with pytest.raises(ValueError):
            normalized_u(100.0, 400, "s=1", 1.0)
        u, cent = normalized_u(100.0, 400, "1<s<2", 1.5, annealed_mean=90.0)
        np.testing.assert_allclose(u, 10.0 / 400 ** (1.0 / 1.5), rtol=1e-13)
        assert cent == pytest.approx(90.0)

    def test_normalize_audit_and_regime_guard(self, model_s2):
        env = sample_environment(model_s2, 0, 40, 6)
        prof = compute_rho(env, 30, tol=1e-8)
        out = simulate_crossings_fast(env, 30, seed=4)
        stats = normalize(out, prof, "s=2", annealed_mean=3.0)
        assert stats.regime == "s=2"
        assert stats.s == pytest.approx(2.0, abs=1e-9)
        assert stats.centering == pytest.approx(prof.quenched_mean_occupation())
        assert stats.u_N is not None
        bare = normalize(out, prof, "s=2")  # no annealed mean: u omitted
        assert bare.u_N is None
        with pytest.raises(RegimeMismatch):
            normalize(out, prof, "s<1")

    def test_normalize_window_guard(self, model_s2):
        env = sample_environment(model_s2, 0, 40, 6)
        prof = compute_rho(env, 25, tol=1e-8)
        out = simulate_crossings_fast(env, 30, seed=4)
        with pytest.raises(ValueError):
            normalize(out, prof, "s=2", annealed_mean=3.0)
