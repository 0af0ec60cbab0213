"""Backward recursion profiles, certified truncation, tail constants."""

from __future__ import annotations

import numpy as np
import pytest

from trapwalk import (
    HorizonExhausted,
    InsufficientExceedances,
    compute_rho,
    coupling_diagnostics,
    estimate_tail_constants,
    sample_environment,
    tail_levels,
)
from trapwalk.occupancy import default_window


class TestConstantProfiles:
    def test_rho_is_three_at_two_thirds(self, model_const):
        env = sample_environment(model_const, 0, 128, 1)
        prof = compute_rho(env, 100, tol=1e-10)
        # Constant p: z = p/(2p-1) = 2 and rho = 1/(2p-1) = 3 at every site
        np.testing.assert_allclose(prof.z, 2.0, atol=1e-8)
        np.testing.assert_allclose(prof.rho, 3.0, atol=1e-8)
        assert prof.quenched_mean_occupation() == pytest.approx(300.0, abs=1e-5)

    def test_rho_for_faster_drift(self, model_const_fast):
        env = sample_environment(model_const_fast, 0, 64, 2)
        prof = compute_rho(env, 50, tol=1e-10)
        np.testing.assert_allclose(prof.rho, 5.0 / 3.0, atol=1e-9)


class TestRecursionStructure:
    def test_backward_identity(self, model_s2):
        env = sample_environment(model_s2, 0, 100, 42)
        prof = compute_rho(env, 80, tol=1e-9)
        work = prof.env
        alpha = work.alpha()
        z = prof.z_ext
        # z_n = 1 + alpha_{n+1} z_{n+1} for every stored site but the last
        n_stored = len(z)
        site_alpha = alpha[0 - work.lo : n_stored - work.lo]
        lhs = z[:-1]
        rhs = 1.0 + site_alpha[1:] * z[1:]
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)

    def test_rho_is_z_over_p(self, model_s2):
        env = sample_environment(model_s2, 0, 100, 42)
        prof = compute_rho(env, 80, tol=1e-9)
        np.testing.assert_allclose(prof.rho, prof.z / prof.p, rtol=1e-14)

    def test_err_bound_certifies_tolerance(self, model_s2):
        env = sample_environment(model_s2, 0, 64, 7)
        prof = compute_rho(env, 40, tol=1e-6)
        assert 0.0 < prof.err_bound <= 1e-6

    def test_truncation_is_one_sided(self, model_s2):
        # Longer horizons only add positive terms to every z
        env = sample_environment(model_s2, 0, 64, 19)
        rough = compute_rho(env, 40, tol=1e-4)
        fine = compute_rho(env, 40, tol=1e-12)
        assert np.all(fine.rho >= rough.rho - 1e-13)
        assert np.all(fine.rho - rough.rho <= 1e-4 + 1e-13)

    def test_restrict_window(self, model_s2):
        env = sample_environment(model_s2, 0, 64, 3)
        prof = compute_rho(env, 50, tol=1e-8)
        sub = prof.restrict(20)
        np.testing.assert_array_equal(sub.rho, prof.rho[:20])
        assert sub.quenched_mean_occupation() == pytest.approx(
            float(prof.rho[:20].sum())
        )
        with pytest.raises(ValueError):
            prof.restrict(51)

    def test_determinism_across_windows(self, model_s2):
        # Same (model, seed, n_sites, tol) from differently sized source
        # windows must give identical profiles.
        a = compute_rho(sample_environment(model_s2, 0, 10, 5), 40, tol=1e-8)
        b = compute_rho(sample_environment(model_s2, -30, 200, 5), 40, tol=1e-8)
        np.testing.assert_array_equal(a.rho, b.rho)

    def test_input_validation(self, model_s2):
        env = sample_environment(model_s2, 0, 16, 1)
        with pytest.raises(ValueError):
            compute_rho(env, 0)
        with pytest.raises(ValueError):
            compute_rho(env, 10, tol=2.0)

    def test_horizon_cap_raises(self):
        import warnings

        from trapwalk import TwoPointModel

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            slow_drift = TwoPointModel(p_fast=0.55, p_slow=0.5, w=0.5)
        env = sample_environment(slow_drift, 0, 8, 1)
        with pytest.raises(HorizonExhausted):
            compute_rho(env, 4, tol=1e-30, max_horizon=64)


class TestCouplingDiagnostics:
    def test_constant_closed_forms(self, model_const):
        env = sample_environment(model_const, 0, 32, 1)
        a, b = coupling_diagnostics(env, 10, 4)
        # alpha = 1/2 everywhere: product over 3 sites, 4-term partial sum
        assert a == pytest.approx(1.0 / 8.0, rel=1e-14)
        assert b == pytest.approx(15.0 / 8.0, rel=1e-14)
        a1, b1 = coupling_diagnostics(env, 10, 1)
        assert (a1, b1) == (1.0, 1.0)

    def test_validation(self, model_const):
        env = sample_environment(model_const, 0, 32, 1)
        with pytest.raises(ValueError):
            coupling_diagnostics(env, 10, 0)
        with pytest.raises(ValueError):
            coupling_diagnostics(env, 3, 5)
        with pytest.raises(ValueError):
            coupling_diagnostics(env, 40, 2)


class TestTailConstants:
    def test_levels_helper(self):
        rng = np.random.default_rng(0)
        z = rng.pareto(1.5, size=100_000) + 1.0
        levels = tail_levels(z)
        assert len(levels) == 5
        assert np.all(np.diff(levels) > 0)
        assert levels[0] == pytest.approx(np.quantile(z, 0.999), rel=1e-12)

    def test_recovery_and_ratio(self, model_sub):
        s = model_sub.tail_index()
        levels = np.array([50.0, 90.0, 160.0, 280.0, 500.0])
        est = estimate_tail_constants(model_sub, s, levels, n_samples=60_000, seed=4)
        kept = est.c_hat[~est.preasymptotic]
        assert len(kept) >= 4
        # flatness: a genuine power law keeps x^s P(>x) level-independent
        assert kept.max() / kept.min() < 1.5
        # site-zero reweighting: rho = z / p lifts the constant by E[p^-s]
        ratio = est.c_star_point() / est.c_point()
        assert ratio == pytest.approx(est.ratio_target, rel=0.15)
        assert est.n_exceed[-1] >= 50

    def test_insufficient_exceedances(self, model_sub):
        s = model_sub.tail_index()
        with pytest.raises(InsufficientExceedances):
            estimate_tail_constants(
                model_sub, s, np.array([10.0, 1e9]), n_samples=2000, seed=1
            )

    def test_default_window_scales_with_drift(self, model_sub, model_s2):
        assert default_window(model_sub) > default_window(model_s2) > 0
