"""Site-law models, tail-index solving, and environment windows."""

from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from trapwalk import (
    ArithmeticSupportWarning,
    DegenerateRecurrent,
    NoPositiveRoot,
    TruncatedBetaModel,
    TwoPointModel,
    sample_environment,
    solve_tail_index,
)

GOLDEN_TAIL = 0.6942419136306174  # log2 of the golden ratio, exact root


class TestTailIndex:
    def test_two_point_balanced_at_two(self, model_s2):
        # E[alpha^2] = 0.8 * (1/2)^2 + 0.2 * 2^2 = 1 exactly
        assert abs(model_s2.tail_index() - 2.0) < 1e-9

    def test_golden_ratio_root(self, model_golden):
        # alpha in {1/4, 2} with equal weight: x = 2^s solves
        # x^3 - 2 x^2 + 1 = 0, whose root above 1 is the golden ratio.
        assert abs(model_golden.tail_index() - GOLDEN_TAIL) < 1e-10

    def test_sub_model_near_07(self, model_sub):
        assert abs(model_sub.tail_index() - 0.7000970324885463) < 1e-10

    def test_beta_model_fixed_point(self, model_beta):
        s = model_beta.tail_index()
        assert abs(model_beta.moment(s) - 1.0) < 1e-8
        assert 1.0 < s < 2.0

    def test_solver_function_matches_method(self, model_golden):
        assert solve_tail_index(model_golden) == pytest.approx(
            model_golden.tail_index(), abs=1e-12
        )

    def test_no_root_when_drift_dominates(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = TwoPointModel(p_fast=0.8, p_slow=0.6, w=0.5)
        with pytest.raises(NoPositiveRoot):
            model.tail_index()

    def test_recurrent_mixture_rejected(self):
        # alpha in {1/4, 4} equally weighted: E[ln alpha] = 0, not transient
        with pytest.raises(DegenerateRecurrent):
            TwoPointModel(p_fast=0.8, p_slow=0.2, w=0.5)


class TestModelValidation:
    def test_two_point_lattice_support_flagged(self):
        with pytest.warns(ArithmeticSupportWarning):
            TwoPointModel(p_fast=2.0 / 3.0, p_slow=1.0 / 3.0, w=0.8)

    def test_beta_model_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            TruncatedBetaModel(a=3.0, b=2.0)

    def test_weight_bounds(self):
        with pytest.raises(ValueError):
            TwoPointModel(p_fast=0.8, p_slow=0.3, w=1.0)
        with pytest.raises(ValueError):
            TwoPointModel(p_fast=0.8, p_slow=0.3, w=0.0)

    def test_ellipticity_band(self):
        with pytest.raises(ValueError):
            TwoPointModel(p_fast=0.99, p_slow=0.3, w=0.5)
        with pytest.raises(ValueError):
            TwoPointModel(p_fast=0.8, p_slow=0.3, w=0.5, eps0=0.6)

    def test_beta_band_strict(self, model_beta):
        env = sample_environment(model_beta, 0, 4000, 11)
        assert np.all(env.p > model_beta.eps0)
        assert np.all(env.p < 1.0 - model_beta.eps0)


class TestMoments:
    def test_two_point_exact_sums(self, model_s2):
        # E[alpha] = 0.8 * 0.5 + 0.2 * 2
        assert model_s2.moment(1.0) == pytest.approx(0.8, abs=1e-15)
        assert model_s2.moment(2.0) == pytest.approx(1.0, abs=1e-15)
        assert model_s2.moment(0.0) == pytest.approx(1.0, abs=1e-15)

    def test_log_drift_closed_form(self, model_s2):
        # E[ln(p/q)] = 0.8 ln 2 - 0.2 ln 2 = 0.6 ln 2
        assert model_s2.log_drift() == pytest.approx(0.6 * math.log(2.0), abs=1e-14)

    def test_beta_moment_at_zero(self, model_beta):
        assert model_beta.moment(0.0) == pytest.approx(1.0, abs=1e-9)

    def test_describe_is_json_ready(self, model_beta, model_s2):
        d = model_beta.describe()
        assert d["family"] == "truncated_beta" and d["a"] == 4.0
        d2 = model_s2.describe()
        assert d2["family"] == "two_point" and d2["w"] == 0.8


class TestEnvironmentWindows:
    def test_determinism_and_block_consistency(self, model_s2):
        a = sample_environment(model_s2, -50, 150, 77)
        b = sample_environment(model_s2, 0, 100, 77)
        lo, hi = 0, 100
        np.testing.assert_array_equal(a.p_slice(lo, hi), b.p_slice(lo, hi))

    def test_alpha_identity(self, model_s2):
        env = sample_environment(model_s2, 0, 64, 5)
        np.testing.assert_allclose(env.alpha(), (1.0 - env.p) / env.p, rtol=1e-15)

    def test_window_bounds(self, model_s2):
        env = sample_environment(model_s2, -8, 24, 9)
        assert (env.lo, env.hi) == (-8, 24)
        assert len(env.p) == 32
        sub = env.window(0, 16)
        assert (sub.lo, sub.hi) == (0, 16)
        np.testing.assert_array_equal(sub.p, env.p_slice(0, 16))

    def test_extended_grows_and_agrees(self, model_s2):
        env = sample_environment(model_s2, 0, 32, 13)
        big = env.extended(-16, 64)
        assert big.lo <= -16 and big.hi >= 64
        np.testing.assert_array_equal(big.p_slice(0, 32), env.p)

    def test_p_slice_rejects_out_of_window(self, model_s2):
        env = sample_environment(model_s2, 0, 32, 13)
        with pytest.raises(Exception):
            env.p_slice(-1, 10)

    def test_different_seeds_differ(self, model_s2):
        a = sample_environment(model_s2, 0, 200, 1)
        b = sample_environment(model_s2, 0, 200, 2)
        assert not np.array_equal(a.p, b.p)
