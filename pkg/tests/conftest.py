"""Shared fixtures: reference models reused across the suite.

Session scope keeps solver calls (tail indices need root finding) and any
cached moments to one evaluation per run.
"""

from __future__ import annotations

import warnings

import pytest

from trapwalk import TruncatedBetaModel, TwoPointModel


def _two_point(**kw) -> TwoPointModel:
    # Two-point supports are lattice-valued, which the model flags loudly;
    # the fixtures are deliberate choices, so the flag is acknowledged here.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return TwoPointModel(**kw)


@pytest.fixture(scope="session")
def model_s2() -> TwoPointModel:
    """alpha in {1/2, 2} with weights {0.8, 0.2}: E[alpha^2] = 1 exactly."""
    return _two_point(p_fast=2.0 / 3.0, p_slow=1.0 / 3.0, w=0.8)


@pytest.fixture(scope="session")
def model_sub() -> TwoPointModel:
    """Calibrated so the tail index sits at 0.70 (heavy, sub-ballistic)."""
    return _two_point(p_fast=0.75, p_slow=0.3, w=0.6014481056938882)


@pytest.fixture(scope="session")
def model_golden() -> TwoPointModel:
    """alpha in {1/4, 2} equally weighted: tail index log2((1+sqrt 5)/2)."""
    return _two_point(p_fast=0.8, p_slow=1.0 / 3.0, w=0.5)


@pytest.fixture(scope="session")
def model_beta() -> TruncatedBetaModel:
    """Continuous site law; tail index near 1.745."""
    return TruncatedBetaModel(a=4.0, b=2.5)


@pytest.fixture(scope="session")
def model_const() -> TwoPointModel:
    """Constant p = 2/3: every quenched quantity has a closed form."""
    return _two_point(p_fast=2.0 / 3.0, p_slow=2.0 / 3.0, w=0.5)


@pytest.fixture(scope="session")
def model_const_fast() -> TwoPointModel:
    """Constant p = 0.8: occupation density 5/3 at every site."""
    return _two_point(p_fast=0.8, p_slow=0.8, w=0.5)
