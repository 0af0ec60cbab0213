"""Random environment models and window-consistent realizations.

An environment assigns each integer site ``n`` a right-step probability
``p_n`` drawn i.i.d. from a model law; the walk at site ``n`` moves right
with probability ``p_n`` and left with probability ``q_n = 1 - p_n``.  The
odds ratio ``alpha_n = q_n / p_n`` drives every quantity downstream.

Models must be uniformly elliptic (``eps0 <= p <= 1 - eps0``) and drift
right on log scale (``E[ln(p/q)] > 0``) while still carrying sites with
``alpha > 1``, so deep slowdown regions occur but the walk is transient.
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from .seeding import BLOCK_SIZE, block_rng

__all__ = [
    "ArithmeticSupportWarning",
    "DegenerateRecurrent",
    "NoPositiveRoot",
    "EnvironmentModel",
    "TwoPointModel",
    "TruncatedBetaModel",
    "Environment",
    "sample_environment",
    "solve_tail_index",
]

_DRIFT_ATOL = 1e-12


class DegenerateRecurrent(ValueError):
    """The log-odds drift vanishes, so the walk is recurrent."""


class NoPositiveRoot(ValueError):
    """E[alpha^h] = 1 has no root in (0, 64]: no power-law slowdown scale."""


class ArithmeticSupportWarning(UserWarning):
    """ln(q/p) is supported on a lattice; tail constants may oscillate."""


class EnvironmentModel(ABC):
    """Law of a single site's right-step probability."""

    eps0: float

    @abstractmethod
    def draw_p(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """i.i.d. sample of right-step probabilities."""

    @abstractmethod
    def moment(self, h: float) -> float:
        """E[alpha^h] for h >= 0."""

    @abstractmethod
    def log_drift(self) -> float:
        """E[ln(p/q)]; positive for every valid model."""

    @abstractmethod
    def describe(self) -> dict:
        """JSON-ready parameter record for manifests."""

    def mean_alpha(self) -> float:
        return self.moment(1.0)

    def tail_index(self, tol: float = 1e-10) -> float:
        """Cached root of E[alpha^s] = 1 (see solve_tail_index)."""
        cache = getattr(self, "_tail_cache", None)
        if cache is None:
            cache = {}
            object.__setattr__(self, "_tail_cache", cache)
        if tol not in cache:
            cache[tol] = solve_tail_index(self, tol=tol)
        return cache[tol]

    def _validate_drift(self) -> None:
        drift = self.log_drift()
        if abs(drift) <= _DRIFT_ATOL:
            raise DegenerateRecurrent(
                "E[ln(p/q)] = 0: the walk is recurrent, not transient"
            )
        if drift < 0:
            raise ValueError(
                "E[ln(p/q)] < 0: the walk drifts left; reverse the orientation"
            )


def _is_lattice_pair(x: float, y: float) -> bool:
    """True when {x, y} sits inside h*Z for some h > 0."""
    if x == 0.0 or y == 0.0:
        return True
    ratio = x / y
    frac = Fraction(ratio).limit_denominator(10**6)
    return abs(ratio - float(frac)) <= 1e-9 * abs(ratio)


@dataclass(frozen=True)
class TwoPointModel(EnvironmentModel):
    """p equals p_fast with probability w, else p_slow.

    Moments are exact two-term sums, which makes this family the reference
    for solver and tail-constant oracles.  ``p_slow < 1/2`` creates the
    slowdown sites; ``p_fast > 1/2`` supplies the rightward drift.
    """

    p_fast: float
    p_slow: float
    w: float
    eps0: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 < self.eps0 < 0.5:
            raise ValueError("eps0 must lie in (0, 1/2)")
        for p in (self.p_fast, self.p_slow):
            if not self.eps0 <= p <= 1.0 - self.eps0:
                raise ValueError("site probabilities must lie in [eps0, 1-eps0]")
        if not 0.0 < self.w < 1.0:
            raise ValueError("w must lie strictly inside (0, 1)")
        self._validate_drift()
        la, lb = math.log(self._alpha(self.p_fast)), math.log(self._alpha(self.p_slow))
        if _is_lattice_pair(la, lb):
            warnings.warn(
                "ln(q/p) support is arithmetic for this model; finite-size "
                "tail constants can oscillate around their limits",
                ArithmeticSupportWarning,
                stacklevel=3,
            )

    @staticmethod
    def _alpha(p: float) -> float:
        return (1.0 - p) / p

    def draw_p(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.where(rng.random(size) < self.w, self.p_fast, self.p_slow)

    def moment(self, h: float) -> float:
        return self.w * self._alpha(self.p_fast) ** h + (1.0 - self.w) * self._alpha(
            self.p_slow
        ) ** h

    def log_drift(self) -> float:
        return -(
            self.w * math.log(self._alpha(self.p_fast))
            + (1.0 - self.w) * math.log(self._alpha(self.p_slow))
        )

    def describe(self) -> dict:
        return {
            "family": "two_point",
            "p_fast": self.p_fast,
            "p_slow": self.p_slow,
            "w": self.w,
            "eps0": self.eps0,
        }


@dataclass(frozen=True)
class TruncatedBetaModel(EnvironmentModel):
    """p = eps0 + (1 - 2*eps0) * X with X ~ Beta(a, b).

    Continuous support, so ln(q/p) is never lattice-valued.  Moments come
    from adaptive quadrature against the Beta density.
    """

    a: float
    b: float
    eps0: float = 0.05

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ValueError("Beta shape parameters must be positive")
        if not 0.0 < self.eps0 < 0.5:
            raise ValueError("eps0 must lie in (0, 1/2)")
        self._validate_drift()

    def _expect(self, fn) -> float:
        from scipy.stats import beta as beta_dist

        dist = beta_dist(self.a, self.b)

        def integrand(x: float) -> float:
            p = self.eps0 + (1.0 - 2.0 * self.eps0) * x
            return fn(p) * dist.pdf(x)

        val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-11, limit=400)
        return val

    def draw_p(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.eps0 + (1.0 - 2.0 * self.eps0) * rng.beta(self.a, self.b, size)

    def moment(self, h: float) -> float:
        return self._expect(lambda p: ((1.0 - p) / p) ** h)

    def log_drift(self) -> float:
        return self._expect(lambda p: math.log(p / (1.0 - p)))

    def describe(self) -> dict:
        return {"family": "truncated_beta", "a": self.a, "b": self.b, "eps0": self.eps0}


def solve_tail_index(model: EnvironmentModel, tol: float = 1e-10) -> float:
    """Positive root s of E[alpha^s] = 1, by bracketing + bisection on (tol, 64].

    The moment function is convex with value 1 and negative slope at 0, so
    under positive drift it dips below 1 and crosses back exactly once if it
    crosses at all.  Raises NoPositiveRoot when E[alpha^64] <= 1 (no site
    odds above 1, or slowdown too weak), DegenerateRecurrent on zero drift.
    """
    drift = model.log_drift()
    if abs(drift) <= _DRIFT_ATOL:
        raise DegenerateRecurrent("E[ln(p/q)] = 0")
    if drift < 0:
        raise ValueError("E[ln(p/q)] < 0: wrong orientation")

    def g(h: float) -> float:
        return model.moment(h) - 1.0

    hi = 1.0
    while g(hi) <= 0.0:
        hi *= 2.0
        if hi > 64.0:
            raise NoPositiveRoot("E[alpha^h] never exceeds 1 on (0, 64]")
    lo = tol
    if g(lo) >= 0.0:
        # Positive drift forces g < 0 near 0; failure here means the moment
        # evaluation itself is broken.
        raise RuntimeError("moment function inconsistent with positive drift")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    s = 0.5 * (lo + hi)
    if abs(g(s)) > tol:
        raise RuntimeError("bisection stalled before reaching tolerance")
    return s


@dataclass(frozen=True)
class Environment:
    """One realized window of site probabilities.

    ``p[i]`` is the right-step probability of site ``lo + i``.  Windows are
    functions of (model, seed) alone: the realization is generated in fixed
    blocks keyed by block index, so any two windows from the same seed agree
    on their overlap and a window can be extended in place.
    """

    model: EnvironmentModel
    seed: int
    lo: int
    hi: int
    p: np.ndarray

    def __post_init__(self) -> None:
        if self.lo >= self.hi:
            raise ValueError("window must be non-empty")
        if len(self.p) != self.hi - self.lo:
            raise ValueError("probability array does not match window size")
        self.p.setflags(write=False)

    def __len__(self) -> int:
        return self.hi - self.lo

    def alpha(self) -> np.ndarray:
        """Odds (1-p)/p per site; computed from p on demand, never stored."""
        return (1.0 - self.p) / self.p

    def p_slice(self, lo: int, hi: int) -> np.ndarray:
        if lo < self.lo or hi > self.hi:
            raise ValueError("requested sites outside this window")
        return self.p[lo - self.lo : hi - self.lo]

    def window(self, lo: int, hi: int) -> "Environment":
        """Consistent environment on [lo, hi); overlap matches exactly."""
        if lo >= self.lo and hi <= self.hi:
            return Environment(self.model, self.seed, lo, hi, self.p_slice(lo, hi))
        return sample_environment(self.model, lo, hi, self.seed)

    def extended(self, lo: int, hi: int) -> "Environment":
        """Window covering both the current range and [lo, hi)."""
        return self.window(min(lo, self.lo), max(hi, self.hi))


def sample_environment(
    model: EnvironmentModel, lo: int, hi: int, seed: int
) -> Environment:
    """Realize sites [lo, hi) for the given model and seed, block by block."""
    if lo >= hi:
        raise ValueError("window must be non-empty")
    first = lo // BLOCK_SIZE
    last = (hi - 1) // BLOCK_SIZE
    parts = [
        model.draw_p(block_rng(seed, b), BLOCK_SIZE) for b in range(first, last + 1)
    ]
    full = parts[0] if len(parts) == 1 else np.concatenate(parts)
    start = lo - first * BLOCK_SIZE
    p = np.ascontiguousarray(full[start : start + (hi - lo)], dtype=np.float64)
    return Environment(model, int(seed), int(lo), int(hi), p)
