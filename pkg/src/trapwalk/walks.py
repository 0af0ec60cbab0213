"""Quenched trajectory simulation and occupation statistics.

Two samplers produce the same joint law of visit counts: a literal
stepper (reference) and a site-by-site crossing-count sampler whose cost
is proportional to window length rather than to the number of steps.  The
equivalence is enforced by two-sample tests in the acceptance suite, not
assumed.  Absorption happens at the first visit of N + buffer, with the
buffer calibrated per environment so that returning to the window after
absorption would be a < 1e-6 probability event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .environments import Environment
from .occupancy import RhoProfile, compute_rho
from .regimes import REGIME_ONE, REGIME_SUB, REGIME_TWO, check_regime
from .seeding import TAG_WALK, derive_u32_array

__all__ = [
    "StepBudgetExceeded",
    "WalkOutcome",
    "WalkBatch",
    "NormalizedStatistics",
    "calibrate_buffer",
    "simulate_walk",
    "simulate_crossings_fast",
    "sample_walks",
    "normalize",
    "normalized_t",
    "normalized_u",
]

DEFAULT_STEP_CAP = 10**9
DEFAULT_VISIT_CAP = 10**15
_INITIAL_LEFT_MARGIN = 256
_MAX_LEFT_MARGIN = 1 << 24


class StepBudgetExceeded(RuntimeError):
    """A trajectory hit its step/visit cap; the outcome must be discarded."""


@dataclass(frozen=True)
class WalkOutcome:
    """Occupation record of one absorbed trajectory.

    xi[n] counts all time points spent at site n < n_sites; xi_target is
    the count at site n_sites itself (used for the running maximum).
    T_N sums xi over [0, n_sites); T_tilde_N is the first hitting time of
    n_sites; xi_star is the max visit count over [0, n_sites].
    """

    n_sites: int
    xi: np.ndarray
    xi_target: int
    T_N: int
    T_tilde_N: int
    xi_star: int
    truncated: bool
    seed: int
    buffer: int
    sampler: str

    def __post_init__(self) -> None:
        self.xi.setflags(write=False)


@dataclass(frozen=True)
class WalkBatch:
    """Vectorized outcomes of independent replicas on one environment."""

    n_sites: int
    T_N: np.ndarray
    T_tilde_N: np.ndarray
    xi_star: np.ndarray
    tracked_sites: np.ndarray
    tracked_xi: np.ndarray
    discarded: np.ndarray
    buffer: int
    sampler: str
    seed: int

    @property
    def n_walks(self) -> int:
        return len(self.T_N)

    @property
    def n_discarded(self) -> int:
        return int(self.discarded.sum())


def calibrate_buffer(
    env: Environment,
    n_sites: int,
    target: float = 1e-6,
    tol: float = 1e-8,
) -> tuple[int, RhoProfile]:
    """Absorption buffer with a quenched no-return certificate.

    Starting from B = max(50, ceil(10 ln N)), B doubles until the chance
    that a walk at N + B ever falls back to N - 1, which equals the
    alpha-product over (N-1, N+B] times z_{N+B} / z_{N-1}, is below
    target.  Returns the buffer and a profile whose window covers
    [0, N + B + 1) so callers can reuse it for cluster detection after
    restricting the window.
    """
    if n_sites < 2:
        raise ValueError("need at least two sites")
    buffer = max(50, math.ceil(10.0 * math.log(n_sites)))
    while True:
        profile = compute_rho(env, n_sites + buffer + 1, tol=tol)
        work = profile.env
        alpha = work.alpha()
        lo = work.lo
        log_prod = float(
            np.log(alpha[n_sites - lo : n_sites + buffer + 1 - lo]).sum()
        )
        z = profile.z_ext
        log_return = log_prod + math.log(z[n_sites + buffer]) - math.log(z[n_sites - 1])
        if log_return <= math.log(target):
            return buffer, profile
        if buffer > _MAX_LEFT_MARGIN:
            raise RuntimeError("buffer calibration failed to converge")
        buffer *= 2


def _run_single(
    env: Environment,
    n_sites: int,
    seed: int,
    buffer: int,
    cap: int,
    fast: bool,
) -> WalkOutcome:
    kernel_seed = np.uint32(derive_u32_array(seed, 1, TAG_WALK)[0])
    margin = _INITIAL_LEFT_MARGIN
    xi = np.zeros(n_sites + 1, dtype=np.int64)
    while True:
        work = env.extended(-margin, n_sites + buffer + 1)
        p = work.p
        offset = work.lo
        if fast:
            status, t_hit, _total, _ms = _kernels.crossing_walk(
                p, offset, n_sites, buffer, kernel_seed, cap, xi
            )
        else:
            status, t_hit, _total, _ms = _kernels.step_walk(
                p, offset, n_sites, buffer, kernel_seed, cap, xi
            )
        if status == _kernels.STATUS_LEFT_EDGE:
            margin *= 2
            if margin > _MAX_LEFT_MARGIN:
                raise RuntimeError("left excursion exceeded any plausible window")
            continue
        if status == _kernels.STATUS_BUDGET:
            raise StepBudgetExceeded(
                f"trajectory exceeded its cap ({cap}) before absorption"
            )
        xi_window = xi[:n_sites].copy()
        return WalkOutcome(
            n_sites=n_sites,
            xi=xi_window,
            xi_target=int(xi[n_sites]),
            T_N=int(xi_window.sum()),
            T_tilde_N=int(t_hit),
            xi_star=int(xi.max()),
            truncated=False,
            seed=int(seed),
            buffer=buffer,
            sampler="fast" if fast else "direct",
        )


def simulate_walk(
    env: Environment,
    n_sites: int,
    seed: int,
    buffer: int | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
) -> WalkOutcome:
    """One trajectory by the literal stepper; see module docstring."""
    if buffer is None:
        buffer, _ = calibrate_buffer(env, n_sites)
    return _run_single(env, n_sites, seed, buffer, step_cap, fast=False)


def simulate_crossings_fast(
    env: Environment,
    n_sites: int,
    seed: int,
    buffer: int | None = None,
    visit_cap: int = DEFAULT_VISIT_CAP,
) -> WalkOutcome:
    """One trajectory by the crossing-count sampler; same law as the stepper."""
    if buffer is None:
        buffer, _ = calibrate_buffer(env, n_sites)
    return _run_single(env, n_sites, seed, buffer, visit_cap, fast=True)


def sample_walks(
    env: Environment,
    n_sites: int,
    n_walks: int,
    seed: int,
    sampler: str = "fast",
    buffer: int | None = None,
    cap: int | None = None,
    tracked_sites: np.ndarray | None = None,
) -> WalkBatch:
    """Independent replicas on one environment, reduced to summary arrays.

    Replicas that hit the cap are flagged in ``discarded`` (their rows are
    zero) and never silently kept.  Tracked sites (indices in [0, n_sites])
    get their per-replica visit counts recorded.
    """
    if sampler not in ("fast", "direct"):
        raise ValueError("sampler must be 'fast' or 'direct'")
    fast = sampler == "fast"
    if cap is None:
        cap = DEFAULT_VISIT_CAP if fast else DEFAULT_STEP_CAP
    if buffer is None:
        buffer, _ = calibrate_buffer(env, n_sites)
    tracked = (
        np.zeros(0, dtype=np.int64)
        if tracked_sites is None
        else np.asarray(tracked_sites, dtype=np.int64)
    )
    if len(tracked) and (tracked.min() < 0 or tracked.max() > n_sites):
        raise ValueError("tracked sites must lie in [0, n_sites]")
    seeds = derive_u32_array(seed, n_walks, TAG_WALK).astype(np.uint32)

    margin = _INITIAL_LEFT_MARGIN
    pending = np.arange(n_walks)
    status = np.zeros(n_walks, dtype=np.uint8)
    T = np.zeros(n_walks, dtype=np.int64)
    t_hit = np.zeros(n_walks, dtype=np.int64)
    xi_star = np.zeros(n_walks, dtype=np.int64)
    tracked_vals = np.zeros((n_walks, len(tracked)), dtype=np.int64)
    while True:
        work = env.extended(-margin, n_sites + buffer + 1)
        st, bt, th, xs, tv = _kernels.walk_batch(
            fast, work.p, work.lo, n_sites, buffer, seeds[pending], cap, tracked
        )
        status[pending] = st
        T[pending] = bt
        t_hit[pending] = th
        xi_star[pending] = xs
        tracked_vals[pending] = tv
        pending = pending[st == _kernels.STATUS_LEFT_EDGE]
        if len(pending) == 0:
            break
        margin *= 2
        if margin > _MAX_LEFT_MARGIN:
            raise RuntimeError("left excursion exceeded any plausible window")
    discarded = status == _kernels.STATUS_BUDGET
    return WalkBatch(
        n_sites=n_sites,
        T_N=T,
        T_tilde_N=t_hit,
        xi_star=xi_star,
        tracked_sites=tracked,
        tracked_xi=tracked_vals,
        discarded=discarded,
        buffer=buffer,
        sampler=sampler,
        seed=int(seed),
    )


@dataclass(frozen=True)
class NormalizedStatistics:
    """Regime-normalized occupation statistics with their audit trail."""

    regime: str
    t_N: float
    u_N: float | None
    centering: float
    scaling: float
    u_centering: float | None
    s: float


def _scaling(regime: str, n_sites: int, s: float) -> float:
    if regime == REGIME_TWO:
        return math.sqrt(n_sites * math.log(n_sites))
    return float(n_sites) ** (1.0 / s)


def normalized_t(
    T_values: np.ndarray,
    quenched_mean: float,
    n_sites: int,
    regime: str,
    s: float,
) -> np.ndarray:
    """Vectorized t-statistic; normalize() is the audited scalar wrapper."""
    scale = _scaling(regime, n_sites, s)
    if regime == REGIME_SUB:
        return np.asarray(T_values, dtype=np.float64) / scale
    return (np.asarray(T_values, dtype=np.float64) - quenched_mean) / scale


def normalized_u(
    quenched_mean: float,
    n_sites: int,
    regime: str,
    s: float,
    annealed_mean: float | None = None,
    u_N: float | None = None,
) -> tuple[float, float]:
    """Environment statistic (value, centering used); see normalize()."""
    scale = _scaling(regime, n_sites, s)
    if regime == REGIME_SUB:
        return quenched_mean / scale, 0.0
    if regime == REGIME_ONE:
        if u_N is None:
            raise ValueError("s=1 needs the fitted annealed centering u_N")
        return (quenched_mean - u_N) / scale, u_N
    if annealed_mean is None:
        raise ValueError("this regime needs the annealed mean of T_N")
    return (quenched_mean - annealed_mean) / scale, annealed_mean


def normalize(
    outcome: WalkOutcome,
    rho_profile: RhoProfile,
    regime: str,
    annealed_mean: float | None = None,
    u_N: float | None = None,
) -> NormalizedStatistics:
    """Regime-normalized statistics of one outcome.

    t: T_N / N^{1/s} below s=1; (T_N - sum rho) / N^{1/s} for 1 <= s < 2;
    (T_N - sum rho) / sqrt(N ln N) at s=2.  u applies the same scalings to
    the environment's quenched mean occupation, centered by the fitted
    annealed inputs where the regime requires them.  The regime must match
    the model's solved tail index.
    """
    s = rho_profile.env.model.tail_index()
    check_regime(regime, s)
    if rho_profile.n_sites != outcome.n_sites:
        raise ValueError("profile window does not match the outcome window")
    n = outcome.n_sites
    quenched_mean = rho_profile.quenched_mean_occupation()
    scale = _scaling(regime, n, s)
    centering = 0.0 if regime == REGIME_SUB else quenched_mean
    t_val = float(
        normalized_t(np.asarray([outcome.T_N]), quenched_mean, n, regime, s)[0]
    )
    try:
        u_val, u_centering = normalized_u(quenched_mean, n, regime, s, annealed_mean, u_N)
    except ValueError:
        u_val, u_centering = None, None
    return NormalizedStatistics(
        regime=regime,
        t_N=t_val,
        u_N=u_val,
        centering=centering,
        scaling=scale,
        u_centering=u_centering,
        s=s,
    )
