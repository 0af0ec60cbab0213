"""Quenched expected occupation profiles and their heavy-tail constants.

The central object is z_n, the solution of the right-to-left recursion
z_n = 1 + alpha_{n+1} z_{n+1} seeded with z = 1 at a horizon far to the
right; rho_n = z_n / p_n is the quenched expected number of visits to
site n for the walk started at 0 and absorbed far to the right.  The
truncation error of the seed decays like the realized product of alphas,
which under positive drift is geometrically small, so the horizon is
extended adaptively until a certified bound drops below tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .environments import Environment, EnvironmentModel
from .seeding import TAG_TAIL, derive_rng

__all__ = [
    "HorizonExhausted",
    "InsufficientExceedances",
    "RhoProfile",
    "compute_rho",
    "estimate_tail_constants",
    "TailEstimate",
    "coupling_diagnostics",
    "tail_levels",
]


class HorizonExhausted(RuntimeError):
    """Adaptive horizon extension hit its cap before certifying tolerance."""


class InsufficientExceedances(ValueError):
    """Too few samples above the top level to estimate a tail constant."""


@dataclass(frozen=True)
class RhoProfile:
    """z and rho over the window [0, n_sites), plus the certified horizon.

    ``z_ext`` covers sites 0 .. n_sites + horizon (inclusive), with the
    boundary seed z = 1 at the right end; ``rho`` and ``z`` expose the
    window [0, n_sites).  ``err_bound`` bounds |z_n - z_n^true| and
    |rho_n - rho_n^true| uniformly over the window.
    """

    env: Environment
    n_sites: int
    horizon: int
    err_bound: float
    z_ext: np.ndarray
    rho_ext: np.ndarray

    def __post_init__(self) -> None:
        self.z_ext.setflags(write=False)
        self.rho_ext.setflags(write=False)

    @property
    def z(self) -> np.ndarray:
        return self.z_ext[: self.n_sites]

    @property
    def rho(self) -> np.ndarray:
        return self.rho_ext[: self.n_sites]

    @property
    def p(self) -> np.ndarray:
        return self.env.p_slice(0, self.n_sites)

    def quenched_mean_occupation(self) -> float:
        """Sum of rho over the window: E_omega of the total occupation."""
        return float(self.rho.sum())

    def restrict(self, n_sites: int) -> "RhoProfile":
        """Same arrays viewed with a shorter window (no recomputation).

        Valid because z_n depends only on sites right of n: the restricted
        window's values coincide with a direct computation on it.
        """
        if not 0 < n_sites <= self.n_sites:
            raise ValueError("restricted window must fit inside the profile")
        extra = self.n_sites - n_sites
        return RhoProfile(
            env=self.env,
            n_sites=n_sites,
            horizon=self.horizon + extra,
            err_bound=self.err_bound,
            z_ext=self.z_ext,
            rho_ext=self.rho_ext,
        )


def _certified_bound(alpha: np.ndarray, p: np.ndarray, n_sites: int, beta: float) -> float:
    """Uniform bound on the rho truncation error over [0, n_sites).

    The seed error at the horizon H is z_H^true - 1 = sum of realized
    alpha-products to the right of H, modeled by the geometric series
    beta / (1 - beta) with beta the model's mean log contraction; it
    propagates to site n through the realized product alpha_{n+1}..alpha_H.
    """
    log_alpha = np.log(alpha[1:])
    # suffix[n] = sum of log alpha over sites n+1 .. H
    suffix = np.cumsum(log_alpha[::-1])[::-1]
    site_log = suffix[:n_sites] - np.log(p[:n_sites])
    peak = float(np.max(site_log))
    return math.exp(peak) * beta / (1.0 - beta)


def compute_rho(
    env: Environment,
    n_sites: int,
    tol: float = 1e-6,
    max_horizon: int = 1 << 22,
) -> RhoProfile:
    """Occupation profile on [0, n_sites) with certified truncation error.

    The environment window is extended to the right as needed; extension is
    consistent with the original realization, so results depend only on
    (model, seed, n_sites, tol).  Raises HorizonExhausted if the certified
    bound cannot be brought below tol within max_horizon extra sites, or if
    z overflows to non-finite values on a pathological realization.
    """
    if n_sites < 1:
        raise ValueError("window must contain at least one site")
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    beta = math.exp(-env.model.log_drift())
    if not beta < 1.0:
        raise ValueError("model drift must be positive")

    horizon = 64
    while True:
        work = env.extended(env.lo, n_sites + horizon + 1)
        alpha = work.alpha()[0 - work.lo : n_sites + horizon + 1 - work.lo]
        p = work.p_slice(0, n_sites)
        bound = _certified_bound(alpha, p, n_sites, beta)
        if bound <= tol:
            z_ext = _kernels.backward_z(np.ascontiguousarray(alpha))
            if not np.isfinite(z_ext[0]):
                raise HorizonExhausted("z overflowed on this realization")
            p_ext = work.p_slice(0, n_sites + horizon + 1)
            rho_ext = z_ext / p_ext
            return RhoProfile(
                env=work,
                n_sites=n_sites,
                horizon=horizon,
                err_bound=bound,
                z_ext=z_ext,
                rho_ext=rho_ext,
            )
        if horizon > max_horizon:
            raise HorizonExhausted(
                f"horizon {horizon} exceeded cap without certifying tol={tol}"
            )
        horizon *= 2


def coupling_diagnostics(env: Environment, n: int, k: int) -> tuple[float, float]:
    """Product and partial-sum coefficients linking rho at sites n-k and n.

    A is the product alpha_{n-1} ... alpha_{n-k+1} (empty product 1 for
    k=1); B is the k-term sum of the prefix products of alpha starting at
    site n-k+1, lengths 0 .. k-1.  Downstream tests verify
    rho_{n-k} <= (A * rho_n + B) / eps0 on sampled environments.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if n - k < 0:
        raise ValueError("n - k must be nonnegative")
    if n - k + 1 < env.lo or n > env.hi:
        raise ValueError("sites outside the environment window")
    segment = env.alpha()[n - k + 1 - env.lo : n - env.lo]
    a = float(np.prod(segment))
    b = 1.0 + float(np.cumprod(segment).sum())
    return a, b


@dataclass(frozen=True)
class TailEstimate:
    """Level-grid estimates of the polynomial tail constants of z and rho.

    c_hat[i] = levels[i]^s * P(z > levels[i]) estimated over n_samples
    fresh windows; c_star_hat likewise for rho.  ratio_target is the
    Monte Carlo estimate of E[p^{-s}], the predicted c*/c ratio.
    """

    s: float
    levels: np.ndarray
    c_hat: np.ndarray
    c_star_hat: np.ndarray
    n_samples: int
    n_exceed: np.ndarray
    n_exceed_rho: np.ndarray
    preasymptotic: np.ndarray
    sample_median: float
    ratio_target: float
    ratio_target_se: float

    def c_point(self) -> float:
        """Scalar c for downstream consumers: median over trusted levels."""
        good = ~self.preasymptotic
        values = self.c_hat[good] if good.any() else self.c_hat
        return float(np.median(values))

    def c_star_point(self) -> float:
        good = ~self.preasymptotic
        values = self.c_star_hat[good] if good.any() else self.c_star_hat
        return float(np.median(values))


def _z_batch(model: EnvironmentModel, rng: np.random.Generator, rows: int, width: int):
    """Fresh i.i.d. windows; returns (z at left edge, p at left edge)."""
    p = model.draw_p(rng, rows * width).reshape(rows, width)
    z = np.ones(rows)
    for col in range(width - 1, 0, -1):
        z = 1.0 + ((1.0 - p[:, col]) / p[:, col]) * z
    return z, p[:, 0]


def default_window(model: EnvironmentModel) -> int:
    """Window length making the z truncation bias negligible (~e^-48)."""
    return int(math.ceil(48.0 / model.log_drift()))


def tail_levels(
    z_sample: np.ndarray, lo_q: float = 0.999, hi_q: float = 0.9999, count: int = 5
) -> np.ndarray:
    """Log-spaced levels spanning a calibrated upper-tail quantile range."""
    lo, hi = np.quantile(z_sample, [lo_q, hi_q])
    return np.geomspace(lo, hi, count)


def estimate_tail_constants(
    model: EnvironmentModel,
    s: float,
    levels: np.ndarray,
    n_samples: int,
    seed: int = 0,
    window: int | None = None,
) -> TailEstimate:
    """Estimate the tail constants of z and rho on a level grid.

    Samples z on fresh windows by the backward recursion (truncation bias
    controlled by the window length), evaluates level exceedance
    frequencies, and reports x^s * P(> x) per level together with the
    Monte Carlo prediction for the c*/c ratio.  Levels below the sample
    median are returned but flagged pre-asymptotic.  Raises
    InsufficientExceedances when fewer than 50 samples clear the top level.
    """
    levels = np.asarray(levels, dtype=np.float64)
    if levels.ndim != 1 or len(levels) == 0:
        raise ValueError("levels must be a non-empty 1-d array")
    if np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be strictly increasing")
    width = default_window(model) if window is None else int(window)
    rng = derive_rng(seed, TAG_TAIL)

    chunk = 20_000
    exceed_z = np.zeros(len(levels), dtype=np.int64)
    exceed_rho = np.zeros(len(levels), dtype=np.int64)
    inv_p_sum = 0.0
    inv_p_sumsq = 0.0
    medians = []
    done = 0
    while done < n_samples:
        rows = min(chunk, n_samples - done)
        z, p0 = _z_batch(model, rng, rows, width)
        rho = z / p0
        exceed_z += (z[:, None] > levels[None, :]).sum(axis=0)
        exceed_rho += (rho[:, None] > levels[None, :]).sum(axis=0)
        w = p0 ** (-s)
        inv_p_sum += float(w.sum())
        inv_p_sumsq += float((w * w).sum())
        medians.append(np.median(z))
        done += rows
    if exceed_z[-1] < 50:
        raise InsufficientExceedances(
            f"only {int(exceed_z[-1])} samples exceed the top level"
        )
    sample_median = float(np.median(medians))
    c_hat = levels**s * exceed_z / n_samples
    c_star_hat = levels**s * exceed_rho / n_samples
    mean_w = inv_p_sum / n_samples
    var_w = max(inv_p_sumsq / n_samples - mean_w**2, 0.0)
    return TailEstimate(
        s=float(s),
        levels=levels,
        c_hat=c_hat,
        c_star_hat=c_star_hat,
        n_samples=int(n_samples),
        n_exceed=exceed_z,
        n_exceed_rho=exceed_rho,
        preasymptotic=levels < sample_median,
        sample_median=sample_median,
        ratio_target=mean_w,
        ratio_target_se=math.sqrt(var_w / n_samples),
    )
