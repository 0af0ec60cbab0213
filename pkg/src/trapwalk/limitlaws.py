"""Limiting objects: power-law Poisson processes, regime sums, law tables.

The limit of the occupation statistics is built from a Poisson point
process of trap masses with intensity c * theta^(-1-s) and i.i.d. unit
exponential marks.  This module samples those objects, evaluates the
limiting stable laws by numerical inversion of the explicit
characteristic functional, and provides the auxiliary estimators
(cluster-rate integrals, stationary cluster-shape sampler, Frechet law)
that the verification experiments compare against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, interpolate, optimize, special

from .environments import EnvironmentModel
from .regimes import (
    REGIME_MID,
    REGIME_ONE,
    REGIME_SUB,
    REGIME_TWO,
    REGIMES,
    RegimeMismatch,
    check_regime,
)
from .seeding import TAG_LIMIT, TAG_MARKS, TAG_POINTS, derive_rng

__all__ = [
    "InversionUnstable",
    "PowerLawPPP",
    "sample_ppp",
    "mark_ppp",
    "YSample",
    "sample_Y",
    "StableLawTable",
    "stable_cdf",
    "stable_fit_scale",
    "frechet_cdf",
    "frechet_fit",
    "campbell_mean",
    "campbell_var",
    "product_tail_count",
    "MuEstimate",
    "estimate_mu_m",
    "sample_limit_b",
]


class InversionUnstable(RuntimeError):
    """Characteristic-function inversion exceeded its error budget."""


@dataclass(frozen=True)
class PowerLawPPP:
    """Poisson process on [delta, inf) with intensity c * theta^(-1-s).

    delta = 0 describes the untruncated limiting process; sampling
    operations require delta > 0 (finite expected count), while law tables
    accept delta = 0.
    """

    c: float
    s: float
    delta: float

    def __post_init__(self) -> None:
        if self.c <= 0 or self.s <= 0:
            raise ValueError("intensity constant and exponent must be positive")
        if self.delta < 0:
            raise ValueError("truncation must be nonnegative")

    @property
    def expected_count(self) -> float:
        if self.delta == 0:
            return math.inf
        return (self.c / self.s) * self.delta ** (-self.s)

    def tail_count(self, x: float) -> float:
        """Expected number of points above x."""
        return (self.c / self.s) * max(x, self.delta) ** (-self.s)


def _require_sampling(spec: PowerLawPPP) -> None:
    if spec.delta <= 0:
        raise ValueError("sampling requires a positive truncation delta")


def sample_ppp(spec: PowerLawPPP, seed: int) -> np.ndarray:
    """One realization: Poisson count, inverse-CDF points delta * U^(-1/s)."""
    _require_sampling(spec)
    rng = derive_rng(seed, TAG_POINTS)
    k = rng.poisson(spec.expected_count)
    return spec.delta * rng.random(k) ** (-1.0 / spec.s)


def mark_ppp(points: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Attach i.i.d. Exp(1) marks, independent of the points."""
    rng = derive_rng(seed, TAG_MARKS)
    return np.asarray(points), rng.standard_exponential(len(points))


def campbell_mean(spec: PowerLawPPP, power: float, lo: float | None = None) -> float:
    """E of sum(theta^power over points > lo) by the mean formula.

    Finite only when power < s; infinite values are returned as inf so
    callers can assert finiteness explicitly.
    """
    lo = spec.delta if lo is None else max(lo, spec.delta)
    if power >= spec.s:
        return math.inf
    return spec.c * lo ** (power - spec.s) / (spec.s - power)


def campbell_var(spec: PowerLawPPP, power: float, lo: float | None = None) -> float:
    """Var of sum(theta^power over points > lo): integral of theta^(2 power)."""
    return campbell_mean(spec, 2.0 * power, lo)


def product_tail_count(spec: PowerLawPPP, x: float) -> float:
    """Expected count of {Gamma_j * Theta_j > x} for Exp(1) marks.

    Conditioning on the mark reduces the count to the base process's tail
    integral at x / gamma, averaged over the exponential law; evaluated by
    adaptive quadrature against the closed-form per-gamma count.
    """
    _require_sampling(spec)
    c, s, d = spec.c, spec.s, spec.delta

    def integrand(g: float) -> float:
        eff = max(d, x / g)
        return (c / s) * eff ** (-s) * math.exp(-g)

    val, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=400)
    return val


# ---------------------------------------------------------------------------
# Regime sums


@dataclass(frozen=True)
class YSample:
    """Draws of a regime sum with a full record of what was added on top.

    centering is subtracted from the raw truncated sum; the compensation
    (mean shift and/or Gaussian noise of the recorded sigma) stands in for
    the mass below the simulation truncation.
    """

    values: np.ndarray
    regime: str
    marked: bool
    delta: float
    centering: float
    compensation_mean: float
    compensation_sigma: float


def sample_Y(
    spec: PowerLawPPP,
    regime: str,
    seed: int,
    n_draws: int = 1,
    marked: bool = True,
    compensate: bool = True,
) -> YSample:
    """Draws of the regime sum over the truncated marked process.

    marked=True gives sum(Theta * Gamma) below s=1 and
    sum(Theta * (Gamma - 1)) for 1 <= s < 2.  marked=False gives the pure
    point sums with the regime's recorded centerings: none below s=1,
    c*|ln delta| at s=1, c*delta^(1-s)/(s-1) for 1 < s < 2.  With
    compensate=True the missing mass below delta is restored by its mean
    (s<1, marked) or by Gaussian noise with the matching variance
    (centered regimes), so the draws approximate the delta -> 0 law.
    """
    _require_sampling(spec)
    check_regime(regime, spec.s)
    if regime not in (REGIME_SUB, REGIME_ONE, REGIME_MID):
        raise RegimeMismatch("regime sums exist for s < 2 only")
    c, s, d = spec.c, spec.s, spec.delta
    rng = derive_rng(seed, TAG_LIMIT)
    lam = spec.expected_count

    centering = 0.0
    if not marked:
        if regime == REGIME_ONE:
            centering = c * abs(math.log(d))
        elif regime == REGIME_MID:
            centering = c * d ** (1.0 - s) / (s - 1.0)

    comp_mean = 0.0
    comp_sigma = 0.0
    if compensate:
        if regime == REGIME_SUB and marked:
            # Discarded points have mean theta-sum c d^(1-s)/(1-s); unit
            # mean marks leave it unchanged.
            comp_mean = c * d ** (1.0 - s) / (1.0 - s)
            comp_sigma = math.sqrt(2.0 * c * d ** (2.0 - s) / (2.0 - s))
        elif marked:
            comp_sigma = math.sqrt(c * d ** (2.0 - s) / (2.0 - s))

    values = np.empty(n_draws, dtype=np.float64)
    chunk = max(1, min(n_draws, int(5e6 / max(lam, 1.0))))
    done = 0
    while done < n_draws:
        rows = min(chunk, n_draws - done)
        counts = rng.poisson(lam, rows)
        total = int(counts.sum())
        theta = d * rng.random(total) ** (-1.0 / s)
        if marked:
            g = rng.standard_exponential(total)
            contrib = theta * g if regime == REGIME_SUB else theta * (g - 1.0)
        else:
            contrib = theta
        bounds = np.zeros(rows, dtype=np.int64)
        np.cumsum(counts[:-1], out=bounds[1:])
        if total:
            # Zero sentinel keeps reduceat in range when trailing rows are
            # empty (their start index equals len(contrib)); rows with no
            # points are overwritten below either way.
            padded = np.concatenate((contrib, np.zeros(1)))
            sums = np.add.reduceat(padded, bounds)
            sums[counts == 0] = 0.0
        else:
            sums = np.zeros(rows)
        if comp_sigma > 0:
            sums = sums + rng.normal(0.0, comp_sigma, rows)
        values[done : done + rows] = sums + comp_mean - centering
        done += rows
    return YSample(
        values=values,
        regime=regime,
        marked=marked,
        delta=d,
        centering=centering,
        compensation_mean=comp_mean,
        compensation_sigma=comp_sigma,
    )


# ---------------------------------------------------------------------------
# Stable law tables by characteristic-functional inversion


def _h_sub(u: np.ndarray) -> np.ndarray:
    """Per-point characteristic integrand for sum(Theta Gamma), u = v theta."""
    return 1j * u / (1.0 - 1j * u)


def _h_centered(u: np.ndarray) -> np.ndarray:
    """Per-point integrand for sum(Theta (Gamma-1)).

    The direct form loses all precision for small u (the -1 cancels the
    leading 1 and the remainder is O(u^2)), which matters wherever this is
    multiplied by u^(-1-s); below 0.01 a Taylor expansion through u^7 is
    exact to float precision.
    """
    u = np.asarray(u, dtype=np.float64)
    direct = np.exp(-1j * u) / (1.0 - 1j * u) - 1.0
    u2 = u * u
    series = (
        -u2 * (0.5 - u2 * (3.0 / 8.0 - u2 * (53.0 / 144.0)))
        + 1j * u * u2 * (-1.0 / 3.0 + u2 * (11.0 / 30.0 - u2 * (103.0 / 280.0)))
    )
    return np.where(np.abs(u) < 0.01, series, direct)


_SERIES_CUT = 0.05


def _h_series_integral(s: float, centered: bool, lo: float, hi: float) -> complex:
    """Exact integral_lo^hi H(u) u^(-1-s) du for 0 <= lo < hi <= 0.05.

    Both kernels are analytic inside |u| < 1 (the nearest pole sits at
    u = -i), so the integral goes term by term through the power series;
    by u = 0.05 twenty-four terms are far below float precision.  This
    replaces quadrature next to the u^(-1-s) endpoint singularity, where
    adaptive rules stall on roundoff.
    """
    total = 0.0 + 0.0j
    if centered:
        # e^(-iu)/(1-iu) - 1 = sum_{n>=2} i^n t_n u^n, t_n = sum_j (-1)^j/j!
        t_n = 0.0
        term_j = -1.0
        for n in range(2, 26):
            term_j *= -1.0 / n
            t_n += term_j
            total += (1j**n) * t_n * (hi ** (n - s) - lo ** (n - s)) / (n - s)
        return total
    # iu/(1-iu) = sum_{n>=1} (iu)^n
    for n in range(1, 26):
        total += (1j**n) * (hi ** (n - s) - lo ** (n - s)) / (n - s)
    return total


def k_constant(s: float, regime: str) -> complex:
    """K(s) with ln phi(v) = c K(s) v^s for the untruncated law (v > 0).

    Below s=1 the integral has the closed form
    -(pi/2)/sin(pi s/2) + i (pi/2)/cos(pi s/2).  The centered regimes
    split the integral at u=1: a plain quadrature head plus the same
    Fourier-weighted tail used for truncated laws (plain semi-infinite
    quadrature loses five digits on the oscillatory tail).  At s=2 the
    integral diverges logarithmically at 0 and the Gaussian machinery
    applies instead, so that regime is rejected.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if regime == REGIME_TWO:
        raise ValueError("no power-law characteristic constant at s=2")
    if regime == REGIME_SUB:
        return complex(
            -(math.pi / 2.0) / math.sin(math.pi * s / 2.0),
            (math.pi / 2.0) / math.cos(math.pi * s / 2.0),
        )

    def head(fn):
        val, err = integrate.quad(
            lambda u: fn(_h_centered(np.asarray(u))) * u ** (-1.0 - s),
            0.0,
            1.0,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=400,
        )
        return val

    tail = -1.0 / s + _g_remainder(s, True, 1.0)
    return complex(head(np.real), head(np.imag)) + tail


def _fourier_tail(fn, a: float) -> tuple[float, float]:
    """(cos, sin) Fourier integrals of fn over [a, inf) at unit frequency."""
    vals = []
    for weight in ("cos", "sin"):
        res = integrate.quad(
            fn,
            a,
            np.inf,
            weight=weight,
            wvar=1.0,
            epsabs=1e-12,
            limlst=200,
            maxp1=100,
            full_output=1,
        )
        vals.append(res[0])
    return vals[0], vals[1]


def _g_remainder(s: float, centered: bool, w: float) -> complex:
    """integral_w^inf R(u) u^(-1-s) du for w >= 1, where H = -1 + R.

    R = 1/(1-iu) for the marked sub-regime sum and e^(-iu)/(1-iu) for the
    centered sums.  The plain case substitutes u = w r so the quadrature
    sees its mass at r = O(1); the oscillatory case needs cycle-summed
    Fourier quadrature instead, since the phase never slows down.
    """

    def f1(u: float) -> float:
        return u ** (-1.0 - s) / (1.0 + u * u)

    def f2(u: float) -> float:
        return u ** (-s) / (1.0 + u * u)

    if not centered:
        re, _ = integrate.quad(
            lambda r: w * f1(w * r), 1.0, np.inf, epsabs=1e-13, epsrel=1e-10, limit=400
        )
        im, _ = integrate.quad(
            lambda r: w * f2(w * r), 1.0, np.inf, epsabs=1e-13, epsrel=1e-10, limit=400
        )
        return complex(re, im)
    c1, s1 = _fourier_tail(f1, w)
    c2, s2 = _fourier_tail(f2, w)
    # e^(-iu) (f1 + i f2) = (f1 cos u + f2 sin u) + i (f2 cos u - f1 sin u)
    return complex(c1 + s2, c2 - s1)


def _g_truncated(s: float, regime: str, w: np.ndarray) -> np.ndarray:
    """G(w) = integral_w^inf H(u) u^(-1-s) du for truncated laws.

    Split as -w^(-s)/s plus a remainder that decays one power faster; the
    leading piece carries the cancellation against the process's expected
    count, so it must be exact, not quadrature output.  Below w = 1 the
    integral over [w, 1] is added to a cached G(1).
    """
    centered = regime != REGIME_SUB
    h = _h_centered if centered else _h_sub

    def quad_piece(lo: float, hi: float) -> complex:
        re, _ = integrate.quad(
            lambda u: np.real(h(np.asarray(u))) * u ** (-1.0 - s),
            lo,
            hi,
            epsabs=1e-13,
            epsrel=1e-10,
            limit=400,
        )
        im, _ = integrate.quad(
            lambda u: np.imag(h(np.asarray(u))) * u ** (-1.0 - s),
            lo,
            hi,
            epsabs=1e-13,
            epsrel=1e-10,
            limit=400,
        )
        return complex(re, im)

    out = np.empty(len(w), dtype=np.complex128)
    g_one: complex | None = None
    g_cut: complex | None = None
    for i, wi in enumerate(w):
        if wi >= 1.0:
            out[i] = -(wi ** -s) / s + _g_remainder(s, centered, wi)
            continue
        if g_one is None:
            g_one = -1.0 / s + _g_remainder(s, centered, 1.0)
        if wi >= _SERIES_CUT:
            out[i] = quad_piece(wi, 1.0) + g_one
            continue
        if g_cut is None:
            g_cut = quad_piece(_SERIES_CUT, 1.0) + g_one
        out[i] = _h_series_integral(s, centered, wi, _SERIES_CUT) + g_cut
    return out


@dataclass(frozen=True)
class StableLawTable:
    """CDF table of a regime's limiting law on a fixed grid."""

    regime: str
    s: float
    c: float
    delta: float
    grid: np.ndarray
    cdf: np.ndarray
    inversion_error: float

    def __post_init__(self) -> None:
        self.grid.setflags(write=False)
        self.cdf.setflags(write=False)

    def cdf_at(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.grid, self.cdf, left=0.0, right=1.0)

    def with_scale(self, c_new: float) -> "StableLawTable":
        """Same law under intensity constant c_new.

        Scaling every point by kappa multiplies the intensity constant by
        kappa^s, and the regime sums are linear in the points, so the
        quantiles scale by (c_new / c)^(1/s).
        """
        kappa = (c_new / self.c) ** (1.0 / self.s)
        return StableLawTable(
            regime=self.regime,
            s=self.s,
            c=float(c_new),
            delta=self.delta * kappa,
            grid=self.grid * kappa,
            cdf=self.cdf.copy(),
            inversion_error=self.inversion_error,
        )


def stable_cdf(
    spec: PowerLawPPP,
    regime: str,
    grid: np.ndarray,
    error_budget: float = 1e-4,
) -> StableLawTable:
    """CDF table by inversion of the explicit characteristic functional.

    ln phi(v) = c v^s K for the untruncated law (delta = 0), and
    c v^s G(v delta) for truncated laws; the CDF comes from the standard
    half-line inversion formula, with the oscillatory part integrated by
    weighted quadrature.  Raises InversionUnstable when accumulated
    quadrature error estimates and the residual non-monotonicity exceed
    error_budget per grid point.
    """
    check_regime(regime, spec.s)
    if regime not in (REGIME_SUB, REGIME_ONE, REGIME_MID):
        raise RegimeMismatch("law tables exist for s < 2 only")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with >= 2 points")
    c, s = spec.c, spec.s

    if spec.delta == 0:
        k_val = k_constant(s, regime)

        def log_phi(v: np.ndarray) -> np.ndarray:
            return c * v**s * k_val

        re_k = abs(k_val.real)
    else:
        # Tabulate G on a log grid of w = v * delta up to w_cut; below the
        # grid use the small-w expansion around the closed value at 0, and
        # past w_cut switch to the exact leading term -w^(-s)/s (which
        # cancels the expected count in ln phi to float precision) plus an
        # asymptotic remainder.  Interpolating G at large w instead would
        # break that cancellation: any table error is amplified by v^s.
        k_zero = k_constant(s, regime)
        w_lo, w_cut = 1e-8, 32.0
        w_tab = np.geomspace(w_lo, w_cut, 600)
        g_tab = _g_truncated(s, regime, w_tab)
        log_w_tab = np.log(w_tab)
        # Cubic, not linear: the weighted quadrature below resolves the
        # integrand far beyond the kinks a piecewise-linear table leaves,
        # and those kinks poison its error estimate.
        spl_re = interpolate.CubicSpline(log_w_tab, g_tab.real)
        spl_im = interpolate.CubicSpline(log_w_tab, g_tab.imag)

        def g_small(w: np.ndarray) -> np.ndarray:
            if regime == REGIME_SUB:
                # H ~ iu near 0
                return k_zero - 1j * w ** (1.0 - s) / (1.0 - s)
            # H ~ -u^2/2 near 0
            return k_zero + w ** (2.0 - s) / (2.0 * (2.0 - s))

        def r_tail(w: np.ndarray) -> np.ndarray:
            # integral_w^inf R(u) u^(-1-s) du, H = -1 + R, for w > w_cut.
            if regime == REGIME_SUB:
                return (
                    w ** (-2.0 - s) / (2.0 + s)
                    + 1j * w ** (-1.0 - s) / (1.0 + s)
                    - w ** (-4.0 - s) / (4.0 + s)
                    - 1j * w ** (-3.0 - s) / (3.0 + s)
                )
            g0 = w ** (-1.0 - s) / (1.0 - 1j * w)
            g1 = -(1.0 + s) * w ** (-2.0 - s) / (1.0 - 1j * w) + 1j * w ** (
                -1.0 - s
            ) / (1.0 - 1j * w) ** 2
            return -np.exp(-1j * w) * (1j * g0 + g1)

        def g_of(w: np.ndarray) -> np.ndarray:
            w = np.asarray(w, dtype=np.float64)
            wc = np.clip(w, w_lo, w_cut)
            out = spl_re(np.log(wc)) + 1j * spl_im(np.log(wc))
            out = np.where(w < w_lo, g_small(np.maximum(w, 1e-300)), out)
            big = np.maximum(w, w_cut)
            out = np.where(
                w > w_cut, -np.power(big, -s) / s + r_tail(big), out
            )
            return out

        def log_phi(v: np.ndarray) -> np.ndarray:
            return c * v**s * g_of(v * spec.delta)

        re_k = abs(k_zero.real)

    # The truncated laws carry an atom at 0 (no points survive) whose
    # characteristic contribution exp(-lambda) never decays; subtract it
    # and invert only the decaying remainder psi = phi - atom.
    atom = 0.0 if spec.delta == 0 else math.exp(-spec.expected_count)

    def psi(v: np.ndarray) -> np.ndarray:
        return np.exp(log_phi(v)) - atom

    if spec.delta == 0:
        # |phi| < e^-40 past this point.
        v_max = (40.0 / (c * re_k)) ** (1.0 / s)
        tail_cap = math.exp(-40.0) / (s * 40.0)
    else:
        # |psi| decays like (envelope)/v; probe the envelope and cut where
        # the neglected integral sup_{v>=V} v|psi| / (pi V) fits inside a
        # quarter of the budget.
        probes = np.geomspace(1.0, 1e7, 140)
        env_vals = probes * np.abs(psi(probes))
        rev_sup = np.maximum.accumulate(env_vals[::-1])[::-1]
        bounds = rev_sup / (probes * math.pi)
        ok = bounds <= 0.25 * error_budget
        idx = int(np.argmax(ok)) if ok.any() else len(probes) - 1
        v_max = max(float(probes[idx]), 50.0)
        tail_cap = float(bounds[idx])
    v_mid = min(1.0, v_max)

    cdf = np.empty(len(grid))
    err_total = 0.0
    psi_end = abs(complex(psi(np.asarray(v_max))))
    for i, x in enumerate(grid):
        def head(v: float, x: float = x) -> float:
            if v == 0.0:
                return 0.0
            val = psi(np.asarray(v)) * np.exp(-1j * v * x)
            return float(np.imag(val)) / v

        if abs(x) * v_max < 4.0:
            # Under a cycle of phase over the whole range: the integrand
            # is not oscillatory, and weighted quadrature only hurts.
            i0, e0 = integrate.quad(
                head, 0.0, v_max, epsabs=1e-11, epsrel=1e-9, limit=600
            )
            ic = isn = 0.0
            ec = es = 0.0
        else:
            i0, e0 = integrate.quad(
                head, 0.0, v_mid, epsabs=1e-11, epsrel=1e-9, limit=600
            )
            ic, ec = integrate.quad(
                lambda v: float(np.imag(psi(np.asarray(v)))) / v,
                v_mid,
                v_max,
                weight="cos",
                wvar=x,
                epsabs=1e-11,
                epsrel=1e-9,
                limit=600,
            )
            isn, es = integrate.quad(
                lambda v: float(np.real(psi(np.asarray(v)))) / v,
                v_mid,
                v_max,
                weight="sin",
                wvar=x,
                epsabs=1e-11,
                epsrel=1e-9,
                limit=600,
            )
        # The half-line inversion returns the jump midpoint at the atom
        # itself; CDFs here are right-continuous, so x = 0 takes the full
        # atom, matching what an empirical CDF reports.
        sign = 1.0 if x >= 0 else -1.0
        cdf[i] = 0.5 + 0.5 * atom * sign - (i0 + ic - isn) / math.pi
        if spec.delta == 0 or x == 0:
            tail_bound = tail_cap
        else:
            # Integration by parts sharpens the cap when the phase x v_max
            # has already turned over many times.
            by_parts = 2.0 * psi_end / (v_max * math.pi * abs(x))
            tail_bound = min(tail_cap, by_parts)
        err_total = max(err_total, e0 + ec + es + tail_bound)

    raw = cdf.copy()
    cdf = np.clip(cdf, 0.0, 1.0)
    cdf = np.maximum.accumulate(cdf)
    mono_violation = float(np.max(np.abs(cdf - raw)))
    if regime == REGIME_SUB and spec.delta == 0:
        cdf[grid <= 0] = 0.0
    total_err = err_total + mono_violation
    if total_err > error_budget:
        raise InversionUnstable(
            f"inversion error estimate {total_err:.2e} exceeds {error_budget:.2e}"
        )
    return StableLawTable(
        regime=regime,
        s=s,
        c=c,
        delta=spec.delta,
        grid=grid,
        cdf=cdf,
        inversion_error=total_err,
    )


def stable_fit_scale(
    sample: np.ndarray, base: StableLawTable
) -> tuple[float, float]:
    """Fit the intensity constant by minimizing the KS distance.

    Uses the scaling property: the law under constant c equals the base
    law with quantiles multiplied by (c / c_base)^(1/s).  Returns
    (c_hat, ks_at_fit).
    """
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = len(x)
    ranks_hi = np.arange(1, n + 1) / n
    ranks_lo = np.arange(0, n) / n

    def ks_of(log_kappa: float) -> float:
        f = base.cdf_at(x / math.exp(log_kappa))
        return float(np.max(np.maximum(ranks_hi - f, f - ranks_lo)))

    res = optimize.minimize_scalar(
        ks_of, bounds=(-6.0, 6.0), method="bounded",
        options={"xatol": 1e-6},
    )
    kappa = math.exp(res.x)
    return base.c * kappa**base.s, float(res.fun)


# ---------------------------------------------------------------------------
# Frechet law of the maximum


def frechet_cdf(c_hat: float, s: float, x: np.ndarray) -> np.ndarray:
    """exp(-(c/s) x^(-s)) for x > 0."""
    if c_hat <= 0 or s <= 0:
        raise ValueError("constant and exponent must be positive")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("the law lives on x > 0")
    return np.exp(-(c_hat / s) * x ** (-s))


def frechet_fit(sample: np.ndarray, s: float) -> float:
    """Maximum-likelihood scale constant at fixed exponent.

    With F = exp(-(c/s) x^-s), the log-likelihood derivative in c has the
    unique root c = s * n / sum(x^-s).
    """
    x = np.asarray(sample, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("sample must be positive")
    return float(s * len(x) / np.sum(x ** (-s)))


# ---------------------------------------------------------------------------
# Cluster-rate integral and stationary cluster shape


@dataclass(frozen=True)
class MuEstimate:
    value: float
    se: float
    m: int
    y: float


def estimate_mu_m(
    model: EnvironmentModel,
    s: float,
    c_hat: float,
    delta: float,
    y: float,
    m: int,
    n_samples: int,
    seed: int = 0,
) -> MuEstimate:
    """Monte Carlo of the m-site cluster-rate integral at level y.

    Averages (D_0^s y^-s - max_{1<=j<=m} D_j^s) over the event
    max_j D_j < D_0 / y, with D_j = p_j^{-1} alpha_{j+1} ... alpha_m over a
    fresh (m+1)-site window, scaled by c_hat * delta^{-s}.  The sequence in
    m is monotone non-increasing toward its limit.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if y < 1.0:
        raise ValueError("y must be at least 1")
    rng = derive_rng(seed, TAG_LIMIT, m)
    p = model.draw_p(rng, n_samples * (m + 1)).reshape(n_samples, m + 1)
    alpha = (1.0 - p) / p
    # suffix[j] = alpha_{j+1} * ... * alpha_m (1 for j = m)
    suffix = np.ones_like(p)
    suffix[:, :-1] = np.cumprod(alpha[:, :0:-1], axis=1)[:, ::-1]
    d = suffix / p
    d0 = d[:, 0]
    dmax = d[:, 1:].max(axis=1)
    x = (d0**s * y ** (-s) - dmax**s) * (dmax < d0 / y)
    scale = c_hat * delta ** (-s)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(n_samples))
    return MuEstimate(value=scale * mean, se=scale * se, m=m, y=y)


def sample_limit_b(
    model: EnvironmentModel,
    K: int,
    seed: int,
    n_draws: int = 1,
    tilt_exponent: float | None = None,
) -> np.ndarray:
    """Draws of the limiting cluster-shape series, truncated at K terms.

    b = 1 + q_0 * sum_{k=1..K} p_{-k}^{-1} alpha_{-1} ... alpha_{-k+1},
    all sites fresh i.i.d. draws.  The truncation tail is controlled by
    E[alpha]^K when E[alpha] < 1; for heavier models compare quantiles
    across K instead of means.  tilt_exponent biases the site-0 law by
    p^{-tilt} (exact rejection), matching the size bias induced by
    conditioning on a deep trap at the cluster root; None leaves the raw
    model law.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    rng = derive_rng(seed, TAG_LIMIT)
    p = model.draw_p(rng, n_draws * K).reshape(n_draws, K)
    alpha = (1.0 - p) / p
    inner = 1.0 / p[:, 0]
    if K > 1:
        prefix = np.cumprod(alpha[:, : K - 1], axis=1)
        inner = inner + (prefix / p[:, 1:]).sum(axis=1)
    if tilt_exponent is None:
        p0 = model.draw_p(rng, n_draws)
    else:
        p0 = _tilted_p(model, rng, n_draws, tilt_exponent)
    return 1.0 + (1.0 - p0) * inner


def _tilted_p(
    model: EnvironmentModel, rng: np.random.Generator, n: int, exponent: float
) -> np.ndarray:
    """Exact rejection sampling of p under the density tilt p^(-exponent)."""
    out = np.empty(n)
    filled = 0
    p_floor = model.eps0
    while filled < n:
        cand = model.draw_p(rng, max(2 * (n - filled), 64))
        accept = rng.random(len(cand)) < (p_floor / cand) ** exponent
        kept = cand[accept]
        take = min(len(kept), n - filled)
        out[filled : filled + take] = kept[:take]
        filled += take
    return out
