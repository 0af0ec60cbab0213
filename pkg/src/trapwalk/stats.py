"""Statistical engine: chain oracles, goodness-of-fit tests, tail fits.

The three-state absorbing chain is the exact model of how visit counts at
two sites interact: state 1 is the left site, state 2 the right site,
absorption is the walk escaping to the right forever.  Its visit-count
moments have closed forms that are double-checked against an independent
linear solve and a trajectory simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps
from scipy.special import logsumexp

from . import _kernels
from .environments import Environment
from .occupancy import RhoProfile, compute_rho
from .seeding import TAG_CHAIN, derive_u32_array

__all__ = [
    "InsufficientData",
    "WindowTooSmall",
    "ThreeStateChain",
    "ChainMoments",
    "chain_moments",
    "chain_moments_solve",
    "chain_moments_mc",
    "chain_from_walk",
    "TestReport",
    "ks_test",
    "ks_two_sample",
    "ks_statistic_discrete",
    "poisson_count_test",
    "HillFit",
    "hill_fit",
    "pearson",
]


class InsufficientData(ValueError):
    """Not enough observations to run the requested test or fit."""


class WindowTooSmall(ValueError):
    """Requested sites do not fit the environment window."""


@dataclass(frozen=True)
class ThreeStateChain:
    """Absorbing chain on {1, 2, out}: rows (p1, q1, 0) and (q2, p2, eps).

    p_bar + q_bar = 1 and q_dbar + p_dbar + eps = 1; eps > 0 so absorption
    is reachable.  Boundary zeros (q_dbar = p_dbar = 0, eps = 1) are valid.
    """

    p_bar: float
    q_bar: float
    q_dbar: float
    p_dbar: float
    eps: float

    def __post_init__(self) -> None:
        vals = (self.p_bar, self.q_bar, self.q_dbar, self.p_dbar, self.eps)
        if any(v < 0 or v > 1 for v in vals):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if abs(self.p_bar + self.q_bar - 1.0) > 1e-9:
            raise ValueError("first row must sum to 1")
        if abs(self.q_dbar + self.p_dbar + self.eps - 1.0) > 1e-9:
            raise ValueError("second row must sum to 1")
        if self.eps <= 0:
            raise ValueError("absorption probability must be positive")
        if self.q_bar <= 0:
            raise ValueError("state 2 must be reachable (q_bar > 0)")


@dataclass(frozen=True)
class ChainMoments:
    """Expected visit counts and their products, started in state 1.

    u1/u2: expected visits to state 1 from state 1/2; v1/v2 likewise for
    state 2; w1/w2: expected products of the two counts; cov and corr are
    for the pair of counts seen from state 1.  corr is NaN when a count is
    deterministic (zero variance).
    """

    u1: float
    u2: float
    v1: float
    v2: float
    w1: float
    w2: float
    cov: float
    corr: float


def _corr_from(u1: float, v2: float, cov: float) -> float:
    var1 = u1 * u1 - u1
    var2 = v2 * v2 - v2
    if var1 <= 0 or var2 <= 0:
        return math.nan
    return cov / math.sqrt(var1 * var2)


def chain_moments(chain: ThreeStateChain) -> ChainMoments:
    """Closed-form visit-count moments of the three-state chain."""
    eps, q_bar, q_dbar = chain.eps, chain.q_bar, chain.q_dbar
    u1 = (eps + q_dbar) / (eps * q_bar)
    u2 = q_dbar / (eps * q_bar)
    v1 = 1.0 / eps
    v2 = 1.0 / eps
    w1 = v1 * (u1 + u2)
    w2 = u2 * (v1 + v2)
    cov = v1 * u2
    return ChainMoments(u1, u2, v1, v2, w1, w2, cov, _corr_from(u1, v2, cov))


def chain_moments_solve(chain: ThreeStateChain) -> ChainMoments:
    """Independent oracle: fundamental matrix and first-step product system.

    Visit counts N = (I - Q)^{-1} for the transient block Q; the product
    moments solve the linear system obtained by conditioning on the first
    transition, using no closed form from chain_moments.
    """
    q = np.array(
        [[chain.p_bar, chain.q_bar], [chain.q_dbar, chain.p_dbar]], dtype=float
    )
    eye = np.eye(2)
    fundamental = np.linalg.solve(eye - q, eye)
    u1, v1 = fundamental[0]
    u2, v2 = fundamental[1]
    # First-step equations: w1 = v1 + p_bar w1 + q_bar w2 and
    # w2 = u2 + q_dbar w1 + p_dbar w2, i.e. (I - Q) w = (v1, u2).
    w1, w2 = np.linalg.solve(eye - q, np.array([v1, u2]))
    cov = w1 - u1 * v1
    return ChainMoments(u1, u2, v1, v2, w1, w2, cov, _corr_from(u1, v2, cov))


@dataclass(frozen=True)
class ChainMC:
    """Monte Carlo moments of the chain with batch standard errors."""

    n_runs: int
    u1: float
    u1_se: float
    v1: float
    v1_se: float
    cov: float
    cov_se: float
    corr: float


def chain_moments_mc(
    chain: ThreeStateChain, n_runs: int, seed: int, n_batches: int = 100
) -> ChainMC:
    """Trajectory-simulation oracle for the chain's visit-count moments."""
    seeds = derive_u32_array(seed, n_runs, TAG_CHAIN).astype(np.uint32)
    eta1, eta2 = _kernels.simulate_chain_counts(
        chain.p_bar, chain.q_bar, chain.q_dbar, chain.p_dbar, seeds
    )
    eta1 = eta1.astype(np.float64)
    eta2 = eta2.astype(np.float64)
    u1, v1 = eta1.mean(), eta2.mean()
    cov = float(np.mean((eta1 - u1) * (eta2 - v1)))
    corr = cov / math.sqrt(eta1.var() * eta2.var())
    batches = np.array_split(np.arange(n_runs), n_batches)
    bc = np.array(
        [
            np.mean(
                (eta1[idx] - eta1[idx].mean()) * (eta2[idx] - eta2[idx].mean())
            )
            for idx in batches
        ]
    )
    return ChainMC(
        n_runs=n_runs,
        u1=float(u1),
        u1_se=float(eta1.std(ddof=1) / math.sqrt(n_runs)),
        v1=float(v1),
        v1_se=float(eta2.std(ddof=1) / math.sqrt(n_runs)),
        cov=cov,
        cov_se=float(bc.std(ddof=1) / math.sqrt(len(batches))),
        corr=float(corr),
    )


def chain_from_walk(
    env: Environment,
    n1: int,
    n2: int,
    profile: RhoProfile | None = None,
    tol: float = 1e-8,
) -> ThreeStateChain:
    """Embedded two-site chain of a walk on its visits to sites n1 < n2.

    Between consecutive visits to {n1, n2} the walk performs a gambler's
    ruin on the gap, so the transition probabilities are ratios of the
    gap's alpha partial sums (computed in log space); the absorption
    probability equals the reciprocal of the expected visit count at n2,
    via the profile's z values.
    """
    if n1 < 0 or n2 <= n1:
        raise WindowTooSmall("need 0 <= n1 < n2")
    if profile is None or profile.n_sites < n2 + 2:
        profile = compute_rho(env, n2 + 2, tol=tol)
    work = profile.env
    alpha = work.alpha()
    p = work.p

    def site(i: int) -> int:
        return i - work.lo

    # Gap partial sums: pi_i = prod(alpha over n1+1 .. i), pi_{n1} = 1.
    gap_log = np.log(alpha[site(n1 + 1) : site(n2)])
    prefix = np.concatenate([[0.0], np.cumsum(gap_log)])
    log_s = logsumexp(prefix)
    log_a = prefix[-1]
    q_bar = p[site(n1)] * math.exp(-log_s)
    q_dbar = (1.0 - p[site(n2)]) * math.exp(log_a - log_s)
    eps = 1.0 / float(profile.rho_ext[n2])
    p_dbar = 1.0 - q_dbar - eps
    if p_dbar < -1e-9:
        raise WindowTooSmall("inconsistent probabilities; increase tolerance")
    return ThreeStateChain(
        p_bar=1.0 - q_bar,
        q_bar=q_bar,
        q_dbar=q_dbar,
        p_dbar=max(p_dbar, 0.0),
        eps=eps,
    )


# ---------------------------------------------------------------------------
# Test reports and classical statistics


@dataclass(frozen=True)
class TestReport:
    """Outcome of one statistical check, serializable into manifests."""

    name: str
    statistic: float
    sample_size: int
    p_value: float | None
    threshold: float
    mode: str  # "p_above" or "stat_below"
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "sample_size": self.sample_size,
            "p_value": self.p_value,
            "threshold": self.threshold,
            "mode": self.mode,
            "passed": bool(self.passed),
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return obj


def report_from_stat(
    name: str, statistic: float, n: int, threshold: float, p_value: float | None = None,
    details: dict | None = None,
) -> TestReport:
    """Pass/fail on 'statistic below threshold'."""
    return TestReport(
        name=name,
        statistic=float(statistic),
        sample_size=int(n),
        p_value=p_value,
        threshold=float(threshold),
        mode="stat_below",
        passed=bool(statistic < threshold),
        details=details or {},
    )


def report_from_pvalue(
    name: str, statistic: float, n: int, p_value: float, threshold: float,
    details: dict | None = None,
) -> TestReport:
    """Pass/fail on 'p-value above threshold'."""
    return TestReport(
        name=name,
        statistic=float(statistic),
        sample_size=int(n),
        p_value=float(p_value),
        threshold=float(threshold),
        mode="p_above",
        passed=bool(p_value > threshold),
        details=details or {},
    )


def ks_test(sample: np.ndarray, cdf, name: str = "ks", threshold: float = 0.01) -> TestReport:
    """One-sample KS against a continuous CDF callable."""
    sample = np.asarray(sample, dtype=np.float64)
    if len(sample) == 0:
        raise InsufficientData("empty sample")
    res = sps.kstest(sample, cdf)
    return report_from_pvalue(name, res.statistic, len(sample), res.pvalue, threshold)


def ks_two_sample(
    a: np.ndarray, b: np.ndarray, name: str = "ks2", threshold: float = 0.01
) -> TestReport:
    """Two-sample KS with scipy's exact/asymptotic p-value selection."""
    if len(a) == 0 or len(b) == 0:
        raise InsufficientData("empty sample")
    res = sps.ks_2samp(a, b, method="auto")
    return report_from_pvalue(
        name, res.statistic, len(a) + len(b), res.pvalue, threshold
    )


def ks_statistic_discrete(sample: np.ndarray, cdf_at: np.ndarray, support_max: int) -> float:
    """Sup-distance between an integer sample's ECDF and a lattice CDF.

    cdf_at[k] must hold the CDF at integer k for k = 0 .. support_max;
    both step functions jump only at integers, so the sup is attained at
    integer arguments.
    """
    sample = np.asarray(sample)
    n = len(sample)
    if n == 0:
        raise InsufficientData("empty sample")
    counts = np.bincount(np.clip(sample, 0, support_max), minlength=support_max + 1)
    ecdf = np.cumsum(counts) / n
    return float(np.max(np.abs(ecdf - cdf_at)))


def poisson_count_test(
    counts: np.ndarray,
    name: str = "poisson_counts",
    threshold: float = 0.01,
    min_expected: float = 5.0,
) -> TestReport:
    """Chi-square goodness of fit of integer counts against Poisson(mean).

    Bins with expected mass below min_expected are merged from the right
    tail inward; one degree of freedom is charged for the estimated rate.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if len(counts) < 20:
        raise InsufficientData("need at least 20 count observations")
    lam = counts.mean()
    k_hi = int(counts.max())
    ks = np.arange(k_hi + 1)
    probs = sps.poisson.pmf(ks, lam)
    probs = np.append(probs, max(1.0 - probs.sum(), 0.0))  # tail bin
    observed = np.bincount(counts, minlength=k_hi + 1).astype(float)
    observed = np.append(observed, 0.0)
    expected = probs * len(counts)
    # Merge right-to-left until every kept bin has enough expected mass.
    obs_bins, exp_bins = [], []
    acc_o, acc_e = 0.0, 0.0
    for o, e in zip(observed[::-1], expected[::-1]):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    if acc_e > 0 and obs_bins:
        obs_bins[-1] += acc_o
        exp_bins[-1] += acc_e
    if len(obs_bins) < 3:
        raise InsufficientData("too few populated count bins for a chi-square")
    obs_arr = np.array(obs_bins[::-1])
    exp_arr = np.array(exp_bins[::-1])
    exp_arr *= obs_arr.sum() / exp_arr.sum()
    res = sps.chisquare(obs_arr, exp_arr, ddof=1)
    return report_from_pvalue(
        name,
        res.statistic,
        len(counts),
        res.pvalue,
        threshold,
        details={"lambda_hat": float(lam), "bins": len(obs_bins)},
    )


@dataclass(frozen=True)
class HillFit:
    """Hill tail-index fit on the top order statistics."""

    s_hat: float
    c_hat: float
    k_top: int
    ci_lo: float
    ci_hi: float


def hill_fit(sample: np.ndarray, k_top: int) -> HillFit:
    """Hill estimator of the tail exponent plus a level-based constant.

    Uses the k_top largest observations; the constant comes from the
    exceedance frequency at the (k_top+1)-th order statistic.  The CI is
    the usual 1.96 / sqrt(k) normal band for 1/s_hat.
    """
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = len(x)
    if k_top < 50:
        raise InsufficientData("need k_top >= 50")
    if n <= k_top:
        raise InsufficientData("sample smaller than k_top")
    top = x[n - k_top :]
    pivot = x[n - k_top - 1]
    if pivot <= 0:
        raise InsufficientData("tail fit needs positive observations")
    inv_s = float(np.mean(np.log(top / pivot)))
    s_hat = 1.0 / inv_s
    c_hat = (k_top / n) * pivot**s_hat
    half = 1.96 / math.sqrt(k_top)
    return HillFit(
        s_hat=s_hat,
        c_hat=float(c_hat),
        k_top=k_top,
        ci_lo=1.0 / (inv_s * (1.0 + half)),
        ci_hi=1.0 / (inv_s * (1.0 - half)),
    )


def pearson(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Correlation coefficient with a delta-method standard error."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    if n < 4 or len(y) != n:
        raise InsufficientData("need two equal samples of length >= 4")
    r = float(np.corrcoef(x, y)[0, 1])
    return r, (1.0 - r * r) / math.sqrt(n - 1)
