"""Acceptance experiment suite: fourteen statistical and exact checks.

Each criterion function reruns one desk-scale experiment from the package's
acceptance battery against the limit predictions implemented by the other
modules: exact recursion oracles, quenched geometric occupation laws,
three-state chain closed forms, tail-constant flatness, Poisson cluster
statistics, exponential marks, occupation-time reconstruction, stable /
Fréchet / Gaussian limit fits, Campbell count formulas, and dual-sampler
equivalence.  All randomness flows from seeds pinned in the configuration,
so every run of the same configuration reproduces identical statistics.

Criterion functions return a :class:`CriterionResult` bundling pass/fail
reports, plot-ready tables, and fitted constants; :func:`run_verify` runs
the registry, prints one verdict line per criterion, and assembles a
:class:`RunManifest` that can be persisted next to the CSV outputs.
"""

from __future__ import annotations

import csv
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.stats as sps

from . import __version__
from .config import ExperimentConfig, config_hash
from .environments import Environment, EnvironmentModel, TwoPointModel, sample_environment
from .limitlaws import (
    PowerLawPPP,
    campbell_mean,
    campbell_var,
    frechet_cdf,
    frechet_fit,
    mark_ppp,
    product_tail_count,
    sample_ppp,
    stable_cdf,
    stable_fit_scale,
)
from .occupancy import (
    _z_batch,
    compute_rho,
    estimate_tail_constants,
    tail_levels,
)
from .regimes import REGIME_SUB
from .seeding import child_sequence
from .stats import (
    InsufficientData,
    TestReport,
    chain_from_walk,
    chain_moments,
    chain_moments_mc,
    chain_moments_solve,
    ks_statistic_discrete,
    ks_two_sample,
    pearson,
    poisson_count_test,
    report_from_pvalue,
    report_from_stat,
)
from .traps import attach_marks, detect_clusters
from .walks import calibrate_buffer, sample_walks, simulate_crossings_fast

__all__ = [
    "CRITERIA",
    "CriterionResult",
    "RunManifest",
    "run_criterion",
    "run_verify",
    "write_outputs",
]


# ---------------------------------------------------------------------------
# Result containers


@dataclass(frozen=True)
class CriterionResult:
    """Everything one acceptance experiment produced."""

    key: str
    title: str
    reports: list[TestReport]
    tables: dict[str, list[dict]] = field(default_factory=dict)
    fitted: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record of one full verification run."""

    config_hash: str
    config_name: str
    seed: int
    solved_s: float
    regime: str
    package_version: str
    versions: dict
    fitted_constants: dict
    reports: list[TestReport]
    criteria: list[dict]
    wall_clock_s: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "config_name": self.config_name,
            "seed": self.seed,
            "solved_s": self.solved_s,
            "regime": self.regime,
            "package_version": self.package_version,
            "versions": self.versions,
            "fitted_constants": self.fitted_constants,
            "criteria": self.criteria,
            "reports": [r.to_dict() for r in self.reports],
            "wall_clock_s": self.wall_clock_s,
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# Shared helpers


def _params(config: ExperimentConfig, key: str, defaults: dict) -> dict:
    merged = dict(defaults)
    merged.update(config.criterion_params(key))
    return merged


def _default_seed(config: ExperimentConfig, index: int, slot: int) -> int:
    """Deterministic fallback seed for configs that do not pin one."""
    return int(child_sequence(config.seed, 77, index, slot).generate_state(1, np.uint64)[0])


def _env_seeds(master: int, n: int) -> np.ndarray:
    """n u64 environment seeds derived from one master seed."""
    return child_sequence(master, 11).generate_state(int(n), np.uint64)


def _walk_seeds(master: int, n: int) -> np.ndarray:
    return child_sequence(master, 13).generate_state(int(n), np.uint64)


def _pmap(fn, items: list, workers: int) -> list:
    """Order-preserving map, optionally fanned out to a process pool.

    Results are aggregated by input position, so the worker count never
    changes the output.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _max_abs_z(pairs: list[tuple[float, float, float]]) -> float:
    """max |estimate - target| / se over (estimate, target, se) triples."""
    return max(abs(est - tgt) / se for est, tgt, se in pairs)


# ---------------------------------------------------------------------------
# Criterion 1: exact recursion on a constant environment


def criterion_c01(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c01_exact_recursion",
        {"p": 2.0 / 3.0, "n_sites": 1000, "tol": 1e-10, "max_err": 1e-9, "max_seconds": 1.0},
    )
    p = float(pars["p"])
    n = int(pars["n_sites"])
    model = TwoPointModel(p_fast=p, p_slow=p, w=0.5)
    env = sample_environment(model, 0, n, seed=0)
    alpha = (1.0 - p) / p
    target = 1.0 / ((1.0 - alpha) * p)  # closed form: z* = 1/(1-alpha), rho* = z*/p

    t_run = time.perf_counter()
    profile = compute_rho(env, n, tol=float(pars["tol"]))
    elapsed = time.perf_counter() - t_run
    err = float(np.abs(profile.rho - target).max())

    reports = [
        report_from_stat(
            "constant-environment recursion max abs error",
            err,
            n,
            float(pars["max_err"]),
            details={"target": target, "err_bound": profile.err_bound},
        ),
        report_from_stat(
            "constant-environment recursion runtime [s]",
            elapsed,
            1,
            float(pars["max_seconds"]),
        ),
    ]
    return CriterionResult(
        key="c01_exact_recursion",
        title="exact recursion on a constant environment",
        reports=reports,
        tables={},
        fitted={},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 2: quenched geometric occupation law


def _spread_sites(rho: np.ndarray, lo: int, hi: int, count: int) -> np.ndarray:
    """Deterministic interior sites whose rho values span the quantile range."""
    interior = np.arange(lo, hi)
    values = rho[interior]
    order = np.argsort(values, kind="stable")
    targets = ((np.arange(count) + 0.5) / count * (len(interior) - 1)).astype(int)
    chosen: list[int] = []
    used = set()
    for t in targets:
        k = int(t)
        while k in used:
            k = (k + 1) % len(interior)
        used.add(k)
        chosen.append(int(interior[order[k]]))
    return np.array(sorted(chosen), dtype=np.int64)


def criterion_c02(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c02_geometric_law",
        {
            "env_seed": _default_seed(config, 2, 0),
            "walk_seed": _default_seed(config, 2, 1),
            "n_sites": 512,
            "n_walks": 100_000,
            "n_tracked": 10,
            "ks_max": 0.01,
        },
    )
    n = int(pars["n_sites"])
    model = config.model
    env = sample_environment(model, 0, n, int(pars["env_seed"]))
    buffer, profile = calibrate_buffer(env, n)
    sites = _spread_sites(profile.rho_ext, n // 8, 7 * n // 8, int(pars["n_tracked"]))
    batch = sample_walks(
        env,
        n,
        int(pars["n_walks"]),
        int(pars["walk_seed"]),
        sampler="fast",
        buffer=buffer,
        tracked_sites=sites,
    )
    reports = []
    rows = []
    for i, site in enumerate(sites):
        sample = batch.tracked_xi[:, i]
        rho = float(profile.rho_ext[site])
        support_max = int(sample.max())
        k = np.arange(support_max + 1, dtype=np.float64)
        cdf_at = -np.expm1(k * math.log1p(-1.0 / rho))  # 1 - (1 - 1/rho)^k
        stat = ks_statistic_discrete(sample, cdf_at, support_max)
        reports.append(
            report_from_stat(
                f"geometric occupation KS at site {int(site)}",
                stat,
                len(sample),
                float(pars["ks_max"]),
                details={"rho": rho, "mean_visits": float(sample.mean())},
            )
        )
        rows.append(
            {
                "site": int(site),
                "rho": rho,
                "ks": stat,
                "mean_visits": float(sample.mean()),
                "env_seed": int(pars["env_seed"]),
            }
        )
    return CriterionResult(
        key="c02_geometric_law",
        title="quenched geometric occupation law",
        reports=reports,
        tables={"c02_sites": rows},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 3: three-state chain oracle


def criterion_c03(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c03_chain_oracle",
        {
            "chain_seed": _default_seed(config, 3, 0),
            "mc_seed": _default_seed(config, 3, 1),
            "n_chains": 1000,
            "rel_tol": 1e-12,
            "mc_runs": 1_000_000,
            "z_max": 4.0,
            "pinned": {"p_bar": 0.35, "q_bar": 0.65, "q_dbar": 0.55, "p_dbar": 0.41, "eps": 0.04},
        },
    )
    rng = np.random.default_rng(int(pars["chain_seed"]))
    worst = 0.0
    for _ in range(int(pars["n_chains"])):
        q_bar = rng.uniform(0.05, 0.95)
        eps = rng.uniform(0.01, 0.5)
        q_dbar = rng.uniform(0.0, 1.0 - eps)
        chain = ThreeStateChainSafe(
            p_bar=1.0 - q_bar, q_bar=q_bar, q_dbar=q_dbar, p_dbar=1.0 - eps - q_dbar, eps=eps
        )
        closed = chain_moments(chain)
        solved = chain_moments_solve(chain)
        for name in ("u1", "u2", "v1", "v2", "w1", "w2", "cov"):
            a, b = getattr(closed, name), getattr(solved, name)
            scale = max(abs(a), abs(b), 1e-300)
            worst = max(worst, abs(a - b) / scale)
    reports = [
        report_from_stat(
            "chain closed form vs linear solve max relative error",
            worst,
            int(pars["n_chains"]),
            float(pars["rel_tol"]),
        )
    ]

    pin = pars["pinned"]
    chain = ThreeStateChainSafe(**{k: float(v) for k, v in pin.items()})
    closed = chain_moments(chain)
    mc = chain_moments_mc(chain, int(pars["mc_runs"]), int(pars["mc_seed"]))
    z = _max_abs_z(
        [
            (mc.u1, closed.u1, mc.u1_se),
            (mc.v1, closed.v1, mc.v1_se),
            (mc.cov, closed.cov, mc.cov_se),
        ]
    )
    reports.append(
        report_from_stat(
            "pinned chain Monte Carlo max |z|",
            z,
            int(pars["mc_runs"]),
            float(pars["z_max"]),
            details={
                "u1": closed.u1,
                "u1_mc": mc.u1,
                "v1": closed.v1,
                "v1_mc": mc.v1,
                "cov": closed.cov,
                "cov_mc": mc.cov,
            },
        )
    )
    return CriterionResult(
        key="c03_chain_oracle",
        title="three-state chain closed forms vs solver and Monte Carlo",
        reports=reports,
        wall_clock_s=time.perf_counter() - t0,
    )


def ThreeStateChainSafe(**kw):
    from .stats import ThreeStateChain

    # Clamp tiny negative round-off in generated rows.
    kw["p_dbar"] = max(kw["p_dbar"], 0.0)
    return ThreeStateChain(**kw)


# ---------------------------------------------------------------------------
# Criterion 4: neighbour correlation bound and chain predictions


def _bin_sites(
    rho: np.ndarray, bins: list, lo: int, hi: int, per_bin: int, spacing: int
) -> list[int]:
    chosen: list[int] = []
    for b_lo, b_hi in bins:
        found = 0
        for site in range(lo, hi):
            if found >= per_bin:
                break
            if not b_lo <= rho[site] < b_hi:
                continue
            if any(abs(site - c) < spacing for c in chosen):
                continue
            chosen.append(site)
            found += 1
        if found == 0:
            raise InsufficientData(
                f"no interior site with rho in [{b_lo}, {b_hi}) for this seed"
            )
    return sorted(chosen)


def criterion_c04(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c04_neighbour_corr",
        {
            "env_seed": _default_seed(config, 4, 0),
            "walk_seed": _default_seed(config, 4, 1),
            "n_sites": 1024,
            "n_walks": 120_000,
            "bins": [[5.0, 10.0], [10.0, 50.0], [50.0, 500.0]],
            "per_bin": 3,
            "spacing": 16,
            "headroom": 1.5,
            "z_max": 4.0,
        },
    )
    n = int(pars["n_sites"])
    env = sample_environment(config.model, 0, n, int(pars["env_seed"]))
    buffer, profile = calibrate_buffer(env, n)
    rho = profile.rho_ext
    sites = _bin_sites(
        rho, pars["bins"], n // 16, n - n // 16, int(pars["per_bin"]), int(pars["spacing"])
    )
    tracked = np.array(sorted({s for site in sites for s in (site, site + 1)}))
    col = {int(s): i for i, s in enumerate(tracked)}
    batch = sample_walks(
        env,
        n,
        int(pars["n_walks"]),
        int(pars["walk_seed"]),
        sampler="fast",
        buffer=buffer,
        tracked_sites=tracked,
    )

    rows = []
    deficits, inv_rhos, chain_zs = [], [], []
    for site in sites:
        x = batch.tracked_xi[:, col[site]].astype(np.float64)
        y = batch.tracked_xi[:, col[site + 1]].astype(np.float64)
        r, se = pearson(x, y)
        deficit = 1.0 - r
        chain = chain_from_walk(env, site, site + 1, profile=profile)
        predicted = chain_moments(chain).corr
        z = abs(r - predicted) / se
        deficits.append(deficit)
        inv_rhos.append(1.0 / rho[site])
        chain_zs.append(z)
        rows.append(
            {
                "site": int(site),
                "rho": float(rho[site]),
                "one_minus_corr": deficit,
                "corr": r,
                "corr_se": se,
                "chain_corr": predicted,
                "chain_z": z,
                "env_seed": int(pars["env_seed"]),
            }
        )
    deficits_arr = np.array(deficits)
    inv_arr = np.array(inv_rhos)
    c_fit = float((inv_arr * deficits_arr).sum() / (inv_arr * inv_arr).sum())
    margin = float((deficits_arr / (c_fit * inv_arr)).max())
    for row in rows:
        row["fitted_C"] = c_fit
    reports = [
        report_from_stat(
            "neighbour correlation deficit vs fitted C/rho max ratio",
            margin,
            len(sites),
            float(pars["headroom"]),
            details={"fitted_C": c_fit, "sites": [int(s) for s in sites]},
        ),
        report_from_stat(
            "embedded-chain correlation prediction max |z|",
            float(max(chain_zs)),
            int(pars["n_walks"]),
            float(pars["z_max"]),
        ),
    ]
    return CriterionResult(
        key="c04_neighbour_corr",
        title="neighbour occupation correlation: 1/rho bound and chain predictions",
        reports=reports,
        tables={"c04_sites": rows},
        fitted={"neighbour_corr_C": c_fit},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 5: tail-constant flatness and ratio


def criterion_c05(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c05_tail_constants",
        {
            "seed": _default_seed(config, 5, 0),
            "probe_seed": _default_seed(config, 5, 1),
            "n_samples": 1_000_000,
            "n_probe": 200_000,
            "lo_q": 0.999,
            "hi_q": 0.9995,
            "n_levels": 5,
            "flatness_max": 1.5,
            "ratio_rel_max": 0.2,
        },
    )
    model = config.model
    s = config.solved_s
    from .occupancy import default_window

    width = default_window(model)
    rng = np.random.default_rng(int(pars["probe_seed"]))
    z_probe, _ = _z_batch(model, rng, int(pars["n_probe"]), width)
    levels = tail_levels(
        z_probe, lo_q=float(pars["lo_q"]), hi_q=float(pars["hi_q"]), count=int(pars["n_levels"])
    )
    est = estimate_tail_constants(model, s, levels, int(pars["n_samples"]), seed=int(pars["seed"]))
    flat = float(est.c_hat.max() / est.c_hat.min())
    ratio = est.c_star_point() / est.c_point()
    rel = abs(ratio / est.ratio_target - 1.0)
    reports = [
        report_from_stat(
            "tail constant flatness max/min over levels",
            flat,
            int(pars["n_samples"]),
            float(pars["flatness_max"]),
            details={"levels": levels.tolist(), "c_hat": est.c_hat.tolist()},
        ),
        report_from_stat(
            "tail constant ratio vs E[p^-s] relative error",
            rel,
            int(pars["n_samples"]),
            float(pars["ratio_rel_max"]),
            details={
                "ratio": ratio,
                "ratio_target": est.ratio_target,
                "ratio_target_se": est.ratio_target_se,
            },
        ),
    ]
    rows = [
        {
            "level": float(level),
            "c_hat": float(c),
            "c_star_hat": float(cs),
            "n_exceed": int(ne),
            "n_exceed_rho": int(nr),
        }
        for level, c, cs, ne, nr in zip(
            est.levels, est.c_hat, est.c_star_hat, est.n_exceed, est.n_exceed_rho
        )
    ]
    return CriterionResult(
        key="c05_tail_constants",
        title="polynomial tail constants: flatness and c*/c ratio",
        reports=reports,
        tables={"c05_levels": rows},
        fitted={"c_hat": est.c_point(), "c_star_hat": est.c_star_point()},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 6: Poisson cluster counts, uniform positions, doubling ratio


def _c06_env_task(args) -> tuple[list[int], list[list[float]]]:
    model, n_sites, rho_tol, deltas, env_seed = args
    env = sample_environment(model, 0, n_sites, int(env_seed))
    profile = compute_rho(env, n_sites, tol=rho_tol)
    s = model.tail_index()
    counts, positions = [], []
    for delta in deltas:
        sample = detect_clusters(profile, s, delta)
        counts.append(sample.count)
        positions.append([c.t for c in sample.clusters])
    return counts, positions


def criterion_c06(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c06_poisson_clusters",
        {
            "env_seed": _default_seed(config, 6, 0),
            "n_sites": 100_000,
            "deltas": [0.5, 1.0],
            "n_envs": 2000,
            "chi2_p_min": 0.01,
            "ks_p_min": 0.01,
            "doubling_rel_max": 0.15,
        },
    )
    n = int(pars["n_sites"])
    deltas = [float(d) for d in pars["deltas"]]
    n_envs = int(pars["n_envs"])
    seeds = _env_seeds(int(pars["env_seed"]), n_envs)
    tasks = [(config.model, n, config.rho_tol, deltas, int(sd)) for sd in seeds]
    results = _pmap(_c06_env_task, tasks, workers)

    s = config.solved_s
    reports = []
    count_rows = []
    lambda_hat = {}
    for j, delta in enumerate(deltas):
        counts = np.array([res[0][j] for res in results], dtype=np.int64)
        positions = np.concatenate([res[1][j] for res in results]) if counts.sum() else np.array([])
        lambda_hat[delta] = float(counts.mean())
        reports.append(
            poisson_count_test(
                counts,
                name=f"cluster count Poisson chi-square (delta={delta})",
                threshold=float(pars["chi2_p_min"]),
            )
        )
        ks = sps.kstest(positions, "uniform")
        reports.append(
            report_from_pvalue(
                f"cluster position uniformity KS (delta={delta})",
                float(ks.statistic),
                len(positions),
                float(ks.pvalue),
                float(pars["ks_p_min"]),
            )
        )
        for i, (sd, res) in enumerate(zip(seeds, results)):
            count_rows.append(
                {
                    "delta": delta,
                    "env_index": i,
                    "env_seed": int(sd),
                    "count": int(res[0][j]),
                }
            )
    ratio = lambda_hat[deltas[0]] / lambda_hat[deltas[1]]
    target = 2.0**s
    reports.append(
        report_from_stat(
            "cluster rate doubling ratio relative error",
            abs(ratio / target - 1.0),
            n_envs,
            float(pars["doubling_rel_max"]),
            details={"ratio": ratio, "target": target, "lambda_hat": lambda_hat},
        )
    )
    return CriterionResult(
        key="c06_poisson_clusters",
        title="cluster counts Poisson, positions uniform, rate doubling",
        reports=reports,
        tables={"c06_counts": count_rows},
        fitted={f"lambda_hat_delta_{d}": v for d, v in lambda_hat.items()},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 7: exponential marks on detected clusters


def _c07_env_task(args) -> tuple[list[float], int]:
    model, n_sites, rho_tol, delta, env_seed, walk_seed = args
    env = sample_environment(model, 0, n_sites, int(env_seed))
    buffer, profile = calibrate_buffer(env, n_sites, tol=rho_tol)
    window = profile.restrict(n_sites)
    s = model.tail_index()
    sample = detect_clusters(window, s, delta)
    outcome = simulate_crossings_fast(env, n_sites, int(walk_seed), buffer=buffer)
    marked = attach_marks(sample, outcome, window)
    gammas = [float(c.gamma) for c in marked.clusters if not c.gamma_flagged]
    return gammas, sample.count


def criterion_c07(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c07_exponential_marks",
        {
            "env_seed": _default_seed(config, 7, 0),
            "walk_seed": _default_seed(config, 7, 1),
            "n_sites": 100_000,
            "delta": 0.4,
            "n_envs": 2000,
            "min_clusters": 5000,
            "ks_max": 0.02,
        },
    )
    n = int(pars["n_sites"])
    n_envs = int(pars["n_envs"])
    delta = float(pars["delta"])
    env_seeds = _env_seeds(int(pars["env_seed"]), n_envs)
    walk_seeds = _walk_seeds(int(pars["walk_seed"]), n_envs)
    tasks = [
        (config.model, n, config.rho_tol, delta, int(es), int(ws))
        for es, ws in zip(env_seeds, walk_seeds)
    ]
    results = _pmap(_c07_env_task, tasks, workers)

    pooled = np.concatenate([np.asarray(g) for g, _ in results if g])
    if len(pooled) < int(pars["min_clusters"]):
        raise InsufficientData(
            f"pooled {len(pooled)} cluster marks, need {pars['min_clusters']}"
        )
    ks = sps.kstest(pooled, "expon")
    reports = [
        report_from_stat(
            "pooled cluster marks KS vs Exp(1)",
            float(ks.statistic),
            len(pooled),
            float(pars["ks_max"]),
            details={"p_value": float(ks.pvalue), "mean": float(pooled.mean())},
        )
    ]
    first, second = [], []
    for gammas, _ in results:
        for i in range(len(gammas)):
            for j in range(i + 1, len(gammas)):
                first.append(gammas[i])
                second.append(gammas[j])
    n_pairs = len(first)
    r = float(np.corrcoef(np.asarray(first), np.asarray(second))[0, 1])
    reports.append(
        report_from_stat(
            "co-occurring cluster marks |corr|",
            abs(r),
            n_pairs,
            3.0 / math.sqrt(n_pairs),
            details={"n_pairs": n_pairs, "corr": r},
        )
    )
    rows = [
        {"env_index": i, "env_seed": int(es), "n_clusters": res[1]}
        for i, (es, res) in enumerate(zip(env_seeds, results))
    ]
    return CriterionResult(
        key="c07_exponential_marks",
        title="cluster occupation marks: Exp(1) law and pairwise independence",
        reports=reports,
        tables={"c07_envs": rows},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 8: occupation-time reconstruction from clusters (s < 1)


def _c08_env_task(args) -> dict:
    model, n_sites, rho_tol, deltas, env_seed, walk_seed, c_bound = args
    env = sample_environment(model, 0, n_sites, int(env_seed))
    buffer, profile = calibrate_buffer(env, n_sites, tol=rho_tol)
    window = profile.restrict(n_sites)
    s = model.tail_index()
    scale = float(n_sites) ** (1.0 / s)
    outcome = simulate_crossings_fast(env, n_sites, int(walk_seed), buffer=buffer)
    t_value = outcome.T_N / scale
    row = {"t": t_value}
    for delta in deltas:
        sample = detect_clusters(window, s, delta)
        marked = attach_marks(sample, outcome, window)
        thetas = marked.thetas()
        gammas = marked.gammas()
        recon = float(np.dot(thetas, gammas)) if len(thetas) else 0.0
        a_vals = np.array([c.a for c in marked.clusters]) if marked.count else np.array([])
        floor = 4.0 * math.sqrt(
            float(np.sum(2.0 * c_bound * thetas**2 / (a_vals * delta * scale)))
        ) if marked.count else 0.0
        row[f"recon_{delta}"] = recon
        row[f"resid_{delta}"] = t_value - recon
        row[f"floor_{delta}"] = floor
    return row


def criterion_c08(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c08_reconstruction",
        {
            "env_seed": _default_seed(config, 8, 0),
            "walk_seed": _default_seed(config, 8, 1),
            "n_sites": 100_000,
            "deltas": [1.0, 0.5, 0.25],
            "n_envs": 200,
            "corr_bound": 2.0,
        },
    )
    if config.regime != REGIME_SUB:
        raise InsufficientData("reconstruction check applies below tail index 1")
    n = int(pars["n_sites"])
    deltas = [float(d) for d in pars["deltas"]]
    n_envs = int(pars["n_envs"])
    env_seeds = _env_seeds(int(pars["env_seed"]), n_envs)
    walk_seeds = _walk_seeds(int(pars["walk_seed"]), n_envs)
    tasks = [
        (config.model, n, config.rho_tol, deltas, int(es), int(ws), float(pars["corr_bound"]))
        for es, ws in zip(env_seeds, walk_seeds)
    ]
    results = _pmap(_c08_env_task, tasks, workers)

    medians = [float(np.median([abs(r[f"resid_{d}"]) for r in results])) for d in deltas]
    ratios = [medians[i + 1] / medians[i] for i in range(len(medians) - 1)]
    worst_under = max(
        max(-r[f"resid_{d}"] - r[f"floor_{d}"] for r in results) for d in deltas
    )
    reports = [
        report_from_stat(
            "reconstruction residual median ladder max ratio",
            float(max(ratios)),
            n_envs,
            1.0,
            details={"medians": dict(zip(map(str, deltas), medians))},
        ),
        report_from_stat(
            "reconstruction residual below -noise-floor excess",
            float(worst_under),
            n_envs * len(deltas),
            0.0,
            details={"corr_bound": float(pars["corr_bound"])},
        ),
    ]
    rows = []
    for i, (es, r) in enumerate(zip(env_seeds, results)):
        row = {"env_index": i, "env_seed": int(es), "t": r["t"]}
        for d in deltas:
            row[f"recon_{d}"] = r[f"recon_{d}"]
            row[f"resid_{d}"] = r[f"resid_{d}"]
        rows.append(row)
    return CriterionResult(
        key="c08_reconstruction",
        title="occupation time reconstructed from cluster marks",
        reports=reports,
        tables={"c08_envs": rows},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 9: annealed stable law of the normalized occupation time (s < 1)


def _c09_env_task(args) -> tuple[int, float]:
    model, n_sites, rho_tol, env_seed, walk_seed = args
    env = sample_environment(model, 0, n_sites, int(env_seed))
    outcome = simulate_crossings_fast(env, n_sites, int(walk_seed))
    return outcome.T_N, outcome.T_N / float(n_sites) ** (1.0 / model.tail_index())


def criterion_c09(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c09_stable_law",
        {
            "env_seed": _default_seed(config, 9, 0),
            "walk_seed": _default_seed(config, 9, 1),
            "n_sites": 100_000,
            "n_pairs": 2000,
            "grid_lo": 0.05,
            "grid_hi": 300_000.0,
            "grid_points": 160,
            "ks_max": 0.05,
        },
    )
    if config.regime != REGIME_SUB:
        raise InsufficientData("stable occupation law applies below tail index 1")
    n = int(pars["n_sites"])
    n_pairs = int(pars["n_pairs"])
    env_seeds = _env_seeds(int(pars["env_seed"]), n_pairs)
    walk_seeds = _walk_seeds(int(pars["walk_seed"]), n_pairs)
    tasks = [
        (config.model, n, config.rho_tol, int(es), int(ws))
        for es, ws in zip(env_seeds, walk_seeds)
    ]
    results = _pmap(_c09_env_task, tasks, workers)
    values = np.array([t for _, t in results])

    s = config.solved_s
    grid = np.concatenate(
        ([0.0], np.geomspace(float(pars["grid_lo"]), float(pars["grid_hi"]), int(pars["grid_points"])))
    )
    base = stable_cdf(PowerLawPPP(c=1.0, s=s, delta=0.0), REGIME_SUB, grid)
    c_hat, ks = stable_fit_scale(values, base)
    reports = [
        report_from_stat(
            "normalized occupation time vs fitted one-sided stable law KS",
            float(ks),
            n_pairs,
            float(pars["ks_max"]),
            details={"c_hat": float(c_hat), "sample_max": float(values.max())},
        )
    ]
    rows = [
        {"env_index": i, "env_seed": int(es), "T": int(T), "t_normalized": float(t)}
        for i, (es, (T, t)) in enumerate(zip(env_seeds, results))
    ]
    return CriterionResult(
        key="c09_stable_law",
        title="annealed stable law of the normalized occupation time",
        reports=reports,
        tables={"c09_pairs": rows},
        fitted={"stable_scale_c_hat": float(c_hat)},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 10: occupation vs hitting time collapse


def _c10_env_task(args) -> float:
    model, n_sites, rho_tol, env_seed, walk_seed = args
    env = sample_environment(model, 0, n_sites, int(env_seed))
    outcome = simulate_crossings_fast(env, n_sites, int(walk_seed))
    return abs(outcome.T_N - outcome.T_tilde_N) / float(n_sites) ** (
        1.0 / model.tail_index()
    )


def criterion_c10(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c10_hitting_gap",
        {
            "env_seed": _default_seed(config, 10, 0),
            "walk_seed": _default_seed(config, 10, 1),
            "n_ladder": [1000, 10_000, 100_000],
            "n_pairs": 500,
            "percentile": 95.0,
        },
    )
    ladder = [int(v) for v in pars["n_ladder"]]
    n_pairs = int(pars["n_pairs"])
    pcts = []
    rows = []
    for j, n in enumerate(ladder):
        env_seeds = _env_seeds(int(pars["env_seed"]) + j, n_pairs)
        walk_seeds = _walk_seeds(int(pars["walk_seed"]) + j, n_pairs)
        tasks = [
            (config.model, n, config.rho_tol, int(es), int(ws))
            for es, ws in zip(env_seeds, walk_seeds)
        ]
        gaps = np.array(_pmap(_c10_env_task, tasks, workers))
        pct = float(np.percentile(gaps, float(pars["percentile"])))
        pcts.append(pct)
        rows.append({"n_sites": n, "pct95_gap": pct, "median_gap": float(np.median(gaps))})
    ratios = [pcts[i + 1] / pcts[i] for i in range(len(pcts) - 1)]
    reports = [
        report_from_stat(
            "hitting-time gap 95th percentile ladder max ratio",
            float(max(ratios)),
            n_pairs * len(ladder),
            1.0,
            details={"percentiles": dict(zip(map(str, ladder), pcts))},
        )
    ]
    return CriterionResult(
        key="c10_hitting_gap",
        title="occupation minus hitting time collapses under N^(1/s)",
        reports=reports,
        tables={"c10_ladder": rows},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 11: Fréchet law of the maximum occupation


def _c11_env_task(args) -> float:
    model, n_sites, rho_tol, env_seed, walk_seed = args
    env = sample_environment(model, 0, n_sites, int(env_seed))
    outcome = simulate_crossings_fast(env, n_sites, int(walk_seed))
    return outcome.xi_star / float(n_sites) ** (1.0 / model.tail_index())


def criterion_c11(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c11_frechet_max",
        {
            "env_seed": _default_seed(config, 11, 0),
            "walk_seed": _default_seed(config, 11, 1),
            "n_sites": 100_000,
            "n_pairs": 2000,
            "ks_max": 0.03,
            "mid_model": {
                "family": "two_point",
                "p_fast": 0.8,
                "p_slow": 1.0 / 3.0,
                "w": 0.6763367534524724,
            },
        },
    )
    from .config import build_model

    n = int(pars["n_sites"])
    n_pairs = int(pars["n_pairs"])
    models = [("sub", config.model), ("mid", build_model(pars["mid_model"]))]
    reports = []
    rows = []
    fitted = {}
    for j, (label, model) in enumerate(models):
        s = model.tail_index()
        env_seeds = _env_seeds(int(pars["env_seed"]) + j, n_pairs)
        walk_seeds = _walk_seeds(int(pars["walk_seed"]) + j, n_pairs)
        tasks = [
            (model, n, config.rho_tol, int(es), int(ws))
            for es, ws in zip(env_seeds, walk_seeds)
        ]
        values = np.array(_pmap(_c11_env_task, tasks, workers))
        c_fit = frechet_fit(values, s)
        ks = sps.kstest(values, lambda x: frechet_cdf(c_fit, s, np.maximum(x, 1e-12)))
        reports.append(
            report_from_stat(
                f"maximum occupation Frechet KS ({label} model, s={s:.3f})",
                float(ks.statistic),
                n_pairs,
                float(pars["ks_max"]),
                details={"c_fit": float(c_fit), "p_value": float(ks.pvalue)},
            )
        )
        fitted[f"frechet_c_{label}"] = float(c_fit)
        for i, v in enumerate(values):
            rows.append({"model": label, "s": s, "env_index": i, "max_normalized": float(v)})
    return CriterionResult(
        key="c11_frechet_max",
        title="Frechet law of the normalized maximum occupation",
        reports=reports,
        tables={"c11_pairs": rows},
        fitted=fitted,
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 12: Gaussian limits at the s = 2 boundary


def _c12_env_task(args) -> tuple[float, list[float]]:
    model, n_sites, rho_tol, n_walks, env_seed, walk_seed = args
    env = sample_environment(model, 0, n_sites, int(env_seed))
    buffer, profile = calibrate_buffer(env, n_sites, tol=rho_tol)
    qm = profile.restrict(n_sites).quenched_mean_occupation()
    batch = sample_walks(
        env, n_sites, n_walks, int(walk_seed), sampler="fast", buffer=buffer
    )
    scale = math.sqrt(n_sites * math.log(n_sites))
    t_vals = (batch.T_N.astype(np.float64) - qm) / scale
    return qm, t_vals.tolist()


def criterion_c12(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c12_boundary_clt",
        {
            "env_seed": _default_seed(config, 12, 0),
            "walk_seed": _default_seed(config, 12, 1),
            "n_sites": 100_000,
            "n_envs": 2000,
            "n_walks": 50,
            "ks_max": 0.02,
            "corr_max": 0.05,
            "model": {
                "family": "two_point",
                "p_fast": 2.0 / 3.0,
                "p_slow": 1.0 / 3.0,
                "w": 0.8,
            },
        },
    )
    from .config import build_model

    model = build_model(pars["model"])
    n = int(pars["n_sites"])
    n_envs = int(pars["n_envs"])
    n_walks = int(pars["n_walks"])
    env_seeds = _env_seeds(int(pars["env_seed"]), n_envs)
    walk_seeds = _walk_seeds(int(pars["walk_seed"]), n_envs)
    tasks = [
        (model, n, config.rho_tol, n_walks, int(es), int(ws))
        for es, ws in zip(env_seeds, walk_seeds)
    ]
    results = _pmap(_c12_env_task, tasks, workers)

    scale = math.sqrt(n * math.log(n))
    mean_alpha = model.mean_alpha()
    annealed_per_site = (1.0 + mean_alpha) / (1.0 - mean_alpha)
    qms = np.array([qm for qm, _ in results])
    u_vals = (qms - annealed_per_site * n) / scale
    t_pool = np.concatenate([np.asarray(ts) for _, ts in results])
    mu, sigma = float(t_pool.mean()), float(t_pool.std(ddof=1))
    ks = sps.kstest(t_pool, "norm", args=(mu, sigma))
    z = (t_pool - mu) / sigma
    u_rep = np.repeat(u_vals, n_walks)
    r = float(np.corrcoef(z, u_rep)[0, 1])
    reports = [
        report_from_stat(
            "boundary-regime occupation statistic KS vs fitted normal",
            float(ks.statistic),
            len(t_pool),
            float(pars["ks_max"]),
            details={"mu": mu, "sigma": sigma, "p_value": float(ks.pvalue)},
        ),
        report_from_stat(
            "boundary-regime |corr(standardized t, environment statistic)|",
            abs(r),
            len(t_pool),
            float(pars["corr_max"]),
            details={"corr": r, "n_envs": n_envs},
        ),
    ]
    rows = []
    for i, (es, (qm, ts)) in enumerate(zip(env_seeds, results)):
        ts_arr = np.asarray(ts)
        rows.append(
            {
                "env_index": i,
                "env_seed": int(es),
                "quenched_mean": float(qm),
                "u_normalized": float(u_vals[i]),
                "t_mean": float(ts_arr.mean()),
                "t_sd": float(ts_arr.std(ddof=1)),
            }
        )
    return CriterionResult(
        key="c12_boundary_clt",
        title="Gaussian limits and independence at the boundary tail index",
        reports=reports,
        tables={"c12_envs": rows},
        fitted={"clt_sigma": sigma},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 13: Campbell formulas and product-mark counts


def criterion_c13(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c13_campbell",
        {
            "seed": _default_seed(config, 13, 0),
            "mark_seed": _default_seed(config, 13, 1),
            "n_draws": 100_000,
            "c": 1.0,
            "delta": 0.4,
            "mean_power": 0.25,
            "var_power": 0.15,
            "tail_levels": [1.0, 2.5],
            "product_levels": [1.5, 4.0],
            "z_max": 4.0,
        },
    )
    spec = PowerLawPPP(c=float(pars["c"]), s=config.solved_s, delta=float(pars["delta"]))
    n = int(pars["n_draws"])
    p_mean = float(pars["mean_power"])
    p_var = float(pars["var_power"])
    tails = [float(x) for x in pars["tail_levels"]]
    prods = [float(x) for x in pars["product_levels"]]
    point_seeds = child_sequence(int(pars["seed"]), 3).generate_state(n, np.uint64)
    mark_seeds = child_sequence(int(pars["mark_seed"]), 5).generate_state(n, np.uint64)

    sum_mean = np.empty(n)
    sum_var = np.empty(n)
    tail_counts = np.empty((n, len(tails)))
    prod_counts = np.empty((n, len(prods)))
    for k in range(n):
        pts = sample_ppp(spec, int(point_seeds[k]))
        _, marks = mark_ppp(pts, int(mark_seeds[k]))
        sum_mean[k] = np.sum(pts**p_mean)
        sum_var[k] = np.sum(pts**p_var)
        for j, x in enumerate(tails):
            tail_counts[k, j] = np.count_nonzero(pts > x)
        products = pts * marks
        for j, x in enumerate(prods):
            prod_counts[k, j] = np.count_nonzero(products > x)

    checks = []
    est = float(sum_mean.mean())
    target = campbell_mean(spec, p_mean)
    se = float(sum_mean.std(ddof=1) / math.sqrt(n))
    checks.append(("campbell mean power sum", est, target, se))

    est_v = float(sum_var.var(ddof=1))
    target_v = campbell_var(spec, p_var)
    centered = sum_var - sum_var.mean()
    m4 = float(np.mean(centered**4))
    se_v = math.sqrt(max(m4 - est_v**2, 0.0) / n)
    checks.append(("campbell variance power sum", est_v, target_v, se_v))

    for j, x in enumerate(tails):
        lam = spec.tail_count(x)
        checks.append(
            (f"point count above {x}", float(tail_counts[:, j].mean()), lam, math.sqrt(lam / n))
        )
    for j, x in enumerate(prods):
        lam = product_tail_count(spec, x)
        checks.append(
            (
                f"marked product count above {x}",
                float(prod_counts[:, j].mean()),
                lam,
                math.sqrt(lam / n),
            )
        )
    z_worst = _max_abs_z([(e, t, s_) for _, e, t, s_ in checks])
    rows = [
        {"check": name, "estimate": e, "target": t, "se": s_, "z": (e - t) / s_}
        for name, e, t, s_ in checks
    ]
    reports = [
        report_from_stat(
            "Campbell and product-count checks max |z|",
            float(z_worst),
            n,
            float(pars["z_max"]),
            details={"n_checks": len(checks)},
        )
    ]
    return CriterionResult(
        key="c13_campbell",
        title="Campbell formulas and marked product counts",
        reports=reports,
        tables={"c13_checks": rows},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Criterion 14: direct vs crossing sampler equivalence


def criterion_c14(config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    pars = _params(
        config,
        "c14_sampler_equivalence",
        {
            "env_seeds": None,
            "walk_seed": _default_seed(config, 14, 1),
            "n_sites": 400,
            "n_walks": 3000,
            "p_min": 0.01,
        },
    )
    n = int(pars["n_sites"])
    n_walks = int(pars["n_walks"])
    env_seeds = pars["env_seeds"]
    if env_seeds is None:
        env_seeds = [_default_seed(config, 14, 10 + i) for i in range(3)]
    reports = []
    rows = []
    for i, env_seed in enumerate(env_seeds):
        env = sample_environment(config.model, 0, n, int(env_seed))
        buffer, _ = calibrate_buffer(env, n)
        seed_direct = int(child_sequence(int(pars["walk_seed"]), i, 0).generate_state(1, np.uint64)[0])
        seed_fast = int(child_sequence(int(pars["walk_seed"]), i, 1).generate_state(1, np.uint64)[0])
        direct = sample_walks(
            env, n, n_walks, seed_direct, sampler="direct", buffer=buffer, tracked_sites=[0]
        )
        fast = sample_walks(
            env, n, n_walks, seed_fast, sampler="fast", buffer=buffer, tracked_sites=[0]
        )
        stats = {
            "hitting_time": (direct.T_tilde_N, fast.T_tilde_N),
            "max_occupation": (direct.xi_star, fast.xi_star),
            "origin_occupation": (direct.tracked_xi[:, 0], fast.tracked_xi[:, 0]),
        }
        for name, (a, b) in stats.items():
            rep = ks_two_sample(
                a,
                b,
                name=f"sampler equivalence {name} (env {int(env_seed)})",
                threshold=float(pars["p_min"]),
            )
            reports.append(rep)
            rows.append(
                {
                    "env_seed": int(env_seed),
                    "statistic": name,
                    "ks": rep.statistic,
                    "p_value": rep.p_value,
                }
            )
    return CriterionResult(
        key="c14_sampler_equivalence",
        title="direct stepper vs crossing sampler equivalence",
        reports=reports,
        tables={"c14_tests": rows},
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Registry and runner

CRITERIA: tuple[tuple[str, str, object], ...] = (
    ("c01_exact_recursion", "exact recursion on a constant environment", criterion_c01),
    ("c02_geometric_law", "quenched geometric occupation law", criterion_c02),
    ("c03_chain_oracle", "three-state chain oracle", criterion_c03),
    ("c04_neighbour_corr", "neighbour occupation correlation", criterion_c04),
    ("c05_tail_constants", "tail constant flatness and ratio", criterion_c05),
    ("c06_poisson_clusters", "Poisson cluster statistics", criterion_c06),
    ("c07_exponential_marks", "exponential cluster marks", criterion_c07),
    ("c08_reconstruction", "occupation reconstruction from clusters", criterion_c08),
    ("c09_stable_law", "annealed stable occupation law", criterion_c09),
    ("c10_hitting_gap", "occupation vs hitting time collapse", criterion_c10),
    ("c11_frechet_max", "Frechet law of the maximum occupation", criterion_c11),
    ("c12_boundary_clt", "Gaussian limits at the boundary tail index", criterion_c12),
    ("c13_campbell", "Campbell formulas and product counts", criterion_c13),
    ("c14_sampler_equivalence", "direct vs crossing sampler equivalence", criterion_c14),
)


def run_criterion(key: str, config: ExperimentConfig, workers: int = 1) -> CriterionResult:
    """Run one acceptance criterion by registry key."""
    for k, _, fn in CRITERIA:
        if k == key:
            return fn(config, workers)
    raise KeyError(f"unknown criterion {key!r}; known: {[k for k, _, _ in CRITERIA]}")


def _library_versions() -> dict:
    import numba
    import scipy

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def run_verify(
    config: ExperimentConfig,
    workers: int = 1,
    only: list[str] | None = None,
    echo=print,
) -> tuple[RunManifest, list[CriterionResult]]:
    """Run the acceptance suite and assemble the manifest.

    ``only`` restricts the run to a subset of registry keys (all by
    default).  One verdict line per criterion goes through ``echo``.
    """
    t0 = time.perf_counter()
    selected = [entry for entry in CRITERIA if only is None or entry[0] in only]
    if only is not None:
        unknown = set(only) - {k for k, _, _ in CRITERIA}
        if unknown:
            raise KeyError(f"unknown criteria {sorted(unknown)}")
    results: list[CriterionResult] = []
    reports: list[TestReport] = []
    fitted: dict = {}
    for key, title, fn in selected:
        result = fn(config, workers)
        results.append(result)
        reports.extend(result.reports)
        fitted.update(result.fitted)
        verdict = "PASS" if result.passed else "FAIL"
        n_ok = sum(r.passed for r in result.reports)
        if echo is not None:
            echo(
                f"{key}: {verdict} ({n_ok}/{len(result.reports)} checks, "
                f"{result.wall_clock_s:.1f}s) -- {title}"
            )
    manifest = RunManifest(
        config_hash=config_hash(config),
        config_name=config.name,
        seed=config.seed,
        solved_s=config.solved_s,
        regime=config.regime,
        package_version=__version__,
        versions=_library_versions(),
        fitted_constants=fitted,
        reports=reports,
        criteria=[
            {
                "key": r.key,
                "title": r.title,
                "passed": r.passed,
                "n_checks": len(r.reports),
                "wall_clock_s": r.wall_clock_s,
            }
            for r in results
        ],
        wall_clock_s=time.perf_counter() - t0,
    )
    return manifest, results


def write_outputs(
    manifest: RunManifest, results: list[CriterionResult], out_root: str | Path
) -> Path:
    """Persist manifest.json and per-criterion CSVs under out_root/<hash>/."""
    import json

    run_dir = Path(out_root) / manifest.config_hash
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    summary_rows = [
        {
            "name": r.name,
            "statistic": repr(r.statistic),
            "p_value": "" if r.p_value is None else repr(r.p_value),
            "threshold": repr(r.threshold),
            "mode": r.mode,
            "passed": int(r.passed),
            "sample_size": r.sample_size,
        }
        for r in manifest.reports
    ]
    _write_csv(run_dir / "reports.csv", summary_rows)
    for result in results:
        for basename, rows in result.tables.items():
            _write_csv(run_dir / f"{basename}.csv", rows)
    return run_dir


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        return
    fieldnames = list(rows[0].keys())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row.get(k, "")) for k in fieldnames})


def _csv_cell(value):
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value
