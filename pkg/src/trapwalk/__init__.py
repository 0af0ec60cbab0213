"""Trap-aware simulation lab for transient walks in random environments.

Submodules
----------
environments  random environment families and tail-exponent solving
occupancy     expected-visit profiles and tail-constant estimation
walks         trajectory samplers and normalized crossing statistics
traps         deep-site cluster detection and marked point processes
limitlaws     limiting point processes, stable laws, tail fits
stats         chain oracles, goodness-of-fit tests, Hill estimator
verify        desk-scale acceptance checks, one per criterion
"""

from .environments import (
    ArithmeticSupportWarning,
    DegenerateRecurrent,
    Environment,
    EnvironmentModel,
    NoPositiveRoot,
    TruncatedBetaModel,
    TwoPointModel,
    sample_environment,
    solve_tail_index,
)
from .limitlaws import (
    InversionUnstable,
    MuEstimate,
    PowerLawPPP,
    StableLawTable,
    YSample,
    estimate_mu_m,
    frechet_cdf,
    frechet_fit,
    k_constant,
    mark_ppp,
    sample_limit_b,
    sample_ppp,
    sample_Y,
    stable_cdf,
    stable_fit_scale,
)
from .occupancy import (
    HorizonExhausted,
    InsufficientExceedances,
    RhoProfile,
    TailEstimate,
    compute_rho,
    coupling_diagnostics,
    estimate_tail_constants,
    tail_levels,
)
from .regimes import REGIMES, RegimeMismatch, check_regime, regime_for
from .stats import (
    ChainMoments,
    HillFit,
    InsufficientData,
    TestReport,
    ThreeStateChain,
    WindowTooSmall,
    chain_from_walk,
    chain_moments,
    chain_moments_mc,
    chain_moments_solve,
    hill_fit,
    ks_statistic_discrete,
    ks_test,
    ks_two_sample,
    pearson,
    poisson_count_test,
)
from .traps import (
    ClusterRecord,
    MarkedProcessSample,
    MissingSite,
    SweepResult,
    attach_marks,
    detect_clusters,
    lookahead_for,
    sweep_point_process,
)
from .walks import (
    NormalizedStatistics,
    StepBudgetExceeded,
    WalkBatch,
    WalkOutcome,
    calibrate_buffer,
    normalize,
    normalized_t,
    normalized_u,
    sample_walks,
    simulate_crossings_fast,
    simulate_walk,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # environments
    "ArithmeticSupportWarning",
    "DegenerateRecurrent",
    "Environment",
    "EnvironmentModel",
    "NoPositiveRoot",
    "TruncatedBetaModel",
    "TwoPointModel",
    "sample_environment",
    "solve_tail_index",
    # regimes
    "REGIMES",
    "RegimeMismatch",
    "check_regime",
    "regime_for",
    # occupancy
    "HorizonExhausted",
    "InsufficientExceedances",
    "RhoProfile",
    "TailEstimate",
    "compute_rho",
    "coupling_diagnostics",
    "estimate_tail_constants",
    "tail_levels",
    # walks
    "NormalizedStatistics",
    "StepBudgetExceeded",
    "WalkBatch",
    "WalkOutcome",
    "calibrate_buffer",
    "normalize",
    "normalized_t",
    "normalized_u",
    "sample_walks",
    "simulate_crossings_fast",
    "simulate_walk",
    # traps
    "ClusterRecord",
    "MarkedProcessSample",
    "MissingSite",
    "SweepResult",
    "attach_marks",
    "detect_clusters",
    "lookahead_for",
    "sweep_point_process",
    # limitlaws
    "InversionUnstable",
    "MuEstimate",
    "PowerLawPPP",
    "StableLawTable",
    "YSample",
    "estimate_mu_m",
    "frechet_cdf",
    "frechet_fit",
    "k_constant",
    "mark_ppp",
    "sample_limit_b",
    "sample_ppp",
    "sample_Y",
    "stable_cdf",
    "stable_fit_scale",
    # stats
    "ChainMoments",
    "HillFit",
    "InsufficientData",
    "TestReport",
    "ThreeStateChain",
    "WindowTooSmall",
    "chain_from_walk",
    "chain_moments",
    "chain_moments_mc",
    "chain_moments_solve",
    "hill_fit",
    "ks_statistic_discrete",
    "ks_test",
    "ks_two_sample",
    "pearson",
    "poisson_count_test",
]
