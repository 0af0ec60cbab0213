"""Numba kernels: backward recursion, walk samplers, chain simulator.

Kernels use numpy's legacy global RNG inside numba (the only RNG numba
exposes), seeded per call with a uint32 derived from the caller's seed
stream, so every trajectory is reproducible from (seed, arguments) alone.
A kernel replayed with the same seed on a wider site window produces the
identical trajectory, which lets the python layer grow the left margin on
demand without changing results.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Walk status codes shared with the python layer.
STATUS_OK = 0
STATUS_LEFT_EDGE = 1
STATUS_BUDGET = 2


@njit(cache=True)
def backward_z(alpha: np.ndarray) -> np.ndarray:
    """z over sites 0..H given alpha over sites 0..H, seeded z_H = 1.

    z[n] = 1 + alpha[n+1] * z[n+1]; alpha[0] is unused but kept so indices
    align with site numbers.
    """
    h = alpha.shape[0] - 1
    z = np.empty(h + 1, np.float64)
    z[h] = 1.0
    for n in range(h - 1, -1, -1):
        z[n] = 1.0 + alpha[n + 1] * z[n + 1]
    return z


@njit(cache=True, inline="always")
def _nb_failures(r: int, p_succ: float) -> int:
    """Failures accumulated before r successes in Bernoulli(p_succ) trials."""
    if r <= 0:
        return 0
    if p_succ >= 1.0:
        return 0
    if r <= 8:
        total = 0
        for _ in range(r):
            total += np.random.geometric(p_succ) - 1
        return total
    return np.random.negative_binomial(r, p_succ)


@njit(cache=True)
def step_walk(
    p: np.ndarray,
    offset: int,
    n_target: int,
    buffer: int,
    seed: np.uint32,
    step_cap: int,
    xi: np.ndarray,
):
    """Literal nearest-neighbour stepper from site 0 to first visit of N+B.

    p[i] is the right-step probability of site offset + i. xi must have
    length n_target + 1; it is overwritten with visit counts of sites
    0..n_target (time points, start included). Returns
    (status, t_hit, steps, min_site); t_hit is -1 if N was never reached.
    """
    np.random.seed(seed)
    xi[:] = 0
    xi[0] = 1
    x = 0
    t = 0
    t_hit = -1
    min_site = 0
    stop = n_target + buffer
    while True:
        if np.random.random() < p[x - offset]:
            x += 1
        else:
            x -= 1
        t += 1
        if x < min_site:
            min_site = x
        if 0 <= x <= n_target:
            xi[x] += 1
        if t_hit < 0 and x == n_target:
            t_hit = t
        if x == stop:
            return STATUS_OK, t_hit, t, min_site
        if x <= offset:
            # Standing on the window's leftmost realized site: abandon and
            # let the caller replay the same seed on a wider window.
            return STATUS_LEFT_EDGE, t_hit, t, min_site
        if t >= step_cap:
            return STATUS_BUDGET, t_hit, t, min_site


@njit(cache=True)
def crossing_walk(
    p: np.ndarray,
    offset: int,
    n_target: int,
    buffer: int,
    seed: np.uint32,
    visit_cap: int,
    xi: np.ndarray,
):
    """Visit counts via the down-crossing branching representation.

    Same joint law as step_walk's occupation output, with cost proportional
    to sites rather than steps. Phase one realizes the walk segment up to
    the first visit of N = n_target: given the number u of down-crossings of
    the edge one site to the right, the down-steps taken from a site are the
    failures before the (u+1)-th right-step in that site's own Bernoulli
    sequence, so visits to the site total u + 1 + that draw; sites left of 0
    carry no immigration (u + draw). The hitting time equals the sum of all
    phase-one visits at sites < N. Phase two repeats the construction from
    N to N + buffer and adds the visits its left-excursions make at sites
    <= N; the cascade below site 0 in phase two touches no reported output
    and is dropped. xi must have length n_target + 1. Returns
    (status, t_hit, window_visits, min_site).
    """
    np.random.seed(seed)
    xi[:] = 0
    n = n_target

    # Phase 1: 0 -> first visit of n.
    t_hit = 0
    u = 0
    for site in range(n - 1, -1, -1):
        d = _nb_failures(u + 1, p[site - offset])
        visits = u + 1 + d
        xi[site] = visits
        t_hit += visits
        u = d
    site = -1
    while u > 0:
        if site <= offset:
            return STATUS_LEFT_EDGE, -1, 0, site
        d = _nb_failures(u, p[site - offset])
        t_hit += u + d
        u = d
        site -= 1
    min_site = site + 1
    if t_hit > visit_cap:
        return STATUS_BUDGET, t_hit, 0, min_site

    # Phase 2: n -> n + buffer, collecting visits inside [0, n].
    v = 0
    for site in range(n + buffer - 1, n - 1, -1):
        d = _nb_failures(v + 1, p[site - offset])
        if site == n:
            xi[n] = v + 1 + d
        v = d
    site = n - 1
    while v > 0 and site >= 0:
        d = _nb_failures(v, p[site - offset])
        xi[site] += v + d
        v = d
        site -= 1

    total = np.int64(0)
    for i in range(n):
        total += xi[i]
    if total > visit_cap:
        return STATUS_BUDGET, t_hit, total, min_site
    return STATUS_OK, t_hit, total, min_site


@njit(cache=True)
def walk_batch(
    use_fast: bool,
    p: np.ndarray,
    offset: int,
    n_target: int,
    buffer: int,
    seeds: np.ndarray,
    cap: int,
    tracked: np.ndarray,
):
    """Run one walk per seed and reduce outcomes to summary arrays.

    Returns (status, T, t_hit, xi_star, tracked_vals) where T sums visits
    over [0, N), xi_star is the max visit count over [0, N], and
    tracked_vals[w, k] is the visit count of site tracked[k] in walk w.
    """
    nw = seeds.shape[0]
    status = np.zeros(nw, np.uint8)
    big_t = np.zeros(nw, np.int64)
    t_hit = np.zeros(nw, np.int64)
    xi_star = np.zeros(nw, np.int64)
    tracked_vals = np.zeros((nw, tracked.shape[0]), np.int64)
    xi = np.zeros(n_target + 1, np.int64)
    for w in range(nw):
        if use_fast:
            st, th, _tot, _ms = crossing_walk(
                p, offset, n_target, buffer, seeds[w], cap, xi
            )
        else:
            st, th, _tot, _ms = step_walk(
                p, offset, n_target, buffer, seeds[w], cap, xi
            )
        status[w] = st
        t_hit[w] = th
        if st == STATUS_OK:
            tot = np.int64(0)
            star = np.int64(0)
            for i in range(n_target):
                tot += xi[i]
                if xi[i] > star:
                    star = xi[i]
            if xi[n_target] > star:
                star = xi[n_target]
            big_t[w] = tot
            xi_star[w] = star
            for k in range(tracked.shape[0]):
                tracked_vals[w, k] = xi[tracked[k]]
    return status, big_t, t_hit, xi_star, tracked_vals


@njit(cache=True)
def simulate_chain_counts(
    p_bar: float,
    q_bar: float,
    q_dbar: float,
    p_dbar: float,
    seeds: np.ndarray,
):
    """Visit counts (state 1, state 2) of the absorbing three-state chain.

    Each run starts in state 1; transition rows are (p_bar, q_bar, 0) from
    state 1 and (q_dbar, p_dbar, eps) from state 2 with eps the absorption
    probability. Counts are occupied time points, start included.
    """
    n = seeds.shape[0]
    eta1 = np.empty(n, np.int64)
    eta2 = np.empty(n, np.int64)
    for i in range(n):
        np.random.seed(seeds[i])
        c1 = 0
        c2 = 0
        state = 1
        while state != 0:
            if state == 1:
                c1 += 1
                if np.random.random() < q_bar:
                    state = 2
            else:
                c2 += 1
                u = np.random.random()
                if u < q_dbar:
                    state = 1
                elif u < q_dbar + p_dbar:
                    state = 2
                else:
                    state = 0
        eta1[i] = c1
        eta2[i] = c2
    return eta1, eta2
