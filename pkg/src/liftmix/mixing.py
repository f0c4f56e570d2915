"""Exact mixing analysis on lifts: TV curves, worst starts, cutoff sweeps.

Total-variation distance to stationarity is propagated exactly (dense
distribution vectors, gather-based kernel application, no renormalization),
so the reported mixing times are deterministic given the lift.  The sweep
driver scales the lift degree over a grid, fits the growth of the
worst-start mixing time against ``log n``, and compares the slope with the
reciprocal entropy rate of the base graph.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analyzer import entropy
from .base_graph import parse_graph, transition_matrix
from .errors import AnalysisError
from .lift import (
    apply_kernel,
    apply_kernel_to_function,
    generate_uniform_lift,
    lift_stationary,
    project_distribution,
)
from .rng import substream

#: Tolerance for the per-step mass-conservation and TV-monotonicity checks.
PROPAGATION_TOL = 1e-12
#: Largest state count enumerated exhaustively by worst-start search.
EXHAUSTIVE_START_CAP = 20_000
DEFAULT_EPS_LIST = (0.1, 0.25, 0.5, 0.9)


# ---------------------------------------------------------------------------
# exact propagation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Propagation:
    """Distribution after ``t`` exact kernel applications."""

    distribution: np.ndarray
    steps: int
    mass_drift: float


def propagate(lift, mu0, steps, alpha=None):
    """Apply the lazy-walk kernel ``steps`` times, checking mass conservation.

    Never renormalizes; raises :class:`AnalysisError` if the total mass
    drifts by more than ``PROPAGATION_TOL`` per step.
    """
    steps = int(steps)
    if steps < 0:
        raise AnalysisError("step count must be nonnegative")
    mu = np.asarray(mu0, dtype=float).reshape(-1).copy()
    if mu.shape != (lift.n_states,):
        raise AnalysisError(
            f"distribution has {mu.size} entries; lift has {lift.n_states} states"
        )
    start_mass = float(mu.sum())
    for _ in range(steps):
        mu = apply_kernel(lift, mu, alpha=alpha)
    drift = abs(float(mu.sum()) - start_mass)
    if drift > PROPAGATION_TOL * max(1, steps):
        raise AnalysisError(f"propagation lost mass: drift {drift:g}")
    return Propagation(distribution=mu, steps=steps, mass_drift=drift)


def _lift_period(lift, alpha, start):
    """Period of the lift chain on the component reachable from ``start``.

    BFS-gcd over positive-probability arcs; holding makes everything
    aperiodic, so this is only meaningful at ``alpha == 0``.
    """
    if alpha is None:
        alpha = lift.base.alpha
    if alpha > 0.0:
        return 1
    g = lift.base
    n = lift.n
    size = lift.n_states
    succ = [[] for _ in range(size)]
    fibers = np.arange(n)
    for j, e in enumerate(g.edges):
        u = g.vertex_index[e.tail]
        v = g.vertex_index[e.head]
        rows_u = u * n + fibers
        cols_v = v * n + lift.perms[j]
        if e.weight_fwd > 0.0:
            for a, b in zip(rows_u, cols_v):
                succ[a].append(int(b))
        if e.weight_bwd > 0.0:
            for a, b in zip(cols_v, rows_u):
                succ[a].append(int(b))
    level = {start: 0}
    queue = [start]
    period = 0
    qi = 0
    while qi < len(queue):
        x = queue[qi]
        qi += 1
        for y in succ[x]:
            if y in level:
                period = math.gcd(period, level[x] + 1 - level[y])
            else:
                level[y] = level[x] + 1
                queue.append(y)
    return period if period > 0 else 1


@dataclass(frozen=True)
class TVCurve:
    """Exact total-variation distance to stationarity, per step.

    ``tv[t]`` is the distance after ``t`` steps; ``crossings[eps]`` the
    first step at or below ``eps`` (None when the cap was hit first), with
    ``reached[eps]`` the corresponding flag.  For a periodic chain without
    holding, ``averaged`` carries the same analysis for the two-step
    averaged distribution, which does converge.
    """

    tv: np.ndarray
    crossings: dict
    reached: dict
    mass_drift: float
    t_cap: int
    periodic: bool = False
    averaged: Optional["TVCurve"] = None


def _crossings_of(tvs, eps_list):
    arr = np.asarray(tvs)
    crossings = {}
    reached = {}
    for eps in eps_list:
        hits = np.nonzero(arr <= eps)[0]
        if len(hits):
            crossings[eps] = int(hits[0])
            reached[eps] = True
        else:
            crossings[eps] = None
            reached[eps] = False
    return crossings, reached


def mixing_curve(lift, start, alpha=None, eps_list=DEFAULT_EPS_LIST,
                 t_cap=10_000, early_stop=True):
    """Exact TV-to-stationarity curve of the lazy walk from one start state.

    ``start`` is a flat state index.  Propagation stops once every
    threshold in ``eps_list`` has been crossed (unless ``early_stop`` is
    off) or at ``t_cap`` steps.  TV monotonicity is asserted at every step;
    a violation would indicate a propagation bug.  When the chain is
    periodic and unlazy, the returned curve carries a two-step averaged
    sibling whose thresholds are meaningful.
    """
    if alpha is None:
        alpha = lift.base.alpha
    eps_list = tuple(float(e) for e in eps_list)
    if not eps_list or not all(0.0 < e < 1.0 for e in eps_list):
        raise AnalysisError("thresholds must lie strictly between 0 and 1")
    t_cap = int(t_cap)
    if t_cap < 0:
        raise AnalysisError("t_cap must be nonnegative")
    start = int(start)
    if not 0 <= start < lift.n_states:
        raise AnalysisError(f"start state {start} out of range")

    pi = lift_stationary(lift).reshape(-1)
    mu = np.zeros(lift.n_states)
    mu[start] = 1.0
    eps_min = min(eps_list)

    periodic = _lift_period(lift, alpha, start) > 1
    tvs = [0.5 * float(np.abs(mu - pi).sum())]
    avg_tvs = []
    prev = mu.copy() if periodic else None
    if periodic:
        avg_tvs.append(tvs[0])  # average of mu_0 with itself at t=0 is mu_0
    t = 0
    while t < t_cap:
        nxt = apply_kernel(lift, mu, alpha=alpha)
        t += 1
        tv = 0.5 * float(np.abs(nxt - pi).sum())
        if tv > tvs[-1] + PROPAGATION_TOL:
            raise AnalysisError(
                f"TV increased at step {t}: {tvs[-1]!r} -> {tv!r}"
            )
        tvs.append(tv)
        if periodic:
            avg_tvs.append(0.5 * float(np.abs(0.5 * (mu + nxt) - pi).sum()))
        mu = nxt
        if early_stop:
            done = tv <= eps_min
            if periodic:
                done = done or (len(avg_tvs) > 1 and avg_tvs[-1] <= eps_min
                                and tv <= eps_min)
            if done:
                break
    mass_drift = abs(float(mu.sum()) - 1.0)
    if mass_drift > PROPAGATION_TOL * max(1, t):
        raise AnalysisError(f"propagation lost mass: drift {mass_drift:g}")
    crossings, reached = _crossings_of(tvs, eps_list)
    averaged = None
    if periodic:
        avg_cross, avg_reached = _crossings_of(avg_tvs, eps_list)
        averaged = TVCurve(
            tv=np.asarray(avg_tvs), crossings=avg_cross, reached=avg_reached,
            mass_drift=mass_drift, t_cap=t_cap, periodic=False, averaged=None,
        )
    return TVCurve(
        tv=np.asarray(tvs), crossings=crossings, reached=reached,
        mass_drift=mass_drift, t_cap=t_cap, periodic=periodic,
        averaged=averaged,
    )


# ---------------------------------------------------------------------------
# worst / best starts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorstBest:
    """Extremes of the mixing time over start states.

    ``exact`` is True when every enumerated start crossed the threshold
    within the cap AND the enumeration covered all states.  Unreached
    starts have ``None`` in ``per_start`` and make ``t_max`` equal None.
    """

    t_max: Optional[int]
    t_min: Optional[int]
    argmax: Optional[int]
    argmin: Optional[int]
    exact: bool
    per_start: dict


def _select_starts(lift, starts, rng):
    if starts == "all":
        if lift.n_states > EXHAUSTIVE_START_CAP:
            raise AnalysisError(
                f"{lift.n_states} states exceeds the exhaustive cap "
                f"{EXHAUSTIVE_START_CAP}; use starts='sample:k'"
            )
        return list(range(lift.n_states)), True
    if isinstance(starts, str) and starts.startswith("sample:"):
        try:
            k = int(starts.split(":", 1)[1])
        except ValueError:
            raise AnalysisError(f"bad start policy {starts!r}") from None
        if k < 1:
            raise AnalysisError("sample size must be >= 1")
        if rng is None:
            raise AnalysisError("sampling start states requires an rng")
        k = min(k, lift.n_states)
        picks = rng.choice(lift.n_states, size=k, replace=False)
        return [int(x) for x in picks], False
    raise AnalysisError(f"bad start policy {starts!r}; use 'all' or 'sample:k'")


def worst_and_best_case(lift, alpha=None, eps=0.25, starts="all", rng=None,
                        t_cap=10_000):
    """Worst- and best-start mixing times at one TV threshold."""
    eps = float(eps)
    states, exhaustive = _select_starts(lift, starts, rng)
    per_start = {}
    for s in states:
        curve = mixing_curve(lift, s, alpha=alpha, eps_list=(eps,), t_cap=t_cap)
        per_start[s] = curve.crossings[eps]
    reached = {s: t for s, t in per_start.items() if t is not None}
    exact = exhaustive and len(reached) == len(per_start)
    if reached:
        argmin, t_min = min(reached.items(), key=lambda kv: (kv[1], kv[0]))
        argmax, t_max = max(reached.items(), key=lambda kv: (kv[1], -kv[0]))
    else:
        argmin = t_min = argmax = t_max = None
    if len(reached) != len(per_start):
        t_max = None
        argmax = None
    return WorstBest(t_max=t_max, t_min=t_min, argmax=argmax, argmin=argmin,
                     exact=exact, per_start=per_start)


# ---------------------------------------------------------------------------
# cutoff sweep over lift degree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    n: int
    seed: int
    start: int
    eps: float
    t_mix: Optional[int]
    reached: bool


@dataclass(frozen=True)
class SweepResult:
    """Outcome of a cutoff sweep over the lift degree grid.

    ``slope`` is the OLS slope of the seed-averaged worst-start mixing time
    at ``eps_primary`` against ``log n``; the predicted value is the
    reciprocal entropy rate.  ``window_ratios[seed]`` lists
    ``(t(eps_lo) - t(eps_hi)) / t(eps_mid)`` along the grid; the window
    verdict requires the ratio to be nonincreasing for most seeds, the
    signature of a cutoff window narrower than the mixing time itself.
    """

    rows: tuple
    n_grid: tuple
    n_seeds: int
    eps_list: tuple
    eps_primary: float
    slope: float
    slope_se: float
    slope_ci: tuple
    predicted_slope: float
    entropy_rate: float
    window_ratios: dict
    window_nonincreasing_seeds: int
    verdict_slope: bool
    verdict_window: bool
    verdict: bool
    t_caps: dict
    alpha: float


def _sweep_cell(args):
    (text, n, seed, alpha, eps_list, starts, master_seed, t_cap) = args
    g = parse_graph(text)
    lift = generate_uniform_lift(g, n, substream(master_seed, "lift", n, seed),
                                 seed=master_seed)
    rng = substream(master_seed, "start-sample", n, seed)
    states, _ = _select_starts(lift, starts, rng)
    rows = []
    for s in states:
        curve = mixing_curve(lift, s, alpha=alpha, eps_list=eps_list,
                             t_cap=t_cap)
        for eps in eps_list:
            t_mix = curve.crossings[eps]
            rows.append(SweepRow(n=n, seed=seed, start=s, eps=eps,
                                 t_mix=t_mix, reached=t_mix is not None))
    return rows


def cutoff_sweep(g, n_grid, alpha=None, eps_list=DEFAULT_EPS_LIST, n_seeds=5,
                 master_seed=0, starts="sample:5", workers=1, t_cap=None,
                 eps_primary=0.25, slope_tolerance=0.15):
    """Measure worst-start mixing times over a grid of lift degrees.

    Computes the base graph's entropy rate first and refuses degenerate
    graphs, whose mixing time does not scale like ``log n``.  Each (n,
    seed) cell draws its lift and its start sample from dedicated
    deterministic substreams of ``master_seed``, so results are
    byte-identical regardless of ``workers``.
    """
    report = entropy(g, alpha=alpha)
    if report.degenerate or report.entropy_rate <= 0.0:
        raise AnalysisError(
            "entropy rate is degenerate; mixing time does not scale like "
            "log n and a sweep would be meaningless"
        )
    alpha = g.alpha if alpha is None else float(alpha)
    h = report.entropy_rate
    n_grid = tuple(int(n) for n in n_grid)
    if len(n_grid) < 2 or sorted(set(n_grid)) != list(n_grid):
        raise AnalysisError("n_grid must be strictly increasing, length >= 2")
    eps_list = tuple(float(e) for e in eps_list)
    if eps_primary not in eps_list:
        raise AnalysisError("eps_primary must be one of eps_list")
    t_caps = {}
    for n in n_grid:
        t_caps[n] = (int(t_cap) if t_cap is not None
                     else int(math.ceil(2.2 * math.log(n) / h)) + 30)
    text = g.to_text()
    cells = [(text, n, seed, alpha, eps_list, starts, int(master_seed),
              t_caps[n]) for n in n_grid for seed in range(int(n_seeds))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            cell_rows = list(pool.map(_sweep_cell, cells))
    else:
        cell_rows = [_sweep_cell(c) for c in cells]
    rows = tuple(row for chunk in cell_rows for row in chunk)

    # worst start per (n, seed, eps); None (unreached) dominates
    worst = {}
    for row in rows:
        key = (row.n, row.seed, row.eps)
        if key not in worst:
            worst[key] = row.t_mix
        elif worst[key] is not None:
            worst[key] = None if row.t_mix is None else max(worst[key], row.t_mix)

    # slope of seed-averaged worst-start time at eps_primary vs log n
    xs, ys = [], []
    for n in n_grid:
        vals = [worst[(n, seed, eps_primary)] for seed in range(int(n_seeds))]
        if any(v is None for v in vals):
            raise AnalysisError(
                f"worst-start mixing time at eps={eps_primary} exceeded the "
                f"step cap {t_caps[n]} for n={n}; raise t_cap"
            )
        xs.append(math.log(n))
        ys.append(float(np.mean(vals)))
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    design = np.column_stack([xs, np.ones_like(xs)])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    slope = float(coef[0])
    fitted = design @ coef
    dof = max(len(xs) - 2, 1)
    s2 = float(((ys - fitted) ** 2).sum()) / dof
    sxx = float(((xs - xs.mean()) ** 2).sum())
    slope_se = math.sqrt(s2 / sxx) if sxx > 0 else float("inf")
    ci = (slope - 1.96 * slope_se, slope + 1.96 * slope_se)
    predicted = 1.0 / h
    verdict_slope = abs(slope - predicted) <= slope_tolerance * predicted

    # cutoff window: (t(lo) - t(hi)) / t(mid) nonincreasing along the grid
    lo, hi = min(eps_list), max(eps_list)
    mid = min(eps_list, key=lambda e: abs(e - 0.5))
    window_ratios = {}
    nonincreasing = 0
    for seed in range(int(n_seeds)):
        ratios = []
        for n in n_grid:
            t_lo = worst[(n, seed, lo)]
            t_hi = worst[(n, seed, hi)]
            t_mid = worst[(n, seed, mid)]
            if None in (t_lo, t_hi, t_mid) or t_mid == 0:
                ratios.append(None)
            else:
                ratios.append((t_lo - t_hi) / t_mid)
        window_ratios[seed] = ratios
        if all(r is not None for r in ratios) and all(
            ratios[i + 1] <= ratios[i] + 1e-9 for i in range(len(ratios) - 1)
        ):
            nonincreasing += 1
    verdict_window = nonincreasing >= math.ceil(0.8 * int(n_seeds))

    return SweepResult(
        rows=rows, n_grid=n_grid, n_seeds=int(n_seeds), eps_list=eps_list,
        eps_primary=float(eps_primary), slope=slope, slope_se=slope_se,
        slope_ci=ci, predicted_slope=predicted, entropy_rate=h,
        window_ratios=window_ratios,
        window_nonincreasing_seeds=nonincreasing,
        verdict_slope=verdict_slope, verdict_window=verdict_window,
        verdict=verdict_slope and verdict_window, t_caps=t_caps,
        alpha=alpha,
    )


# ---------------------------------------------------------------------------
# conductance proxy via the second singular value
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConductanceProxy:
    """Spectral lower-bound proxy for the lift's bottleneck conductance.

    ``sigma2`` is the second singular value of the stationarity-symmetrized
    kernel; ``gap = 1 - sigma2`` and ``bound = gap / 2`` lower-bounds the
    conductance of every stationarity-weighted cut.  ``flagged`` marks a
    vanishing gap (disconnected or periodic lift), where the proxy carries
    no information.
    """

    sigma2: float
    gap: float
    bound: float
    converged: bool
    residual: float
    iterations: int
    flagged: bool


def conductance_proxy(lift, alpha=None, tol=1e-10, max_iter=5000, seed=0):
    """Estimate the second singular value of the symmetrized lift kernel.

    Matrix-free power iteration on ``M = A^T A`` with ``A = D^{1/2} P
    D^{-1/2}`` (``D`` the stationary diagonal), deflated against the known
    top singular vector ``sqrt(pi)``.  Non-convergence is reported in the
    result rather than raised.
    """
    pi = lift_stationary(lift).reshape(-1)
    if (pi <= 0).any():
        raise AnalysisError("stationary distribution has nonpositive entries")
    sqrt_pi = np.sqrt(pi)

    def apply_a(v):
        return sqrt_pi * apply_kernel_to_function(lift, v / sqrt_pi, alpha=alpha)

    def apply_at(w):
        return apply_kernel(lift, w * sqrt_pi, alpha=alpha) / sqrt_pi

    def apply_m(v):
        return apply_at(apply_a(v))

    rng = np.random.default_rng(int(seed))
    v = rng.standard_normal(lift.n_states)
    v -= (v @ sqrt_pi) * sqrt_pi
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise AnalysisError("degenerate random start vector")
    v /= norm
    lam = 0.0
    residual = float("inf")
    converged = False
    iterations = 0
    for iterations in range(1, int(max_iter) + 1):
        w = apply_m(v)
        w -= (w @ sqrt_pi) * sqrt_pi
        lam = float(v @ w)
        residual = float(np.linalg.norm(w - lam * v))
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            lam = 0.0
            residual = 0.0
            converged = True
            break
        v = w / norm
        if residual <= tol * max(1.0, abs(lam)):
            converged = True
            break
    sigma2 = math.sqrt(max(lam, 0.0))
    gap = 1.0 - sigma2
    return ConductanceProxy(
        sigma2=sigma2, gap=gap, bound=gap / 2.0, converged=converged,
        residual=residual, iterations=iterations, flagged=gap < 1e-6,
    )


# ---------------------------------------------------------------------------
# projection identity
# ---------------------------------------------------------------------------


def projection_identity_check(lift, start, t_max, alpha=None):
    """Max deviation between fiber-folded lift propagation and base propagation.

    Starting from a point mass on the lift, pushes the distribution forward
    on the lift and, in parallel, its fiber-sum forward on the base graph;
    returns the largest max-norm difference over all steps up to ``t_max``.
    Exact covers satisfy this identity to floating-point accuracy.
    """
    t_max = int(t_max)
    if t_max < 0:
        raise AnalysisError("t_max must be nonnegative")
    start = int(start)
    if not 0 <= start < lift.n_states:
        raise AnalysisError(f"start state {start} out of range")
    g = lift.base
    a = g.alpha if alpha is None else float(alpha)
    p0 = transition_matrix(g, alpha=a)
    mu = np.zeros(lift.n_states)
    mu[start] = 1.0
    base_mu = project_distribution(lift, mu)
    worst = float(np.abs(project_distribution(lift, mu) - base_mu).max())
    for _ in range(t_max):
        mu = apply_kernel(lift, mu, alpha=a)
        base_mu = base_mu @ p0
        dev = float(np.abs(project_distribution(lift, mu) - base_mu).max())
        worst = max(worst, dev)
    return worst
