"""Escape analysis of the walk on the universal cover.

Everything here is derived from one fixed-point system.  For each oriented
edge ``f`` of a pruned graph, let ``p(f)`` be the probability that the cover
walk started at the tail of (a cover copy of) ``f`` ever reaches the head
vertex across ``f``.  These first-passage probabilities solve

    p(f) = w(f) + p(f) * sum_{g out of tail(f), g != f} w(g) * p(g~)

where ``g~`` is the reverse orientation of ``g``.  The minimal solution is
reached by iterating from zero.  From it we compute:

* the *ray exit law* ``x(e)``: the probability that the escape ray of a
  transient cover walk leaves a vertex along (a copy of) ``e``;
* the Markov kernel of the ray's oriented-edge sequence and its stationary
  edge frequencies;
* the per-level entropy of the ray's location, the escape speed, and the
  entropy rate per walk step, which together predict where mixing on large
  random lifts concentrates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import norm

from .base_graph import (
    AnalysisError,
    CoreDecomposition,
    WeightedMultigraph,
    _cycle_structure,
    check_assumptions,
    core,
    is_cover_transient,
)
from .errors import NonConvergenceError

#: Convergence tolerance for the first-passage fixed point.
FIRST_PASSAGE_TOL = 1e-12
#: Iteration budget for the fixed point.
FIRST_PASSAGE_MAX_ITER = 10**6
#: Residual tolerance for stationary solves on the ray kernel.
RAY_STATIONARY_TOL = 1e-10
#: Exit probabilities below this are treated as exact zeros.  The
#: first-passage tolerance leaves noise of order 1e-12 in probabilities
#: that are analytically zero, so the cut sits well above that and well
#: below any genuine exit probability.
SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class FirstPassageSolution:
    """Minimal solution of the first-passage system on a pruned graph.

    ``prob[k]`` is the first-passage probability across oriented edge ``k``;
    ``prob_over_weight[k] = prob[k] / weight[k]`` evaluated in the form
    ``1 / (1 - s_k)`` that stays finite when the weight vanishes;
    ``return_prob[u]`` is the probability that the cover walk started at a
    copy of vertex ``u`` ever returns to it.
    """

    prob: np.ndarray
    prob_over_weight: np.ndarray
    return_prob: np.ndarray
    residual: float
    iterations: int

    def as_dict(self, g):
        return {g.oriented_name(k): float(self.prob[k]) for k in range(g.n_oriented)}


def solve_first_passage(g, tol=FIRST_PASSAGE_TOL, max_iter=FIRST_PASSAGE_MAX_ITER,
                        init=None):
    """Iterate the first-passage fixed point from zero to its minimal root.

    Requires every positive oriented edge of ``g`` to lie on a
    non-backtracking cycle (i.e. ``g`` should already be pruned via
    :func:`liftmix.base_graph.core`).  The iteration from the zero vector is
    componentwise nondecreasing and converges to the minimal nonnegative
    root; ``init`` may supply a different starting vector (used to check
    minimality), in which case monotonicity is not asserted.

    Raises :class:`NonConvergenceError` with the last residual if the
    tolerance is not met within ``max_iter`` sweeps -- this is the expected
    outcome when the cover walk is recurrent and the root sits at the
    boundary of the contraction region.
    """
    rep = check_assumptions(g)
    if not rep.a4_every_edge_on_cycle:
        raise AnalysisError(
            "first-passage system needs every positive oriented edge on a "
            "non-backtracking cycle; prune the graph to its core first"
        )
    w = g.oriented_weight
    init_v = g.oriented_init
    inv = np.arange(g.n_oriented) ^ 1
    monotone = init is None
    q = np.zeros(g.n_oriented) if init is None else np.asarray(init, dtype=float).copy()
    if q.shape != w.shape:
        raise AnalysisError("init vector has the wrong length")

    residual = math.inf
    iterations = 0
    n_vert = g.n_vertices
    for iterations in range(1, max_iter + 1):
        contrib = w * q[inv]
        total = np.zeros(n_vert)
        np.add.at(total, init_v, contrib)
        s = total[init_v] - contrib
        q_new = w + q * s
        residual = float(np.max(np.abs(q_new - q)))
        if monotone and (q_new < q - 1e-13).any():
            raise AnalysisError(
                "internal error: fixed-point iteration from zero decreased"
            )
        q = q_new
        if residual <= tol:
            break
    else:  # pragma: no cover - loop always breaks or exhausts
        pass
    if residual > tol:
        raise NonConvergenceError(
            f"first-passage iteration did not reach tolerance {tol:g} after "
            f"{max_iter} sweeps (last residual {residual:.3e}); the cover "
            "walk may be recurrent",
            residual=residual,
            iterations=max_iter,
        )

    contrib = w * q[inv]
    total = np.zeros(n_vert)
    np.add.at(total, init_v, contrib)
    s = total[init_v] - contrib
    if (s >= 1.0 - 1e-14).any():
        raise AnalysisError(
            "sibling first-passage mass reaches one; the walk cannot be "
            "transient across some edge"
        )
    prob_over_weight = 1.0 / (1.0 - s)
    return FirstPassageSolution(
        prob=q,
        prob_over_weight=prob_over_weight,
        return_prob=total,
        residual=residual,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# ray exit law
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RayLaw:
    """Law of the escape ray of a transient cover walk.

    ``exit_prob[e]`` is the probability that the ray leaves the tail vertex
    of ``e`` along ``e``; out of every vertex these sum to one.  The ray's
    oriented-edge sequence is a Markov chain: from edge ``e1`` it continues
    to a composable non-backtracking ``e2`` with probability
    ``exit_prob[e2] / (1 - exit_prob[inverse(e1)])``.  ``edge_freq`` is the
    stationary law of that chain, supported on its unique closed class.
    """

    graph: WeightedMultigraph
    exit_prob: np.ndarray
    kernel: np.ndarray
    edge_freq: np.ndarray
    support: np.ndarray
    recurrent_class: np.ndarray
    stationarity_residual: float

    def exit_dict(self, g=None):
        g = g or self.graph
        return {g.oriented_name(k): float(self.exit_prob[k]) for k in range(g.n_oriented)}

    def freq_dict(self, g=None):
        g = g or self.graph
        return {g.oriented_name(k): float(self.edge_freq[k]) for k in range(g.n_oriented)}


def _stationary_of_kernel(mat):
    """Stationary row vector of a stochastic matrix (least-squares solve)."""
    n = mat.shape[0]
    lhs = np.vstack([mat.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    pi = np.clip(np.where(np.abs(pi) < 1e-15, 0.0, pi), 0.0, None)
    total = pi.sum()
    if total <= 0:
        raise AnalysisError("stationary solve collapsed to zero")
    pi /= total
    residual = float(np.max(np.abs(pi @ mat - pi)))
    return pi, residual


def ray_law(g, first_passage):
    """Exit law, successor kernel, and edge frequencies of the escape ray.

    ``g`` must be pruned and its cover walk transient.  Raises
    :class:`AnalysisError` when a return probability reaches one (the walk
    would be recurrent at that vertex) or the ray chain has no unique closed
    class.
    """
    verdict = is_cover_transient(g)
    if not verdict.transient:
        raise AnalysisError(f"ray law needs a transient cover walk: {verdict.reason}")
    q = first_passage.prob
    w = g.oriented_weight
    inv = np.arange(g.n_oriented) ^ 1
    stay = 1.0 - first_passage.return_prob
    if (stay <= 1e-14).any():
        bad = g.vertices[int(np.argmin(stay))]
        raise AnalysisError(
            f"return probability at vertex {bad!r} reaches one; "
            "inconsistent with transience"
        )
    exit_prob = w * (1.0 - q[inv]) / stay[g.oriented_init]

    sums = np.zeros(g.n_vertices)
    np.add.at(sums, g.oriented_init, exit_prob)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > RAY_STATIONARY_TOL:
        raise AnalysisError(
            f"ray exit probabilities sum to 1 +- {worst:.3e} at some vertex"
        )

    n_or = g.n_oriented
    support = exit_prob > SUPPORT_TOL
    kernel = np.zeros((n_or, n_or))
    out_by_vertex = [[] for _ in range(g.n_vertices)]
    for k in range(n_or):
        if support[k]:
            out_by_vertex[g.oriented_init[k]].append(k)
    for k in range(n_or):
        if not support[k]:
            continue
        denom = 1.0 - exit_prob[inv[k]]
        if denom <= 1e-14:
            raise AnalysisError(
                "ray kernel denominator vanished: the reverse of a ray edge "
                "would itself be a sure ray edge"
            )
        for l in out_by_vertex[g.oriented_end[k]]:
            if l == inv[k]:
                continue
            kernel[k, l] = exit_prob[l] / denom

    # Unique closed class of the ray chain, then its stationary law.
    sup_idx = np.nonzero(support)[0]
    sub = kernel[np.ix_(sup_idx, sup_idx)]
    ncomp, labels = connected_components(
        csr_matrix(sub > 0.0), directed=True, connection="strong"
    )
    closed = []
    for c in range(ncomp):
        members = np.nonzero(labels == c)[0]
        outside = np.setdiff1d(np.arange(len(sup_idx)), members)
        if len(outside) == 0 or not (sub[np.ix_(members, outside)] > 0).any():
            closed.append(members)
    if len(closed) != 1:
        raise AnalysisError(
            f"ray chain has {len(closed)} closed classes; expected exactly one"
        )
    class_idx = sup_idx[closed[0]]
    pi_c, residual = _stationary_of_kernel(kernel[np.ix_(class_idx, class_idx)])
    if residual > RAY_STATIONARY_TOL:
        raise AnalysisError(
            f"ray stationary residual {residual:.3e} exceeds tolerance"
        )
    edge_freq = np.zeros(n_or)
    edge_freq[class_idx] = pi_c
    return RayLaw(
        graph=g,
        exit_prob=exit_prob,
        kernel=kernel,
        edge_freq=edge_freq,
        support=support,
        recurrent_class=class_idx,
        stationarity_residual=residual,
    )


# ---------------------------------------------------------------------------
# entropy and speed constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightEntropy:
    """Per-level entropy of the ray location, in nats per level."""

    value: float
    degenerate: bool


def weight_entropy(raylaw):
    """Expected information per ray level.

    Averaging over the stationary edge frequencies, each ray step multiplies
    the location probability by ``exit_prob(e) / (1 - exit_prob(e~))``; the
    entropy is the mean of minus its logarithm.  A (near-)deterministic ray
    gives zero and is flagged degenerate rather than treated as an error.
    """
    freq = raylaw.edge_freq
    x = raylaw.exit_prob
    idx = np.nonzero(freq > 0.0)[0]
    total = 0.0
    for k in idx:
        total += freq[k] * (math.log1p(-x[k ^ 1]) - math.log(x[k]))
    if total < -1e-12:
        raise AnalysisError("per-level entropy came out negative")
    if total <= 1e-12:
        return WeightEntropy(value=0.0, degenerate=True)
    return WeightEntropy(value=float(total), degenerate=False)


def _line_drift_speed(g):
    """Escape speed when the pruned graph is a single cycle.

    The cover is then a bi-infinite line with weights repeating with the
    cycle's period; the speed is the absolute mean drift under the
    stationary law of the position-phase chain.
    """
    _, _, _, pure_cycles = _cycle_structure(g)
    if not pure_cycles:
        raise AnalysisError("no cycle found for line-drift speed")
    cycle = pure_cycles[0]
    m = len(cycle)
    p = np.array([g.oriented_weight[k] for k in cycle])
    if m == 1:
        return float(abs(2.0 * p[0] - 1.0))
    phase = np.zeros((m, m))
    for j in range(m):
        phase[j, (j + 1) % m] += p[j]
        phase[j, (j - 1) % m] += 1.0 - p[j]
    mu, residual = _stationary_of_kernel(phase)
    if residual > RAY_STATIONARY_TOL:
        raise AnalysisError(f"phase-chain stationary residual {residual:.3e}")
    return float(abs(np.dot(mu, 2.0 * p - 1.0)))


def speed(g, first_passage, raylaw):
    """Escape speed of the non-lazy cover walk, in levels per step.

    With branching escape directions the reciprocal speed is the stationary
    mean of ``p(e~) / (w(e~) * (1 - p(e~)))`` over ray edges ``e``; the
    middle factor is evaluated through ``prob_over_weight`` so zero-weight
    reverse orientations contribute their correct finite limit.  A
    single-cycle graph instead uses the explicit line-drift formula.
    """
    rep = check_assumptions(g)
    if not rep.a2_two_cycles:
        return _line_drift_speed(g)
    q = first_passage.prob
    qow = first_passage.prob_over_weight
    freq = raylaw.edge_freq
    idx = np.nonzero(freq > 0.0)[0]
    total = 0.0
    for k in idx:
        rev = k ^ 1
        if q[rev] >= 1.0 - 1e-14:
            raise AnalysisError(
                "reverse first-passage probability reaches one on a ray edge; "
                "speed formula undefined"
            )
        total += freq[k] * qow[rev] / (1.0 - q[rev])
    if total < 1.0 - 1e-9:
        raise AnalysisError("reciprocal speed came out below one")
    return float(1.0 / total)


@dataclass(frozen=True)
class EntropyReport:
    """Entropy and speed constants of a lazy walk on covers of ``g``.

    ``entropy_rate`` (nats per walk step) is the product of the per-level
    entropy, the escape speed, the moving fraction ``1 - holding_prob``, and
    the fraction of moving steps spent on the pruned graph's edges.  The
    alternative ``entropy_rate_reciprocal_scaling`` divides the half-lazy
    rate by ``2 * (1 - holding_prob)`` instead; it is recorded for
    comparison but not used by the mixing predictions.  ``sigma_mc`` is an
    optional Monte Carlo estimate of the step-CLT spread of the ray's
    location information, filled in from cover simulations.
    """

    per_level_entropy: float
    escape_speed: float
    core_step_fraction: float
    holding_prob: float
    speed: float
    entropy_rate: float
    entropy_rate_reciprocal_scaling: float
    degenerate: bool
    first_passage: FirstPassageSolution
    ray_law: RayLaw
    core: CoreDecomposition
    sigma_mc: Optional[float] = None
    sigma_mc_se: Optional[float] = None

    def with_sigma(self, sigma, se=None):
        return replace(self, sigma_mc=float(sigma),
                       sigma_mc_se=None if se is None else float(se))


def entropy(g, alpha=None, tol=FIRST_PASSAGE_TOL, max_iter=FIRST_PASSAGE_MAX_ITER):
    """Full escape analysis of a graph at holding probability ``alpha``.

    Prunes hanging trees, solves the first-passage system (``tol`` and
    ``max_iter`` are forwarded to the solver), derives the ray law, and
    assembles the entropy and speed constants.  ``alpha=None`` uses the
    graph's own value.  Raises :class:`AnalysisError` when the vertex chain
    is reducible or the cover walk is not transient.
    """
    if alpha is None:
        alpha = g.alpha
    if not 0.0 <= alpha < 1.0:
        raise AnalysisError(f"holding probability must lie in [0, 1), got {alpha}")
    verdict = is_cover_transient(g)
    if not verdict.transient:
        raise AnalysisError(
            f"entropy analysis needs a transient cover walk: {verdict.reason}"
        )
    cd = core(g)
    gc = cd.graph
    fps = solve_first_passage(gc, tol=tol, max_iter=max_iter)
    rl = ray_law(gc, fps)
    we = weight_entropy(rl)
    s0 = speed(gc, fps, rl)
    rep_core = check_assumptions(gc)
    h_level = we.value
    degenerate = we.degenerate
    if not rep_core.a2_two_cycles:
        # Single escape direction: the ray is deterministic given its line,
        # so the location carries no per-level information.
        h_level = 0.0
        degenerate = True
    afrac = cd.core_step_fraction
    speed_alpha = (1.0 - alpha) * s0 * afrac
    rate = speed_alpha * h_level
    rate_recip = s0 * h_level * afrac / (4.0 * (1.0 - alpha))
    return EntropyReport(
        per_level_entropy=h_level,
        escape_speed=s0,
        core_step_fraction=afrac,
        holding_prob=float(alpha),
        speed=speed_alpha,
        entropy_rate=rate,
        entropy_rate_reciprocal_scaling=rate_recip,
        degenerate=degenerate,
        first_passage=fps,
        ray_law=rl,
        core=cd,
    )


# ---------------------------------------------------------------------------
# mixing-time prediction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixingPrediction:
    """Predicted mixing window on a random lift of size ``n``.

    ``t_center = log(n) / entropy_rate``.  When a Monte Carlo spread is
    available the epsilon-dependent correction
    ``t_center + z(eps) * sigma * sqrt(log n) / entropy_rate**1.5`` is
    reported as ``t_lower``; otherwise ``t_lower`` equals ``t_center`` and
    ``window_used`` is false.
    """

    t_center: float
    t_lower: float
    window_used: bool
    n: int
    eps: float


def predict_mixing_time(report, n, eps):
    """Predict the total-variation mixing time on size-``n`` lifts."""
    if report.degenerate or report.entropy_rate <= 0.0:
        raise AnalysisError(
            "entropy rate is zero (degenerate escape); no cutoff prediction"
        )
    n = int(n)
    if n < 2:
        raise AnalysisError("lift size must be at least 2")
    if not 0.0 < eps < 1.0:
        raise AnalysisError(f"threshold must lie in (0, 1), got {eps}")
    log_n = math.log(n)
    rate = report.entropy_rate
    t_center = log_n / rate
    if report.sigma_mc is None:
        return MixingPrediction(
            t_center=t_center, t_lower=t_center, window_used=False, n=n, eps=eps
        )
    spread = report.sigma_mc / rate**1.5
    t_lower = t_center + float(norm.isf(eps)) * spread * math.sqrt(log_n)
    return MixingPrediction(
        t_center=t_center, t_lower=t_lower, window_used=True, n=n, eps=eps
    )


# ---------------------------------------------------------------------------
# CLT parameters of additive functionals
# ---------------------------------------------------------------------------


def chain_clt_params(kernel, f, stationary=None):
    """Mean and variances of an additive functional of a finite chain.

    Returns ``(mean, var_iid, var_asymptotic)`` where ``var_iid`` ignores
    correlations and ``var_asymptotic`` solves the associated Poisson
    equation ``(I - P) g = f - mean`` by least squares (the minimum-norm
    solution; the result is invariant to the additive constant and the
    solve is well posed even for periodic chains).  Raises
    :class:`AnalysisError` for a reducible kernel.
    """
    p = np.asarray(kernel, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise AnalysisError("kernel must be a square matrix")
    n = p.shape[0]
    rowsums = p.sum(axis=1)
    if np.max(np.abs(rowsums - 1.0)) > 1e-9:
        raise AnalysisError("kernel rows must sum to one")
    ncomp, _ = connected_components(
        csr_matrix(p > 0.0), directed=True, connection="strong"
    )
    if ncomp != 1:
        raise AnalysisError("kernel is reducible; CLT parameters undefined")
    if stationary is None:
        pi, residual = _stationary_of_kernel(p)
        if residual > RAY_STATIONARY_TOL:
            raise AnalysisError(f"stationary residual {residual:.3e}")
    else:
        pi = np.asarray(stationary, dtype=float)
    f = np.asarray(f, dtype=float)
    mean = float(np.dot(pi, f))
    fbar = f - mean
    var_iid = float(np.dot(pi, fbar**2))
    gsol, *_ = np.linalg.lstsq(np.eye(n) - p, fbar, rcond=None)
    var_asym = var_iid + 2.0 * float(np.dot(pi, fbar * (p @ gsol)))
    if var_asym < -1e-10:
        raise AnalysisError("asymptotic variance came out negative")
    return mean, var_iid, max(var_asym, 0.0)
