"""Random n-fold covers (lifts) of a base graph.

An n-lift replaces every vertex by a fiber of n copies and every edge by a
perfect matching between the two fibers, described by one permutation per
edge: edge copies run from ``(tail, i)`` to ``(head, perm[i])``.  The lazy
walk on the lift projects onto the lazy walk on the base graph, and every
base eigenfunction pulls back to the lift with the same eigenvalue.

States of the lift are flat indices ``base_index * n + fiber_index``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .base_graph import stationary_distribution
from .errors import AnalysisError, GraphError


@dataclass(frozen=True, eq=False)
class Lift:
    """An n-fold cover of ``base`` given by one permutation per edge.

    ``perms[j][i]`` is the fiber index of the head endpoint of the i-th
    copy of edge j (edges in file order).  ``seed`` optionally records the
    master seed the permutations were drawn from.
    """

    base: object
    n: int
    perms: tuple
    seed: Optional[int] = None
    _inv_perms: tuple = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise GraphError(f"lift degree must be >= 1, got {n}")
        if len(self.perms) != len(self.base.edges):
            raise GraphError(
                f"need {len(self.base.edges)} permutations, got {len(self.perms)}"
            )
        perms = []
        invs = []
        ident = np.arange(n, dtype=np.int64)
        for j, p in enumerate(self.perms):
            arr = np.asarray(p, dtype=np.int64)
            if arr.shape != (n,) or not np.array_equal(np.sort(arr), ident):
                raise GraphError(
                    f"permutation for edge {self.base.edges[j].eid!r} is not "
                    f"a permutation of 0..{n - 1}"
                )
            inv = np.empty(n, dtype=np.int64)
            inv[arr] = ident
            perms.append(arr)
            invs.append(inv)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "perms", tuple(perms))
        object.__setattr__(self, "_inv_perms", tuple(invs))

    @property
    def n_states(self):
        return self.base.n_vertices * self.n

    def state(self, vertex_label, fiber):
        """Flat state index of ``(vertex_label, fiber)``."""
        fiber = int(fiber)
        if vertex_label not in self.base.vertex_index:
            raise GraphError(f"unknown vertex {vertex_label!r}")
        if not 0 <= fiber < self.n:
            raise GraphError(f"fiber index {fiber} out of range")
        return self.base.vertex_index[vertex_label] * self.n + fiber

    def split(self, state):
        """Inverse of :meth:`state`: ``(base_vertex_index, fiber)``."""
        state = int(state)
        if not 0 <= state < self.n_states:
            raise GraphError(f"state {state} out of range")
        return divmod(state, self.n)

    def step(self, state, oriented_label):
        """State reached from ``state`` along one oriented edge copy."""
        u, i = self.split(state)
        k = int(oriented_label)
        g = self.base
        if not 0 <= k < g.n_oriented:
            raise GraphError(f"oriented label {k} out of range")
        if g.oriented_init[k] != u:
            raise GraphError(
                f"oriented edge {g.oriented_name(k)} does not start at "
                f"vertex {g.vertices[u]!r}"
            )
        j, rev = divmod(k, 2)
        if rev == 0:
            i2 = int(self.perms[j][i])
        else:
            i2 = int(self._inv_perms[j][i])
        return int(g.oriented_end[k]) * self.n + i2


def generate_uniform_lift(g, n, rng, seed=None):
    """Lift with one independent uniform permutation per edge (file order)."""
    perms = tuple(rng.permutation(int(n)).astype(np.int64) for _ in g.edges)
    return Lift(base=g, n=int(n), perms=perms, seed=seed)


def generate_sequential_lift(g, n, rng, seed=None):
    """Lift built by sequentially matching fiber endpoints one at a time.

    For each edge, both endpoint fibers start as free pools; repeatedly a
    free endpoint is chosen uniformly among all remaining free endpoints on
    either side and matched to a uniform free partner on the opposite side.
    The resulting matching is exchangeable and uniform over permutations,
    which the distribution-comparison check exercises empirically.
    """
    n = int(n)
    perms = []
    for _ in g.edges:
        perm = np.empty(n, dtype=np.int64)
        u_pool = list(range(n))
        v_pool = list(range(n))
        while u_pool:
            r = int(rng.integers(len(u_pool) + len(v_pool)))
            if r < len(u_pool):
                ui = r
                vi = int(rng.integers(len(v_pool)))
            else:
                vi = r - len(u_pool)
                ui = int(rng.integers(len(u_pool)))
            u = u_pool[ui]
            v = v_pool[vi]
            u_pool[ui] = u_pool[-1]
            u_pool.pop()
            v_pool[vi] = v_pool[-1]
            v_pool.pop()
            perm[u] = v
        perms.append(perm)
    return Lift(base=g, n=n, perms=tuple(perms), seed=seed)


def _check_alpha(lift, alpha):
    if alpha is None:
        alpha = lift.base.alpha
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise AnalysisError(f"holding probability must lie in [0, 1), got {alpha}")
    return alpha


def apply_kernel(lift, mu, alpha=None):
    """One lazy-walk step applied to a distribution on the lift.

    ``mu`` has shape ``(n_vertices, n)`` (or flat ``n_states``); the result
    has the same shape.  Pure gather operations, no renormalization.
    """
    g = lift.base
    alpha = _check_alpha(lift, alpha)
    arr = np.asarray(mu)
    flat_in = arr.ndim == 1
    m = arr.reshape(g.n_vertices, lift.n)
    out = alpha * m
    lazy = 1.0 - alpha
    for j, e in enumerate(g.edges):
        u = g.vertex_index[e.tail]
        v = g.vertex_index[e.head]
        sigma = lift.perms[j]
        sigma_inv = lift._inv_perms[j]
        if e.weight_fwd > 0.0:
            out[v] += (lazy * e.weight_fwd) * m[u][sigma_inv]
        if e.weight_bwd > 0.0:
            out[u] += (lazy * e.weight_bwd) * m[v][sigma]
    return out.reshape(-1) if flat_in else out


def apply_kernel_to_function(lift, f, alpha=None):
    """One lazy-walk step applied to a function on the lift (right action)."""
    g = lift.base
    alpha = _check_alpha(lift, alpha)
    arr = np.asarray(f)
    flat_in = arr.ndim == 1
    m = arr.reshape(g.n_vertices, lift.n)
    out = alpha * m
    lazy = 1.0 - alpha
    for j, e in enumerate(g.edges):
        u = g.vertex_index[e.tail]
        v = g.vertex_index[e.head]
        sigma = lift.perms[j]
        sigma_inv = lift._inv_perms[j]
        if e.weight_fwd > 0.0:
            out[u] += (lazy * e.weight_fwd) * m[v][sigma]
        if e.weight_bwd > 0.0:
            out[v] += (lazy * e.weight_bwd) * m[u][sigma_inv]
    return out.reshape(-1) if flat_in else out


def lift_transition_matrix(lift, alpha=None):
    """Dense transition matrix of the lazy walk on the lift."""
    g = lift.base
    alpha = _check_alpha(lift, alpha)
    size = lift.n_states
    mat = np.zeros((size, size))
    np.fill_diagonal(mat, alpha)
    lazy = 1.0 - alpha
    fibers = np.arange(lift.n)
    for j, e in enumerate(g.edges):
        u = g.vertex_index[e.tail]
        v = g.vertex_index[e.head]
        rows_u = u * lift.n + fibers
        cols_v = v * lift.n + lift.perms[j]
        if e.weight_fwd > 0.0:
            mat[rows_u, cols_v] += lazy * e.weight_fwd
        if e.weight_bwd > 0.0:
            mat[cols_v, rows_u] += lazy * e.weight_bwd
    return mat


def project_distribution(lift, mu):
    """Push a lift distribution down to the base graph (sum over fibers)."""
    m = np.asarray(mu).reshape(lift.base.n_vertices, lift.n)
    return m.sum(axis=1)


def lift_stationary(lift):
    """Stationary distribution of the lift: base stationary split evenly.

    Shape ``(n_vertices, n)``.  Every lift of the base chain preserves this
    measure because each edge contributes the same weight between matched
    fiber copies.
    """
    pi = stationary_distribution(lift.base).as_array()
    return np.repeat(pi[:, None], lift.n, axis=1) / lift.n


@dataclass(frozen=True)
class SpectrumCheck:
    """Residuals of base eigenfunctions pulled back to a lift."""

    eigenvalues: tuple
    max_residual: float


def spectrum_inheritance_check(lift, alpha=None):
    """Verify every base eigenfunction lifts with the same eigenvalue.

    Diagonalizes the base transition matrix, repeats each eigenvector
    across fibers, applies the lift kernel, and reports the largest
    max-norm residual ``|P_lift F - lambda F|``.  Exact for every holding
    probability, including eigenvalue -1 on bipartite graphs without
    laziness.  Returns eigenvalues sorted by real part, descending.
    """
    from .base_graph import transition_matrix

    g = lift.base
    alpha = _check_alpha(lift, alpha)
    p0 = transition_matrix(g, alpha=alpha)
    eigvals, eigvecs = np.linalg.eig(p0)
    worst = 0.0
    for idx in range(len(eigvals)):
        lam = eigvals[idx]
        phi = eigvecs[:, idx]
        lifted = np.repeat(phi[:, None], lift.n, axis=1)
        applied = apply_kernel_to_function(lift, lifted.astype(complex), alpha=alpha)
        resid = float(np.abs(applied - lam * lifted).max())
        worst = max(worst, resid)
    order = np.argsort(-eigvals.real)
    return SpectrumCheck(
        eigenvalues=tuple(complex(z) for z in eigvals[order]),
        max_residual=worst,
    )


def lift_to_json(lift):
    """Serialize a lift (permutations 1-based, keyed by edge id)."""
    payload = {
        "base_hash": lift.base.digest(),
        "n": lift.n,
        "seed": lift.seed,
        "permutations": {
            e.eid: [int(x) + 1 for x in lift.perms[j]]
            for j, e in enumerate(lift.base.edges)
        },
    }
    return json.dumps(payload, separators=(",", ":"), sort_keys=True)


def lift_from_json(g, text):
    """Rebuild a lift serialized by :func:`lift_to_json`, revalidating it."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid lift JSON: {exc}") from exc
    for key in ("base_hash", "n", "permutations"):
        if key not in payload:
            raise GraphError(f"lift JSON missing field {key!r}")
    if payload["base_hash"] != g.digest():
        raise GraphError(
            "lift JSON was generated for a different base graph "
            f"(hash {payload['base_hash'][:12]}... != {g.digest()[:12]}...)"
        )
    n = int(payload["n"])
    stored = payload["permutations"]
    perms = []
    for e in g.edges:
        if e.eid not in stored:
            raise GraphError(f"lift JSON missing permutation for edge {e.eid!r}")
        perms.append(np.asarray(stored[e.eid], dtype=np.int64) - 1)
    return Lift(base=g, n=n, perms=tuple(perms), seed=payload.get("seed"))
