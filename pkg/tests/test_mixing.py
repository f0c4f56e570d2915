"""Exact TV propagation, mixing curves, sweeps, and spectral proxies."""

import math

import numpy as np
import pytest

from liftmix import (
    AnalysisError,
    Lift,
    conductance_proxy,
    cutoff_sweep,
    entropy,
    generate_uniform_lift,
    lift_stationary,
    mixing_curve,
    parse_graph,
    projection_identity_check,
    propagate,
    substream,
    transition_matrix,
    worst_and_best_case,
)

from conftest import THETA3_TEXT


def _lift8(theta3):
    return generate_uniform_lift(theta3, 8, substream(0, "lift", 8), seed=0)


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------


def test_propagate_matches_matrix_power(asym_theta):
    lift = generate_uniform_lift(asym_theta, 6, substream(1, "lift"))
    from liftmix import lift_transition_matrix

    p = lift_transition_matrix(lift)
    mu0 = np.zeros(lift.n_states)
    mu0[3] = 1.0
    out = propagate(lift, mu0, 7)
    assert out.steps == 7
    expected = mu0 @ np.linalg.matrix_power(p, 7)
    assert np.allclose(out.distribution, expected, atol=1e-12)
    assert out.mass_drift <= 1e-12
    assert out.distribution.sum() == pytest.approx(1.0, abs=1e-12)


def test_propagate_zero_steps_is_identity(theta3):
    lift = _lift8(theta3)
    mu0 = np.zeros(lift.n_states)
    mu0[0] = 1.0
    out = propagate(lift, mu0, 0)
    assert np.array_equal(out.distribution, mu0)


# ---------------------------------------------------------------------------
# mixing curves
# ---------------------------------------------------------------------------


def test_mixing_curve_theta3_n8(theta3):
    lift = _lift8(theta3)
    curve = mixing_curve(lift, 0)
    # from a point mass the initial TV is 1 - 1/16
    assert curve.tv[0] == pytest.approx(1.0 - 1.0 / 16.0, abs=1e-12)
    assert curve.crossings == {0.1: 12, 0.25: 7, 0.5: 3, 0.9: 1}
    assert all(curve.reached.values())
    assert not curve.periodic
    assert curve.mass_drift <= 1e-12
    # monotone nonincreasing
    assert (np.diff(curve.tv) <= 1e-12).all()
    # early stop: tv ends shortly after the last threshold crossing
    assert len(curve.tv) <= 14


def test_mixing_curve_thresholds_are_ordered(theta3):
    lift = _lift8(theta3)
    curve = mixing_curve(lift, 5)
    assert curve.crossings[0.9] <= curve.crossings[0.5]
    assert curve.crossings[0.5] <= curve.crossings[0.25]
    assert curve.crossings[0.25] <= curve.crossings[0.1]


def test_mixing_curve_cap_and_unreached(theta3):
    lift = _lift8(theta3)
    curve = mixing_curve(lift, 0, t_cap=3, eps_list=(0.1, 0.5))
    assert curve.t_cap == 3
    assert curve.crossings[0.5] == 3
    assert curve.crossings[0.1] is None
    assert curve.reached == {0.5: True, 0.1: False}


def test_mixing_curve_periodic_lift_uses_averaging(theta3):
    # without holding the theta lift is bipartite: plain TV plateaus at 1/2
    # while the two-step averaged curve still mixes
    lift = _lift8(theta3)
    curve = mixing_curve(lift, 0, alpha=0.0)
    assert curve.periodic
    assert curve.tv[-1] == pytest.approx(0.5, abs=1e-9)
    assert curve.averaged is not None
    assert curve.averaged.crossings == {0.1: 6, 0.25: 4, 0.5: 2, 0.9: 1}
    assert (np.diff(curve.averaged.tv) <= 1e-12).all()


def test_mixing_curve_aperiodic_has_no_averaged_sibling(theta3):
    lift = _lift8(theta3)
    assert mixing_curve(lift, 0).averaged is None


def test_mixing_curve_input_validation(theta3):
    lift = _lift8(theta3)
    with pytest.raises(AnalysisError):
        mixing_curve(lift, -1)
    with pytest.raises(AnalysisError):
        mixing_curve(lift, 0, eps_list=())
    with pytest.raises(AnalysisError):
        mixing_curve(lift, 0, eps_list=(0.0,))
    with pytest.raises(AnalysisError):
        mixing_curve(lift, 0, t_cap=-1)


# ---------------------------------------------------------------------------
# worst and best starts
# ---------------------------------------------------------------------------


def test_worst_best_exhaustive(theta3):
    lift = _lift8(theta3)
    wb = worst_and_best_case(lift, eps=0.25, starts="all")
    assert wb.exact
    assert (wb.t_max, wb.t_min) == (13, 7)
    assert wb.per_start[wb.argmax] == 13
    assert wb.per_start[wb.argmin] == 7
    assert len(wb.per_start) == 16
    assert all(t is not None for t in wb.per_start.values())


def test_worst_best_sampled_is_nested(theta3):
    lift = _lift8(theta3)
    exact = worst_and_best_case(lift, eps=0.25, starts="all")
    sampled = worst_and_best_case(
        lift, eps=0.25, starts="sample:4", rng=substream(1, "starts")
    )
    assert not sampled.exact
    assert len(sampled.per_start) == 4
    assert exact.t_min <= sampled.t_min
    assert sampled.t_max <= exact.t_max


def test_worst_best_unreached_cap(theta3):
    lift = _lift8(theta3)
    wb = worst_and_best_case(lift, eps=0.01, starts="all", t_cap=2)
    assert wb.t_max is None
    assert wb.argmax is None


def test_worst_best_policy_validation(theta3):
    lift = _lift8(theta3)
    with pytest.raises(AnalysisError):
        worst_and_best_case(lift, starts="sample:3")  # rng required
    with pytest.raises(AnalysisError):
        worst_and_best_case(lift, starts="sample:0", rng=substream(0, "s"))
    with pytest.raises(AnalysisError):
        worst_and_best_case(lift, starts="everything")


def test_worst_best_exhaustive_cap(theta3):
    big = Lift(theta3, 15_000, tuple(np.arange(15_000) for _ in range(3)))
    with pytest.raises(AnalysisError, match="exhaustive"):
        worst_and_best_case(big, starts="all")


# ---------------------------------------------------------------------------
# cutoff sweep
# ---------------------------------------------------------------------------


def test_cutoff_sweep_small_grid(theta3):
    res = cutoff_sweep(
        theta3, (32, 64), n_seeds=2, master_seed=5, starts="sample:3", workers=1
    )
    assert res.n_grid == (32, 64)
    assert res.n_seeds == 2
    assert res.eps_primary == 0.25
    # one row per (n, seed, start, eps)
    assert len(res.rows) == 2 * 2 * 3 * 4
    assert all(row.reached for row in res.rows)
    assert math.isfinite(res.slope)
    assert res.slope > 0
    assert res.slope_ci[0] <= res.slope <= res.slope_ci[1]
    assert res.predicted_slope == pytest.approx(
        1.0 / entropy(theta3).entropy_rate, abs=1e-9
    )
    assert res.entropy_rate == pytest.approx(math.log(2) / 6.0, abs=1e-9)
    # per-seed window ratios are recorded for each n
    assert set(res.window_ratios) == {0, 1}
    assert all(len(v) == 2 for v in res.window_ratios.values())
    assert res.window_nonincreasing_seeds == 2
    assert res.verdict_window
    assert res.t_caps[64] > res.t_caps[32]
    assert res.alpha == 0.5


def test_cutoff_sweep_deterministic_across_workers(theta3):
    r1 = cutoff_sweep(
        theta3, (32, 64), n_seeds=2, master_seed=5, starts="sample:3", workers=1
    )
    r2 = cutoff_sweep(
        theta3, (32, 64), n_seeds=2, master_seed=5, starts="sample:3", workers=2
    )
    assert r1.rows == r2.rows
    assert r1.slope == r2.slope
    assert r1.window_ratios == r2.window_ratios


def test_cutoff_sweep_rejects_degenerate(c3b):
    with pytest.raises(AnalysisError, match="degenerate"):
        cutoff_sweep(c3b, (16,), n_seeds=1)


def test_cutoff_sweep_respects_explicit_cap(theta3):
    res = cutoff_sweep(
        theta3,
        (16, 32),
        n_seeds=1,
        master_seed=5,
        starts="sample:2",
        t_cap=200,
        workers=1,
    )
    assert res.t_caps == {16: 200, 32: 200}


# ---------------------------------------------------------------------------
# conductance proxy
# ---------------------------------------------------------------------------


def test_conductance_proxy_theta3(theta3):
    lift = _lift8(theta3)
    cp = conductance_proxy(lift)
    assert cp.converged
    assert not cp.flagged
    assert 0.0 < cp.sigma2 < 1.0
    assert cp.gap == pytest.approx(1.0 - cp.sigma2, abs=1e-15)
    assert cp.bound == pytest.approx(cp.gap / 2.0, abs=1e-15)
    # verify against the dense singular values of the symmetrized kernel
    from liftmix import lift_transition_matrix

    p = lift_transition_matrix(lift)
    pi = lift_stationary(lift).reshape(-1)
    d = np.sqrt(pi)
    a = d[:, None] * p / d[None, :]
    svals = np.linalg.svd(a, compute_uv=False)
    assert cp.sigma2 == pytest.approx(float(svals[1]), abs=1e-8)


def test_conductance_proxy_flags_disconnected_lift(theta3):
    # identity permutations keep the n sheets disconnected: the second
    # singular value is 1 and the proxy must flag itself useless
    ident = Lift(theta3, 4, (range(4), range(4), range(4)))
    cp = conductance_proxy(ident)
    assert cp.sigma2 == pytest.approx(1.0, abs=1e-9)
    assert cp.flagged


def test_conductance_proxy_reports_nonconvergence(theta3):
    lift = _lift8(theta3)
    cp = conductance_proxy(lift, max_iter=2)
    assert not cp.converged
    assert cp.iterations == 2


# ---------------------------------------------------------------------------
# projection identity
# ---------------------------------------------------------------------------


def test_projection_identity(theta3, c3b):
    for g, n, seed in ((theta3, 16, 0), (c3b, 9, 1)):
        lift = generate_uniform_lift(g, n, substream(seed, "lift", n))
        dev = projection_identity_check(lift, 0, 40)
        assert dev <= 1e-12


def test_projected_step_equals_base_step(theta3):
    # one lift step folded over fibers equals one base-chain step
    lift = _lift8(theta3)
    from liftmix import apply_kernel, project_distribution

    mu = np.zeros(lift.n_states)
    mu[lift.state("u", 5)] = 1.0
    stepped = apply_kernel(lift, mu)
    folded = project_distribution(lift, stepped)
    base = np.zeros(2)
    base[0] = 1.0
    assert np.allclose(folded, base @ transition_matrix(theta3), atol=1e-14)
