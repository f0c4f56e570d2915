"""Escape analysis: first passage, ray law, entropy, speed, predictions.

Expected constants come from closed forms where available:

* three parallel edges at weight 1/3 ("theta"): crossing probability is the
  smaller root of 2q^2 - 3q + 1, i.e. 1/2; every ray exit is 1/3; per-level
  entropy log 2; escape speed 1/3.
* bouquet of d/2 loops at weight 1/d: crossing probability 1/(d-1), exits
  1/d, per-level entropy log(d-1), escape speed (d-2)/d.
* biased 3-cycle (0.7/0.3): forward crossing 1, backward 3/7, deterministic
  ray (degenerate entropy), line-drift speed 0.4.

The asymmetric theta constants were computed once with an independent
40-digit fixed-point solve and are frozen here to 15 significant digits.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liftmix import (
    AnalysisError,
    NonConvergenceError,
    chain_clt_params,
    core,
    entropy,
    parse_graph,
    predict_mixing_time,
    ray_law,
    solve_first_passage,
    speed,
    weight_entropy,
)

from conftest import bouquet_text

LOG2 = math.log(2.0)

# frozen independent solve for the asymmetric theta (0.5/0.2, 0.3/0.3, 0.2/0.5)
ASYM_Q = [
    0.673831923137306,
    0.269532769254922,
    0.410696041346029,
    0.410696041346029,
    0.269532769254922,
    0.673831923137306,
]
ASYM_RETURN = 0.392741581658731
ASYM_EXIT = [
    0.601446771821093,
    0.107423155286550,
    0.291130072892357,
    0.291130072892357,
    0.107423155286550,
    0.601446771821093,
]
ASYM_FREQ = [
    0.341488943463578,
    0.027234416081223,
    0.131276640455199,
    0.131276640455199,
    0.027234416081223,
    0.341488943463578,
]
ASYM_HW = 0.574681161231674
ASYM_S0 = 0.477320092249599


# ---------------------------------------------------------------------------
# first-passage fixed point
# ---------------------------------------------------------------------------


def test_first_passage_theta3(theta3):
    fp = solve_first_passage(theta3)
    assert np.allclose(fp.prob, 0.5, atol=1e-9)
    assert np.allclose(fp.return_prob, 0.5, atol=1e-9)
    assert fp.residual <= 1e-12
    assert fp.iterations < 200
    assert fp.as_dict(theta3) == pytest.approx(
        {name: 0.5 for name in ("e1+", "e1-", "e2+", "e2-", "e3+", "e3-")},
        abs=1e-9,
    )


def test_first_passage_returns_minimal_root(theta3):
    # 2q^2 - 3q + 1 = 0 has roots 1/2 and 1; iteration from zero must
    # select 1/2, while restarting at the all-ones root stays there.
    fp = solve_first_passage(theta3)
    assert np.max(fp.prob) < 0.75
    ones = solve_first_passage(theta3, init=np.ones(6))
    assert np.allclose(ones.prob, 1.0, atol=1e-12)


def test_first_passage_restarts_from_its_own_root(theta3):
    fp = solve_first_passage(theta3)
    again = solve_first_passage(theta3, init=fp.prob)
    assert again.iterations <= 2
    assert np.allclose(again.prob, fp.prob, atol=1e-12)


def test_first_passage_satisfies_equations(asym_theta):
    fp = solve_first_passage(asym_theta)
    g = asym_theta
    w = g.oriented_weight
    q = fp.prob
    inv = np.arange(6) ^ 1
    contrib = w * q[inv]
    total = np.zeros(2)
    np.add.at(total, g.oriented_init, contrib)
    s = total[g.oriented_init] - contrib
    assert np.max(np.abs(w + q * s - q)) <= 1e-11
    assert np.allclose(q, ASYM_Q, atol=1e-9)
    assert np.allclose(fp.return_prob, ASYM_RETURN, atol=1e-9)
    # prob_over_weight agrees with q / w where w > 0
    assert np.allclose(fp.prob_over_weight, q / w, atol=1e-9)


def test_first_passage_bouquets():
    for d in (4, 6, 8):
        g = parse_graph(bouquet_text(d))
        fp = solve_first_passage(g)
        assert np.allclose(fp.prob, 1.0 / (d - 1), atol=1e-9)


def test_first_passage_biased_cycle(c3b):
    fp = solve_first_passage(c3b)
    # forward orientation is crossed surely; backward with probability 3/7
    assert np.allclose(fp.prob[0::2], 1.0, atol=1e-9)
    assert np.allclose(fp.prob[1::2], 3.0 / 7.0, atol=1e-9)
    assert np.allclose(fp.return_prob, 0.6, atol=1e-9)


def test_first_passage_diverges_on_recurrent_graph(sym3):
    with pytest.raises(NonConvergenceError) as err:
        solve_first_passage(sym3, max_iter=2000)
    assert err.value.residual > 0
    assert err.value.iterations == 2000


def test_first_passage_rejects_unpruned_graph(pendant):
    with pytest.raises(AnalysisError):
        solve_first_passage(pendant)


# ---------------------------------------------------------------------------
# ray law
# ---------------------------------------------------------------------------


def test_ray_law_theta3(theta3):
    fp = solve_first_passage(theta3)
    rl = ray_law(theta3, fp)
    assert np.allclose(rl.exit_prob, 1.0 / 3.0, atol=1e-9)
    assert np.allclose(rl.edge_freq, 1.0 / 6.0, atol=1e-9)
    assert rl.stationarity_residual <= 1e-10
    assert rl.support.all()
    # the ray chain forbids backtracking and non-composable steps
    k = rl.kernel
    for a in range(6):
        assert k[a, a ^ 1] == 0.0
        row = k[a]
        assert row.sum() == pytest.approx(1.0, abs=1e-9)
        for b in range(6):
            if theta3.oriented_end[a] != theta3.oriented_init[b]:
                assert row[b] == 0.0
    # allowed continuations split the mass evenly: 1/3 over 2/3
    assert k[0, 3] == pytest.approx(0.5, abs=1e-9)
    assert k[0, 5] == pytest.approx(0.5, abs=1e-9)


def test_ray_law_exit_sums_to_one_per_vertex(asym_theta):
    fp = solve_first_passage(asym_theta)
    rl = ray_law(asym_theta, fp)
    sums = np.zeros(2)
    np.add.at(sums, asym_theta.oriented_init, rl.exit_prob)
    assert np.allclose(sums, 1.0, atol=1e-9)
    assert np.allclose(rl.exit_prob, ASYM_EXIT, atol=1e-9)
    assert np.allclose(rl.edge_freq, ASYM_FREQ, atol=1e-9)
    assert rl.edge_freq.sum() == pytest.approx(1.0, abs=1e-12)


def test_ray_law_biased_cycle_is_deterministic(c3b):
    fp = solve_first_passage(c3b)
    rl = ray_law(c3b, fp)
    assert np.allclose(rl.exit_prob[0::2], 1.0, atol=1e-9)
    assert np.all(rl.exit_prob[1::2] <= 1e-9)
    assert np.allclose(rl.edge_freq[0::2], 1.0 / 3.0, atol=1e-9)
    assert np.allclose(rl.edge_freq[1::2], 0.0, atol=1e-12)
    assert list(rl.support) == [True, False] * 3
    assert sorted(rl.recurrent_class) == [0, 2, 4]


# ---------------------------------------------------------------------------
# entropy and speed constants
# ---------------------------------------------------------------------------


def test_weight_entropy_theta3(theta3):
    fp = solve_first_passage(theta3)
    rl = ray_law(theta3, fp)
    we = weight_entropy(rl)
    assert not we.degenerate
    assert we.value == pytest.approx(LOG2, abs=1e-9)


def test_speed_theta3(theta3):
    fp = solve_first_passage(theta3)
    rl = ray_law(theta3, fp)
    assert speed(theta3, fp, rl) == pytest.approx(1.0 / 3.0, abs=1e-9)


@pytest.mark.parametrize("d", [4, 6, 8])
def test_bouquet_constants(d):
    g = parse_graph(bouquet_text(d))
    rep = entropy(g)
    assert rep.per_level_entropy == pytest.approx(math.log(d - 1), abs=1e-9)
    assert rep.escape_speed == pytest.approx((d - 2) / d, abs=1e-9)
    assert rep.holding_prob == 0.0
    assert rep.core_step_fraction == pytest.approx(1.0, abs=1e-12)
    assert rep.entropy_rate == pytest.approx(
        (d - 2) / d * math.log(d - 1), abs=1e-9
    )


def test_entropy_report_theta3(theta3):
    rep = entropy(theta3)
    assert rep.per_level_entropy == pytest.approx(LOG2, abs=1e-9)
    assert rep.escape_speed == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert rep.holding_prob == 0.5
    assert not rep.degenerate
    assert rep.entropy_rate == pytest.approx(LOG2 / 6.0, abs=1e-9)
    assert rep.speed == pytest.approx(1.0 / 6.0, abs=1e-9)
    # at holding probability 1/2 both scaling conventions coincide
    assert rep.entropy_rate_reciprocal_scaling == pytest.approx(
        rep.entropy_rate, abs=1e-12
    )


def test_entropy_alpha_override_theta3(theta3):
    rep = entropy(theta3, alpha=0.0)
    assert rep.holding_prob == 0.0
    assert rep.entropy_rate == pytest.approx(LOG2 / 3.0, abs=1e-9)
    # the alternative convention divides the half-lazy rate by 2(1 - alpha)
    assert rep.entropy_rate_reciprocal_scaling == pytest.approx(
        LOG2 / 12.0, abs=1e-9
    )


def test_entropy_asym_theta(asym_theta):
    rep = entropy(asym_theta)
    assert rep.per_level_entropy == pytest.approx(ASYM_HW, abs=1e-9)
    assert rep.escape_speed == pytest.approx(ASYM_S0, abs=1e-9)
    assert rep.entropy_rate == pytest.approx(0.5 * ASYM_S0 * ASYM_HW, abs=1e-9)


def test_entropy_pendant(pendant):
    rep = entropy(pendant)
    assert rep.core.removed_vertices == ("p",)
    assert rep.per_level_entropy == pytest.approx(LOG2, abs=1e-9)
    assert rep.escape_speed == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert rep.core_step_fraction == pytest.approx(0.75, abs=1e-12)
    assert rep.entropy_rate == pytest.approx(0.75 * LOG2 / 6.0, abs=1e-9)
    assert rep.speed == pytest.approx(0.125, abs=1e-9)


def test_entropy_degenerate_biased_cycle(c3b):
    rep = entropy(c3b)
    assert rep.degenerate
    assert rep.per_level_entropy == 0.0
    assert rep.entropy_rate == 0.0
    assert rep.escape_speed == pytest.approx(0.4, abs=1e-9)
    assert rep.speed == pytest.approx(0.4, abs=1e-9)


def test_entropy_rejects_recurrent(sym3, doubled_edge, path2):
    for g in (sym3, doubled_edge, path2):
        with pytest.raises(AnalysisError):
            entropy(g)


def test_entropy_forwards_solver_budget(theta3):
    with pytest.raises(NonConvergenceError):
        entropy(theta3, max_iter=3)


def test_with_sigma_returns_updated_copy(theta3):
    rep = entropy(theta3)
    assert rep.sigma_mc is None
    rep2 = rep.with_sigma(0.5, 0.01)
    assert rep.sigma_mc is None
    assert rep2.sigma_mc == 0.5
    assert rep2.sigma_mc_se == 0.01
    assert rep2.entropy_rate == rep.entropy_rate


# ---------------------------------------------------------------------------
# mixing-time prediction
# ---------------------------------------------------------------------------


def test_predict_center_theta3(theta3):
    rep = entropy(theta3)
    pred = predict_mixing_time(rep, 4096, 0.25)
    # log(4096) = 12 log 2 and the rate is log(2)/6, so the center is 72
    assert pred.t_center == pytest.approx(72.0, abs=1e-6)
    assert not pred.window_used
    assert pred.t_lower == pred.t_center


def test_predict_window_direction(theta3):
    rep = entropy(theta3).with_sigma(0.466)
    lo = predict_mixing_time(rep, 4096, 0.25)
    hi = predict_mixing_time(rep, 4096, 0.75)
    mid = predict_mixing_time(rep, 4096, 0.5)
    assert lo.window_used
    # smaller thresholds take longer: the predicted band widens around the
    # center symmetrically in the normal quantile
    assert lo.t_lower > mid.t_lower == pytest.approx(72.0, abs=1e-6)
    assert hi.t_lower < mid.t_lower
    assert lo.t_lower - mid.t_lower == pytest.approx(
        mid.t_lower - hi.t_lower, abs=1e-9
    )


def test_predict_input_validation(theta3, c3b):
    rep = entropy(theta3)
    with pytest.raises(AnalysisError):
        predict_mixing_time(rep, 1, 0.25)
    with pytest.raises(AnalysisError):
        predict_mixing_time(rep, 100, 0.0)
    with pytest.raises(AnalysisError):
        predict_mixing_time(rep, 100, 1.0)
    with pytest.raises(AnalysisError):
        predict_mixing_time(entropy(c3b), 100, 0.25)


# ---------------------------------------------------------------------------
# CLT parameters of additive functionals
# ---------------------------------------------------------------------------


def test_chain_clt_two_state_closed_form():
    # flip probabilities a = 0.3, b = 0.1: stationary (1/4, 3/4),
    # autocorrelation rho = 1 - a - b = 0.6,
    # asymptotic variance = iid variance * (1 + rho) / (1 - rho)
    kernel = np.array([[0.7, 0.3], [0.1, 0.9]])
    f = np.array([1.0, 0.0])
    mean, var_iid, var_asym = chain_clt_params(kernel, f)
    assert mean == pytest.approx(0.25, abs=1e-12)
    assert var_iid == pytest.approx(0.1875, abs=1e-12)
    assert var_asym == pytest.approx(0.75, abs=1e-10)


def test_chain_clt_iid_rows():
    # every row equal to the stationary law: no memory, variances agree
    pi = np.array([0.2, 0.3, 0.5])
    kernel = np.tile(pi, (3, 1))
    f = np.array([1.0, -1.0, 2.0])
    mean, var_iid, var_asym = chain_clt_params(kernel, f)
    assert mean == pytest.approx(float(pi @ f), abs=1e-12)
    assert var_asym == pytest.approx(var_iid, abs=1e-10)


def test_chain_clt_constant_functional_on_ray_chain(theta3):
    # the per-step information of the theta ray is constant log 2, so the
    # asymptotic variance vanishes
    fp = solve_first_passage(theta3)
    rl = ray_law(theta3, fp)
    x = rl.exit_prob
    f = np.array(
        [-(math.log(x[k]) - math.log1p(-x[k ^ 1])) for k in range(6)]
    )
    mean, var_iid, var_asym = chain_clt_params(rl.kernel, f, rl.edge_freq)
    assert mean == pytest.approx(LOG2, abs=1e-9)
    assert var_iid == pytest.approx(0.0, abs=1e-12)
    assert var_asym == pytest.approx(0.0, abs=1e-10)


# ---------------------------------------------------------------------------
# property tests
# ---------------------------------------------------------------------------


@st.composite
def random_two_vertex_multigraph(draw):
    """Theta-like graphs with 3 parallel edges and random dyadic weights."""
    denom = 8
    def split():
        a = draw(st.integers(1, denom - 2))
        b = draw(st.integers(1, denom - 1 - a))
        c = denom - a - b
        return a, b, c
    fwd = split()
    bwd = split()
    lines = ["alpha 1/2", "vertex u", "vertex v"]
    for j in range(3):
        lines.append(f"edge e{j} u v {fwd[j]}/{denom} {bwd[j]}/{denom}")
    return parse_graph("\n".join(lines) + "\n")


@settings(max_examples=25, deadline=None)
@given(random_two_vertex_multigraph())
def test_random_theta_analysis_invariants(g):
    rep = entropy(g)
    fp = rep.first_passage
    rl = rep.ray_law
    # minimal root lies strictly inside (0, 1)
    assert np.all(fp.prob > 0.0)
    assert np.all(fp.prob < 1.0)
    # exit law is a probability over each vertex's out-orientations
    sums = np.zeros(2)
    np.add.at(sums, g.oriented_init, rl.exit_prob)
    assert np.allclose(sums, 1.0, atol=1e-8)
    # entropy and speed are positive and bounded
    assert 0.0 < rep.per_level_entropy <= math.log(5)
    assert 0.0 < rep.escape_speed < 1.0
    assert rep.entropy_rate == pytest.approx(
        0.5 * rep.escape_speed * rep.per_level_entropy, rel=1e-12
    )
    # frequencies are stationary for the kernel
    resid = np.max(np.abs(rl.edge_freq @ rl.kernel - rl.edge_freq))
    assert resid <= 1e-8
