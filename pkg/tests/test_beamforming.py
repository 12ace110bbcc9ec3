import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import generalized_ratio_max, projected_eigen

from jcrlab.beamforming import (
    InfeasibleNullError,
    PlsProblemSpec,
    SubproblemInfeasible,
    build_comm_subproblem,
    build_radar_subproblem,
    relative_change,
    sca_solve,
    secrecy,
    solve_coop_comm,
    solve_coop_radar,
    transmit_null_basis,
)
from jcrlab.linalg import herm, trace_power
from jcrlab.receiver import rate, sinr_bob
from jcrlab.scenario import SceneParams, random_scene
from jcrlab.sdp import solve

seeds = st.integers(0, 2**32 - 1)


def unit_cov(rng, n):
    g = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    w = g @ herm(g)
    return w / np.trace(w).real


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_coop_comm_nulls_radar_and_matches_projected_eigen(seed):
    sc = random_scene(SceneParams(), np.random.default_rng(seed))
    res = solve_coop_comm(sc)
    assert np.isclose(np.linalg.norm(res.weight), 1.0)
    w = np.outer(res.weight, res.weight.conj())
    assert trace_power(sc.comm_radar.power_form, w) <= 1e-10 * np.linalg.eigvalsh(sc.comm_radar.power_form)[-1]
    basis = transmit_null_basis([sc.comm_radar])
    assert np.isclose(res.objective, projected_eigen(sc.comm_bob.power_form, basis), rtol=1e-6)


def test_coop_radar_modes(scene):
    direct = solve_coop_radar(scene, "direct")
    w = np.outer(direct.weight, direct.weight.conj())
    assert trace_power(scene.radar_bob.power_form, w) <= 1e-10 * np.linalg.eigvalsh(scene.radar_bob.power_form)[-1]
    assert direct.objective > 0
    # full nulling also removes every reflected path, so no echo survives
    full = solve_coop_radar(scene, "full")
    assert full.objective <= 1e-8 * direct.objective
    with pytest.raises(ValueError):
        solve_coop_radar(scene, "partial")


def test_no_null_space_raises():
    sc = random_scene(SceneParams(n_comm_tx=1), np.random.default_rng(0))
    with pytest.raises(InfeasibleNullError):
        solve_coop_comm(sc)


def test_comm_subproblem_modes_agree(scene):
    w_k = unit_cov(np.random.default_rng(1), scene.n_radar_tx)
    elim = build_comm_subproblem(scene, w_k, "eliminate")
    cons = build_comm_subproblem(scene, w_k, "constraint")
    a = elim.recover(solve(elim.problem, tol_feas=1e-10, tol_gap=1e-10))
    # the near-zero right-hand side leaves the constrained form poorly conditioned,
    # so it only gets close to the eliminated optimum
    b = cons.recover(solve(cons.problem, max_iter=5000))
    assert np.isclose(elim.fractional_objective(a), cons.fractional_objective(b), rtol=2e-3)
    lam = np.linalg.eigvalsh(scene.comm_radar.power_form)[-1]
    assert trace_power(scene.comm_radar.power_form, a) <= 1e-10 * lam
    assert trace_power(scene.comm_radar.power_form, b) <= 1e-3 * lam
    assert np.isclose(np.trace(a).real, 1.0, atol=1e-6)
    assert np.isclose(np.trace(b).real, 1.0, atol=1e-3)
    for w in (a, b):
        assert np.linalg.eigvalsh(w)[0] >= -1e-8


def test_transformed_point_round_trip(scene):
    rng = np.random.default_rng(2)
    sub = build_comm_subproblem(scene, unit_cov(rng, scene.n_radar_tx))
    w = unit_cov(rng, scene.n_comm_tx)
    u, big_u = sub.transformed(w)
    assert np.allclose(big_u / u, w)
    ratio = u + sub.k1 * trace_power(sub.q_bob, big_u)
    assert np.isclose(np.log2(ratio), sub.fractional_objective(w))


def test_comm_step_reaches_generalized_eigen_bound(scene):
    sub = build_comm_subproblem(scene, unit_cov(np.random.default_rng(3), scene.n_radar_tx))
    sol = solve(sub.problem, tol_feas=1e-10, tol_gap=1e-10)
    b = sub.basis
    n = b.shape[1]
    best = generalized_ratio_max(np.eye(n) + sub.k1 * herm(b) @ sub.q_bob @ b,
                                 np.eye(n) + sub.k2 * herm(b) @ sub.q_eve @ b)
    assert np.isclose(sol.objective_value, best, rtol=1e-6)


def test_radar_subproblem_threshold_and_objective(scene):
    w_ab = unit_cov(np.random.default_rng(4), scene.n_comm_tx)
    sub = build_radar_subproblem(scene, w_ab, r_th=0.0)
    w_k = sub.recover(solve(sub.problem))
    assert np.isclose(np.trace(w_k).real, 1.0, atol=1e-6)
    # the linear objective is a monotone surrogate of the log objective
    other = unit_cov(np.random.default_rng(5), scene.n_radar_tx)
    other = sub.basis @ herm(sub.basis) @ other @ sub.basis @ herm(sub.basis)
    other /= np.trace(other).real
    assert sub.log_objective(w_k) >= sub.log_objective(other) - 1e-9
    with pytest.raises(ValueError):
        build_radar_subproblem(scene, w_ab, r_th=-1.0)
    assert not build_radar_subproblem(scene, w_ab, r_th=50.0).feasible


def test_unreachable_radar_rate_raises(scene):
    with pytest.raises(SubproblemInfeasible) as err:
        sca_solve(PlsProblemSpec(scene, r_th=50.0))
    assert err.value.constraint == "radar-rate"


def test_reachable_radar_rate_is_met():
    # close targets and a large reference gain make the echo strong enough to matter
    sc = random_scene(SceneParams(rho0=1.0, target_range_m=(15.0, 30.0)), np.random.default_rng(6))
    best = rate(solve_coop_radar(sc).objective / sc.noise_radar)
    r_th = 0.9 * best
    sol = sca_solve(PlsProblemSpec(sc, r_th=r_th))
    echo = trace_power(sc.echo_form(), sol.rank1_k)
    assert rate(echo / sc.noise_radar) >= r_th - 1e-6


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_sca_invariants(seed):
    sc = random_scene(SceneParams(), np.random.default_rng(seed))
    spec = PlsProblemSpec(sc, m_max=50)
    sol = sca_solve(spec)
    assert sol.iterations <= spec.m_max
    for w in (sol.w_ab_cov, sol.w_k_cov):
        assert np.isclose(np.trace(w).real, 1.0, atol=1e-6)
        assert np.linalg.eigvalsh(w)[0] >= -1e-8
    assert np.isclose(np.linalg.norm(sol.w_ab), 1.0) and np.isclose(np.linalg.norm(sol.w_k), 1.0)
    if sol.converged:
        assert relative_change(sol.history[-1], sol.history[-2]) <= spec.eps_converge
    r_s = secrecy(sc, sol.rank1_ab, sol.rank1_k)
    assert 0 <= r_s <= rate(sinr_bob(sc, sol.rank1_ab, sol.rank1_k)) + 1e-12
    assert 0 < sol.quality_ab <= 1 and 0 < sol.quality_k <= 1


def test_relative_change_edge_cases():
    assert relative_change(0.0, 0.0) == 0.0
    assert relative_change(0.0, 1.0) == np.inf
    assert np.isclose(relative_change(2.0, 1.0), 0.5)


def test_spec_validation(scene):
    with pytest.raises(ValueError):
        PlsProblemSpec(scene, r_th=-0.1)
    with pytest.raises(ValueError):
        PlsProblemSpec(scene, m_max=0)
