import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import dual_line_search, max_over_trace_one, random_hermitian

from jcrlab.sdp import ExtractionError, SdpProblem, rank1_extract, solve

seeds = st.integers(0, 2**32 - 1)


def eigen_problem(c):
    p = SdpProblem()
    k = p.add_block(c.shape[0])
    p.set_objective({k: c})
    p.add_constraint({k: np.eye(c.shape[0])}, rhs=1.0)
    return p, k


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 10))
def test_eigen_form_matches_top_eigenvalue(seed, n):
    c = random_hermitian(np.random.default_rng(seed), n)
    p, k = eigen_problem(c)
    sol = solve(p, tol_feas=1e-9, tol_gap=1e-9)
    assert sol.optimal
    assert abs(sol.objective_value - max_over_trace_one(c)) <= 1e-6
    x = sol.blocks[k]
    assert np.allclose(x, x.conj().T)
    assert np.linalg.eigvalsh(x)[0] >= -1e-8
    assert np.isclose(np.trace(x).real, 1.0, atol=1e-7)


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(0.2, 0.8))
def test_inequality_constrained_matches_dual_search(seed, frac):
    rng = np.random.default_rng(seed)
    c, a = random_hermitian(rng, 3), random_hermitian(rng, 3)
    lam = np.linalg.eigvalsh(a)
    bound = lam[0] + frac * (lam[-1] - lam[0])
    p, k = eigen_problem(c)
    p.add_constraint({k: a}, relation="<=", rhs=bound)
    sol = solve(p, tol_feas=1e-9, tol_gap=1e-9)
    assert abs(sol.objective_value - dual_line_search(c, a, bound)) <= 1e-5
    assert np.trace(a @ sol.blocks[k]).real <= bound + 1e-6


@pytest.mark.filterwarnings("ignore:Solution may be inaccurate")
def test_matches_general_purpose_solver():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(8)
    for _ in range(5):
        c, a = random_hermitian(rng, 4), random_hermitian(rng, 4)
        lam = np.linalg.eigvalsh(a)
        lower = lam[0] + 0.3 * (lam[-1] - lam[0])
        p, k = eigen_problem(c)
        p.add_constraint({k: a}, relation=">=", rhs=lower)
        ours = solve(p, tol_feas=1e-9, tol_gap=1e-9).objective_value
        x = cp.Variable((4, 4), hermitian=True)
        ref = cp.Problem(cp.Maximize(cp.real(cp.trace(c @ x))),
                         [x >> 0, cp.real(cp.trace(x)) == 1, cp.real(cp.trace(a @ x)) >= lower])
        ref.solve(solver="CLARABEL")
        assert abs(ours - ref.value) <= 1e-5


def test_scalar_variables_and_real_blocks():
    # maximize s + Tr(C X) with X real 2x2, Tr X + s = 1, s >= 0
    c = np.diag([0.5, 0.2])
    p = SdpProblem()
    k = p.add_block(2, complex_=False)
    s = p.add_scalar()
    p.set_objective({k: c}, {s: 1.0})
    p.add_constraint({k: np.eye(2)}, {s: 1.0}, "==", 1.0)
    sol = solve(p, tol_feas=1e-9, tol_gap=1e-9)
    assert np.isclose(sol.objective_value, 1.0, atol=1e-6)
    assert np.isclose(sol.scalars[s], 1.0, atol=1e-5)
    assert not np.iscomplexobj(sol.blocks[k]) or np.allclose(sol.blocks[k].imag, 0)


def test_infeasible_problem_detected():
    p, k = eigen_problem(np.eye(3))
    p.add_constraint({k: np.diag([1.0, 0, 0])}, relation=">=", rhs=2.0)
    assert solve(p).status == "infeasible"


def test_preconditioning_does_not_change_answer():
    rng = np.random.default_rng(4)
    c = random_hermitian(rng, 5)
    a = np.diag([1e3, 1, 1, 1e-2, 1])
    p, k = eigen_problem(c)
    p.add_constraint({k: a}, relation="<=", rhs=5.0)
    on = solve(p, tol_feas=1e-9, tol_gap=1e-9)
    off = solve(p, tol_feas=1e-9, tol_gap=1e-9, precondition=False, max_iter=50000)
    assert abs(on.objective_value - off.objective_value) <= 1e-5


def test_validation_errors():
    p = SdpProblem()
    k = p.add_block(2)
    with pytest.raises(ValueError):
        p.add_constraint({k: np.eye(2)}, relation="<>")
    p.set_objective({k: np.array([[0, 1], [0, 0]])})
    with pytest.raises(ValueError):
        p.validate()
    p.set_objective({k: np.eye(3)})
    with pytest.raises(ValueError):
        p.validate()


def test_dump_load_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    p, k = eigen_problem(random_hermitian(rng, 3))
    p.add_constraint({k: random_hermitian(rng, 3)}, relation="<=", rhs=0.5)
    p.dump(tmp_path / "p.json")
    q = SdpProblem.load(tmp_path / "p.json")
    assert np.isclose(solve(p).objective_value, solve(q).objective_value)


def test_rank1_extract_exact_for_rank_one():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v /= np.linalg.norm(v)
    q = np.outer(v, v.conj())
    w, quality = rank1_extract(q, lambda m: np.trace(q @ m).real)
    assert np.isclose(abs(w.conj() @ v), 1.0)
    assert np.isclose(quality, 1.0)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_rank1_randomization_quality_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    w_cov = g @ g.conj().T
    w_cov /= np.trace(w_cov).real
    q = random_hermitian(rng, 4) + 5 * np.eye(4)
    w, quality = rank1_extract(w_cov, lambda m: np.trace(q @ m).real, rng=rng, n_candidates=200)
    assert np.isclose(np.linalg.norm(w), 1.0)
    assert 0 < quality <= 1


def test_rank1_extract_reports_no_feasible_candidate():
    with pytest.raises(ExtractionError):
        rank1_extract(np.eye(3) / 3, lambda m: 1.0, feasible=lambda m: False, n_candidates=10)
    with pytest.raises(ExtractionError):
        rank1_extract(np.zeros((2, 2)), lambda m: 0.0)
