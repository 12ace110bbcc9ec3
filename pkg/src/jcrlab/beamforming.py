"""Cooperative nulling designs and the alternating secrecy-rate design.

Zero-interference (nulling) constraints are enforced by parametrizing the
weight covariance as ``B Z B^H`` with B an orthonormal basis of the
transmit null space of the channels to protect; Z is the SDP variable.
``nulling="constraint"`` instead keeps the full covariance and emits the
nulling row as ``Tr(Q W) <= delta`` with a tiny ``delta``.

Radar nulling toward Bob comes in two flavours. ``"full"`` nulls the
direct radar path and every target-reflected path. Because a reflected
path leaves the radar along the same steering vector as the target
illumination, full nulling also removes every target return; ``"direct"``
(the default) nulls only the direct radar-to-Bob path and keeps the
reflected terms as interference in Bob's SINR.
"""

from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .linalg import herm, null_space, trace_power
from .receiver import rate, secrecy_rate, sinr_bob, sinr_eve_bounded

NULLING_MODES = ("eliminate", "constraint")
BOB_NULLING = ("direct", "full")
ZERO_RHS_DELTA = 1e-9


class InfeasibleNullError(ValueError):
    """The channels to be nulled leave no transmit null space."""


class SubproblemInfeasible(RuntimeError):
    def __init__(self, constraint, detail):
        super().__init__(f"{constraint}: {detail}")
        self.constraint = constraint


def transmit_null_basis(channels, label="channel"):
    rows = np.vstack([np.conj(h.matrix) for h in channels])
    basis = null_space(rows)
    if basis.shape[1] == 0:
        raise InfeasibleNullError(
            f"{label}: {rows.shape[1]} transmit antennas cannot null rank "
            f"{np.linalg.matrix_rank(rows)} interference"
        )
    return basis


def bob_facing(scene, bob_nulling):
    if bob_nulling not in BOB_NULLING:
        raise ValueError(f"bob_nulling must be one of {BOB_NULLING}")
    if bob_nulling == "full":
        return [scene.radar_bob, *scene.target_bob]
    return [scene.radar_bob]


def _restrict(q, basis):
    return herm(basis) @ q @ basis


def _delta(q):
    return ZERO_RHS_DELTA * max(np.linalg.eigvalsh(q)[-1], 1e-300)


@dataclass
class CoopResult:
    w_cov: np.ndarray
    weight: np.ndarray
    objective: float
    solution: object
    basis: np.ndarray = None


def _solve_nulled_max(q_obj, protect, label, solver_opts, rng):
    basis = transmit_null_basis(protect, label)
    p = sdp.SdpProblem()
    z = p.add_block(basis.shape[1])
    p.set_objective({z: _restrict(q_obj, basis)})
    p.add_constraint({z: np.eye(basis.shape[1])}, rhs=1.0)
    sol = sdp.solve(p, **solver_opts)
    if sol.status == "infeasible":
        raise SubproblemInfeasible(label, "solver reported infeasible")
    w_cov = basis @ sol.blocks[z] @ herm(basis)
    w, _ = sdp.rank1_extract(w_cov, lambda m: trace_power(q_obj, m), rng=rng)
    return CoopResult(w_cov, w, trace_power(q_obj, w_cov), sol, basis)


def solve_coop_comm(scene, rng=None, **solver_opts):
    """Maximize the signal at Bob while nulling the radar receiver.

    Bob's radar interference does not depend on the communication weight,
    so maximizing the numerator maximizes Bob's SINR.
    """
    return _solve_nulled_max(scene.comm_bob.power_form, [scene.comm_radar],
                             "communication-to-radar nulling", solver_opts, rng)


def solve_coop_radar(scene, bob_nulling="direct", rng=None, **solver_opts):
    """Maximize the total target return while nulling radar interference at Bob."""
    return _solve_nulled_max(scene.echo_form(), bob_facing(scene, bob_nulling),
                             "radar-to-Bob nulling", solver_opts, rng)


@dataclass
class CommSubproblem:
    """Charnes-Cooper form of the communication step.

    Variables: ``U = u W`` (as ``B Z B^H`` when eliminating) and ``u >= 0``;
    ``W = U / u`` maps the optimum back.
    """

    problem: sdp.SdpProblem
    k1: float
    k2: float
    q_bob: np.ndarray
    q_eve: np.ndarray
    basis: np.ndarray = None
    block: int = 0
    u_index: int = 0

    def recover(self, solution):
        u = solution.scalars[self.u_index]
        big_u = solution.blocks[self.block]
        if self.basis is not None:
            big_u = self.basis @ big_u @ herm(self.basis)
        if u <= 0:
            raise SubproblemInfeasible("charnes-cooper", "u collapsed to zero")
        return big_u / u

    def transformed(self, w_ab):
        """Point of the transformed problem corresponding to ``w_ab``."""
        u = 1.0 / (1.0 + self.k2 * trace_power(self.q_eve, w_ab))
        return u, u * w_ab

    def fractional_objective(self, w_ab):
        return (np.log2(1 + self.k1 * trace_power(self.q_bob, w_ab))
                - np.log2(1 + self.k2 * trace_power(self.q_eve, w_ab)))


def coupling_constants(scene, w_k):
    """Inverse interference-plus-noise at Bob and at Eve for a fixed radar weight."""
    k1 = 1.0 / (trace_power(scene.bob_radar_form(), w_k) + scene.noise_bob)
    k2 = 1.0 / (trace_power(scene.eve_radar_form(), w_k) + scene.noise_eve)
    return k1, k2


def build_comm_subproblem(scene, w_k, nulling="eliminate"):
    if nulling not in NULLING_MODES:
        raise ValueError(f"nulling must be one of {NULLING_MODES}")
    k1, k2 = coupling_constants(scene, w_k)
    q_b = scene.comm_bob.power_form
    q_e = scene.comm_eve.power_form
    p = sdp.SdpProblem()
    u = p.add_scalar()
    if nulling == "eliminate":
        basis = transmit_null_basis([scene.comm_radar], "communication-to-radar nulling")
        q_b_r, q_e_r = _restrict(q_b, basis), _restrict(q_e, basis)
        blk = p.add_block(basis.shape[1])
        eye = np.eye(basis.shape[1])
    else:
        basis = None
        q_b_r, q_e_r = q_b, q_e
        blk = p.add_block(scene.n_comm_tx)
        eye = np.eye(scene.n_comm_tx)
    p.set_objective({blk: k1 * q_b_r}, {u: 1.0})
    p.add_constraint({blk: k2 * q_e_r}, {u: 1.0}, "==", 1.0)
    p.add_constraint({blk: eye}, {u: -1.0}, "==", 0.0)
    if nulling == "constraint":
        q_d = scene.comm_radar.power_form
        p.add_constraint({blk: q_d}, {}, "<=", _delta(q_d))
    return CommSubproblem(p, k1, k2, q_b, q_e, basis, blk, u)


@dataclass
class RadarSubproblem:
    """Radar step: maximize interference power at Eve (y1 + y2).

    The original objective log2(1 - y3 / (y1 + y2 + y3 + noise)) is strictly
    increasing in y1 + y2, so the linear objective has the same maximizers.
    """

    problem: sdp.SdpProblem
    y3: float
    q_eve: np.ndarray
    q_echo: np.ndarray
    echo_threshold: float
    max_echo: float
    noise_eve: float
    basis: np.ndarray = None
    block: int = 0

    @property
    def feasible(self):
        return self.max_echo >= self.echo_threshold * (1 - 1e-9)

    def recover(self, solution):
        z = solution.blocks[self.block]
        return z if self.basis is None else self.basis @ z @ herm(self.basis)

    def log_objective(self, w_k):
        y12 = trace_power(self.q_eve, w_k)
        return float(np.log2(1 - self.y3 / (y12 + self.y3 + self.noise_eve)))


def build_radar_subproblem(scene, w_ab, r_th, bob_nulling="direct", nulling="eliminate"):
    if r_th < 0:
        raise ValueError(f"radar rate threshold must be >= 0, got {r_th}")
    if nulling not in NULLING_MODES:
        raise ValueError(f"nulling must be one of {NULLING_MODES}")
    protect = bob_facing(scene, bob_nulling)
    q_eve = scene.eve_radar_form()
    q_echo = scene.echo_form()
    threshold = scene.noise_radar * (2.0 ** r_th - 1.0)
    p = sdp.SdpProblem()
    if nulling == "eliminate":
        basis = transmit_null_basis(protect, "radar-to-Bob nulling")
        q_eve_r, q_echo_r = _restrict(q_eve, basis), _restrict(q_echo, basis)
        blk = p.add_block(basis.shape[1])
        eye = np.eye(basis.shape[1])
    else:
        basis = None
        q_eve_r, q_echo_r = q_eve, q_echo
        blk = p.add_block(scene.n_radar_tx)
        eye = np.eye(scene.n_radar_tx)
    p.set_objective({blk: q_eve_r})
    p.add_constraint({blk: eye}, {}, "==", 1.0)
    if r_th > 0:
        p.add_constraint({blk: q_echo_r}, {}, ">=", threshold)
    if nulling == "constraint":
        q_bob = sum(h.power_form for h in protect)
        p.add_constraint({blk: q_bob}, {}, "<=", _delta(q_bob))
    if nulling == "eliminate":
        max_echo = float(np.linalg.eigvalsh(q_echo_r)[-1])
    else:
        max_echo = float(np.linalg.eigvalsh(_restrict(q_echo, transmit_null_basis(protect)))[-1])
    y3 = trace_power(scene.comm_eve.power_form, w_ab)
    return RadarSubproblem(p, y3, q_eve, q_echo, threshold, max_echo, scene.noise_eve, basis, blk)


@dataclass
class PlsProblemSpec:
    scene: object
    r_th: float = 0.0
    eps_converge: float = 1e-5
    m_max: int = 50
    bob_nulling: str = "direct"
    seed: int = 0

    def __post_init__(self):
        if self.r_th < 0:
            raise ValueError("r_th must be >= 0")
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")


@dataclass
class BeamformingSolution:
    w_ab_cov: np.ndarray
    w_k_cov: np.ndarray
    w_ab: np.ndarray
    w_k: np.ndarray
    history: list = field(default_factory=list)
    converged: bool = False
    quality_ab: float = 1.0
    quality_k: float = 1.0

    @property
    def iterations(self):
        return len(self.history) - 1

    @property
    def rank1_ab(self):
        return np.outer(self.w_ab, self.w_ab.conj())

    @property
    def rank1_k(self):
        return np.outer(self.w_k, self.w_k.conj())


def secrecy(scene, w_ab, w_k):
    return secrecy_rate(sinr_bob(scene, w_ab, w_k), sinr_eve_bounded(scene, w_ab, w_k))


def _secrecy_unclamped(scene, w_ab, w_k):
    return rate(sinr_bob(scene, w_ab, w_k)) - rate(sinr_eve_bounded(scene, w_ab, w_k))


def relative_change(current, previous):
    if current == previous:
        return 0.0
    if current == 0:
        return np.inf
    return abs((current - previous) / current)


def _projector(basis):
    p = basis @ herm(basis)
    return p / np.trace(p).real


def _checked(sol, label):
    if sol.status == "infeasible":
        raise SubproblemInfeasible(label, "solver reported infeasible")
    return sol


def sca_solve(spec, **solver_opts):
    """Alternate the communication and radar steps until the secrecy rate settles.

    Stops when the relative change of the secrecy rate is at most
    ``spec.eps_converge`` or after ``spec.m_max`` iterations (then
    ``converged`` is False). Rank-1 weights are extracted once at the end.
    """
    scene = spec.scene
    w_ab = _projector(transmit_null_basis([scene.comm_radar], "communication-to-radar nulling"))
    protect = bob_facing(scene, spec.bob_nulling)
    w_k = _projector(transmit_null_basis(protect, "radar-to-Bob nulling"))
    threshold = scene.noise_radar * (2.0 ** spec.r_th - 1.0)
    if spec.r_th > 0 and trace_power(scene.echo_form(), w_k) < threshold:
        w_k = solve_coop_radar(scene, spec.bob_nulling, **solver_opts).w_cov
        if trace_power(scene.echo_form(), w_k) < threshold * (1 - 1e-9):
            raise SubproblemInfeasible("radar-rate", f"r_th={spec.r_th} unreachable under Bob nulling")

    history = [secrecy(scene, w_ab, w_k)]
    converged = False
    for _ in range(spec.m_max):
        comm = build_comm_subproblem(scene, w_k)
        w_ab = comm.recover(_checked(sdp.solve(comm.problem, **solver_opts), "communication step"))
        radar = build_radar_subproblem(scene, w_ab, spec.r_th, spec.bob_nulling)
        if not radar.feasible:
            raise SubproblemInfeasible(
                "radar-rate", f"best return {radar.max_echo:.3e} < required {radar.echo_threshold:.3e}")
        w_k = radar.recover(_checked(sdp.solve(radar.problem, **solver_opts), "radar step"))
        history.append(secrecy(scene, w_ab, w_k))
        if relative_change(history[-1], history[-2]) <= spec.eps_converge:
            converged = True
            break

    rng = np.random.default_rng(spec.seed)
    v_ab, q_ab = sdp.rank1_extract(w_ab, lambda m: _secrecy_unclamped(scene, m, w_k), rng=rng)
    ab1 = np.outer(v_ab, v_ab.conj())

    def echo_ok(m):
        return trace_power(scene.echo_form(), m) >= threshold * (1 - 1e-6)

    v_k, q_k = sdp.rank1_extract(
        w_k, lambda m: _secrecy_unclamped(scene, ab1, m),
        feasible=echo_ok if spec.r_th > 0 else None, rng=rng)
    return BeamformingSolution(w_ab, w_k, v_ab, v_k, history, converged, q_ab, q_k)
