"""Small dense SDP solver and rank-1 recovery.

Problems are stated as

    maximize    sum_b Tr(C_b X_b) + c^T s
    subject to  sum_b Tr(A_ib X_b) + a_i^T s  (=, >=, <=)  r_i
                X_b PSD (Hermitian or real symmetric), s >= 0

and solved by an alternating-direction augmented Lagrangian method on the
dual: each sweep solves a small linear system for the dual multipliers,
projects onto the PSD cone and updates the primal. Hermitian blocks are
carried in the real 2n x 2n embedding, inequality rows get a nonnegative
slack. Every problem is row- and cost-normalized before iterating.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import hermitize, real_embed, real_unembed

RELATIONS = ("==", ">=", "<=")


class ExtractionError(RuntimeError):
    """Gaussian randomization found no feasible rank-1 candidate."""


@dataclass
class Constraint:
    blocks: dict
    scalars: dict
    relation: str
    rhs: float


@dataclass
class SdpProblem:
    block_dims: list = field(default_factory=list)
    block_complex: list = field(default_factory=list)
    n_scalars: int = 0
    objective_blocks: dict = field(default_factory=dict)
    objective_scalars: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)

    def add_block(self, dim, complex_=True):
        self.block_dims.append(int(dim))
        self.block_complex.append(bool(complex_))
        return len(self.block_dims) - 1

    def add_scalar(self):
        self.n_scalars += 1
        return self.n_scalars - 1

    def set_objective(self, blocks=None, scalars=None):
        self.objective_blocks = dict(blocks or {})
        self.objective_scalars = dict(scalars or {})

    def add_constraint(self, blocks=None, scalars=None, relation="==", rhs=0.0):
        if relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {relation!r}")
        self.constraints.append(Constraint(dict(blocks or {}), dict(scalars or {}), relation, float(rhs)))

    def validate(self):
        for k, dim in enumerate(self.block_dims):
            if dim < 1:
                raise ValueError(f"block {k} has dimension {dim}")
        mats = [self.objective_blocks] + [c.blocks for c in self.constraints]
        for blocks in mats:
            for k, m in blocks.items():
                m = np.asarray(m)
                if not 0 <= k < len(self.block_dims):
                    raise ValueError(f"unknown block index {k}")
                if m.shape != (self.block_dims[k],) * 2:
                    raise ValueError(f"coefficient for block {k} has shape {m.shape}")
                if not np.allclose(m, np.conj(m.T), atol=1e-12 * (1 + np.abs(m).max())):
                    raise ValueError(f"coefficient for block {k} is not Hermitian")
                if not self.block_complex[k] and np.iscomplexobj(m) and np.any(m.imag):
                    raise ValueError(f"complex coefficient on real block {k}")
        for scalars in [self.objective_scalars] + [c.scalars for c in self.constraints]:
            for j in scalars:
                if not 0 <= j < self.n_scalars:
                    raise ValueError(f"unknown scalar index {j}")

    def evaluate(self, blocks, scalars=()):
        """Objective value at a candidate point."""
        return _linear_value(self.objective_blocks, self.objective_scalars, blocks, scalars)

    def constraint_values(self, blocks, scalars=()):
        return np.array([_linear_value(c.blocks, c.scalars, blocks, scalars) for c in self.constraints])

    # debugging dump, plain JSON
    def dump(self, path):
        def enc(m):
            m = np.asarray(m, dtype=complex)
            return {"re": m.real.tolist(), "im": m.imag.tolist()}

        doc = {
            "block_dims": self.block_dims,
            "block_complex": self.block_complex,
            "n_scalars": self.n_scalars,
            "objective": {
                "blocks": {str(k): enc(m) for k, m in self.objective_blocks.items()},
                "scalars": {str(k): v for k, v in self.objective_scalars.items()},
            },
            "constraints": [
                {
                    "blocks": {str(k): enc(m) for k, m in c.blocks.items()},
                    "scalars": {str(k): v for k, v in c.scalars.items()},
                    "relation": c.relation,
                    "rhs": c.rhs,
                }
                for c in self.constraints
            ],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            doc = json.load(fh)

        def dec(d):
            return np.asarray(d["re"]) + 1j * np.asarray(d["im"])

        p = cls(list(doc["block_dims"]), list(doc["block_complex"]), int(doc["n_scalars"]))
        p.set_objective(
            {int(k): dec(v) for k, v in doc["objective"]["blocks"].items()},
            {int(k): float(v) for k, v in doc["objective"]["scalars"].items()},
        )
        for c in doc["constraints"]:
            p.add_constraint(
                {int(k): dec(v) for k, v in c["blocks"].items()},
                {int(k): float(v) for k, v in c["scalars"].items()},
                c["relation"],
                c["rhs"],
            )
        return p


def _linear_value(cblocks, cscalars, blocks, scalars):
    v = 0.0
    for k, m in cblocks.items():
        v += float(np.real(np.sum(np.asarray(m).T * blocks[k])))
    for j, a in cscalars.items():
        v += a * scalars[j]
    return v


@dataclass
class SdpSolution:
    blocks: list
    scalars: np.ndarray
    objective_value: float
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    psd_violation: float
    dual: np.ndarray = None

    @property
    def optimal(self):
        return self.status == "optimal"


class _Compiled:
    """Vectorized real standard form of an SdpProblem."""

    def __init__(self, problem):
        problem.validate()
        self.problem = problem
        self.sizes = [2 * n if c else n for n, c in zip(problem.block_dims, problem.block_complex)]
        self.offsets = np.cumsum([0] + [s * s for s in self.sizes])
        n_ineq = sum(c.relation != "==" for c in problem.constraints)
        self.n_nonneg = problem.n_scalars + n_ineq
        self.n_mat = int(self.offsets[-1])
        self.dim = self.n_mat + self.n_nonneg
        m = len(problem.constraints)
        self.a = np.zeros((m, self.dim))
        self.b = np.zeros(m)
        slack = problem.n_scalars
        for i, c in enumerate(problem.constraints):
            self.a[i] = self._vector(c.blocks, c.scalars)
            if c.relation != "==":
                self.a[i, self.n_mat + slack] = -1.0 if c.relation == ">=" else 1.0
                slack += 1
            self.b[i] = c.rhs
        self.c = self._vector(problem.objective_blocks, problem.objective_scalars)
        self.congruence = [None] * len(self.sizes)

    def precondition(self):
        """Substitute X = T Y T per block with T = M^(-1/2), M = (sum_i A_i^2)^(1/2).

        Congruence keeps the PSD cone and evens out constraint matrices whose
        eigenvalues span several decades, which otherwise stalls ADMM.
        """
        for k, s in enumerate(self.sizes):
            sl = slice(self.offsets[k], self.offsets[k + 1])
            rows = self.a[:, sl].reshape(-1, s, s)
            if not np.any(rows):
                continue
            sq = np.einsum("mij,mjk->ik", rows, rows)
            lam, v = np.linalg.eigh(0.5 * (sq + sq.T))
            root = np.sqrt(np.maximum(lam, 0.0))
            root = np.maximum(root / root.mean(), 1e-3)
            t = (v / np.sqrt(root)) @ v.T
            self.congruence[k] = t
            self.a[:, sl] = np.einsum("ij,mjk,kl->mil", t, rows, t).reshape(len(rows), -1)
            self.c[sl] = (t @ self.c[sl].reshape(s, s) @ t).ravel()

    def _vector(self, blocks, scalars):
        v = np.zeros(self.dim)
        for k, m in blocks.items():
            m = hermitize(np.asarray(m))
            if self.problem.block_complex[k]:
                m = 0.5 * real_embed(m)
            else:
                m = np.real(m)
            v[self.offsets[k]:self.offsets[k + 1]] = m.ravel()
        for j, val in scalars.items():
            v[self.n_mat + j] = val
        return v

    def project(self, x):
        out = np.empty_like(x)
        for k, s in enumerate(self.sizes):
            sl = slice(self.offsets[k], self.offsets[k + 1])
            m = x[sl].reshape(s, s)
            lam, v = np.linalg.eigh(0.5 * (m + m.T))
            lam = np.maximum(lam, 0.0)
            out[sl] = ((v * lam) @ v.T).ravel()
        out[self.n_mat:] = np.maximum(x[self.n_mat:], 0.0)
        return out

    def max_eig(self, x):
        """Largest eigenvalue over all blocks and nonnegative entries."""
        vals = []
        for k, s in enumerate(self.sizes):
            m = x[self.offsets[k]:self.offsets[k + 1]].reshape(s, s)
            vals.append(np.linalg.eigvalsh(0.5 * (m + m.T))[-1])
        if self.n_nonneg:
            vals.append(np.max(x[self.n_mat:]))
        return float(max(vals))

    def min_eig(self, x):
        return -self.max_eig(-x)

    def unpack(self, x):
        blocks = []
        for k, s in enumerate(self.sizes):
            m = x[self.offsets[k]:self.offsets[k + 1]].reshape(s, s)
            m = 0.5 * (m + m.T)
            if self.congruence[k] is not None:
                m = self.congruence[k] @ m @ self.congruence[k]
            blocks.append(hermitize(real_unembed(m)) if self.problem.block_complex[k] else m)
        scalars = x[self.n_mat:self.n_mat + self.problem.n_scalars].copy()
        return blocks, scalars


def solve(problem, tol_feas=1e-7, tol_gap=1e-6, max_iter=20000, mu0=1.0, relax=1.6,
          precondition=True):
    """Solve ``problem`` (maximization); see the module docstring.

    Returns an :class:`SdpSolution` whose status is ``optimal``,
    ``infeasible`` (a Farkas-type ray was observed in the multipliers) or
    ``max_iter``.
    """
    comp = _Compiled(problem)
    if precondition:
        comp.precondition()
    a, b = comp.a, comp.b
    m = a.shape[0]

    row = np.linalg.norm(a, axis=1)
    row[row == 0] = 1.0
    a_s = a / row[:, None]
    b_s = b / row
    c_scale = max(np.linalg.norm(comp.c), 1e-300)
    if np.linalg.norm(comp.c) == 0:
        c_scale = 1.0
    k = -comp.c / c_scale  # minimize <k, x>
    # primal scaling: iterate on x / x_scale so the normalized rhs has unit norm
    x_scale = np.linalg.norm(b_s) if m and np.linalg.norm(b_s) > 0 else 1.0
    b_s = b_s / x_scale

    gram = a_s @ a_s.T
    gram_inv = np.linalg.pinv(gram, rcond=1e-12) if m else np.zeros((0, 0))
    nb = 1.0 + np.linalg.norm(b_s)
    nk = 1.0 + np.linalg.norm(k)

    x = np.zeros(comp.dim)
    s = np.zeros(comp.dim)
    y = np.zeros(m)
    mu = mu0
    status = "max_iter"
    y_check = None
    n_rays = 0
    ratio_hist = []
    it = 0
    for it in range(1, max_iter + 1):
        y = gram_inv @ (mu * (b_s - a_s @ x) + a_s @ (k - s))
        aty = a_s.T @ y
        v = k - aty - mu * x
        s = comp.project(v)
        x_new = (s - v) / mu
        x = (1 - relax) * x + relax * x_new

        if it % 10 and it != max_iter:
            continue
        xp = comp.project(x)
        pinf = np.linalg.norm(a_s @ xp - b_s) / nb
        dinf = np.linalg.norm(k - aty - s) / nk
        pobj = k @ xp
        dobj = b_s @ y
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        if pinf <= tol_feas and dinf <= tol_feas and gap <= tol_gap:
            status = "optimal"
            break
        ratio_hist.append(pinf / max(dinf, 1e-300))
        if len(ratio_hist) >= 5:
            r = np.median(ratio_hist[-5:])
            # a larger mu weights the primal residual more in the y-step
            if r > 5.0:
                mu = min(mu * 1.5, 1e8)
                ratio_hist.clear()
            elif r < 0.2:
                mu = max(mu / 1.5, 1e-8)
                ratio_hist.clear()
        if it >= 200 and it % 100 == 0 and m:
            if y_check is not None and _is_infeasibility_ray(comp, a_s, b_s, y - y_check, xp):
                n_rays += 1
                if n_rays >= 2:
                    status = "infeasible"
                    break
            else:
                n_rays = 0
            y_check = y.copy()

    xp = comp.project(x)
    pinf_s = np.linalg.norm(a_s @ xp - b_s) / nb if m else 0.0
    dinf = np.linalg.norm(k - a_s.T @ y - s) / nk
    pobj, dobj = k @ xp, b_s @ y
    gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
    xp = xp * x_scale
    blocks, scalars = comp.unpack(xp)
    resid = np.abs(a @ xp - b) / (1.0 + np.abs(b)) if m else np.zeros(0)
    if status == "optimal" and pinf_s > tol_feas:
        status = "max_iter"
    return SdpSolution(
        blocks=blocks,
        scalars=scalars,
        objective_value=float(comp.c @ xp),
        status=status,
        iterations=it,
        primal_residual=float(resid.max()) if m else 0.0,
        dual_residual=float(dinf),
        gap=float(gap),
        psd_violation=float(max(0.0, -comp.min_eig(x)) * x_scale),
        dual=y * c_scale / row if m else y,
    )


def _is_infeasibility_ray(comp, a_s, b_s, d, x):
    # any feasible x gives b.d = <x, A^T d> <= 0 when A^T d is NSD
    nd = np.linalg.norm(d)
    if nd == 0:
        return False
    d = d / nd
    lead = comp.max_eig(a_s.T @ d)
    bd = b_s @ d
    return bd > 1e-3 and max(lead, 0.0) * 10 * (1 + np.linalg.norm(x)) < bd


def rank1_extract(w_cov, objective, feasible=None, rng=None, n_candidates=1000, rtol=1e-6):
    """Recover a unit-norm beamformer from a relaxed PSD solution.

    ``objective(W)`` evaluates the original (unrelaxed) objective on a PSD
    matrix; ``feasible(W)`` optionally rejects candidates violating the
    original constraints. If the matrix is numerically rank one its scaled
    principal eigenvector is returned directly. Otherwise candidates drawn
    as ``V diag(sqrt(lam)) z`` with complex Gaussian z (plus the principal
    eigenvector) are normalized and the best feasible one is kept.

    Returns ``(w, quality)`` with quality = achieved / relaxed objective.
    """
    w_cov = hermitize(np.asarray(w_cov, dtype=complex))
    lam, v = np.linalg.eigh(w_cov)
    lam = np.clip(lam, 0.0, None)
    if lam[-1] <= 0:
        raise ExtractionError("relaxed solution is zero")
    relaxed = objective(w_cov)

    def quality(val):
        if relaxed == 0:
            return 1.0 if val >= 0 else 0.0
        return float(min(val / relaxed, 1.0)) if relaxed > 0 else float(relaxed / val if val else 0.0)

    lead = v[:, -1] * np.sqrt(lam[-1])
    if lam.size == 1 or lam[-2] / lam[-1] < rtol:
        w = lead / np.linalg.norm(lead) * np.sqrt(np.trace(w_cov).real)
        if feasible is None or feasible(np.outer(w, w.conj())):
            return w, quality(objective(np.outer(w, w.conj())))

    if rng is None:
        rng = np.random.default_rng(0)
    n = w_cov.shape[0]
    z = (rng.standard_normal((n, n_candidates)) + 1j * rng.standard_normal((n, n_candidates))) / np.sqrt(2)
    cands = (v * np.sqrt(lam)) @ z
    cands = np.concatenate([v[:, -1:], cands], axis=1)
    power = np.trace(w_cov).real
    best, best_val = None, -np.inf
    for j in range(cands.shape[1]):
        c = cands[:, j]
        nc = np.linalg.norm(c)
        if nc == 0:
            continue
        c = c / nc * np.sqrt(power)
        cw = np.outer(c, c.conj())
        if feasible is not None and not feasible(cw):
            continue
        val = objective(cw)
        if val > best_val:
            best, best_val = c, val
    if best is None:
        raise ExtractionError(f"no feasible rank-1 candidate among {n_candidates} draws")
    return best, quality(best_val)
