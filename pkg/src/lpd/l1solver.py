"""Constrained l1 minimization solved as a linear program.

Solves

    minimize |beta|_1  subject to  |A_rho beta - b|_inf <= lambda,

with A_rho = A + ridge_rho * I, by recasting in auxiliary variables
(beta, u) as

    min sum_j u_j
    s.t. -beta_j <= u_j,  +beta_j <= u_j          (j = 1..p)
         -a_k' beta + b_k <= lambda               (k = 1..p)
         +a_k' beta - b_k <= lambda               (k = 1..p)

and running a primal-dual path-following method with the Mehrotra
predictor-corrector. The KKT Newton systems are reduced to a single p x p
SPD solve per iteration by eliminating the (u, slack, dual) blocks, so the
4p x 2p constraint matrix is never materialized in the hot path.

The solver is deterministic: no randomization anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    InfeasibleProblem,
    NotPositiveDefinite,
    SolverFailure,
)

OPTIMAL = "optimal"
ITERATION_LIMIT = "iteration_limit"
NUMERICAL_FAILURE = "numerical_failure"

# The step is capped at this fraction of the distance to the boundary.
_STEP_FRACTION = 0.99
_CHOL_JITTERS = (0.0, 1e-14, 1e-10, 1e-6)

# Coefficients at or below this magnitude are interior-point noise around an
# exact zero; the dual normalization keeps the scale absolute.
ZERO_FLOOR = 1e-7


@dataclass
class LpProblem:
    """One constrained l1 program: symmetric A, target b, radius lam."""

    A: np.ndarray
    b: np.ndarray
    lam: float
    ridge_rho: float = 0.0

    def __post_init__(self):
        self.A = linalg.check_symmetric(self.A, "A")
        self.b = linalg.as_vector(self.b, "b")
        if self.A.shape[0] != self.b.size:
            raise DimensionMismatch(
                f"A is {self.A.shape} but b has length {self.b.size}"
            )
        self.lam = float(self.lam)
        self.ridge_rho = float(self.ridge_rho)
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.ridge_rho < 0:
            raise ValueError("ridge_rho must be >= 0")

    @property
    def p(self) -> int:
        return self.b.size


@dataclass
class SolverConfig:
    """Interior-point tolerances; all must be positive."""

    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 100
    support_eps: float = 1e-3

    def __post_init__(self):
        for name in ("gap_tol", "feas_tol", "max_iter", "support_eps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class LpSolution:
    """Solver output; ``duality_gap`` is the relative complementarity gap."""

    beta: np.ndarray
    objective: float
    max_residual: float
    iterations: int
    duality_gap: float
    status: str


@dataclass
class StandardFormLp:
    """The (beta, u) linear program with the ridge folded into the matrix.

    Variables are x = (beta, u) of length 2p; constraints number 4p, in the
    fixed block order (-beta - u, +beta - u, -A beta, +A beta) against the
    right-hand side (0, 0, lam - b, lam + b).
    """

    a_rho: np.ndarray
    b: np.ndarray
    lam: float

    @property
    def p(self) -> int:
        return self.b.size

    @property
    def n_vars(self) -> int:
        return 2 * self.p

    @property
    def n_constraints(self) -> int:
        return 4 * self.p

    def cost(self) -> np.ndarray:
        return np.concatenate([np.zeros(self.p), np.ones(self.p)])

    def rhs(self) -> np.ndarray:
        lam = np.full(self.p, self.lam)
        return np.concatenate([np.zeros(self.p), np.zeros(self.p), lam - self.b, lam + self.b])

    def apply_g(self, beta, u) -> np.ndarray:
        """G @ (beta, u) without materializing G."""
        ab = self.a_rho @ beta
        return np.concatenate([-beta - u, beta - u, -ab, ab])

    def apply_gt(self, z) -> tuple[np.ndarray, np.ndarray]:
        """G' @ z, returned as its (beta, u) blocks."""
        p = self.p
        z1, z2, z3, z4 = z[:p], z[p : 2 * p], z[2 * p : 3 * p], z[3 * p :]
        return -z1 + z2 + self.a_rho @ (z4 - z3), -(z1 + z2)

    def constraint_matrix(self) -> np.ndarray:
        """Materialized 4p x 2p inequality matrix (inspection and tests only)."""
        p = self.p
        eye = np.eye(p)
        zero = np.zeros((p, p))
        return np.block(
            [
                [-eye, -eye],
                [eye, -eye],
                [-self.a_rho, zero],
                [self.a_rho, zero],
            ]
        )


def build_lp(problem: LpProblem) -> StandardFormLp:
    """Recast the constrained l1 program as the standard-form inequality LP."""
    a_rho = problem.A
    if problem.ridge_rho > 0:
        a_rho = a_rho + problem.ridge_rho * np.eye(problem.p)
    return StandardFormLp(a_rho=a_rho, b=problem.b.copy(), lam=problem.lam)


def _boundary_step(v, dv):
    """Largest alpha in [0, 1] keeping v + alpha * dv >= 0."""
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return min(1.0, float(np.min(-v[neg] / dv[neg])))


def _initial_beta(sf: StandardFormLp, rho: float, lam: float):
    """Start at beta0 = A_rho^{-1} b (strictly feasible for any lam > 0),
    with a pseudo-inverse fallback plus a feasibility check when rho = 0
    and A is singular."""
    try:
        return linalg.spd_solve(linalg.spd_factor(sf.a_rho), sf.b)
    except NotPositiveDefinite:
        if rho > 0:
            raise
    beta0 = linalg.pseudo_inverse(sf.a_rho) @ sf.b
    resid = float(np.abs(sf.a_rho @ beta0 - sf.b).max())
    if resid > lam * (1 + 1e-9) + 1e-12:
        raise InfeasibleProblem(
            f"singular constraint matrix: least-norm residual {resid:.3e} exceeds lambda {lam:.3e}"
        )
    return beta0


def _solution(sf, beta, iterations, gap, status):
    resid = float(np.abs(sf.a_rho @ beta - sf.b).max())
    return LpSolution(
        beta=beta.copy(),
        objective=float(np.abs(beta).sum()),
        max_residual=resid,
        iterations=iterations,
        duality_gap=gap,
        status=status,
    )


def solve(problem: LpProblem, config: SolverConfig | None = None) -> LpSolution:
    """Solve the constrained l1 program by the primal-dual interior-point method.

    Returns a solution whose status is ``optimal`` only when primal and dual
    feasibility hold within feas_tol, the relative complementarity gap is
    below gap_tol, and the constraint residual certifies
    ||A_rho beta - b||_inf <= lam * (1 + 1e-6) + 1e-8. Raises
    InfeasibleProblem when ridge_rho = 0, A is singular, and the least-norm
    residual exceeds lam.
    """
    if config is None:
        config = SolverConfig()
    sf = build_lp(problem)
    p = sf.p
    lam = sf.lam

    if lam == 0.0:
        # Feasible set is the single point A_rho^{-1} b; no interior to walk.
        try:
            beta = linalg.spd_solve(linalg.spd_factor(sf.a_rho), sf.b)
        except NotPositiveDefinite as exc:
            raise SolverFailure(
                "lambda = 0 requires a positive-definite constraint matrix"
            ) from exc
        return _solution(sf, beta, 0, 0.0, OPTIMAL)

    beta = _initial_beta(sf, problem.ridge_rho, lam)
    u = np.abs(beta) + 1.0
    h = sf.rhs()
    m = sf.n_constraints
    s = np.maximum(h - sf.apply_g(beta, u), 1e-10 * (1.0 + lam))
    z = np.ones(m)

    h_scale = 1.0 + float(np.abs(h).max())
    resid_cert = lam * (1 + 1e-6) + 1e-8
    gap_rel = np.inf
    status = ITERATION_LIMIT
    iterations = 0

    for _ in range(config.max_iter):
        g = sf.apply_g(beta, u)
        rp = g + s - h
        gt_beta, gt_u = sf.apply_gt(z)
        rd_beta, rd_u = gt_beta, 1.0 + gt_u  # c = (0, 1)
        obj = float(u.sum())
        comp = float(s @ z)
        gap_rel = comp / (1.0 + abs(obj))
        rp_rel = float(np.abs(rp).max()) / h_scale
        rd_rel = max(float(np.abs(rd_beta).max()), float(np.abs(rd_u).max())) / 2.0
        true_resid = float(np.abs(sf.a_rho @ beta - sf.b).max())
        if (
            rp_rel <= config.feas_tol
            and rd_rel <= config.feas_tol
            and gap_rel <= config.gap_tol
            and true_resid <= resid_cert
        ):
            status = OPTIMAL
            break

        d = z / s
        d1, d2 = d[:p], d[p : 2 * p]
        d3, d4 = d[2 * p : 3 * p], d[3 * p :]
        e = d1 + d2
        f = d1 - d2
        w = d3 + d4
        h_mat = sf.a_rho @ (w[:, None] * sf.a_rho)
        h_mat[np.diag_indices_from(h_mat)] += 4.0 * d1 * d2 / e

        factor = None
        diag_scale = float(np.abs(np.diag(h_mat)).max())
        for jitter in _CHOL_JITTERS:
            try:
                trial = h_mat if jitter == 0.0 else h_mat + jitter * diag_scale * np.eye(p)
                factor = linalg.spd_factor(trial)
                break
            except NotPositiveDefinite:
                continue
        if factor is None:
            status = NUMERICAL_FAILURE
            break

        def newton_step(rcomp):
            t = d * rp - rcomp / s
            gt_t_beta, gt_t_u = sf.apply_gt(t)
            r1 = -rd_beta - gt_t_beta
            r2 = -rd_u - gt_t_u
            dbeta = linalg.spd_solve(factor, r1 - (f / e) * r2)
            du = (r2 - f * dbeta) / e
            ds = -rp - sf.apply_g(dbeta, du)
            dz = -(rcomp + z * ds) / s
            return dbeta, du, ds, dz

        mu = comp / m
        dbeta_a, du_a, ds_a, dz_a = newton_step(s * z)
        alpha_p_a = _boundary_step(s, ds_a)
        alpha_d_a = _boundary_step(z, dz_a)
        mu_aff = float((s + alpha_p_a * ds_a) @ (z + alpha_d_a * dz_a)) / m
        sigma = min(1.0, max(0.0, (mu_aff / max(mu, 1e-300)) ** 3))

        dbeta, du, ds, dz = newton_step(s * z + ds_a * dz_a - sigma * mu)
        alpha_p = min(1.0, _STEP_FRACTION * _boundary_step(s, ds))
        alpha_d = min(1.0, _STEP_FRACTION * _boundary_step(z, dz))
        if alpha_p < 1e-10 and alpha_d < 1e-10:
            status = NUMERICAL_FAILURE
            break

        beta = beta + alpha_p * dbeta
        u = u + alpha_p * du
        s = s + alpha_p * ds
        z = z + alpha_d * dz
        iterations += 1

    return _solution(sf, beta, iterations, float(gap_rel), status)


def support(solution: LpSolution, config: SolverConfig | None = None) -> np.ndarray:
    """Indices j with |beta_j| > support_eps * max_i |beta_i| (0-based, sorted).

    Relative thresholding because interior-point iterates are never exactly
    zero. A numerically zero beta (every entry within the solver's gap-level
    noise, which sits in absolute units because the dual normalizes the
    objective block) yields the empty set.
    """
    if config is None:
        config = SolverConfig()
    if solution.status != OPTIMAL:
        raise ValueError(f"support requires an optimal solution, got {solution.status!r}")
    mags = np.abs(solution.beta)
    top = mags.max() if mags.size else 0.0
    if top <= ZERO_FLOOR:
        return np.array([], dtype=int)
    return np.flatnonzero(mags > config.support_eps * top)
