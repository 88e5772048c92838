"""Membership, residuals and active-set structure of the follower KKT system.

For a leader point x the follower's KKT conditions carve out a set of pairs
(y, u); its complementarity product constraint -u_i * g_i(x, y) <= t with
t > 0 is the relaxation driven to zero by the homotopy.  This module decides
membership, classifies active sets, and runs the two leader-side regularity
diagnostics (strict follower feasibility and the leader-gradient condition).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .problem_model import Array, BilevelProblem, TriplePoint, lagrangian_grad
from .simplex import solve_lp

EPS_ACT_DEFAULT = 1e-6
FEAS_TOL_DEFAULT = 1e-8


class InfeasiblePointError(ValueError):
    """Raised when an operation requires a KKT-feasible point and is given none."""


@dataclass
class KktResidual:
    """Componentwise violation record for one (x, y, u) at relaxation level t."""

    stationarity: Array  # signed follower-stationarity vector
    dual_viol: Array  # max(0, -u)
    primal_viol: Array  # max(0, g)
    compl: float  # |u @ g|
    relax_viol: Array  # max(0, -u_i g_i - t)
    t: float

    def max_violation(self) -> float:
        """Largest violation of the membership system at this t.

        The aggregate complementarity |u @ g| participates only at t = 0,
        where exact complementarity is part of the definition; for t > 0 a
        member may legitimately have a nonzero product.
        """
        parts = [
            np.max(np.abs(self.stationarity), initial=0.0),
            np.max(self.dual_viol, initial=0.0),
            np.max(self.primal_viol, initial=0.0),
            np.max(self.relax_viol, initial=0.0),
        ]
        if self.t == 0.0:
            parts.append(self.compl)
        return float(max(parts))

    def is_feasible(self, tol: float = FEAS_TOL_DEFAULT) -> bool:
        return self.max_violation() <= tol

    def worst_field(self) -> str:
        fields = {
            "stationarity": float(np.max(np.abs(self.stationarity), initial=0.0)),
            "dual_viol": float(np.max(self.dual_viol, initial=0.0)),
            "primal_viol": float(np.max(self.primal_viol, initial=0.0)),
            "relax_viol": float(np.max(self.relax_viol, initial=0.0)),
        }
        if self.t == 0.0:
            fields["compl"] = self.compl
        return max(fields, key=fields.get)


def kkt_residual(problem: BilevelProblem, pt: TriplePoint, t: float = 0.0) -> KktResidual:
    """Residuals of the (relaxed) follower KKT system at pt; t = 0 is exact."""
    if t < 0:
        raise ValueError("relaxation level t must be nonnegative")
    problem.check_point(pt)
    L = lagrangian_grad(problem, pt)
    if problem.dims.q:
        g = np.asarray(problem.eval_g(pt.x, pt.y), dtype=float)
    else:
        g = np.zeros(0)
    return KktResidual(
        stationarity=L,
        dual_viol=np.maximum(0.0, -pt.u),
        primal_viol=np.maximum(0.0, g),
        compl=float(abs(pt.u @ g)) if problem.dims.q else 0.0,
        relax_viol=np.maximum(0.0, -pt.u * g - t),
        t=float(t),
    )


@dataclass(frozen=True)
class IndexSets:
    """Active-set classification of a feasible point at tolerance eps_act.

    eta / theta / nu partition the follower constraints of an exactly
    complementary point (u_i ~ 0 & g_i < 0, both ~ 0, u_i > 0 & g_i ~ 0);
    i_G, i_u, i_g, i_ug are the active sets used by the relaxed optimality
    system.
    """

    eta: tuple[int, ...]
    theta: tuple[int, ...]
    nu: tuple[int, ...]
    i_G: tuple[int, ...]
    i_u: tuple[int, ...]
    i_g: tuple[int, ...]
    i_ug: tuple[int, ...]
    eps_act: float


def classify_indices(
    problem: BilevelProblem,
    pt: TriplePoint,
    t: float = 0.0,
    eps_act: float = EPS_ACT_DEFAULT,
) -> IndexSets:
    """Classify active sets at a point feasible for the level-t system."""
    res = kkt_residual(problem, pt, t)
    if not res.is_feasible(eps_act):
        raise InfeasiblePointError(
            f"point infeasible at t={t}: field '{res.worst_field()}' violates "
            f"by {res.max_violation():.3e} (> eps_act={eps_act:.1e})"
        )
    q = problem.dims.q
    g = np.asarray(problem.eval_g(pt.x, pt.y), dtype=float) if q else np.zeros(0)
    u = pt.u
    eta, theta, nu = [], [], []
    for i in range(q):
        u_zero = abs(u[i]) <= eps_act
        g_zero = abs(g[i]) <= eps_act
        if u_zero and g_zero:
            theta.append(i)
        elif u_zero and g[i] < -eps_act:
            eta.append(i)
        elif u[i] > eps_act and g_zero:
            nu.append(i)
        # u_i > eps and g_i < -eps only occurs at t > 0; no eta/theta/nu label
    G = np.asarray(problem.eval_G(pt.x), dtype=float) if problem.dims.p else np.zeros(0)
    i_G = tuple(i for i in range(problem.dims.p) if abs(G[i]) <= eps_act)
    i_u = tuple(i for i in range(q) if abs(u[i]) <= eps_act)
    i_g = tuple(i for i in range(q) if abs(g[i]) <= eps_act)
    i_ug = tuple(i for i in range(q) if abs(u[i] * g[i] + t) <= eps_act)
    return IndexSets(
        eta=tuple(eta),
        theta=tuple(theta),
        nu=tuple(nu),
        i_G=i_G,
        i_u=i_u,
        i_g=i_g,
        i_ug=i_ug,
        eps_act=eps_act,
    )


@dataclass
class SlaterResult:
    """Outcome of the strict-feasibility search for the follower constraints.

    A failure is evidence, not proof, that no strictly feasible follower
    point exists: the search is a finite multistart descent.
    """

    found: bool
    y: Optional[Array]
    max_g: float
    starts_used: int


def check_slater(
    problem: BilevelProblem,
    x: Array,
    starts: int = 12,
    seed: int = 0,
    eps_strict: float = 1e-6,
) -> SlaterResult:
    """Search for y with g_i(x, y) <= -eps_strict for all i via multistart descent."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m, q = problem.dims.m, problem.dims.q
    if q == 0:
        return SlaterResult(found=True, y=np.zeros(m), max_g=-np.inf, starts_used=0)

    def worst(y: Array) -> float:
        g = np.asarray(problem.eval_g(x, y), dtype=float)
        if not np.all(np.isfinite(g)):
            return np.inf
        return float(np.max(g))

    box = problem.y_box if problem.y_box is not None else np.tile([-10.0, 10.0], (m, 1))
    rng = np.random.default_rng(seed)
    y0s = rng.uniform(box[:, 0], box[:, 1], size=(starts, m))
    best_val = np.inf
    best_y = None
    for y0 in y0s:
        res = minimize(worst, y0, method="Nelder-Mead", options={"maxiter": 200 * m, "xatol": 1e-9, "fatol": 1e-12})
        val = worst(res.x)
        if val < best_val - 1e-12 or (
            abs(val - best_val) <= 1e-12
            and (best_y is None or tuple(res.x) < tuple(best_y))
        ):
            best_val = val
            best_y = res.x
    found = best_val <= -eps_strict
    return SlaterResult(found=found, y=best_y if found else None, max_g=best_val, starts_used=starts)


def check_upper_regularity(
    problem: BilevelProblem, x: Array, eps: float = EPS_ACT_DEFAULT
) -> bool:
    """True iff only alpha = 0 solves jac_G(x)^T alpha = 0 with alpha >= 0 on I_G.

    Decided by maximising sum(alpha) over the active-gradient cone boxed to
    [0, 1]: the point is regular exactly when that optimum is zero.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = problem.dims.p
    if p == 0:
        return True
    G = np.asarray(problem.eval_G(x), dtype=float)
    active = [i for i in range(p) if abs(G[i]) <= eps]
    if not active:
        return True
    J = np.asarray(problem.jac_G(x), dtype=float).reshape(p, problem.dims.n)
    A = J[active].T  # n x k, columns are active gradients
    k = len(active)
    res = solve_lp(-np.ones(k), A, np.zeros(problem.dims.n), np.zeros(k), np.ones(k))
    if res.status != "optimal":  # pragma: no cover - box keeps it bounded
        return False
    return -res.objective <= 1e-7
