"""Multiplier recovery and certification for the min-max optimality systems.

Covers the C/M/S first-order systems of the exact problem, the optimality
system of the relaxed problem, the multiplier-set qualification conditions
used by the convergence theory, and the relaxed-problem qualification
condition.  Branch conditions over the biactive set are handled by exact
enumeration of sign patterns; each pattern is one linear feasibility
problem solved by the in-repo simplex, with least-norm multipliers chosen
for reproducibility.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .kkt import IndexSets, InfeasiblePointError, classify_indices, kkt_residual
from .maxmin import InnerConfig, evaluate_psi_t
from .problem_model import Array, BilevelProblem, TriplePoint, lagrangian_jacobians
from .simplex import cone_has_nonzero, cone_max_linear, least_norm_point

PATTERN_CAP_DEFAULT = 12
RAY_TOL = 1e-7


class PatternCapError(RuntimeError):
    """The biactive set is too large for exact sign-pattern enumeration."""


class BorderlineActivityWarning(UserWarning):
    """Active-set classification margins are thin; verdicts may be tolerance-bound."""


@dataclass
class Multipliers:
    alpha: Array
    beta: Array
    gamma: Array


@dataclass
class RelaxedMultipliers:
    alpha: Array
    beta: Array
    gamma: Array
    mu: Array
    delta: Array


@dataclass
class StationarityReport:
    kind: str
    residual_inf: float
    multipliers: object
    sign_pattern: Optional[tuple]
    index_sets: IndexSets
    verdict: bool
    rows: dict = field(default_factory=dict)


@dataclass
class _SystemData:
    gFx: Array
    gFy: Array
    jacG: Array
    Lx: Array
    Ly: Array
    Jgx: Array
    Jgy: Array
    G: Array
    g: Array


def _system_data(problem: BilevelProblem, pt: TriplePoint) -> _SystemData:
    d = problem.dims
    gFx, gFy = problem.grad_F(pt.x, pt.y)
    Lx, Ly, _ = lagrangian_jacobians(problem, pt)
    if d.q:
        Jgx, Jgy = problem.jac_g(pt.x, pt.y)
        g = np.asarray(problem.eval_g(pt.x, pt.y), dtype=float)
    else:
        Jgx, Jgy = np.zeros((0, d.n)), np.zeros((0, d.m))
        g = np.zeros(0)
    if d.p:
        jacG = np.asarray(problem.jac_G(pt.x), dtype=float).reshape(d.p, d.n)
        G = np.asarray(problem.eval_G(pt.x), dtype=float)
    else:
        jacG, G = np.zeros((0, d.n)), np.zeros(0)
    return _SystemData(
        gFx=np.asarray(gFx, dtype=float),
        gFy=np.asarray(gFy, dtype=float),
        jacG=jacG,
        Lx=Lx,
        Ly=Ly,
        Jgx=np.asarray(Jgx, dtype=float).reshape(d.q, d.n),
        Jgy=np.asarray(Jgy, dtype=float).reshape(d.q, d.m),
        G=G,
        g=g,
    )


def _theta_branches(kind: str, qualification: bool) -> tuple[str, ...]:
    # Branch labels for one biactive index.  For stationarity the M union is
    # {gamma<=0 & d<=0} | {gamma=0} | {d=0}; the qualification multiplier set
    # flips the inequality branch to {gamma>=0 & d>=0}.
    if kind == "C":
        return ("+", "-")
    if kind == "M":
        return ("pos", "g0", "d0") if qualification else ("neg", "g0", "d0")
    if kind == "S":
        return ("s",)
    raise ValueError(f"unknown stationarity kind {kind!r}")


def _branch_rows(label: str, gamma_col: int, d_row: Array, dim: int):
    """(eq_rows, ineq_rows) the branch adds; rows act on the stacked unknowns."""
    e_gamma = np.zeros(dim)
    e_gamma[gamma_col] = 1.0
    eq, ineq = [], []
    if label == "+":
        ineq += [e_gamma, d_row]
    elif label == "-":
        ineq += [-e_gamma, -d_row]
    elif label == "neg":
        ineq += [-e_gamma, -d_row]
    elif label == "pos":
        ineq += [e_gamma, d_row]
    elif label == "g0":
        eq.append(e_gamma)
    elif label == "d0":
        eq.append(d_row)
    elif label == "s":
        ineq += [-e_gamma, -d_row]
    else:  # pragma: no cover
        raise ValueError(label)
    return eq, ineq


def recover_c_multipliers(
    problem: BilevelProblem,
    pt: TriplePoint,
    kind: str = "C",
    tol: float = 1e-8,
    eps_act: float = 1e-6,
    pattern_cap: int = PATTERN_CAP_DEFAULT,
) -> Optional[Multipliers]:
    """Least-norm multipliers for the kind-dependent exact stationarity system.

    Enumerates sign patterns over the biactive set in a fixed order; each
    pattern is a linear feasibility problem and the first feasible pattern's
    least-norm solution is returned.  None means every pattern is infeasible.
    """
    problem.check_point(pt)
    res = kkt_residual(problem, pt, 0.0)
    if not res.is_feasible(tol):
        raise InfeasiblePointError(
            f"point not in the follower KKT set: '{res.worst_field()}' violates by "
            f"{res.max_violation():.3e}"
        )
    idx = classify_indices(problem, pt, 0.0, eps_act)
    if len(idx.theta) > pattern_cap:
        raise PatternCapError(
            f"biactive set size {len(idx.theta)} exceeds the enumeration cap {pattern_cap}"
        )
    data = _system_data(problem, pt)
    d = problem.dims
    free_gamma = sorted(set(idx.theta) | set(idx.nu))
    n_alpha = len(idx.i_G)
    dim = n_alpha + d.m + len(free_gamma)

    # Stacked unknowns: [alpha_{I_G}, beta, gamma_{theta u nu}].
    a_rows: list[Array] = []
    b_vals: list[float] = []

    def gamma_col(i: int) -> int:
        return n_alpha + d.m + free_gamma.index(i)

    for r in range(d.n):  # leader-gradient block
        row = np.zeros(dim)
        for a, j in enumerate(idx.i_G):
            row[a] = data.jacG[j, r]
        row[n_alpha : n_alpha + d.m] = data.Lx[:, r]
        for i in free_gamma:
            row[gamma_col(i)] = data.Jgx[i, r]
        a_rows.append(row)
        b_vals.append(-data.gFx[r])
    for r in range(d.m):  # follower-gradient block
        row = np.zeros(dim)
        row[n_alpha : n_alpha + d.m] = data.Ly[:, r]
        for i in free_gamma:
            row[gamma_col(i)] = data.Jgy[i, r]
        a_rows.append(row)
        b_vals.append(-data.gFy[r])
    for i in idx.nu:  # d_i = 0 on the strictly-active block
        row = np.zeros(dim)
        row[n_alpha : n_alpha + d.m] = data.Jgy[i]
        a_rows.append(row)
        b_vals.append(0.0)

    base_ineq = []
    for a in range(n_alpha):
        e = np.zeros(dim)
        e[a] = 1.0
        base_ineq.append(e)

    def d_row(i: int) -> Array:
        row = np.zeros(dim)
        row[n_alpha : n_alpha + d.m] = data.Jgy[i]
        return row

    branch_lists = [_theta_branches(kind, qualification=False) for _ in idx.theta]
    for pattern in itertools.product(*branch_lists):
        eq_rows = list(a_rows)
        eq_b = list(b_vals)
        ineq_rows = list(base_ineq)
        for label, i in zip(pattern, idx.theta):
            extra_eq, extra_ineq = _branch_rows(label, gamma_col(i), d_row(i), dim)
            for r in extra_eq:
                eq_rows.append(r)
                eq_b.append(0.0)
            ineq_rows.extend(extra_ineq)
        z = least_norm_point(
            np.array(eq_rows),
            np.array(eq_b),
            np.array(ineq_rows) if ineq_rows else None,
            dim=dim,
        )
        if z is None:
            continue
        alpha = np.zeros(d.p)
        for a, j in enumerate(idx.i_G):
            alpha[j] = max(0.0, z[a])
        beta = z[n_alpha : n_alpha + d.m]
        gamma = np.zeros(d.q)
        for i in free_gamma:
            gamma[i] = z[gamma_col(i)]
        return Multipliers(alpha=alpha, beta=beta, gamma=gamma)
    return None


def _theta_violation(kind: str, gamma_i: float, d_i: float) -> float:
    neg_branch = max(max(gamma_i, 0.0), max(d_i, 0.0))
    if kind == "S":
        return neg_branch
    if kind == "M":
        return min(neg_branch, abs(gamma_i), abs(d_i))
    if kind == "C":
        return max(0.0, -gamma_i * d_i)
    raise ValueError(f"unknown stationarity kind {kind!r}")


def check_stationarity(
    problem: BilevelProblem,
    pt: TriplePoint,
    mults: Multipliers,
    kind: str = "C",
    tol: float = 1e-8,
    eps_act: float = 1e-6,
    eps_lvl: float = 1e-4,
    inner_cfg: Optional[InnerConfig] = None,
    graph_check: bool = True,
) -> StationarityReport:
    """Residuals of the kind-dependent stationarity system at (pt, mults).

    The graph-membership row is verified numerically: pt must lie in the
    exact follower KKT set and F must reach the inner max value within
    eps_lvl (the inner solver supplies that value).
    """
    problem.check_point(pt)
    data = _system_data(problem, pt)
    idx = classify_indices(problem, pt, 0.0, eps_act)
    alpha = np.asarray(mults.alpha, dtype=float).reshape(problem.dims.p)
    beta = np.asarray(mults.beta, dtype=float).reshape(problem.dims.m)
    gamma = np.asarray(mults.gamma, dtype=float).reshape(problem.dims.q)

    rows: dict[str, float] = {}
    res = kkt_residual(problem, pt, 0.0)
    rows["graph_feasibility"] = res.max_violation()
    if graph_check:
        # Feasibility is kept well below eps_lvl so near-feasible points at
        # degenerate corners cannot inflate the reference value past the slack.
        cfg = inner_cfg or InnerConfig(starts=12, sweeps=4, feas_tol=1e-10)
        inner = evaluate_psi_t(problem, pt.x, 0.0, cfg)
        fval = problem.eval_F(pt.x, pt.y)
        gap = 0.0 if inner.status != "solved" else max(0.0, inner.value - eps_lvl - fval)
        rows["graph_value"] = gap

    res_x = data.gFx + data.jacG.T @ alpha + data.Lx.T @ beta + data.Jgx.T @ gamma
    rows["leader_gradient"] = float(np.max(np.abs(res_x), initial=0.0))
    res_y = data.gFy + data.Ly.T @ beta + data.Jgy.T @ gamma
    rows["follower_gradient"] = float(np.max(np.abs(res_y), initial=0.0))
    rows["alpha_sign"] = float(np.max(-alpha, initial=0.0))
    rows["leader_feas"] = float(np.max(data.G, initial=0.0))
    rows["alpha_compl"] = float(np.max(np.abs(alpha * data.G), initial=0.0))
    dvec = data.Jgy @ beta if problem.dims.q else np.zeros(0)
    rows["nu_gradient"] = float(max((abs(dvec[i]) for i in idx.nu), default=0.0))
    rows["eta_gamma"] = float(max((abs(gamma[i]) for i in idx.eta), default=0.0))
    rows["theta_condition"] = float(
        max((_theta_violation(kind, gamma[i], dvec[i]) for i in idx.theta), default=0.0)
    )

    branch = tuple(
        "-" if gamma[i] <= 0 and dvec[i] <= 0 else "+" for i in idx.theta
    ) if idx.theta else None
    residual = max(rows.values()) if rows else 0.0
    return StationarityReport(
        kind=kind,
        residual_inf=float(residual),
        multipliers=mults,
        sign_pattern=branch,
        index_sets=idx,
        verdict=bool(residual <= tol),
        rows=rows,
    )


def recover_relaxed_multipliers(
    problem: BilevelProblem,
    t: float,
    pt: TriplePoint,
    tol: float = 1e-8,
    eps_act: float = 1e-6,
) -> Optional[RelaxedMultipliers]:
    """Least-norm multipliers of the relaxed optimality system, or None.

    The complementarity conditions pin every multiplier outside its active
    set to zero, so one linear feasibility problem with sign constraints
    remains.
    """
    problem.check_point(pt)
    if t < 0:
        raise ValueError("relaxation level t must be nonnegative")
    res = kkt_residual(problem, pt, t)
    if not res.is_feasible(tol):
        raise InfeasiblePointError(
            f"point not in the level-t KKT set: '{res.worst_field()}' violates by "
            f"{res.max_violation():.3e}"
        )
    idx = classify_indices(problem, pt, t, eps_act)
    data = _system_data(problem, pt)
    d = problem.dims
    n_alpha = len(idx.i_G)
    g_list, u_list, ug_list = list(idx.i_g), list(idx.i_u), list(idx.i_ug)
    dim = n_alpha + d.m + len(g_list) + len(u_list) + len(ug_list)
    off_beta = n_alpha
    off_gamma = off_beta + d.m
    off_mu = off_gamma + len(g_list)
    off_delta = off_mu + len(u_list)

    a_rows: list[Array] = []
    b_vals: list[float] = []
    for r in range(d.n):
        row = np.zeros(dim)
        for a, j in enumerate(idx.i_G):
            row[a] = data.jacG[j, r]
        row[off_beta : off_beta + d.m] = -data.Lx[:, r]
        for c, i in enumerate(g_list):
            row[off_gamma + c] = -data.Jgx[i, r]
        for c, i in enumerate(ug_list):
            row[off_delta + c] = pt.u[i] * data.Jgx[i, r]
        a_rows.append(row)
        b_vals.append(-data.gFx[r])
    for r in range(d.m):
        row = np.zeros(dim)
        row[off_beta : off_beta + d.m] = -data.Ly[:, r]
        for c, i in enumerate(g_list):
            row[off_gamma + c] = -data.Jgy[i, r]
        for c, i in enumerate(ug_list):
            row[off_delta + c] = pt.u[i] * data.Jgy[i, r]
        a_rows.append(row)
        b_vals.append(-data.gFy[r])
    for i in range(d.q):
        row = np.zeros(dim)
        row[off_beta : off_beta + d.m] = -data.Jgy[i]
        if i in u_list:
            row[off_mu + u_list.index(i)] = 1.0
        if i in ug_list:
            row[off_delta + ug_list.index(i)] = data.g[i]
        a_rows.append(row)
        b_vals.append(0.0)

    ineq_rows = []
    for c in list(range(n_alpha)) + list(range(off_gamma, dim)):
        e = np.zeros(dim)
        e[c] = 1.0
        ineq_rows.append(e)

    z = least_norm_point(
        np.array(a_rows),
        np.array(b_vals),
        np.array(ineq_rows) if ineq_rows else None,
        dim=dim,
    )
    if z is None:
        return None
    alpha = np.zeros(d.p)
    for a, j in enumerate(idx.i_G):
        alpha[j] = max(0.0, z[a])
    gamma = np.zeros(d.q)
    mu = np.zeros(d.q)
    delta = np.zeros(d.q)
    for c, i in enumerate(g_list):
        gamma[i] = max(0.0, z[off_gamma + c])
    for c, i in enumerate(u_list):
        mu[i] = max(0.0, z[off_mu + c])
    for c, i in enumerate(ug_list):
        delta[i] = max(0.0, z[off_delta + c])
    return RelaxedMultipliers(alpha=alpha, beta=z[off_beta : off_beta + d.m], gamma=gamma, mu=mu, delta=delta)


def check_relaxed_stationarity(
    problem: BilevelProblem,
    t: float,
    pt: TriplePoint,
    rm: RelaxedMultipliers,
    tol: float = 1e-8,
    eps_act: float = 1e-6,
    eps_lvl: float = 1e-4,
    inner_cfg: Optional[InnerConfig] = None,
    graph_check: bool = True,
) -> StationarityReport:
    """Residuals of the relaxed optimality system at (pt, rm) for level t."""
    problem.check_point(pt)
    data = _system_data(problem, pt)
    d = problem.dims
    alpha = np.asarray(rm.alpha, dtype=float).reshape(d.p)
    beta = np.asarray(rm.beta, dtype=float).reshape(d.m)
    gamma = np.asarray(rm.gamma, dtype=float).reshape(d.q)
    mu = np.asarray(rm.mu, dtype=float).reshape(d.q)
    delta = np.asarray(rm.delta, dtype=float).reshape(d.q)

    rows: dict[str, float] = {}
    res = kkt_residual(problem, pt, t)
    rows["graph_feasibility"] = res.max_violation()
    if graph_check:
        cfg = inner_cfg or InnerConfig(starts=12, sweeps=4, feas_tol=1e-10)
        inner = evaluate_psi_t(problem, pt.x, t, cfg)
        fval = problem.eval_F(pt.x, pt.y)
        rows["graph_value"] = (
            0.0 if inner.status != "solved" else max(0.0, inner.value - eps_lvl - fval)
        )

    coeff = gamma - delta * pt.u
    res_x = data.gFx + data.jacG.T @ alpha - data.Lx.T @ beta - data.Jgx.T @ coeff
    rows["leader_gradient"] = float(np.max(np.abs(res_x), initial=0.0))
    res_y = data.gFy - data.Ly.T @ beta - data.Jgy.T @ coeff
    rows["follower_gradient"] = float(np.max(np.abs(res_y), initial=0.0))
    res_u = -(data.Jgy @ beta) + mu + delta * data.g if d.q else np.zeros(0)
    rows["multiplier_gradient"] = float(np.max(np.abs(res_u), initial=0.0))
    rows["alpha_block"] = float(
        max(
            np.max(-alpha, initial=0.0),
            np.max(data.G, initial=0.0),
            np.max(np.abs(alpha * data.G), initial=0.0),
        )
    )
    rows["gamma_block"] = float(
        max(
            np.max(-gamma, initial=0.0),
            np.max(data.g, initial=0.0),
            np.max(np.abs(gamma * data.g), initial=0.0),
        )
    )
    rows["mu_block"] = float(
        max(np.max(-mu, initial=0.0), np.max(-pt.u, initial=0.0), np.max(np.abs(mu * pt.u), initial=0.0))
    )
    ug = pt.u * data.g if d.q else np.zeros(0)
    rows["delta_block"] = float(
        max(
            np.max(-delta, initial=0.0),
            np.max(-ug - t, initial=0.0),
            np.max(np.abs(delta * (ug + t)), initial=0.0),
        )
    )
    idx = classify_indices(problem, pt, t, eps_act)
    residual = max(rows.values())
    return StationarityReport(
        kind="relaxed",
        residual_inf=float(residual),
        multipliers=rm,
        sign_pattern=None,
        index_sets=idx,
        verdict=bool(residual <= tol),
        rows=rows,
    )


@dataclass
class QualificationReport:
    a1: bool
    a2: bool
    kind: str
    certificates: dict = field(default_factory=dict)
    patterns_checked: int = 0


def check_qualification_Am(
    problem: BilevelProblem,
    pt: TriplePoint,
    kind: str = "M",
    eps_act: float = 1e-6,
    pattern_cap: int = PATTERN_CAP_DEFAULT,
    tol: float = RAY_TOL,
) -> QualificationReport:
    """Decide the two multiplier-set qualification conditions at pt.

    The first holds iff the full homogeneous multiplier set contains only
    zero; the second iff every element of the follower-only variant also
    annihilates the leader-derivative rows.  Both are decided per sign
    pattern by linear programs over the pattern cone intersected with the
    unit box.
    """
    problem.check_point(pt)
    res = kkt_residual(problem, pt, 0.0)
    if not res.is_feasible(eps_act):
        raise InfeasiblePointError("qualification checks need a KKT-feasible point")
    idx = classify_indices(problem, pt, 0.0, eps_act)
    if len(idx.theta) > pattern_cap:
        raise PatternCapError(
            f"biactive set size {len(idx.theta)} exceeds the enumeration cap {pattern_cap}"
        )
    data = _system_data(problem, pt)
    d = problem.dims
    free_gamma = sorted(set(idx.theta) | set(idx.nu))
    dim = d.m + len(free_gamma)

    def gamma_col(i: int) -> int:
        return d.m + free_gamma.index(i)

    def d_row(i: int) -> Array:
        row = np.zeros(dim)
        row[: d.m] = data.Jgy[i]
        return row

    def grad_rows(include_x: bool) -> list[Array]:
        rows = []
        if include_x:
            for r in range(d.n):
                row = np.zeros(dim)
                row[: d.m] = data.Lx[:, r]
                for i in free_gamma:
                    row[gamma_col(i)] = data.Jgx[i, r]
                rows.append(row)
        for r in range(d.m):
            row = np.zeros(dim)
            row[: d.m] = data.Ly[:, r]
            for i in free_gamma:
                row[gamma_col(i)] = data.Jgy[i, r]
            rows.append(row)
        return rows

    nu_rows = [d_row(i) for i in idx.nu]
    conclusion = []
    for r in range(d.n):
        row = np.zeros(dim)
        row[: d.m] = data.Lx[:, r]
        for i in free_gamma:
            row[gamma_col(i)] = data.Jgx[i, r]
        conclusion.append(row)

    branch_lists = [_theta_branches(kind, qualification=True) for _ in idx.theta]
    a1 = True
    a2 = True
    certs: dict[str, Array] = {}
    patterns = 0
    for pattern in itertools.product(*branch_lists):
        patterns += 1
        extra_eq, extra_ineq = [], []
        for label, i in zip(pattern, idx.theta):
            eqs, ineqs = _branch_rows(label, gamma_col(i), d_row(i), dim)
            extra_eq.extend(eqs)
            extra_ineq.extend(ineqs)
        ineq = np.array(extra_ineq) if extra_ineq else None

        if a1:
            eq_full = np.array(grad_rows(include_x=True) + nu_rows + extra_eq)
            ray = cone_has_nonzero(eq_full, ineq, dim, tol=tol)
            if ray is not None:
                a1 = False
                certs["a1"] = ray
        if a2:
            eq_y = np.array(grad_rows(include_x=False) + nu_rows + extra_eq)
            for row in conclusion:
                for sign in (1.0, -1.0):
                    val, ray = cone_max_linear(sign * row, eq_y, ineq, dim)
                    if ray is not None and val > tol:
                        a2 = False
                        certs["a2"] = ray
                        break
                if not a2:
                    break
    return QualificationReport(a1=a1, a2=a2, kind=kind, certificates=certs, patterns_checked=patterns)


def check_cq1(
    problem: BilevelProblem,
    t: float,
    pt: TriplePoint,
    eps_act: float = 1e-6,
    tol: float = RAY_TOL,
) -> bool:
    """True iff the homogeneous relaxed multiplier system has only the zero solution.

    Complementarity pins each multiplier outside its active set to zero; the
    remaining sign-constrained homogeneous system is a polyhedral cone whose
    nontriviality is decided exactly by box LPs.  Borderline activity (values
    within a decade of eps_act) triggers a warning since the support
    decomposition is only clean away from the threshold.
    """
    problem.check_point(pt)
    res = kkt_residual(problem, pt, t)
    if not res.is_feasible(eps_act):
        raise InfeasiblePointError("qualification condition needs a level-t feasible point")
    idx = classify_indices(problem, pt, t, eps_act)
    data = _system_data(problem, pt)
    d = problem.dims

    margins = np.concatenate(
        [np.abs(pt.u), np.abs(data.g), np.abs(pt.u * data.g + t)]
    ) if d.q else np.zeros(0)
    border = margins[(margins > eps_act) & (margins < 10.0 * eps_act)]
    if border.size:
        warnings.warn(
            "activity margins within a decade of eps_act; verdict undecided at tolerance",
            BorderlineActivityWarning,
            stacklevel=2,
        )

    g_list, u_list, ug_list = list(idx.i_g), list(idx.i_u), list(idx.i_ug)
    dim = d.m + len(g_list) + len(u_list) + len(ug_list)
    off_gamma = d.m
    off_mu = off_gamma + len(g_list)
    off_delta = off_mu + len(u_list)

    rows = []
    for r in range(d.m):
        row = np.zeros(dim)
        row[: d.m] = data.Ly[:, r]
        for c, i in enumerate(g_list):
            row[off_gamma + c] = data.Jgy[i, r]
        for c, i in enumerate(ug_list):
            row[off_delta + c] = -pt.u[i] * data.Jgy[i, r]
        rows.append(row)
    for i in range(d.q):
        row = np.zeros(dim)
        row[: d.m] = data.Jgy[i]
        if i in u_list:
            row[off_mu + u_list.index(i)] = -1.0
        if i in ug_list:
            row[off_delta + ug_list.index(i)] = -data.g[i]
        rows.append(row)
    ineq = []
    for c in range(off_gamma, dim):
        e = np.zeros(dim)
        e[c] = 1.0
        ineq.append(e)
    ray = cone_has_nonzero(
        np.array(rows), np.array(ineq) if ineq else None, dim, tol=tol
    )
    return ray is None
