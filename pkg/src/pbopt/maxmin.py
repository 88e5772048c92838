"""Inner maximisation: the relaxed pessimistic value function and its argmax.

For fixed leader point x and relaxation level t >= 0 this evaluates

    psi(x, t) = max { F(x, y) : (y, u) in the level-t follower KKT set }

by multistart penalised ascent plus a Gauss-Newton feasibility polish, and
approximates the set of near-maximisers.  A brute-force grid maximiser is
provided as an independent oracle for low-dimensional problems.
"""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .problem_model import Array, BilevelProblem, TriplePoint, lagrangian_grad, lagrangian_jacobians

EPS_LVL_DEFAULT = 1e-4
DEDUP_TOL = 1e-9
NEAR_FEAS_BAND = 1e-3


class InnerInfeasibleError(RuntimeError):
    """The relaxed follower KKT set appears empty at the queried (x, t)."""


@dataclass(frozen=True)
class GridSpec:
    """Per-coordinate (lo, hi, count) axes over the stacked (y, u) block.

    An axis with count 1 collapses to its lower endpoint.
    """

    axes: tuple[tuple[float, float, int], ...]

    def arrays(self) -> list[Array]:
        out = []
        for lo, hi, n in self.axes:
            out.append(np.array([lo]) if n <= 1 else np.linspace(lo, hi, n))
        return out

    def points(self) -> Array:
        grids = np.meshgrid(*self.arrays(), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def max_step(self) -> float:
        steps = [
            (hi - lo) / (n - 1)
            for lo, hi, n in self.axes
            if n > 1 and hi > lo
        ]
        return max(steps) if steps else 0.0


@dataclass
class SampledSet:
    """A finite point cloud in the (y, u) space with its generation record."""

    points: Array
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points.reshape(1, -1) if self.points.size else self.points.reshape(0, 0)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def is_empty(self) -> bool:
        return len(self) == 0


def dedup_points(pts: Array, tol: float = DEDUP_TOL) -> Array:
    """Lexicographically sorted points with near-duplicates (inf-norm tol) removed."""
    pts = np.asarray(pts, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, pts.shape[-1] if pts.ndim == 2 else 0)
    order = np.lexsort(pts.T[::-1])
    kept: list[Array] = []
    for idx in order:
        p = pts[idx]
        if all(np.max(np.abs(p - k)) > tol for k in kept):
            kept.append(p)
    return np.array(kept)


@dataclass
class InnerConfig:
    """Tuning knobs for the multistart inner maximiser."""

    starts: int = 32
    sweeps: int = 5
    penalty_init: float = 100.0
    penalty_growth: float = 10.0
    u_max: float = 10.0
    eps_lvl: float = EPS_LVL_DEFAULT
    feas_tol: float = 1e-8
    seed: int = 0
    workers: int = 1
    local_maxiter: int = 120
    polish_maxiter: int = 60
    y_box: Optional[Array] = None
    warm_starts: tuple = ()


@dataclass
class InnerSolveResult:
    value: float
    argmax: SampledSet
    status: str  # "solved" | "infeasible" | "budget_exhausted"
    evals: int


def _boxes(problem: BilevelProblem, cfg: InnerConfig) -> tuple[Array, Array]:
    m, q = problem.dims.m, problem.dims.q
    if cfg.y_box is not None:
        yb = np.asarray(cfg.y_box, dtype=float).reshape(m, 2)
    elif problem.y_box is not None:
        yb = problem.y_box
    else:
        yb = np.tile([-10.0, 10.0], (m, 1))
    ub = np.tile([0.0, cfg.u_max], (q, 1)) if q else np.zeros((0, 2))
    return yb, ub


def _violation_parts(problem: BilevelProblem, x: Array, z: Array, t: float):
    m, q = problem.dims.m, problem.dims.q
    y, u = z[:m], z[m:]
    pt = TriplePoint(x, y, u)
    L = lagrangian_grad(problem, pt)
    g = np.asarray(problem.eval_g(x, y), dtype=float) if q else np.zeros(0)
    w = -u * g - t
    return y, u, L, g, w


def max_violation(problem: BilevelProblem, x: Array, z: Array, t: float) -> float:
    _, u, L, g, w = _violation_parts(problem, x, z, t)
    vals = np.concatenate([np.abs(L), np.maximum(0.0, g), np.maximum(0.0, -u), np.maximum(0.0, w)])
    if not np.all(np.isfinite(vals)):
        return np.inf
    return float(np.max(vals, initial=0.0))


def _penalty_val_grad(problem: BilevelProblem, x: Array, z: Array, t: float, rho: float):
    m, q = problem.dims.m, problem.dims.q
    y, u, L, g, w = _violation_parts(problem, x, z, t)
    F = problem.eval_F(x, y)
    gp = np.maximum(0.0, g)
    un = np.maximum(0.0, -u)
    wp = np.maximum(0.0, w)
    val = -F + rho * (L @ L + gp @ gp + un @ un + wp @ wp)
    if not np.isfinite(val):
        return 1e30, np.zeros(m + q)
    gFy = problem.grad_F(x, y)[1]
    _, Ly, Lu = lagrangian_jacobians(problem, TriplePoint(x, y, u))
    grad_y = -gFy + rho * 2.0 * (L @ Ly)
    grad_u = rho * 2.0 * (L @ Lu) if q else np.zeros(0)
    if q:
        Jgy = problem.jac_g(x, y)[1]
        grad_y = grad_y + rho * 2.0 * (gp @ Jgy)
        grad_y = grad_y + rho * 2.0 * ((wp * (-u)) @ Jgy)
        grad_u = grad_u + rho * 2.0 * (-un)
        grad_u = grad_u + rho * 2.0 * (wp * (-g))
    return float(val), np.concatenate([grad_y, grad_u])


def _polish(problem: BilevelProblem, x: Array, z: Array, t: float, cfg: InnerConfig, lo: Array, hi: Array):
    """Drive constraint violations below feas_tol via active-set Gauss-Newton."""
    m, q = problem.dims.m, problem.dims.q

    def sumsq(zz: Array) -> float:
        _, u, L, g, w = _violation_parts(problem, x, zz, t)
        v = np.concatenate([L, np.maximum(0.0, g), np.maximum(0.0, -u), np.maximum(0.0, w)])
        if not np.all(np.isfinite(v)):
            return np.inf
        return float(v @ v)

    iters = 0
    for _ in range(cfg.polish_maxiter):
        iters += 1
        y, u, L, g, w = _violation_parts(problem, x, z, t)
        viol = max_violation(problem, x, z, t)
        if viol <= cfg.feas_tol:
            return z, viol, iters
        _, Ly, Lu = lagrangian_jacobians(problem, TriplePoint(x, y, u))
        rows = [np.hstack([Ly, Lu])]
        rhs = [L]
        if q:
            Jgy = problem.jac_g(x, y)[1]
            for i in range(q):
                if g[i] > 0.0:
                    rows.append(np.hstack([Jgy[i], np.zeros(q)])[None, :])
                    rhs.append(np.array([g[i]]))
                if u[i] < 0.0:
                    r = np.zeros(m + q)
                    r[m + i] = -1.0
                    rows.append(r[None, :])
                    rhs.append(np.array([-u[i]]))
                if w[i] > 0.0:
                    r = np.zeros(m + q)
                    r[:m] = -u[i] * Jgy[i]
                    r[m + i] = -g[i]
                    rows.append(r[None, :])
                    rhs.append(np.array([w[i]]))
        J = np.vstack(rows)
        r = np.concatenate(rhs)
        # Bound-active variables whose step points outside must be pinned,
        # otherwise clipping can turn the step into an ascent direction.
        at_lo = z <= lo + 1e-12
        at_hi = z >= hi - 1e-12
        free = np.ones(m + q, dtype=bool)
        dz = np.zeros(m + q)
        for _ in range(m + q + 1):
            dz[:] = 0.0
            if free.any():
                dz[free] = np.linalg.lstsq(J[:, free], -r, rcond=None)[0]
            pinned = free & ((at_lo & (dz < 0.0)) | (at_hi & (dz > 0.0)))
            if not pinned.any():
                break
            free &= ~pinned
        base = sumsq(z)
        step = 1.0
        accepted = False
        for _ in range(10):
            z_new = np.clip(z + step * dz, lo, hi)
            if sumsq(z_new) < base - 1e-18:
                z = z_new
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return z, viol, iters
    return z, max_violation(problem, x, z, t), iters


def _run_start(problem: BilevelProblem, x: Array, t: float, z0: Array, cfg: InnerConfig, lo: Array, hi: Array):
    bounds = list(zip(lo, hi))
    z = np.clip(z0, lo, hi)
    nfev = 0
    for s in range(cfg.sweeps):
        rho = cfg.penalty_init * cfg.penalty_growth**s
        res = minimize(
            lambda zz: _penalty_val_grad(problem, x, zz, t, rho),
            z,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": cfg.local_maxiter, "ftol": 1e-14, "gtol": 1e-12},
        )
        z = res.x
        nfev += int(res.nfev)
    z, viol, polish_iters = _polish(problem, x, z, t, cfg, lo, hi)
    nfev += polish_iters
    m = problem.dims.m
    fval = float(problem.eval_F(x, z[:m]))
    return fval, z, viol, nfev


def evaluate_psi_t(
    problem: BilevelProblem,
    x: Array,
    t: float,
    cfg: Optional[InnerConfig] = None,
) -> InnerSolveResult:
    """Best feasible leader objective over the level-t follower KKT set at x.

    Multistart penalised local ascent with the penalty weight grown each
    sweep, then a feasibility polish; the reported value comes only from
    points feasible within cfg.feas_tol.  The argmax cloud collects every
    polished maximiser within cfg.eps_lvl of the best value.
    """
    if t < 0:
        raise ValueError("relaxation level t must be nonnegative")
    cfg = cfg or InnerConfig()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m, q = problem.dims.m, problem.dims.q
    yb, ub = _boxes(problem, cfg)
    lo = np.concatenate([yb[:, 0], ub[:, 0] if q else np.zeros(0)])
    hi = np.concatenate([yb[:, 1], ub[:, 1] if q else np.zeros(0)])

    rng = np.random.default_rng(cfg.seed)
    rand = rng.uniform(lo, hi, size=(cfg.starts, m + q))
    starts = [np.clip(np.asarray(w, dtype=float), lo, hi) for w in cfg.warm_starts]
    starts.extend(rand)

    if cfg.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(lambda z0: _run_start(problem, x, t, z0, cfg, lo, hi), starts))
    else:
        results = [_run_start(problem, x, t, z0, cfg, lo, hi) for z0 in starts]

    evals = sum(r[3] for r in results)
    feas = [(f, z) for f, z, viol, _ in results if viol <= cfg.feas_tol]
    if not feas:
        near = any(viol <= NEAR_FEAS_BAND for _, _, viol, _ in results)
        status = "budget_exhausted" if near else "infeasible"
        return InnerSolveResult(
            value=float("nan"),
            argmax=SampledSet(np.zeros((0, m + q)), meta={"seed": cfg.seed}),
            status=status,
            evals=evals,
        )
    value = max(f for f, _ in feas)
    close = np.array([z for f, z in feas if f >= value - cfg.eps_lvl])
    pts = dedup_points(close, DEDUP_TOL)
    meta = {"kind": "multistart", "seed": cfg.seed, "starts": cfg.starts, "t": float(t)}
    return InnerSolveResult(value=float(value), argmax=SampledSet(pts, meta), status="solved", evals=evals)


def approximate_argmax_set(
    problem: BilevelProblem,
    x: Array,
    t: float,
    cfg: Optional[InnerConfig] = None,
) -> SampledSet:
    """Sampled near-argmax set of the inner maximisation at (x, t)."""
    res = evaluate_psi_t(problem, x, t, cfg)
    if res.status == "infeasible":
        raise InnerInfeasibleError(f"inner problem infeasible at x={x}, t={t}")
    return res.argmax


def batch_feasibility(
    problem: BilevelProblem,
    x: Array,
    Z: Array,
    t: float,
    tau: float,
) -> Array:
    """Boolean mask of grid points within tolerance tau of level-t membership."""
    m, q = problem.dims.m, problem.dims.q
    Y, U = Z[:, :m], Z[:, m:]
    if problem.batch_g is not None and problem.batch_lagrangian is not None:
        g = problem.batch_g(x, Y)
        L = problem.batch_lagrangian(x, Y, U)
    else:
        g = np.zeros((Z.shape[0], q))
        L = np.zeros((Z.shape[0], m))
        for i in range(Z.shape[0]):
            pt = TriplePoint(x, Y[i], U[i])
            L[i] = lagrangian_grad(problem, pt)
            if q:
                g[i] = problem.eval_g(x, Y[i])
    ok = np.all(np.abs(L) <= tau, axis=1)
    if q:
        ok &= np.all(g <= tau, axis=1)
        ok &= np.all(U >= -tau, axis=1)
        ok &= np.all(-U * g - t <= tau, axis=1)
    finite = np.isfinite(L).all(axis=1)
    if q:
        finite &= np.isfinite(g).all(axis=1)
    return ok & finite


def batch_objective(problem: BilevelProblem, x: Array, Y: Array) -> Array:
    if problem.batch_F is not None:
        return np.asarray(problem.batch_F(x, Y), dtype=float)
    return np.array([problem.eval_F(x, Y[i]) for i in range(Y.shape[0])], dtype=float)


@dataclass
class BruteForceResult:
    value: float  # -inf when no grid point is feasible
    feasible: bool
    argmax_point: Optional[Array]
    tol: float


def brute_force_psi_t(
    problem: BilevelProblem,
    x: Array,
    t: float,
    grid: GridSpec,
    tol_factor: float = 0.75,
) -> BruteForceResult:
    """Independent grid oracle: max F over grid points near-feasible at level t.

    Feasibility is tested within a grid-scaled tolerance
    tau = tol_factor * (largest grid step), floored at 1e-8.
    Restricted to m + q <= 4.
    """
    if t < 0:
        raise ValueError("relaxation level t must be nonnegative")
    m, q = problem.dims.m, problem.dims.q
    if m + q > 4:
        raise ValueError("brute force limited to m + q <= 4")
    if len(grid.axes) != m + q:
        raise ValueError(f"grid must cover all {m + q} follower coordinates")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    Z = grid.points()
    tau = max(tol_factor * grid.max_step(), 1e-8)
    mask = batch_feasibility(problem, x, Z, t, tau)
    if not mask.any():
        return BruteForceResult(value=-np.inf, feasible=False, argmax_point=None, tol=tau)
    Zf = Z[mask]
    F = batch_objective(problem, x, Zf[:, :m])
    best = int(np.argmax(F))
    return BruteForceResult(value=float(F[best]), feasible=True, argmax_point=Zf[best], tol=tau)
