"""Smooth pessimistic bilevel problem data and derivative plumbing.

A problem bundles the leader objective F(x, y), follower objective f(x, y),
leader constraints G(x) <= 0 and follower constraints g(x, y) <= 0 together
with first derivatives and (analytic or finite-difference) second derivatives
of f and g with respect to the follower variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

FD_STEP = 1e-6


class DimensionError(ValueError):
    """A point or provider output does not match the problem dimensions."""


@dataclass(frozen=True)
class ProblemDims:
    """Sizes of the four variable/constraint blocks.

    n: leader variables, m: follower variables, p: leader constraints,
    q: follower constraints.  n and m must be positive; p and q may be zero
    but not both.
    """

    n: int
    m: int
    p: int
    q: int

    def __post_init__(self) -> None:
        if self.n <= 0 or self.m <= 0:
            raise DimensionError("leader and follower dimensions must be positive")
        if self.p < 0 or self.q < 0:
            raise DimensionError("constraint counts must be nonnegative")
        if self.p == 0 and self.q == 0:
            raise DimensionError("at most one of p, q may be zero")


@dataclass(frozen=True)
class TriplePoint:
    """A candidate (x, y, u) with u the follower-constraint multipliers."""

    x: Array
    y: Array
    u: Array

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "y", np.atleast_1d(np.asarray(self.y, dtype=float)))
        object.__setattr__(self, "u", np.atleast_1d(np.asarray(self.u, dtype=float)))

    def z(self) -> Array:
        """Follower block (y, u) as one flat vector."""
        return np.concatenate([self.y, self.u])


@dataclass
class BilevelProblem:
    """Evaluator bundle for one pessimistic bilevel program.

    All callables must be pure and deterministic.  Evaluations outside the
    mathematical domain should return non-finite values instead of raising;
    callers treat non-finite as infeasible.

    Second-derivative providers are optional.  When omitted they are replaced
    by central finite differences of the registered first derivatives
    (step ``FD_STEP``) and ``hess_is_fd`` is set.

    ``batch_F``, ``batch_g`` and ``batch_lagrangian`` are optional vectorised
    hooks used by grid-based routines; ``batch_g(x, Y)`` maps an (N, m) block
    of follower points to an (N, q) constraint block, and similarly for the
    others.  Absent hooks fall back to per-point loops.
    """

    dims: ProblemDims
    eval_F: Callable[[Array, Array], float]
    eval_f: Callable[[Array, Array], float]
    eval_G: Callable[[Array], Array]
    eval_g: Callable[[Array, Array], Array]
    grad_F: Callable[[Array, Array], tuple[Array, Array]]
    grad_f: Callable[[Array, Array], tuple[Array, Array]]
    jac_G: Callable[[Array], Array]
    jac_g: Callable[[Array, Array], tuple[Array, Array]]
    hess_f_yx: Optional[Callable[[Array, Array], Array]] = None
    hess_f_yy: Optional[Callable[[Array, Array], Array]] = None
    hess_g_yx: Optional[Callable[[Array, Array], list[Array]]] = None
    hess_g_yy: Optional[Callable[[Array, Array], list[Array]]] = None
    x_box: Optional[Array] = None
    y_box: Optional[Array] = None
    name: str = ""
    batch_F: Optional[Callable[[Array, Array], Array]] = None
    batch_g: Optional[Callable[[Array, Array], Array]] = None
    batch_lagrangian: Optional[Callable[[Array, Array, Array], Array]] = None
    hess_is_fd: bool = field(default=False)

    def __post_init__(self) -> None:
        if self.x_box is not None:
            self.x_box = np.asarray(self.x_box, dtype=float).reshape(self.dims.n, 2)
        if self.y_box is not None:
            self.y_box = np.asarray(self.y_box, dtype=float).reshape(self.dims.m, 2)
        missing = (
            self.hess_f_yx is None
            or self.hess_f_yy is None
            or self.hess_g_yx is None
            or self.hess_g_yy is None
        )
        if missing:
            self._install_fd_hessians()
            self.hess_is_fd = True

    def _install_fd_hessians(self) -> None:
        grad_f, jac_g = self.grad_f, self.jac_g
        m, q = self.dims.m, self.dims.q
        h = FD_STEP

        def fd_f_yx(x: Array, y: Array) -> Array:
            out = np.zeros((m, len(x)))
            for j in range(len(x)):
                e = np.zeros(len(x))
                e[j] = h
                out[:, j] = (grad_f(x + e, y)[1] - grad_f(x - e, y)[1]) / (2 * h)
            return out

        def fd_f_yy(x: Array, y: Array) -> Array:
            out = np.zeros((m, m))
            for j in range(m):
                e = np.zeros(m)
                e[j] = h
                out[:, j] = (grad_f(x, y + e)[1] - grad_f(x, y - e)[1]) / (2 * h)
            return out

        def fd_g_yx(x: Array, y: Array) -> list[Array]:
            mats = [np.zeros((m, len(x))) for _ in range(q)]
            for j in range(len(x)):
                e = np.zeros(len(x))
                e[j] = h
                dplus = jac_g(x + e, y)[1]
                dminus = jac_g(x - e, y)[1]
                col = (dplus - dminus) / (2 * h)
                for i in range(q):
                    mats[i][:, j] = col[i]
            return mats

        def fd_g_yy(x: Array, y: Array) -> list[Array]:
            mats = [np.zeros((m, m)) for _ in range(q)]
            for j in range(m):
                e = np.zeros(m)
                e[j] = h
                dplus = jac_g(x, y + e)[1]
                dminus = jac_g(x, y - e)[1]
                col = (dplus - dminus) / (2 * h)
                for i in range(q):
                    mats[i][:, j] = col[i]
            return mats

        if self.hess_f_yx is None:
            self.hess_f_yx = fd_f_yx
        if self.hess_f_yy is None:
            self.hess_f_yy = fd_f_yy
        if self.hess_g_yx is None:
            self.hess_g_yx = fd_g_yx
        if self.hess_g_yy is None:
            self.hess_g_yy = fd_g_yy

    def check_point(self, pt: TriplePoint) -> None:
        d = self.dims
        if pt.x.shape != (d.n,) or pt.y.shape != (d.m,) or pt.u.shape != (d.q,):
            raise DimensionError(
                f"point shapes {pt.x.shape}/{pt.y.shape}/{pt.u.shape} do not match "
                f"dims (n={d.n}, m={d.m}, q={d.q})"
            )


def lagrangian_grad(problem: BilevelProblem, pt: TriplePoint) -> Array:
    """Follower-stationarity vector: grad_y f(x,y) + sum_i u_i grad_y g_i(x,y)."""
    problem.check_point(pt)
    gy = problem.grad_f(pt.x, pt.y)[1]
    if problem.dims.q:
        gy = gy + problem.jac_g(pt.x, pt.y)[1].T @ pt.u
    return gy


def lagrangian_jacobians(
    problem: BilevelProblem, pt: TriplePoint
) -> tuple[Array, Array, Array]:
    """Jacobians of the follower-stationarity map with respect to x, y and u."""
    problem.check_point(pt)
    d = problem.dims
    lx = np.array(problem.hess_f_yx(pt.x, pt.y), dtype=float).reshape(d.m, d.n)
    ly = np.array(problem.hess_f_yy(pt.x, pt.y), dtype=float).reshape(d.m, d.m)
    if d.q:
        gyx = problem.hess_g_yx(pt.x, pt.y)
        gyy = problem.hess_g_yy(pt.x, pt.y)
        for i in range(d.q):
            lx = lx + pt.u[i] * np.asarray(gyx[i], dtype=float)
            ly = ly + pt.u[i] * np.asarray(gyy[i], dtype=float)
        lu = problem.jac_g(pt.x, pt.y)[1].T.copy()
    else:
        lu = np.zeros((d.m, 0))
    return lx, ly, lu


@dataclass
class GradCheckReport:
    """Max relative error per derivative provider against central differences."""

    errors: dict[str, float]
    nonfinite: list[str]
    fd_fallback: bool
    h: float

    def max_error(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0


def _rel_err(a: Array, b: Array) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def check_gradients_fd(
    problem: BilevelProblem, pt: TriplePoint, h: float = FD_STEP
) -> GradCheckReport:
    """Compare every registered analytic derivative to central differences at pt.

    Non-finite evaluations are flagged in the report rather than raised.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    problem.check_point(pt)
    d = problem.dims
    x, y = pt.x, pt.y
    errors: dict[str, float] = {}
    nonfinite: list[str] = []

    def central_vec(fun, base, idx_len, wrt_x):
        cols = []
        for j in range(idx_len):
            e = np.zeros(idx_len)
            e[j] = h
            if wrt_x:
                fp, fm = fun(base + e, y), fun(base - e, y)
            else:
                fp, fm = fun(x, base + e), fun(x, base - e)
            cols.append((np.asarray(fp, dtype=float) - np.asarray(fm, dtype=float)) / (2 * h))
        return np.stack(cols, axis=-1) if cols else np.zeros((0,))

    def record(tag, analytic, fd):
        vals = np.concatenate([np.ravel(analytic), np.ravel(fd)])
        if not np.all(np.isfinite(vals)):
            nonfinite.append(tag)
            return
        errors[tag] = _rel_err(analytic, fd)

    ax, ay = problem.grad_F(x, y)
    record("grad_F_x", ax, central_vec(problem.eval_F, x, d.n, wrt_x=True))
    record("grad_F_y", ay, central_vec(problem.eval_F, y, d.m, wrt_x=False))

    ax, ay = problem.grad_f(x, y)
    record("grad_f_x", ax, central_vec(problem.eval_f, x, d.n, wrt_x=True))
    record("grad_f_y", ay, central_vec(problem.eval_f, y, d.m, wrt_x=False))

    if d.p:
        record("jac_G", problem.jac_G(x), central_vec(lambda xx, _y: problem.eval_G(xx), x, d.n, wrt_x=True))
    if d.q:
        jx, jy = problem.jac_g(x, y)
        record("jac_g_x", jx, central_vec(problem.eval_g, x, d.n, wrt_x=True))
        record("jac_g_y", jy, central_vec(problem.eval_g, y, d.m, wrt_x=False))

    if not problem.hess_is_fd:
        gy = lambda xx, yy: problem.grad_f(xx, yy)[1]
        record("hess_f_yx", problem.hess_f_yx(x, y), central_vec(gy, x, d.n, wrt_x=True))
        record("hess_f_yy", problem.hess_f_yy(x, y), central_vec(gy, y, d.m, wrt_x=False))
        if d.q:
            ayx = np.stack(problem.hess_g_yx(x, y))
            ayy = np.stack(problem.hess_g_yy(x, y))
            jgy = lambda xx, yy: problem.jac_g(xx, yy)[1]
            record("hess_g_yx", ayx, central_vec(jgy, x, d.n, wrt_x=True))
            record("hess_g_yy", ayy, central_vec(jgy, y, d.m, wrt_x=False))

    return GradCheckReport(errors=errors, nonfinite=nonfinite, fd_fallback=problem.hess_is_fd, h=h)
