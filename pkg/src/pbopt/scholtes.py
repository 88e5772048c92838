"""Outer minimisation of the relaxed value function and the homotopy loop.

The leader objective psi(., t) is the value of a nonconvex inner max, hence
nonsmooth; the outer step is a derivative-free coordinate pattern search
with projection onto box-shaped leader sets.  The homotopy drives the
relaxation level down a geometric schedule, warm-starting each level from
the previous minimiser and argmax samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .maxmin import InnerConfig, InnerSolveResult, SampledSet, evaluate_psi_t
from .problem_model import Array, BilevelProblem

X_MEMBERSHIP_TOL = 1e-8


class OuterInfeasibleError(RuntimeError):
    """Every polled leader point had an infeasible inner problem."""


@dataclass
class OuterConfig:
    """Pattern-search controls for one fixed relaxation level."""

    mesh_init_frac: float = 0.25
    mesh_tol: float = 1e-5
    decrease_tol: float = 1e-10
    max_rounds: int = 400
    infeas_penalty: float = 1e8
    inner: InnerConfig = field(default_factory=InnerConfig)


@dataclass
class RelaxationParams:
    """Homotopy schedule and termination controls."""

    t0: float = 1.0
    rho: float = 0.5
    t_min: float = 1e-6
    max_outer_iters: int = 60
    x_tol: float = 1e-9
    outer: OuterConfig = field(default_factory=OuterConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.rho < 1.0):
            raise ValueError("reduction factor rho must lie in (0, 1)")
        if not (self.t0 > self.t_min > 0.0):
            raise ValueError("need t0 > t_min > 0")


@dataclass
class TraceRecord:
    k: int
    t: float
    x: Array
    psi: float
    argmax: SampledSet
    inner_status: str
    outer_evals: int
    final_mesh: float


@dataclass
class RunTrace:
    records: list[TraceRecord] = field(default_factory=list)
    terminal: str = ""

    def final(self) -> TraceRecord:
        if not self.records:
            raise ValueError("empty trace")
        return self.records[-1]


@dataclass
class MinimizeResult:
    x: Array
    value: float
    evals: int
    final_mesh: float
    inner: InnerSolveResult


def _project_x(problem: BilevelProblem, x: Array) -> Array:
    x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    if problem.x_box is not None:
        return np.clip(x, problem.x_box[:, 0], problem.x_box[:, 1])
    return x


def _leader_penalty(problem: BilevelProblem, x: Array, cfg: OuterConfig) -> float:
    # Box-shaped sets are handled by projection; anything else is penalised.
    if problem.x_box is not None or problem.dims.p == 0:
        return 0.0
    G = np.asarray(problem.eval_G(x), dtype=float)
    viol = float(np.max(np.maximum(0.0, G), initial=0.0))
    return 0.0 if viol <= X_MEMBERSHIP_TOL else cfg.infeas_penalty * viol


def minimize_psi_t(
    problem: BilevelProblem,
    t: float,
    x_init: Array,
    cfg: Optional[OuterConfig] = None,
) -> MinimizeResult:
    """Coordinate pattern search on x -> psi(x, t) over the leader set.

    Returns a mesh-local minimiser: once the mesh is below mesh_tol no poll
    point improves the incumbent by more than decrease_tol.
    """
    cfg = cfg or OuterConfig()
    n = problem.dims.n
    x = _project_x(problem, x_init)

    cache: dict[bytes, tuple[float, InnerSolveResult]] = {}
    evals = 0

    def objective(xq: Array) -> tuple[float, InnerSolveResult]:
        nonlocal evals
        key = xq.tobytes()
        if key not in cache:
            res = evaluate_psi_t(problem, xq, t, cfg.inner)
            val = math.inf if res.status != "solved" else res.value + _leader_penalty(problem, xq, cfg)
            cache[key] = (val, res)
            evals += 1
        return cache[key]

    if problem.x_box is not None:
        diam = float(np.max(problem.x_box[:, 1] - problem.x_box[:, 0]))
    else:
        diam = 4.0
    mesh = cfg.mesh_init_frac * diam if diam > 0 else cfg.mesh_tol
    if mesh <= 0:
        mesh = cfg.mesh_tol

    center_val, center_res = objective(x)
    for _ in range(cfg.max_rounds):
        if mesh < cfg.mesh_tol:
            break
        polls: list[tuple[float, tuple, Array]] = []
        for i in range(n):
            for sign in (1.0, -1.0):
                xp = x.copy()
                xp[i] += sign * mesh
                xp = _project_x(problem, xp)
                if np.array_equal(xp, x):
                    continue
                val, _ = objective(xp)
                polls.append((val, tuple(xp), xp))
        if not math.isfinite(center_val) and all(not math.isfinite(v) for v, _, _ in polls):
            raise OuterInfeasibleError(
                f"inner problem infeasible at the incumbent and every poll point "
                f"(t={t}, mesh={mesh:.3g}, x={x})"
            )
        # Best poll wins; exact ties go to the lexicographically smallest point.
        polls.sort(key=lambda rec: (rec[0], rec[1]))
        if polls and polls[0][0] < center_val - cfg.decrease_tol:
            x, center_val = polls[0][2], polls[0][0]
            center_res = cache[x.tobytes()][1]
        else:
            mesh *= 0.5

    if not math.isfinite(center_val):
        raise OuterInfeasibleError(f"no inner-feasible leader point found at t={t}")
    return MinimizeResult(x=x, value=center_val, evals=evals, final_mesh=mesh, inner=center_res)


def scholtes_solve(
    problem: BilevelProblem,
    params: Optional[RelaxationParams] = None,
    x0: Optional[Array] = None,
) -> RunTrace:
    """Geometric homotopy over the relaxation level with warm-started outer solves.

    Stops when the next level drops below t_min, when the leader iterate
    stalls for two consecutive levels, or at the iteration cap.  Inner
    infeasibility terminates the run with the partial trace preserved.
    """
    params = params or RelaxationParams()
    if x0 is None:
        if problem.x_box is None:
            raise ValueError("x0 required for problems without a leader box")
        x0 = problem.x_box.mean(axis=1)
    x = _project_x(problem, np.atleast_1d(np.asarray(x0, dtype=float)))

    trace = RunTrace()
    t = params.t0
    warm: tuple = ()
    small_steps = 0
    for k in range(params.max_outer_iters):
        inner_cfg = replace(params.outer.inner, warm_starts=warm, seed=params.outer.inner.seed)
        cfg_k = replace(params.outer, inner=inner_cfg)
        try:
            step = minimize_psi_t(problem, t, x, cfg_k)
        except OuterInfeasibleError as err:
            trace.terminal = f"failure: {err}"
            return trace
        trace.records.append(
            TraceRecord(
                k=k,
                t=t,
                x=step.x,
                psi=step.value,
                argmax=step.inner.argmax,
                inner_status=step.inner.status,
                outer_evals=step.evals,
                final_mesh=step.final_mesh,
            )
        )
        dx = float(np.linalg.norm(step.x - x))
        small_steps = small_steps + 1 if dx <= params.x_tol else 0
        x = step.x
        warm = tuple(step.inner.argmax.points)
        if small_steps >= 2:
            trace.terminal = "x_converged"
            return trace
        t_next = params.rho * t
        if t_next < params.t_min:
            trace.terminal = "t_min_reached"
            return trace
        t = t_next
    trace.terminal = "max_outer_iters"
    return trace
