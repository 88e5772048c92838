"""Point-cloud set metrics and set-convergence diagnostics.

The excess of A over B is sup_{a in A} dist(a, B) with the conventions
excess(empty, B) = 0 and excess(A, empty) = +inf for nonempty A; the
Hausdorff distance is the larger of the two excesses.  Diagnostics compare
sampled relaxed follower KKT sets and argmax sets along a homotopy run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .maxmin import (
    GridSpec,
    InnerConfig,
    SampledSet,
    approximate_argmax_set,
    batch_feasibility,
    dedup_points,
)
from .problem_model import Array, BilevelProblem

INF = math.inf


def _points(s) -> Array:
    if isinstance(s, SampledSet):
        return s.points
    a = np.asarray(s, dtype=float)
    return a.reshape(0, 0) if a.size == 0 else np.atleast_2d(a)


def excess(a, b) -> float:
    """sup over a in A of the Euclidean distance from a to B."""
    A, B = _points(a), _points(b)
    if A.shape[0] == 0:
        return 0.0
    if B.shape[0] == 0:
        return INF
    d2 = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=-1)
    return float(np.sqrt(d2.min(axis=1)).max())


def hausdorff(a, b) -> float:
    """max(excess(A, B), excess(B, A))."""
    return max(excess(a, b), excess(b, a))


def sample_relaxed_set(
    problem: BilevelProblem,
    x: Array,
    t: float,
    grid: Optional[GridSpec] = None,
    method: str = "grid",
    tol_factor: float = 0.75,
    starts: int = 64,
    seed: int = 0,
    feas_tol: float = 1e-8,
) -> SampledSet:
    """Finite sample of the level-t follower KKT set at x.

    Grid mode keeps every grid point feasible within a grid-scaled tolerance;
    comparisons between levels must share one grid so inclusion relations are
    exact.  Multistart mode polishes random starts onto the set instead.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if method == "grid":
        if grid is None:
            raise ValueError("grid mode requires a GridSpec")
        pts = grid.points()
        tau = max(tol_factor * grid.max_step(), feas_tol)
        mask = batch_feasibility(problem, x, pts, t, tau)
        return SampledSet(
            dedup_points(pts[mask]),
            meta={"kind": "grid", "t": float(t), "tau": tau, "axes": grid.axes},
        )
    if method == "multistart":
        from .maxmin import _boxes, _polish  # internal reuse

        cfg = InnerConfig(starts=starts, seed=seed, feas_tol=feas_tol)
        yb, ub = _boxes(problem, cfg)
        q = problem.dims.q
        lo = np.concatenate([yb[:, 0], ub[:, 0] if q else np.zeros(0)])
        hi = np.concatenate([yb[:, 1], ub[:, 1] if q else np.zeros(0)])
        rng = np.random.default_rng(seed)
        z0s = rng.uniform(lo, hi, size=(starts, lo.size))
        found = []
        for z0 in z0s:
            z, viol, _ = _polish(problem, x, z0, t, cfg, lo, hi)
            if viol <= feas_tol:
                found.append(z)
        pts = dedup_points(np.array(found)) if found else np.zeros((0, lo.size))
        return SampledSet(pts, meta={"kind": "multistart", "t": float(t), "seed": seed})
    raise ValueError(f"unknown sampling method {method!r}")


@dataclass
class ExcessEntry:
    k: int
    t: float
    x: Array
    excess: float
    flagged: bool = False


@dataclass
class ExcessSeries:
    """Per-iteration excess of argmax samples over the sampled limit argmax set."""

    entries: list[ExcessEntry] = field(default_factory=list)
    limit_estimate: float = float("nan")


def convergence_diagnostic(
    problem: BilevelProblem,
    trace,
    x_bar: Array,
    cfg: Optional[InnerConfig] = None,
    reference: Optional[SampledSet] = None,
) -> ExcessSeries:
    """Excess of each iterate's argmax sample over the sampled argmax set at x_bar.

    Conclusions hold at sampling resolution only: the limit set is itself a
    finite approximation produced by the inner solver at t = 0.
    """
    records = getattr(trace, "records", trace)
    if not records:
        raise ValueError("trace is empty")
    x_bar = np.atleast_1d(np.asarray(x_bar, dtype=float))
    ref = reference if reference is not None else approximate_argmax_set(problem, x_bar, 0.0, cfg)
    series = ExcessSeries()
    for rec in records:
        sample = rec.argmax
        if sample is None or len(sample) == 0:
            series.entries.append(ExcessEntry(rec.k, rec.t, rec.x, float("nan"), flagged=True))
            continue
        series.entries.append(ExcessEntry(rec.k, rec.t, rec.x, excess(sample, ref)))
    clean = [e.excess for e in series.entries if not e.flagged]
    if clean:
        series.limit_estimate = clean[-1]
    return series
