import numpy as np
import pytest

import pbopt
from pbopt import OuterConfig, RelaxationParams, minimize_psi_t, scholtes_solve
from toys import make_empty_lower_toy


def _outer(light_cfg):
    return OuterConfig(inner=light_cfg)


def test_minimize_example1(example1, light_cfg):
    problem, _ = example1
    res = minimize_psi_t(problem, 0.1, [0.5], _outer(light_cfg))
    assert res.x[0] == pytest.approx(1.0, abs=1e-3)
    assert res.value == pytest.approx(0.1, abs=1e-3)
    assert res.evals > 0


def test_minimize_example2(example2, light_cfg):
    problem, _ = example2
    res = minimize_psi_t(problem, 0.25, [0.0], _outer(light_cfg))
    assert res.x[0] == pytest.approx(-1.0, abs=1e-3)
    assert res.value == pytest.approx(0.0, abs=1e-3)


def test_minimize_degenerate_single_point_box(example1, light_cfg):
    problem, oracle = example1
    pinned = pbopt.BilevelProblem(
        dims=problem.dims,
        eval_F=problem.eval_F,
        eval_f=problem.eval_f,
        eval_G=problem.eval_G,
        eval_g=problem.eval_g,
        grad_F=problem.grad_F,
        grad_f=problem.grad_f,
        jac_G=problem.jac_G,
        jac_g=problem.jac_g,
        hess_f_yx=problem.hess_f_yx,
        hess_f_yy=problem.hess_f_yy,
        hess_g_yx=problem.hess_g_yx,
        hess_g_yy=problem.hess_g_yy,
        x_box=np.array([[0.3, 0.3]]),
        y_box=problem.y_box,
        batch_g=problem.batch_g,
        batch_lagrangian=problem.batch_lagrangian,
        batch_F=problem.batch_F,
    )
    res = minimize_psi_t(pinned, 0.1, [0.9], _outer(light_cfg))
    assert res.x[0] == 0.3
    assert res.value == pytest.approx(oracle.psi_p_t(0.3, 0.1), abs=1e-4)


def test_schedule_is_exactly_geometric(example2, light_cfg):
    problem, _ = example2
    params = RelaxationParams(t0=1.0, rho=0.5, t_min=1e-2, x_tol=-1.0, outer=_outer(light_cfg))
    trace = scholtes_solve(problem, params, [0.5])
    ts = [rec.t for rec in trace.records]
    assert ts == [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]
    assert trace.terminal == "t_min_reached"
    ks = [rec.k for rec in trace.records]
    assert ks == sorted(ks)
    assert all(t2 < t1 for t1, t2 in zip(ts, ts[1:]))


def test_homotopy_example2_reaches_optimum(example2, light_cfg):
    problem, oracle = example2
    params = RelaxationParams(t0=1.0, rho=0.5, t_min=1e-4, outer=_outer(light_cfg))
    trace = scholtes_solve(problem, params, [0.5])
    final = trace.final()
    assert abs(final.x[0] - oracle.known_optimum[0][0]) <= 1e-3
    assert abs(final.psi - oracle.known_optimum[1]) <= 1e-3
    assert trace.terminal in ("x_converged", "t_min_reached")


def test_homotopy_example1_tracks_t(example1, light_cfg):
    problem, oracle = example1
    params = RelaxationParams(t0=1.0, rho=0.5, t_min=1e-4, outer=_outer(light_cfg))
    trace = scholtes_solve(problem, params, [0.5])
    assert abs(trace.final().x[0] - 1.0) <= 1e-3
    for rec in trace.records:
        if rec.t <= rec.x[0]:
            assert abs(rec.psi - rec.t) <= 1e-3


def test_psi_dominates_exact_value_along_run(example1, example2, light_cfg):
    for problem, oracle in (example1, example2):
        params = RelaxationParams(t0=0.5, rho=0.5, t_min=5e-3, outer=_outer(light_cfg))
        trace = scholtes_solve(problem, params, [0.5])
        for rec in trace.records:
            assert rec.psi >= oracle.psi_p(rec.x[0]) - 2 * light_cfg.eps_lvl


def test_psi_nonincreasing_along_run(example1, example2, light_cfg):
    for problem, _ in (example1, example2):
        params = RelaxationParams(t0=0.5, rho=0.5, t_min=5e-3, outer=_outer(light_cfg))
        trace = scholtes_solve(problem, params, [0.5])
        psis = [rec.psi for rec in trace.records]
        assert all(b <= a + 1e-9 for a, b in zip(psis, psis[1:]))


def test_inner_infeasibility_terminates_with_failure(light_cfg):
    toy = make_empty_lower_toy()
    params = RelaxationParams(t0=0.5, rho=0.5, t_min=1e-3, outer=_outer(light_cfg))
    trace = scholtes_solve(toy, params, [0.5])
    assert trace.terminal.startswith("failure")
    assert trace.records == []


def test_x0_projected_into_box(example2, light_cfg):
    problem, _ = example2
    params = RelaxationParams(t0=0.5, rho=0.5, t_min=0.2, outer=_outer(light_cfg))
    trace = scholtes_solve(problem, params, [7.0])
    assert all(-1.0 <= rec.x[0] <= 1.0 for rec in trace.records)


def test_params_validation():
    with pytest.raises(ValueError):
        RelaxationParams(t0=1.0, rho=1.5)
    with pytest.raises(ValueError):
        RelaxationParams(t0=1e-8, t_min=1e-6)


def test_trace_records_final_mesh_diagnostic(example2, light_cfg):
    problem, _ = example2
    params = RelaxationParams(t0=0.5, rho=0.5, t_min=0.2, outer=_outer(light_cfg))
    trace = scholtes_solve(problem, params, [0.0])
    for rec in trace.records:
        assert rec.final_mesh < _outer(light_cfg).mesh_tol
        assert rec.inner_status == "solved"
