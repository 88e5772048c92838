import numpy as np
import pytest

import pbopt
from pbopt import BilevelProblem, ProblemDims, TriplePoint
from pbopt.problem_model import DimensionError, check_gradients_fd, lagrangian_grad, lagrangian_jacobians


def test_dims_validation():
    with pytest.raises(DimensionError):
        ProblemDims(n=0, m=1, p=1, q=1)
    with pytest.raises(DimensionError):
        ProblemDims(n=1, m=1, p=0, q=0)
    ProblemDims(n=1, m=1, p=0, q=1)  # one of p, q may be zero


def test_lagrangian_example1(example1):
    problem, _ = example1
    pt = TriplePoint([0.5], [0.2], [0.5, 0.0])
    # x - u1 + u2 with the stated data
    assert lagrangian_grad(problem, pt) == pytest.approx([0.0], abs=1e-15)
    pt2 = TriplePoint([0.7], [0.1], [0.2, 0.05])
    assert lagrangian_grad(problem, pt2) == pytest.approx([0.7 - 0.2 + 0.05])


def test_lagrangian_example2(example2):
    problem, _ = example2
    pt = TriplePoint([-1.0], [1.0], [0.0, 1.0])
    assert lagrangian_grad(problem, pt) == pytest.approx([0.0], abs=1e-15)


def test_lagrangian_zero_multipliers(example1, example2, synthetic):
    for problem, _ in (example1, example2, synthetic):
        d = problem.dims
        rng = np.random.default_rng(3)
        for _ in range(5):
            pt = TriplePoint(rng.normal(size=d.n), rng.normal(size=d.m), np.zeros(d.q))
            expected = problem.grad_f(pt.x, pt.y)[1]
            np.testing.assert_array_equal(lagrangian_grad(problem, pt), expected)


def test_lagrangian_linearity_in_u(example1, example2, synthetic):
    # L(x,y,u1+u2) = L(x,y,u1) + L(x,y,u2) - grad_y f
    for problem, _ in (example1, example2, synthetic):
        d = problem.dims
        rng = np.random.default_rng(11)
        for _ in range(10):
            x = rng.normal(size=d.n)
            y = rng.normal(size=d.m)
            u1 = rng.uniform(0, 2, size=d.q)
            u2 = rng.uniform(0, 2, size=d.q)
            lhs = lagrangian_grad(problem, TriplePoint(x, y, u1 + u2))
            rhs = (
                lagrangian_grad(problem, TriplePoint(x, y, u1))
                + lagrangian_grad(problem, TriplePoint(x, y, u2))
                - problem.grad_f(x, y)[1]
            )
            np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-13)


def test_lagrangian_jacobians_example1(example1):
    problem, _ = example1
    pt = TriplePoint([0.4], [0.9], [0.3, 0.1])
    lx, ly, lu = lagrangian_jacobians(problem, pt)
    np.testing.assert_array_equal(lx, [[1.0]])
    np.testing.assert_array_equal(ly, [[0.0]])
    np.testing.assert_array_equal(lu, [[-1.0, 1.0]])


def test_lagrangian_jacobians_match_directional_fd(example1, example2, synthetic):
    h = 1e-6
    for problem, _ in (example1, example2, synthetic):
        d = problem.dims
        rng = np.random.default_rng(5)
        for _ in range(5):
            pt = TriplePoint(
                rng.uniform(-0.5, 0.5, size=d.n),
                rng.uniform(-0.5, 0.5, size=d.m),
                rng.uniform(0, 1, size=d.q),
            )
            lx, ly, _ = lagrangian_jacobians(problem, pt)
            for j in range(d.n):
                e = np.zeros(d.n)
                e[j] = h
                fd = (
                    lagrangian_grad(problem, TriplePoint(pt.x + e, pt.y, pt.u))
                    - lagrangian_grad(problem, TriplePoint(pt.x - e, pt.y, pt.u))
                ) / (2 * h)
                np.testing.assert_allclose(lx[:, j], fd, atol=1e-6)
            for j in range(d.m):
                e = np.zeros(d.m)
                e[j] = h
                fd = (
                    lagrangian_grad(problem, TriplePoint(pt.x, pt.y + e, pt.u))
                    - lagrangian_grad(problem, TriplePoint(pt.x, pt.y - e, pt.u))
                ) / (2 * h)
                np.testing.assert_allclose(ly[:, j], fd, atol=1e-6)


def test_fd_fallback_close_to_analytic(example2):
    analytic, _ = example2
    fallback = BilevelProblem(
        dims=analytic.dims,
        eval_F=analytic.eval_F,
        eval_f=analytic.eval_f,
        eval_G=analytic.eval_G,
        eval_g=analytic.eval_g,
        grad_F=analytic.grad_F,
        grad_f=analytic.grad_f,
        jac_G=analytic.jac_G,
        jac_g=analytic.jac_g,
        x_box=analytic.x_box,
        y_box=analytic.y_box,
    )
    assert fallback.hess_is_fd
    pt = TriplePoint([-0.3], [0.6], [0.2, 0.5])
    for a, b in zip(lagrangian_jacobians(analytic, pt), lagrangian_jacobians(fallback, pt)):
        np.testing.assert_allclose(a, b, rtol=1e-5, atol=1e-5)


def test_gradcheck_example1_clean(example1):
    problem, _ = example1
    report = check_gradients_fd(problem, TriplePoint([0.3], [0.4], [0.3, 0.0]))
    assert report.errors
    assert report.max_error() <= 1e-6
    assert not report.nonfinite


def test_gradcheck_constant_problem_exact_zero():
    const = BilevelProblem(
        dims=ProblemDims(1, 1, 1, 1),
        eval_F=lambda x, y: 1.0,
        eval_f=lambda x, y: 2.0,
        eval_G=lambda x: np.array([-1.0]),
        eval_g=lambda x, y: np.array([-1.0]),
        grad_F=lambda x, y: (np.zeros(1), np.zeros(1)),
        grad_f=lambda x, y: (np.zeros(1), np.zeros(1)),
        jac_G=lambda x: np.zeros((1, 1)),
        jac_g=lambda x, y: (np.zeros((1, 1)), np.zeros((1, 1))),
        hess_f_yx=lambda x, y: np.zeros((1, 1)),
        hess_f_yy=lambda x, y: np.zeros((1, 1)),
        hess_g_yx=lambda x, y: [np.zeros((1, 1))],
        hess_g_yy=lambda x, y: [np.zeros((1, 1))],
    )
    report = check_gradients_fd(const, TriplePoint([0.2], [0.1], [0.4]))
    assert report.max_error() == 0.0


def test_gradcheck_flags_corrupted_gradient(example1):
    problem, _ = example1
    broken = BilevelProblem(
        dims=problem.dims,
        eval_F=problem.eval_F,
        eval_f=problem.eval_f,
        eval_G=problem.eval_G,
        eval_g=problem.eval_g,
        # true x-gradient of F is 0; corrupt it by +1
        grad_F=lambda x, y: (problem.grad_F(x, y)[0] + 1.0, problem.grad_F(x, y)[1]),
        grad_f=problem.grad_f,
        jac_G=problem.jac_G,
        jac_g=problem.jac_g,
        hess_f_yx=problem.hess_f_yx,
        hess_f_yy=problem.hess_f_yy,
        hess_g_yx=problem.hess_g_yx,
        hess_g_yy=problem.hess_g_yy,
    )
    report = check_gradients_fd(broken, TriplePoint([0.3], [0.4], [0.3, 0.0]))
    assert report.errors["grad_F_x"] >= 0.5


def test_gradcheck_nonfinite_flagged_not_raised():
    sqrt_problem = BilevelProblem(
        dims=ProblemDims(1, 1, 1, 1),
        eval_F=lambda x, y: float(np.sqrt(y[0])),
        eval_f=lambda x, y: float(y[0]),
        eval_G=lambda x: np.array([-1.0]),
        eval_g=lambda x, y: np.array([-1.0]),
        grad_F=lambda x, y: (np.zeros(1), np.array([0.5 / np.sqrt(y[0])])),
        grad_f=lambda x, y: (np.zeros(1), np.ones(1)),
        jac_G=lambda x: np.zeros((1, 1)),
        jac_g=lambda x, y: (np.zeros((1, 1)), np.zeros((1, 1))),
        hess_f_yx=lambda x, y: np.zeros((1, 1)),
        hess_f_yy=lambda x, y: np.zeros((1, 1)),
        hess_g_yx=lambda x, y: [np.zeros((1, 1))],
        hess_g_yy=lambda x, y: [np.zeros((1, 1))],
    )
    with np.errstate(invalid="ignore"):
        report = check_gradients_fd(sqrt_problem, TriplePoint([0.0], [-0.5], [0.0]))
    assert "grad_F_y" in report.nonfinite


def test_gradcheck_rejects_bad_step(example1):
    problem, _ = example1
    with pytest.raises(ValueError):
        check_gradients_fd(problem, TriplePoint([0.3], [0.4], [0.3, 0.0]), h=0.0)


def test_dimension_mismatch_raises(example1):
    problem, _ = example1
    with pytest.raises(DimensionError):
        lagrangian_grad(problem, TriplePoint([0.5, 0.1], [0.2], [0.5, 0.0]))
