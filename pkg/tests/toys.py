"""Small hand-built problems exercising corner cases of the checkers."""
import numpy as np

from pbopt import BilevelProblem, ProblemDims


def make_biactive_toy() -> BilevelProblem:
    """At x = 0 the follower constraint is biactive with zero multiplier.

    F = y, f = y^2/2 - x*y, g = -y.  The point (0, 0, 0) satisfies the C- and
    M-systems but not the S-system (the recovered gamma is forced positive).
    """
    return BilevelProblem(
        dims=ProblemDims(n=1, m=1, p=0, q=1),
        eval_F=lambda x, y: float(y[0]),
        eval_f=lambda x, y: float(0.5 * y[0] ** 2 - x[0] * y[0]),
        eval_G=lambda x: np.zeros(0),
        eval_g=lambda x, y: np.array([-y[0]]),
        grad_F=lambda x, y: (np.zeros(1), np.ones(1)),
        grad_f=lambda x, y: (np.array([-y[0]]), np.array([y[0] - x[0]])),
        jac_G=lambda x: np.zeros((0, 1)),
        jac_g=lambda x, y: (np.zeros((1, 1)), np.array([[-1.0]])),
        hess_f_yx=lambda x, y: np.array([[-1.0]]),
        hess_f_yy=lambda x, y: np.array([[1.0]]),
        hess_g_yx=lambda x, y: [np.zeros((1, 1))],
        hess_g_yy=lambda x, y: [np.zeros((1, 1))],
        x_box=np.array([[-1.0, 1.0]]),
        y_box=np.array([[-0.5, 1.5]]),
        name="biactive_toy",
    )


def make_q0_toy() -> BilevelProblem:
    """Unconstrained follower: f = (y - x)^2 / 2 pins y = x; X = [-1, 1]."""
    return BilevelProblem(
        dims=ProblemDims(n=1, m=1, p=2, q=0),
        eval_F=lambda x, y: float(y[0]),
        eval_f=lambda x, y: float(0.5 * (y[0] - x[0]) ** 2),
        eval_G=lambda x: np.array([-x[0] - 1.0, x[0] - 1.0]),
        eval_g=lambda x, y: np.zeros(0),
        grad_F=lambda x, y: (np.zeros(1), np.ones(1)),
        grad_f=lambda x, y: (np.array([x[0] - y[0]]), np.array([y[0] - x[0]])),
        jac_G=lambda x: np.array([[-1.0], [1.0]]),
        jac_g=lambda x, y: (np.zeros((0, 1)), np.zeros((0, 1))),
        hess_f_yx=lambda x, y: np.array([[-1.0]]),
        hess_f_yy=lambda x, y: np.array([[1.0]]),
        hess_g_yx=lambda x, y: [],
        hess_g_yy=lambda x, y: [],
        x_box=np.array([[-1.0, 1.0]]),
        y_box=np.array([[-2.0, 2.0]]),
        name="q0_toy",
    )


def make_empty_lower_toy() -> BilevelProblem:
    """g = y^2 + 1 <= 0 is impossible: every follower KKT set is empty."""
    return BilevelProblem(
        dims=ProblemDims(n=1, m=1, p=2, q=1),
        eval_F=lambda x, y: float(y[0]),
        eval_f=lambda x, y: float(y[0] ** 2),
        eval_G=lambda x: np.array([-x[0], x[0] - 1.0]),
        eval_g=lambda x, y: np.array([y[0] ** 2 + 1.0]),
        grad_F=lambda x, y: (np.zeros(1), np.ones(1)),
        grad_f=lambda x, y: (np.zeros(1), np.array([2.0 * y[0]])),
        jac_G=lambda x: np.array([[-1.0], [1.0]]),
        jac_g=lambda x, y: (np.zeros((1, 1)), np.array([[2.0 * y[0]]])),
        hess_f_yx=lambda x, y: np.zeros((1, 1)),
        hess_f_yy=lambda x, y: np.array([[2.0]]),
        hess_g_yx=lambda x, y: [np.zeros((1, 1))],
        hess_g_yy=lambda x, y: [np.array([[2.0]])],
        x_box=np.array([[0.0, 1.0]]),
        y_box=np.array([[-2.0, 2.0]]),
        name="empty_lower_toy",
    )


def make_no_slater_toy() -> BilevelProblem:
    """g = (y, -y) forces y = 0 with no strictly feasible follower point."""
    return BilevelProblem(
        dims=ProblemDims(n=1, m=1, p=2, q=2),
        eval_F=lambda x, y: float(y[0]),
        eval_f=lambda x, y: float(y[0] ** 2),
        eval_G=lambda x: np.array([-x[0], x[0] - 1.0]),
        eval_g=lambda x, y: np.array([y[0], -y[0]]),
        grad_F=lambda x, y: (np.zeros(1), np.ones(1)),
        grad_f=lambda x, y: (np.zeros(1), np.array([2.0 * y[0]])),
        jac_G=lambda x: np.array([[-1.0], [1.0]]),
        jac_g=lambda x, y: (np.zeros((2, 1)), np.array([[1.0], [-1.0]])),
        hess_f_yx=lambda x, y: np.zeros((1, 1)),
        hess_f_yy=lambda x, y: np.array([[2.0]]),
        hess_g_yx=lambda x, y: [np.zeros((1, 1)), np.zeros((1, 1))],
        hess_g_yy=lambda x, y: [np.zeros((1, 1)), np.zeros((1, 1))],
        x_box=np.array([[0.0, 1.0]]),
        y_box=np.array([[-2.0, 2.0]]),
        name="no_slater_toy",
    )


def make_opposing_leader_toy() -> BilevelProblem:
    """Leader constraints x <= 1 and -x <= -1: both active at x = 1."""
    return BilevelProblem(
        dims=ProblemDims(n=1, m=1, p=2, q=1),
        eval_F=lambda x, y: float(y[0]),
        eval_f=lambda x, y: float(0.5 * y[0] ** 2),
        eval_G=lambda x: np.array([x[0] - 1.0, 1.0 - x[0]]),
        eval_g=lambda x, y: np.array([-y[0]]),
        grad_F=lambda x, y: (np.zeros(1), np.ones(1)),
        grad_f=lambda x, y: (np.zeros(1), np.array([y[0]])),
        jac_G=lambda x: np.array([[1.0], [-1.0]]),
        jac_g=lambda x, y: (np.zeros((1, 1)), np.array([[-1.0]])),
        hess_f_yx=lambda x, y: np.zeros((1, 1)),
        hess_f_yy=lambda x, y: np.array([[1.0]]),
        hess_g_yx=lambda x, y: [np.zeros((1, 1))],
        hess_g_yy=lambda x, y: [np.zeros((1, 1))],
        name="opposing_leader_toy",
    )


def make_duplicated_g_toy() -> BilevelProblem:
    """Duplicated follower constraint rows (g1 = g2 = y - 1).

    With f = x*y - y^2/2 the point (x, y, u) = (-1, 0, (0.5, 0.5)) lies in the
    level-0.5 set and the homogeneous relaxed multiplier system admits a
    nonzero ray supported on the duplicated pair.
    """
    return BilevelProblem(
        dims=ProblemDims(n=1, m=1, p=1, q=2),
        eval_F=lambda x, y: float(y[0]),
        eval_f=lambda x, y: float(x[0] * y[0] - 0.5 * y[0] ** 2),
        eval_G=lambda x: np.array([x[0] - 10.0]),
        eval_g=lambda x, y: np.array([y[0] - 1.0, y[0] - 1.0]),
        grad_F=lambda x, y: (np.zeros(1), np.ones(1)),
        grad_f=lambda x, y: (np.array([y[0]]), np.array([x[0] - y[0]])),
        jac_G=lambda x: np.array([[1.0]]),
        jac_g=lambda x, y: (np.zeros((2, 1)), np.array([[1.0], [1.0]])),
        hess_f_yx=lambda x, y: np.array([[1.0]]),
        hess_f_yy=lambda x, y: np.array([[-1.0]]),
        hess_g_yx=lambda x, y: [np.zeros((1, 1)), np.zeros((1, 1))],
        hess_g_yy=lambda x, y: [np.zeros((1, 1)), np.zeros((1, 1))],
        x_box=np.array([[-2.0, 2.0]]),
        y_box=np.array([[-1.0, 2.0]]),
        name="duplicated_g_toy",
    )


def make_interior_toy() -> BilevelProblem:
    """Constant leader objective and inactive constraints everywhere near 0."""
    return BilevelProblem(
        dims=ProblemDims(n=1, m=1, p=1, q=1),
        eval_F=lambda x, y: 1.0,
        eval_f=lambda x, y: float(0.5 * y[0] ** 2),
        eval_G=lambda x: np.array([x[0] - 10.0]),
        eval_g=lambda x, y: np.array([-y[0] - 1.0]),
        grad_F=lambda x, y: (np.zeros(1), np.zeros(1)),
        grad_f=lambda x, y: (np.zeros(1), np.array([y[0]])),
        jac_G=lambda x: np.array([[1.0]]),
        jac_g=lambda x, y: (np.zeros((1, 1)), np.array([[-1.0]])),
        hess_f_yx=lambda x, y: np.zeros((1, 1)),
        hess_f_yy=lambda x, y: np.array([[1.0]]),
        hess_g_yx=lambda x, y: [np.zeros((1, 1))],
        hess_g_yy=lambda x, y: [np.zeros((1, 1))],
        x_box=np.array([[-1.0, 1.0]]),
        y_box=np.array([[-1.0, 1.0]]),
        name="interior_toy",
    )
