import numpy as np
import numpy.testing as npt
import pytest

from randnewton import network, problems, residual
from randnewton.residual import (
    Ball,
    Box,
    Neumann,
    RandomBall,
    RandomUniform,
    Underdetermined,
    UniformGrid,
)


def poisson_system(step=0.05, widths=(1, 3, 1), seed=0):
    prob = problems.get("poisson1d")
    plan = residual.build_plan(prob, UniformGrid(step), seed)
    net = network.initialize(widths, "sin", network.RandomNormal(seed=seed))
    return residual.ResidualSystem(prob, plan, net), net


class TestDomains:
    def test_ball_bounds(self):
        ball = Ball(3)
        assert ball.lo == (-1.0, -1.0, -1.0)
        assert ball.hi == (1.0, 1.0, 1.0)

    def test_box_dim(self):
        assert Box(lo=(0.0, 0.0), hi=(1.0, 2.0)).dim == 2

    def test_neumann_normalizes_direction(self):
        kind = Neumann(direction=(3.0, 4.0), target=lambda x: np.zeros(len(x)))
        npt.assert_allclose(kind.direction, (0.6, 0.8))

    def test_neumann_zero_direction_rejected(self):
        with pytest.raises(ValueError):
            Neumann(direction=(0.0, 0.0), target=lambda x: np.zeros(len(x)))


class TestBuildPlan:
    def test_grid_1d_counts(self):
        prob = problems.get("poisson1d")
        plan = residual.build_plan(prob, UniformGrid(0.1), 0)
        # 11 nodes on [0,1]: 9 interior, 2 endpoints
        assert plan.interior_count == 9
        assert plan.boundary_count == 2

    def test_grid_2d_separates_faces(self):
        prob = problems.get("poisson2d")
        plan = residual.build_plan(prob, UniformGrid(np.pi / 4), 0)
        # 5x5 nodes: 9 interior, 16 on faces (corners counted once)
        assert plan.interior_count == 9
        assert plan.boundary_count == 16
        for x, kind in plan.boundary:
            assert np.any(np.isclose(x, 0.0) | np.isclose(x, np.pi))

    def test_random_uniform_reproducible(self):
        prob = problems.get("poisson1d")
        a = residual.build_plan(prob, RandomUniform(40), seed=3)
        b = residual.build_plan(prob, RandomUniform(40), seed=3)
        c = residual.build_plan(prob, RandomUniform(40), seed=4)
        npt.assert_array_equal(a.interior, b.interior)
        assert not np.array_equal(a.interior, c.interior)

    def test_random_uniform_boundary_fraction(self):
        prob = problems.get("poisson1d")
        plan = residual.build_plan(prob, RandomUniform(100), seed=0)
        assert plan.interior_count == 100
        assert plan.boundary_count == 20

    def test_random_ball_points_inside(self):
        prob = problems.get("laplace_ball", n=3)
        plan = residual.build_plan(prob, RandomBall(200), seed=1)
        radii = np.linalg.norm(plan.interior, axis=1)
        assert np.all(radii <= 1.0)
        sphere = np.stack([x for x, _ in plan.boundary])
        npt.assert_allclose(np.linalg.norm(sphere, axis=1), 1.0, rtol=1e-12)

    def test_underdetermined_rejected(self):
        prob = problems.get("poisson1d")
        with pytest.raises(Underdetermined):
            residual.build_plan(prob, UniformGrid(0.25), 0, param_count=31)

    def test_square_plan_rejected(self):
        # rows == params is not overdetermined and must be refused
        prob = problems.get("poisson1d")
        plan = residual.build_plan(prob, UniformGrid(0.1), 0)
        rows = plan.interior_count + plan.boundary_count
        with pytest.raises(Underdetermined):
            residual.build_plan(prob, UniformGrid(0.1), 0, param_count=rows)

    def test_grid_needs_box(self):
        prob = problems.get("laplace_ball", n=2)
        with pytest.raises(ValueError):
            residual.build_plan(prob, UniformGrid(0.1), 0)


class TestResidualSystem:
    def test_row_count_and_order(self):
        system, net = poisson_system()
        n = system.plan.interior_count
        assert system.total_rows == n + 2
        vals = system.rows(net.theta)
        assert vals.shape == (system.total_rows,)

    def test_requesting_rows_matches_full(self):
        system, net = poisson_system()
        full = system.rows(net.theta)
        idx = np.array([0, 3, system.total_rows - 1, 3])
        sub = system.rows(net.theta, idx)
        npt.assert_allclose(sub, full[idx], rtol=1e-12)

    def test_duplicate_rows_duplicate_values(self):
        system, net = poisson_system()
        sub = system.rows(net.theta, np.array([5, 5]))
        assert sub[0] == sub[1]

    def test_out_of_range_row_rejected(self):
        system, net = poisson_system()
        with pytest.raises(IndexError):
            system.rows(net.theta, np.array([system.total_rows]))

    def test_wrong_theta_shape_rejected(self):
        system, _ = poisson_system()
        with pytest.raises(ValueError):
            system.rows(np.zeros(3))

    def test_jacobian_matches_finite_differences(self):
        system, net = poisson_system(widths=(1, 4, 1))
        theta = net.theta
        rows = np.arange(0, system.total_rows, 3)
        vals, jac = system.rows_and_jacobian(theta, rows)
        npt.assert_allclose(vals, system.rows(theta, rows), rtol=1e-12)
        h = 1e-6
        for j in range(len(theta)):
            tp, tm = theta.copy(), theta.copy()
            tp[j] += h
            tm[j] -= h
            col = (system.rows(tp, rows) - system.rows(tm, rows)) / (2 * h)
            npt.assert_allclose(jac[:, j], col, rtol=2e-4, atol=1e-6)

    def test_exact_solution_zeroes_rows(self):
        # u(x) = sin(2*pi*x) solves the calibration problem exactly
        system, net = poisson_system()
        star = net.with_theta(
            np.array([2 * np.pi, 0, 0, 0, 0, 0, 1.0, 0, 0, 0], dtype=float)
        )
        vals = system.rows(star.theta)
        assert np.max(np.abs(vals)) < 1e-8

    def test_component_mismatch_rejected(self):
        prob = problems.get("gray_scott")
        plan = residual.build_plan(prob, UniformGrid(0.05), 0)
        single = network.initialize((1, 3, 1), "sin", network.RandomNormal(seed=0))
        with pytest.raises(ValueError):
            residual.ResidualSystem(prob, plan, single)

    def test_input_width_mismatch_rejected(self):
        prob = problems.get("poisson2d")
        plan = residual.build_plan(prob, UniformGrid(0.5), 0)
        net1d = network.initialize((1, 3, 1), "sin", network.RandomNormal(seed=0))
        with pytest.raises(ValueError):
            residual.ResidualSystem(prob, plan, net1d)

    def test_stack_system_rows(self):
        prob = problems.get("gray_scott")
        plan = residual.build_plan(prob, UniformGrid(0.02), 0)
        nets = tuple(
            network.initialize((1, 10, 1), "sin", network.RandomNormal(seed=s))
            for s in (0, 1)
        )
        stack = network.NetworkStack(nets)
        system = residual.ResidualSystem(prob, plan, stack)
        assert system.total_rows == 2 * plan.interior_count + plan.boundary_count
        vals, jac = system.rows_and_jacobian(stack.theta)
        assert jac.shape == (system.total_rows, 62)
        # component 0 interior rows must not depend on component 1 second-layer
        # parameters and vice versa only through the coupling terms, so the
        # jacobian cannot be block-diagonal; just check finiteness and scale
        assert np.all(np.isfinite(jac))


class TestExactSolutionSanity:
    """Full residual of the known closed form stays at assembly roundoff
    (acceptance 1 backs onto this)."""

    def test_101_point_sup_norm(self):
        prob = problems.get("poisson1d")
        plan = residual.build_plan(prob, UniformGrid(0.01), 0)
        assert plan.interior_count + plan.boundary_count == 101
        net = network.NetworkParams(
            (1, 1, 1), "sin", np.array([2 * np.pi, 0.0, 1.0, 0.0])
        )
        system = residual.ResidualSystem(prob, plan, net)
        assert np.max(np.abs(system.rows(net.theta))) <= 1e-8
