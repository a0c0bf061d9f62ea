import numpy as np
import numpy.testing as npt
import pytest

from randnewton import network, problems
from randnewton.problems import (
    COLLOCATION_SETS,
    ClosedForm,
    EntropyProfile,
    collocation_failure_demo,
    entropy_profile,
    gray_scott_guess,
    lambda_star,
    pattern_distance,
    radial_reference,
    reference_error,
    shooting_roots,
)

# frozen from a scipy quadrature + bisection run at tight tolerances
BRANCH_ROOTS_LAM_1_2 = (0.6750776298913346, 1.1004133968961989)
LAMBDA_STAR = 1.3010812538069616


class TestCatalog:
    def test_names(self):
        assert set(problems.PROBLEMS) == {
            "poisson1d",
            "bratu_family",
            "burgers1d",
            "poisson2d",
            "burgers2d",
            "laplace_ball",
            "gray_scott",
        }

    def test_unknown_name_raises(self):
        with pytest.raises(KeyError):
            problems.get("heat")

    def test_parameter_plumbing(self):
        prob = problems.get("bratu_family", lam=1.1)
        assert prob.parameter == ("lambda", 1.1)
        moved = prob.with_parameter(0.9)
        assert moved.parameter_value() == 0.9
        assert prob.parameter_value() == 1.1

    def test_no_parameter_rejected(self):
        prob = problems.get("poisson1d")
        with pytest.raises(ValueError):
            prob.with_parameter(2.0)

    def test_ball_needs_two_dims(self):
        with pytest.raises(ValueError):
            problems.get("laplace_ball", n=1)

    def test_gray_scott_dims(self):
        assert problems.get("gray_scott", dim=2).spatial_dim == 2
        with pytest.raises(ValueError):
            problems.get("gray_scott", dim=3)


class TestShootingOracle:
    def test_two_roots_below_fold(self):
        roots = shooting_roots(1.2, p=4)
        npt.assert_allclose(roots, BRANCH_ROOTS_LAM_1_2, rtol=1e-8)

    def test_no_roots_above_fold(self):
        assert shooting_roots(1.4, p=4) == []

    def test_single_root_near_fold(self):
        roots = shooting_roots(1.30107, p=4)
        assert len(roots) == 1
        assert 0.7 < roots[0] < 1.0

    def test_lam_zero_degenerate(self):
        assert shooting_roots(0.0) == []

    def test_negative_lam_rejected(self):
        with pytest.raises(ValueError):
            shooting_roots(-0.5)

    def test_roots_actually_solve_branch_integral(self):
        # u(0) from each root must reproduce a genuine BVP solution:
        # integrate the ODE forward and check u(1) returns to zero
        from scipy.integrate import solve_ivp

        for u0 in shooting_roots(1.2, p=4):
            sol = solve_ivp(
                lambda x, y: [y[1], -1.2 * (1.0 + y[0] ** 4)],
                (0.0, 1.0),
                [u0, 0.0],
                rtol=1e-10,
                atol=1e-12,
            )
            assert abs(sol.y[0, -1]) < 1e-6


class TestLambdaStar:
    def test_fold_location(self):
        got = lambda_star(tol=1e-4)
        npt.assert_allclose(got, LAMBDA_STAR, atol=2e-4)
        npt.assert_allclose(got, 1.301, atol=1e-3)

    def test_bad_bracket_rejected(self):
        with pytest.raises(ValueError):
            lambda_star(lo=1.4, hi=1.5)


class TestReferences:
    def test_radial_reference_boundary_value(self):
        for n in (2, 3, 4):
            npt.assert_allclose(radial_reference(1.0, n), 1.0)

    def test_radial_reference_solves_ode(self):
        # radial Laplacian u'' + (n-1)/r u' must equal -r
        r = np.linspace(0.05, 0.95, 40)
        for n in (2, 3, 5):
            h = 1e-5
            upp = (radial_reference(r + h, n) - 2 * radial_reference(r, n)
                   + radial_reference(r - h, n)) / h**2
            up = (radial_reference(r + h, n) - radial_reference(r - h, n)) / (2 * h)
            npt.assert_allclose(upp + (n - 1) / r * up, -r, atol=1e-5)

    def test_entropy_profile_shock(self):
        s = np.array([0.1, np.pi / 2 - 1e-6, np.pi / 2 + 1e-6, 3.0])
        prof = entropy_profile(s)
        npt.assert_allclose(prof[0], np.sin(0.1))
        assert prof[1] > 0.99
        assert prof[2] < -0.99

    def test_reference_error_zero_for_exact(self):
        prob = problems.get("poisson1d")
        net = network.NetworkParams((1, 1, 1), "sin", np.array([2 * np.pi, 0.0, 1.0, 0.0]))
        assert reference_error(net, prob) < 1e-12

    def test_reference_error_scale_for_zero_net(self):
        prob = problems.get("poisson1d")
        net = network.NetworkParams((1, 1, 1), "sin", np.zeros(4))
        # ||sin(2 pi x)||_L2 over (0,1) is sqrt(1/2)
        npt.assert_allclose(reference_error(net, prob), np.sqrt(0.5), atol=1e-3)

    def test_reference_error_missing_reference(self):
        prob = problems.get("gray_scott")
        net = network.NetworkParams((1, 1, 1), "sin", np.zeros(4))
        with pytest.raises(problems.NoReference):
            reference_error(net, prob)

    def test_bratu_reference_picks_nearest_branch(self):
        prob = problems.get("bratu_family", lam=1.2)
        # a constant net at u(0) of the low branch is closer to that branch
        theta = np.array([0.0, 0.0, 0.0, BRANCH_ROOTS_LAM_1_2[0]])
        net = network.NetworkParams((1, 1, 1), "sin", theta)
        err = reference_error(net, prob)
        assert err < 0.4


class TestCollocationDemo:
    """Square collocation admits fake roots; only CL3 finds the solution
    (acceptance 13 backs onto this)."""

    def setup_method(self):
        self.cases = {c.name: c for c in collocation_failure_demo()}

    def test_three_sets(self):
        assert set(self.cases) == set(COLLOCATION_SETS)

    def test_all_runs_land_on_genuine_roots(self):
        for case in self.cases.values():
            assert case.residual_norm < 1e-8

    def test_cl3_recovers_frequency(self):
        npt.assert_allclose(abs(self.cases["CL3"].w), 2 * np.pi, atol=1e-6)
        assert self.cases["CL3"].found_true_solution

    @pytest.mark.parametrize("name", ["CL1", "CL2"])
    def test_fake_solutions(self, name):
        case = self.cases[name]
        assert case.converged
        assert case.l2_error > 0.1
        assert not case.found_true_solution


class TestPatternDistance:
    def grid(self):
        return np.linspace(0.0, 1.0, 101)

    def net_for(self, fn):
        box = problems.Box((0.0,), (1.0,))
        return network.initialize(
            (1, 8, 1), "sin", network.FunctionFit(fn, seed=0), domain=box
        )

    def test_identical_fields_zero(self):
        net = self.net_for(lambda p: np.cos(np.pi * p[:, 0]))
        assert pattern_distance(net, net, self.grid()) < 1e-12

    def test_mirror_images_quotiented(self):
        left = self.net_for(lambda p: np.cos(np.pi * p[:, 0]))
        right = self.net_for(lambda p: np.cos(np.pi * (1.0 - p[:, 0])))
        assert pattern_distance(left, right, self.grid()) < 2e-2

    def test_distinct_fields_apart(self):
        flat = self.net_for(lambda p: np.full(len(p), 0.5))
        bumpy = self.net_for(lambda p: 0.3 * np.cos(3 * np.pi * p[:, 0]) + 0.5)
        assert pattern_distance(flat, bumpy, self.grid()) > 0.05

    def test_gray_scott_guess_lookup(self):
        a_fn, s_fn = gray_scott_guess("IG1")
        pts = np.array([[0.0], [0.5]])
        npt.assert_allclose(a_fn(pts), [0.8, 0.5], atol=1e-12)
        npt.assert_allclose(s_fn(pts), [0.2, 0.5], atol=1e-12)
        with pytest.raises(KeyError):
            gray_scott_guess("IG9")

    def test_2d_guess_complements(self):
        a_fn, s_fn = gray_scott_guess("IG1", dim=2)
        pts = np.random.default_rng(0).uniform(0, 1, (20, 2))
        npt.assert_allclose(a_fn(pts) + s_fn(pts), 1.0, atol=1e-12)
