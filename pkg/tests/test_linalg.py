import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from randnewton import linalg
from randnewton.linalg import SingularMatrix, ZeroMatrix


def random_system(n, seed, cond=None):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    if cond is not None:
        u, _, vt = np.linalg.svd(a)
        s = np.logspace(0, -np.log10(cond), n)
        a = u @ np.diag(s) @ vt
    x = rng.normal(size=n)
    return a, x


class TestSolveSquare:
    @pytest.mark.parametrize("n", [1, 2, 5, 12])
    def test_recovers_known_solution(self, n):
        a, x = random_system(n, seed=n)
        got = linalg.solve_square(a, a @ x)
        npt.assert_allclose(got, x, rtol=1e-9, atol=1e-12)

    def test_identity(self):
        b = np.array([3.0, -1.0, 0.5])
        npt.assert_array_equal(linalg.solve_square(np.eye(3), b), b)

    def test_singular_raises(self):
        a = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(SingularMatrix):
            linalg.solve_square(a, np.ones(2))

    def test_zero_matrix_raises(self):
        with pytest.raises(SingularMatrix):
            linalg.solve_square(np.zeros((3, 3)), np.ones(3))

    def test_rejects_nonfinite(self):
        a = np.eye(2)
        a[0, 1] = np.nan
        with pytest.raises(ValueError):
            linalg.solve_square(a, np.ones(2))

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            linalg.solve_square(np.ones((3, 2)), np.ones(3))

    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=30, deadline=None)
    def test_residual_small_property(self, n, seed):
        a, x = random_system(n, seed)
        b = a @ x
        got = linalg.solve_square(a, b)
        assert np.linalg.norm(a @ got - b) <= 1e-8 * max(1.0, np.linalg.norm(b))


class TestLeastSquares:
    def test_overdetermined_consistent(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(9, 4))
        x = rng.normal(size=4)
        got = linalg.solve_least_squares(a, a @ x)
        npt.assert_allclose(got, x, rtol=1e-9, atol=1e-12)

    def test_matches_numpy_lstsq(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(10, 3))
        b = rng.normal(size=10)
        got = linalg.solve_least_squares(a, b)
        ref = np.linalg.lstsq(a, b, rcond=None)[0]
        npt.assert_allclose(got, ref, rtol=1e-8, atol=1e-10)

    def test_rank_deficient_truncates(self):
        # two identical columns: truncation picks the minimum-norm combination
        a = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        b = np.array([2.0, 4.0, 6.0])
        got = linalg.solve_least_squares(a, b, trunc_tol=1e-10)
        npt.assert_allclose(got, [1.0, 1.0], rtol=1e-9)

    def test_trunc_tol_drops_small_modes(self):
        u = np.eye(3)
        s = np.array([1.0, 1e-3, 1e-12])
        a = u @ np.diag(s)
        b = np.array([1.0, 1.0, 1.0])
        tight = linalg.solve_least_squares(a, b, trunc_tol=1e-6)
        assert abs(tight[2]) == 0.0
        assert abs(tight[1] - 1e3) < 1e-6

    def test_zero_matrix_raises(self):
        with pytest.raises(ZeroMatrix):
            linalg.solve_least_squares(np.zeros((4, 2)), np.ones(4))


class TestRankAndCondition:
    def test_full_rank(self):
        a, _ = random_system(6, seed=3)
        assert linalg.numerical_rank(a) == 6

    @pytest.mark.parametrize("rank", [1, 2, 3])
    def test_constructed_rank(self, rank):
        rng = np.random.default_rng(rank)
        a = rng.normal(size=(7, rank)) @ rng.normal(size=(rank, 5))
        assert linalg.numerical_rank(a) == rank

    def test_condition_number_diagonal(self):
        a = np.diag([10.0, 2.0, 0.5])
        npt.assert_allclose(linalg.condition_number(a), 20.0)

    def test_condition_number_singular_is_inf(self):
        a = np.diag([1.0, 0.0])
        assert np.isinf(linalg.condition_number(a))

    def test_condition_orthogonal_is_one(self):
        rng = np.random.default_rng(5)
        q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        npt.assert_allclose(linalg.condition_number(q), 1.0, rtol=1e-10)
