import numpy as np
import numpy.testing as npt
import pytest

from randnewton import metrics
from randnewton.metrics import InsufficientTail


def quadratic_tail(r0=0.3, steps=6):
    """Residuals contracting as r_{k+1} = r_k^2."""
    out = [r0]
    for _ in range(steps):
        out.append(out[-1] ** 2)
    return out


class TestEstimateOrder:
    def test_quadratic_sequence(self):
        est = metrics.estimate_order(quadratic_tail())
        npt.assert_allclose(est.order, 2.0, atol=1e-8)
        assert est.r_squared > 0.999

    def test_linear_sequence(self):
        rs = [0.5 * 0.3**k for k in range(8)]
        est = metrics.estimate_order(rs)
        npt.assert_allclose(est.order, 1.0, atol=1e-8)

    def test_floor_cuts_roundoff_plateau(self):
        rs = quadratic_tail(0.3, 5) + [3e-10, 5e-10, 2e-10, 4e-10]
        est = metrics.estimate_order(rs, floor=1e-9)
        # plateau entries sit at or below the floor and must not pollute the fit
        npt.assert_allclose(est.order, 2.0, atol=1e-8)

    def test_window_is_decreasing_suffix(self):
        # the rise 2.0 -> 5.0 breaks the decreasing run, so the window
        # starts at the 5.0 entry
        rs = [2.0, 5.0, 1.0, 0.5, 0.25, 0.0625]
        est = metrics.estimate_order(rs)
        assert est.window == (1, 5)

    def test_accepts_history_triples(self):
        triples = [(k, 0.1, r) for k, r in enumerate(quadratic_tail())]
        est = metrics.estimate_order(triples)
        npt.assert_allclose(est.order, 2.0, atol=1e-8)

    def test_short_tail_raises(self):
        with pytest.raises(InsufficientTail):
            metrics.estimate_order([0.5, 0.1])

    def test_increasing_history_raises(self):
        with pytest.raises(InsufficientTail):
            metrics.estimate_order([0.1, 0.2, 0.4, 0.8])

    def test_all_below_floor_raises(self):
        with pytest.raises(InsufficientTail):
            metrics.estimate_order([1e-12, 1e-13, 1e-14])


class TestAggregateTable:
    def test_sorted_by_points_then_nodes(self):
        runs = [
            {"sample_points": 201, "nodes": 5, "variables": 16, "iterations": 9, "error": 1e-5},
            {"sample_points": 101, "nodes": 10, "variables": 31, "iterations": 7, "error": 1e-6},
            {"sample_points": 101, "nodes": 5, "variables": 16, "iterations": 11, "error": 2e-5},
        ]
        table = metrics.aggregate_table(runs)
        assert [row[:2] for row in table] == [[101, 5], [101, 10], [201, 5]]

    def test_header_shape(self):
        assert metrics.TABLE_HEADER == [
            "sample_points",
            "nodes",
            "variables",
            "iterations",
            "error",
        ]
