"""Convergence-order estimation and result-table aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "InsufficientTail",
    "ConvergenceEstimate",
    "estimate_order",
    "aggregate_table",
    "TABLE_HEADER",
]

FLOOR = 1e-9

TABLE_HEADER = ["sample_points", "nodes", "variables", "iterations", "error"]


class InsufficientTail(Exception):
    """Too few strictly decreasing residuals above the floating-point floor."""


@dataclass(frozen=True)
class ConvergenceEstimate:
    order: float
    window: tuple
    r_squared: float


def _norms(residual_history) -> np.ndarray:
    vals = []
    for entry in residual_history:
        if np.isscalar(entry):
            vals.append(float(entry))
        else:
            # (iteration, subset norm, full norm) triples from a SolveReport:
            # the full-system norm is the one that contracts quadratically
            vals.append(float(entry[-1]))
    return np.asarray(vals)


def estimate_order(residual_history, floor: float = FLOOR) -> ConvergenceEstimate:
    """Fit log r_{k+1} against log r_k over the final decreasing stretch.

    Accepts a SolveReport residual_history or a plain norm sequence. Values
    at or below ``floor`` end the usable window: a converged Newton tail
    bottoms out at the assembly roundoff level, which for O(1)-scale rows
    sits orders of magnitude above machine epsilon, so those entries measure
    rounding rather than contraction. The window is the longest strictly
    decreasing suffix of what remains and must hold at least 3 values.
    The fitted slope is the empirical convergence order. With exactly two
    ratio pairs the fit is exactly determined and r_squared is 1 by
    construction; a quadratic burst that deep is still unmistakable.
    """
    rs = _norms(residual_history)
    floor_hits = np.nonzero(rs <= floor)[0]
    end = int(floor_hits[0]) if floor_hits.size else len(rs)
    rs = rs[:end]
    start = end
    while start > 0 and (start == end or rs[start - 1] > rs[start]):
        start -= 1
    window = rs[start:end]
    if len(window) < 3:
        raise InsufficientTail(
            f"{len(window)} decreasing residuals above floor, need at least 3"
        )
    logs = np.log(window)
    x, y = logs[:-1], logs[1:]
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ConvergenceEstimate(float(slope), (start, end - 1), r_squared)


def aggregate_table(runs) -> list:
    """Rows (sample points, nodes, |theta|, iterations, error) sorted by
    (points, nodes). Each run is a mapping with those five keys."""
    rows = [
        [
            int(r["sample_points"]),
            int(r["nodes"]),
            int(r["variables"]),
            int(r["iterations"]),
            float(r["error"]),
        ]
        for r in runs
    ]
    rows.sort(key=lambda row: (row[0], row[1]))
    return rows
