"""Randomized Newton iteration on overdetermined residual systems.

Each iteration draws a uniformly random square subset of the rows, solves
that subset's Newton system, and applies the step to the full parameter
vector. A rank-deficient subset triggers fresh draws, then a truncated-SVD
least-squares step on the last subset. Stopping tests the drawn subset's
residual norm; the full-system norm is recorded alongside so a lucky-subset
stop is visible in the report.

Systems are duck-typed: anything with ``total_rows``, ``param_count``,
``rows(theta, rows)`` and ``rows_and_jacobian(theta, rows)`` can be solved,
which is how the affine test harness and the diagnostics below plug in.
"""

from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .linalg import (
    SingularMatrix,
    ZeroMatrix,
    condition_number,
    solve_least_squares,
    solve_square,
)
from .serialize import dumps_json, write_csv

__all__ = [
    "BadSize",
    "StructurallySingular",
    "TooLarge",
    "CONVERGED",
    "MAX_ITERS",
    "DIVERGED",
    "STRUCTURALLY_SINGULAR",
    "SolverConfig",
    "SubsetDraw",
    "StepMeta",
    "SolveReport",
    "AffineSystem",
    "draw_subset",
    "randomized_newton_step",
    "solve",
    "expectation_diagnostic",
    "covariance_diagnostic",
    "dump_history",
]


class BadSize(Exception):
    """Requested subset size exceeds the number of rows."""


class StructurallySingular(Exception):
    """Every retry and the least-squares fallback produced no usable step."""


class TooLarge(Exception):
    """Subset enumeration would exceed the feasibility cap."""


CONVERGED = "converged"
MAX_ITERS = "max_iters"
DIVERGED = "diverged"
STRUCTURALLY_SINGULAR = "structurally_singular"

ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class SolverConfig:
    stop_tol: float = 5e-3
    max_iters: int = 200
    eta: float = 1.0
    rank_tol: float = 1e-10
    resample_retries: int = 5
    divergence_factor: float = 1e6
    seed: int = 0
    backtracking: bool = False

    def __post_init__(self):
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class SubsetDraw:
    """Sorted distinct row indices; one uniformly drawn m-subset."""

    indices: np.ndarray

    @property
    def digest(self) -> int:
        return zlib.crc32(np.asarray(self.indices, dtype=np.int64).tobytes())


@dataclass(frozen=True)
class StepMeta:
    subset: SubsetDraw
    subset_norm: float
    condition: float
    fallback: bool
    redraws: int


@dataclass
class SolveReport:
    converged: bool
    termination: str
    iterations: int
    final_theta: np.ndarray
    # (iteration, subset residual norm, full residual norm) per iteration
    residual_history: list = field(default_factory=list)
    condition_history: list = field(default_factory=list)
    subset_log: list = field(default_factory=list)
    final_subset: list = field(default_factory=list)
    fallback_iterations: list = field(default_factory=list)
    initial_full_norm: float = 0.0
    final_full_norm: float = 0.0

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "termination": self.termination,
            "iterations": self.iterations,
            "initial_full_norm": self.initial_full_norm,
            "final_full_norm": self.final_full_norm,
            "residual_history": [
                {"iteration": it, "subset_norm": sn, "full_norm": fn}
                for it, sn, fn in self.residual_history
            ],
            "condition_history": list(self.condition_history),
            "subset_log": list(self.subset_log),
            "final_subset": list(self.final_subset),
            "fallback_iterations": list(self.fallback_iterations),
            "final_theta": [float(t) for t in self.final_theta],
        }

    def to_json(self) -> str:
        return dumps_json(self.to_dict())


def dump_history(report: SolveReport, path) -> None:
    """Per-iteration CSV: iteration, subset_norm, full_norm, condition."""
    rows = [
        [it, sn, fn, cond]
        for (it, sn, fn), cond in zip(report.residual_history, report.condition_history)
    ]
    write_csv(path, ["iteration", "subset_norm", "full_norm", "condition"], rows)


def draw_subset(n: int, m: int, rng: np.random.Generator) -> SubsetDraw:
    """Draw m distinct row indices uniformly from {0..n-1}, sorted."""
    if m > n:
        raise BadSize(f"cannot draw {m} distinct rows from {n}")
    idx = rng.choice(n, size=m, replace=False)
    idx.sort()
    return SubsetDraw(idx)


def _subset_step(system, theta, cfg: SolverConfig, rng):
    """Draw, retry on singular/non-finite, fall back to least squares.

    Returns (step, values, jacobian, meta). The step solves the drawn
    square subsystem; callers decide whether to apply it.
    """
    m = system.param_count
    n = system.total_rows
    last = None
    for attempt in range(cfg.resample_retries + 1):
        sub = draw_subset(n, m, rng)
        values, jac = system.rows_and_jacobian(theta, sub.indices)
        cond = condition_number(jac)
        last = (sub, values, jac, cond)
        # full numerical rank means sigma_min above rank_tol * sigma_max;
        # beyond that the square solve amplifies noise into huge steps, so
        # the draw counts as singular and gets the same retry treatment
        if not np.isfinite(cond) or cond > 1.0 / cfg.rank_tol:
            continue
        try:
            step = solve_square(jac, values)
        except SingularMatrix:
            continue
        if not np.all(np.isfinite(step)):
            continue
        meta = StepMeta(
            subset=sub,
            subset_norm=float(np.linalg.norm(values)),
            condition=cond,
            fallback=False,
            redraws=attempt,
        )
        return step, values, jac, meta
    sub, values, jac, cond = last
    try:
        step = solve_least_squares(jac, values, trunc_tol=cfg.rank_tol)
    except ZeroMatrix:
        raise StructurallySingular(
            "all subset draws were rank deficient and the fallback basis is empty"
        )
    if not np.all(np.isfinite(step)):
        raise StructurallySingular("least-squares fallback produced non-finite step")
    meta = StepMeta(
        subset=sub,
        subset_norm=float(np.linalg.norm(values)),
        condition=cond,
        fallback=True,
        redraws=cfg.resample_retries,
    )
    return step, values, jac, meta


def _apply(system, theta, step, values, meta, cfg: SolverConfig):
    if not cfg.backtracking:
        return theta - cfg.eta * step
    base = np.linalg.norm(values)
    scale = cfg.eta
    for _ in range(10):
        trial = theta - scale * step
        if np.linalg.norm(system.rows(trial, meta.subset.indices)) < base:
            return trial
        scale *= 0.5
    return theta - scale * step


def randomized_newton_step(system, theta, cfg: SolverConfig, rng):
    """One draw-solve-apply cycle. Returns (new_theta, StepMeta)."""
    theta = np.asarray(theta, dtype=float)
    step, values, _, meta = _subset_step(system, theta, cfg, rng)
    return _apply(system, theta, step, values, meta, cfg), meta


def solve(system, init, cfg: SolverConfig) -> SolveReport:
    """Iterate randomized Newton until subset convergence, cap, or blowup.

    ``init`` is a network (or stack) whose theta seeds the iteration, or a
    bare parameter vector. The report's history has one entry per iteration
    in the order (iteration index, subset norm, full norm); a convergent
    final iteration leaves theta untouched.
    """
    theta = np.asarray(getattr(init, "theta", init), dtype=float)
    if theta.shape != (system.param_count,):
        raise ValueError(
            f"initial theta has shape {theta.shape}, system needs ({system.param_count},)"
        )
    rng = np.random.default_rng(cfg.seed)
    initial_full = float(np.linalg.norm(system.rows(theta)))
    report = SolveReport(
        converged=False,
        termination=MAX_ITERS,
        iterations=0,
        final_theta=theta,
        initial_full_norm=initial_full,
    )

    for k in range(cfg.max_iters):
        try:
            step, values, _, meta = _subset_step(system, theta, cfg, rng)
        except StructurallySingular:
            report.termination = STRUCTURALLY_SINGULAR
            break
        full_norm = float(np.linalg.norm(system.rows(theta)))
        report.residual_history.append((k, meta.subset_norm, full_norm))
        report.condition_history.append(meta.condition)
        report.subset_log.append(meta.subset.digest)
        report.iterations = k + 1
        if meta.fallback:
            report.fallback_iterations.append(k)
        if meta.subset_norm < cfg.stop_tol:
            report.converged = True
            report.termination = CONVERGED
            report.final_subset = [int(i) for i in meta.subset.indices]
            report.final_full_norm = full_norm
            break
        if full_norm > cfg.divergence_factor * max(initial_full, 1e-300):
            report.termination = DIVERGED
            report.final_full_norm = full_norm
            break
        theta = _apply(system, theta, step, values, meta, cfg)

    report.final_theta = theta
    if not report.converged and report.termination == MAX_ITERS:
        report.final_full_norm = float(np.linalg.norm(system.rows(theta)))
    return report


# -- affine test harness -------------------------------------------------------------


class AffineSystem:
    """F(theta) = A theta - b, exposing the same surface the solver drives.

    Small enough for exhaustive subset enumeration, which is what the
    expectation and covariance diagnostics below are for.
    """

    def __init__(self, A, b):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        if self.A.ndim != 2 or self.b.shape != (self.A.shape[0],):
            raise ValueError("A must be (n, m) with b of length n")
        self.total_rows, self.param_count = self.A.shape

    def rows(self, theta, rows=None):
        r = self.A @ np.asarray(theta, dtype=float) - self.b
        return r if rows is None else r[np.asarray(rows, dtype=int)]

    def rows_and_jacobian(self, theta, rows=None):
        if rows is None:
            return self.rows(theta), self.A.copy()
        idx = np.asarray(rows, dtype=int)
        return self.rows(theta, idx), self.A[idx]


# -- exhaustive subset diagnostics ------------------------------------------------------


class ExpectationReport(NamedTuple):
    lhs: np.ndarray
    rhs: np.ndarray
    discrepancy: float


def _enumerate_steps(system, theta, rank_tol=1e-10):
    """Newton step of every nonsingular m-subset, plus the pseudoinverse step."""
    n, m = system.total_rows, system.param_count
    if math.comb(n, m) > ENUMERATION_CAP:
        raise TooLarge(f"C({n},{m}) subsets exceed the {ENUMERATION_CAP} enumeration cap")
    theta = np.asarray(theta, dtype=float)
    values, jac = system.rows_and_jacobian(theta, np.arange(n))
    steps = []
    singular = 0
    for combo in itertools.combinations(range(n), m):
        idx = np.asarray(combo, dtype=int)
        try:
            s = solve_square(jac[idx], values[idx])
        except SingularMatrix:
            singular += 1
            continue
        if not np.all(np.isfinite(s)):
            singular += 1
            continue
        steps.append(s)
    try:
        pinv_step = solve_least_squares(jac, values, trunc_tol=rank_tol)
    except ZeroMatrix:
        pinv_step = np.zeros(m)
    return steps, singular, pinv_step


def expectation_diagnostic(system, theta) -> ExpectationReport:
    """Compare the pseudoinverse step with the exact subset-step average.

    The identity lhs = rhs is an assumption of the method's analysis, not a
    theorem; this reports the gap, it never asserts it. Subsets with
    singular Jacobians are excluded from the average.
    """
    steps, _, pinv_step = _enumerate_steps(system, theta)
    if not steps:
        raise StructurallySingular("every subset Jacobian was singular")
    rhs = np.mean(steps, axis=0)
    lhs_norm = np.linalg.norm(pinv_step)
    if lhs_norm < 1e-300:
        discrepancy = 0.0 if np.linalg.norm(rhs) < 1e-12 else np.inf
    else:
        discrepancy = float(np.linalg.norm(pinv_step - rhs) / lhs_norm)
    return ExpectationReport(pinv_step, rhs, discrepancy)


def covariance_diagnostic(system, theta, eta: float = 1.0) -> np.ndarray:
    """Step covariance: eta * (average of subset-step outer products
    minus the outer product of the pseudoinverse step).

    Positive semidefinite exactly where the expectation identity holds;
    elsewhere negative eigenvalues measure the violation.
    """
    steps, _, pinv_step = _enumerate_steps(system, theta)
    if not steps:
        raise StructurallySingular("every subset Jacobian was singular")
    m = system.param_count
    outer = np.zeros((m, m))
    for s in steps:
        outer += np.outer(s, s)
    outer /= len(steps)
    return eta * (outer - np.outer(pinv_step, pinv_step))
