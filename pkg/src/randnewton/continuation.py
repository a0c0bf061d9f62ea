"""Parameter tracking: solve a problem family along a schedule of values.

Warm-start tracking feeds each converged (or last) theta into the next
value, which is how a smooth branch is followed toward a singular limit.
Random-restart re-rolls the initial guess at every value instead, which
finds whatever attractor the basin contains. The sample plan is built once
and shared across the schedule so residual rows stay comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff, network, residual, solver
from .serialize import dumps_json, write_csv

__all__ = [
    "NoShock",
    "WarmStart",
    "RandomRestart",
    "TrackSchedule",
    "TrackValueResult",
    "TrackReport",
    "track",
    "shock_location",
]

HIGH_CONDITION = 1e8


class NoShock(Exception):
    """No interior sign change in the sampled profile."""


@dataclass(frozen=True)
class WarmStart:
    pass


@dataclass(frozen=True)
class RandomRestart:
    seed: int = 0
    stddev: float = 1.0


InitPolicy = WarmStart | RandomRestart


@dataclass(frozen=True)
class TrackSchedule:
    parameter: str
    values: tuple[float, ...]
    init_policy: InitPolicy = WarmStart()

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("schedule needs at least one value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass
class TrackValueResult:
    value: float
    report: solver.SolveReport
    solution_error: float | None = None

    @property
    def final_condition(self) -> float:
        return self.report.condition_history[-1] if self.report.condition_history else np.nan

    @property
    def high_condition(self) -> bool:
        return bool(self.final_condition > HIGH_CONDITION)


@dataclass
class TrackReport:
    parameter: str
    results: list[TrackValueResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "values": [
                {
                    "value": r.value,
                    "converged": r.report.converged,
                    "termination": r.report.termination,
                    "iterations": r.report.iterations,
                    "condition": r.final_condition,
                    "high_condition": r.high_condition,
                    "solution_error": r.solution_error,
                    "final_full_norm": r.report.final_full_norm,
                }
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def dump_csv(self, path) -> None:
        header = ["value", "iterations", "condition", "termination", "solution_error"]
        rows = [
            [r.value, r.report.iterations, r.final_condition, r.report.termination,
             "" if r.solution_error is None else r.solution_error]
            for r in self.results
        ]
        write_csv(path, header, rows)


def _restart_theta(policy: RandomRestart, count: int, index: int) -> np.ndarray:
    rng = np.random.default_rng([policy.seed, index])
    return rng.normal(0.0, policy.stddev, size=count)


def _value_config(cfg: solver.SolverConfig, index: int) -> solver.SolverConfig:
    derived = np.random.SeedSequence((cfg.seed, index)).generate_state(1)[0]
    return replace(cfg, seed=int(derived))


def track(problem: residual.ProblemSpec, schedule: TrackSchedule, layer_widths,
          activation: str, base_init, cfg: solver.SolverConfig,
          provenance, plan_seed: int = 0, error_fn=None) -> TrackReport:
    """Run the solver once per schedule value and collect the outcomes.

    ``base_init`` seeds the first value (or every value under
    RandomRestart when it is the policy's job, base_init then only shapes
    the first). ``error_fn(problem, net) -> float or None`` supplies the
    per-value solution error column when a reference is known. A value
    that diverges is recorded and the schedule moves on; under WarmStart
    the next value starts from whatever theta that solve ended with.
    """
    if problem.parameter is None or problem.parameter[0] != schedule.parameter:
        raise ValueError(
            f"problem {problem.name} does not expose parameter {schedule.parameter!r}"
        )
    widths = tuple(int(w) for w in layer_widths)
    count = network.param_count(widths)
    plan = residual.build_plan(
        problem, provenance, plan_seed, param_count=count
    )
    first = network.initialize(widths, activation, base_init, domain=problem.domain)
    theta = np.asarray(first.theta, dtype=float)

    report = TrackReport(parameter=schedule.parameter)
    for k, value in enumerate(schedule.values):
        prob_k = problem.with_parameter(value)
        template = network.NetworkParams(widths, activation, np.zeros(count))
        system = residual.ResidualSystem(prob_k, plan, template)
        if k > 0 and isinstance(schedule.init_policy, RandomRestart):
            theta = _restart_theta(schedule.init_policy, count, k)
        run = solver.solve(system, theta, _value_config(cfg, k))
        net_k = network.NetworkParams(widths, activation, run.final_theta)
        err = error_fn(prob_k, net_k) if error_fn is not None else None
        report.results.append(TrackValueResult(value, run, err))
        theta = np.asarray(run.final_theta, dtype=float)
    return report


def _diag_points(domain, s):
    return np.stack([s / np.sqrt(2.0), s / np.sqrt(2.0)], axis=1)


def shock_location(net, domain, samples: int = 2001) -> float:
    """Coordinate of the most significant interior sign change of the network.

    1D nets are scanned over the box; 2D nets are scanned along the main
    diagonal and the returned coordinate is arc length along it. The scan
    trims a sliver at each end (boundary values sit at zero for these
    problems and would alias as crossings), picks the sign change with the
    biggest jump, and polishes it by bisection.
    """
    dim = net.layer_widths[0]
    if dim == 1:
        lo, hi = float(domain.lo[0]), float(domain.hi[0])
        at = lambda s: np.asarray(
            autodiff.evaluate_values(net.layer_widths, net.activation, net.theta,
                                     np.asarray(s, dtype=float).reshape(-1, 1))
        )
    elif dim == 2:
        lo = float(domain.lo[0]) * np.sqrt(2.0)
        hi = float(domain.hi[0]) * np.sqrt(2.0)
        at = lambda s: np.asarray(
            autodiff.evaluate_values(net.layer_widths, net.activation, net.theta,
                                     _diag_points(domain, np.asarray(s, dtype=float).reshape(-1)))
        )
    else:
        raise ValueError("shock scan handles 1D profiles and 2D diagonals only")

    margin = 0.02 * (hi - lo)
    xs = np.linspace(lo + margin, hi - margin, samples)
    u = at(xs)
    # sign-value change rather than a strict product test, so a sample that
    # lands exactly on the zero still registers
    s = np.sign(u)
    flips = np.nonzero(s[:-1] != s[1:])[0]
    if flips.size == 0:
        raise NoShock("no interior sign change found")
    jumps = np.abs(u[flips] - u[flips + 1])
    i = flips[np.argmax(jumps)]
    a, b = xs[i], xs[i + 1]
    fa = float(u[i])
    if fa == 0.0:
        return float(a)
    for _ in range(60):
        mid = 0.5 * (a + b)
        fm = float(at([mid])[0])
        if fm == 0.0:
            return mid
        if (fa < 0) != (fm < 0):
            b = mid
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)
