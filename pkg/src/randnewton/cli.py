"""Batch driver: read a TOML config, run an experiment, emit artifacts.

Subcommands: solve (single run, or a sweep when the config has a [sweep]
table), track (parameter schedules), multistart (repeated solves varying
only the subset-draw seed, clustered by pattern distance), demo-collocation,
diagnose (subset-step expectation/covariance on a small affine system), and
reference (sample the analytic reference).

Every artifact except run.log is byte-deterministic for a fixed config and
seed; run.log carries the timestamps. Exit status: 0 converged, 2 ran but
did not converge, 1 bad config or usage.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import autodiff, continuation, metrics, network, problems, residual, solver
from .serialize import dumps_json, write_csv

__all__ = ["ConfigError", "main"]

BUNDLED_DIR = Path(__file__).parent / "configs"


class ConfigError(Exception):
    pass


# -- config parsing ----------------------------------------------------------------


def _load_config(path) -> dict:
    p = Path(path)
    if not p.exists() and not p.is_absolute():
        bundled = BUNDLED_DIR / p.name
        if bundled.exists():
            p = bundled
    if not p.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}")


def _section(cfg: dict, name: str, required: bool = True) -> dict:
    sec = cfg.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing [{name}] section")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


def _field(sec: dict, name: str, key: str, default=None, required: bool = False):
    if key not in sec:
        if required:
            raise ConfigError(f"[{name}] is missing required key {key!r}")
        return default
    return sec[key]


def _check_keys(sec: dict, name: str, allowed: set):
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"[{name}] has unknown keys {sorted(unknown)}")


PROBLEM_KEYS = {"name", "lambda", "p", "epsilon", "n", "dim"}
PROBLEM_KWARG = {"lambda": "lam", "p": "p", "epsilon": "epsilon", "n": "n", "dim": "dim"}


def build_problem(cfg: dict) -> residual.ProblemSpec:
    sec = _section(cfg, "problem")
    _check_keys(sec, "problem", PROBLEM_KEYS)
    name = _field(sec, "problem", "name", required=True)
    kwargs = {PROBLEM_KWARG[k]: sec[k] for k in sec if k != "name"}
    try:
        return problems.get(name, **kwargs)
    except KeyError as exc:
        raise ConfigError(str(exc))
    except TypeError:
        raise ConfigError(f"problem {name!r} does not accept {sorted(kwargs)}")


def build_network_shape(cfg: dict):
    sec = _section(cfg, "network")
    _check_keys(sec, "network", {"widths", "activation"})
    widths = tuple(int(w) for w in _field(sec, "network", "widths", required=True))
    activation = _field(sec, "network", "activation", default="sin")
    if len(widths) < 2:
        raise ConfigError("[network] widths needs input and output entries")
    if activation not in autodiff.ACTIVATIONS:
        raise ConfigError(
            f"[network] activation {activation!r} not in {sorted(autodiff.ACTIVATIONS)}"
        )
    return widths, activation


def build_provenance(cfg: dict):
    sec = _section(cfg, "sampling")
    _check_keys(sec, "sampling", {"kind", "step", "count", "seed"})
    kind = _field(sec, "sampling", "kind", required=True)
    seed = int(_field(sec, "sampling", "seed", default=0))
    if kind == "grid":
        return residual.UniformGrid(float(_field(sec, "sampling", "step", required=True))), seed
    if kind == "uniform":
        return residual.RandomUniform(int(_field(sec, "sampling", "count", required=True))), seed
    if kind == "ball":
        return residual.RandomBall(int(_field(sec, "sampling", "count", required=True))), seed
    raise ConfigError(f"[sampling] kind {kind!r} not one of grid/uniform/ball")


SOLVER_KEYS = {
    "stop_tol", "max_iters", "eta", "rank_tol", "resample_retries",
    "divergence_factor", "seed", "backtracking",
}


def build_solver_config(cfg: dict, seed_override=None) -> solver.SolverConfig:
    sec = _section(cfg, "solver", required=False)
    _check_keys(sec, "solver", SOLVER_KEYS)
    kwargs = {k: sec[k] for k in sec}
    if seed_override is not None:
        kwargs["seed"] = int(seed_override)
    elif "seed" not in kwargs:
        raise ConfigError("[solver] seed is required (or pass --seed)")
    try:
        return solver.SolverConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[solver]: {exc}")


def _component_count(problem: residual.ProblemSpec) -> int:
    return problem.unknown_components


def build_init(cfg: dict, problem, widths, activation):
    """Initial network (or stack for two-component problems)."""
    sec = _section(cfg, "init")
    _check_keys(sec, "init", {"kind", "seed", "stddev", "mean", "theta", "guess",
                              "points", "iters", "weight_stddev", "bias_stddev"})
    kind = _field(sec, "init", "kind", default="random")
    comps = _component_count(problem)
    count = network.param_count(widths)

    if kind == "explicit":
        theta = np.asarray(_field(sec, "init", "theta", required=True), dtype=float)
        if theta.shape != (count * comps,):
            raise ConfigError(
                f"[init] theta has {theta.size} entries, need {count * comps}"
            )
        nets = [
            network.NetworkParams(widths, activation, theta[i * count:(i + 1) * count])
            for i in range(comps)
        ]
    elif kind == "random":
        seed = int(_field(sec, "init", "seed", default=0))
        stddev = float(_field(sec, "init", "stddev", default=1.0))
        mean = float(_field(sec, "init", "mean", default=0.0))
        nets = []
        for i in range(comps):
            rng = np.random.default_rng([seed, i])
            nets.append(
                network.NetworkParams(widths, activation, rng.normal(mean, stddev, size=count))
            )
    elif kind == "frequency":
        seed = int(_field(sec, "init", "seed", default=0))
        wsig = _field(sec, "init", "weight_stddev", default=None)
        bsig = float(_field(sec, "init", "bias_stddev", default=np.pi))
        nets = []
        for i in range(comps):
            spec = network.FrequencyScaled(
                weight_stddev=None if wsig is None else float(wsig),
                bias_stddev=bsig,
                seed=int(np.random.SeedSequence((seed, i)).generate_state(1)[0]),
            )
            nets.append(network.initialize(widths, activation, spec, domain=problem.domain))
    elif kind == "fit":
        if problem.name != "gray_scott":
            raise ConfigError("[init] kind 'fit' is wired for gray_scott guesses")
        guess = _field(sec, "init", "guess", default="IG1")
        seed = int(_field(sec, "init", "seed", default=0))
        pts = int(_field(sec, "init", "points", default=200))
        iters = int(_field(sec, "init", "iters", default=60))
        try:
            targets = problems.gray_scott_guess(guess, dim=problem.spatial_dim)
        except KeyError as exc:
            raise ConfigError(str(exc))
        nets = [
            network.initialize(
                widths, activation,
                network.FunctionFit(t, points=pts, iters=iters, seed=seed + i),
                domain=problem.domain,
            )
            for i, t in enumerate(targets)
        ]
    else:
        raise ConfigError(f"[init] kind {kind!r} not one of random/frequency/explicit/fit")

    return nets[0] if comps == 1 else network.NetworkStack(tuple(nets))


# -- artifact emission -----------------------------------------------------------


class RunLog:
    def __init__(self, path, quiet: bool):
        self.path = Path(path)
        self.quiet = quiet
        self.lines = []

    def say(self, msg: str):
        stamp = time.strftime("%Y-%m-%d %H:%M:%S")
        self.lines.append(f"{stamp} {msg}")
        if not self.quiet:
            print(msg)

    def flush(self):
        self.path.write_text("\n".join(self.lines) + "\n")


def _solution_grid(problem):
    dom = problem.domain
    if isinstance(dom, residual.Ball):
        n = dom.dim
        rs = np.linspace(0.0, 1.0, 1001)
        pts = np.zeros((len(rs), n))
        pts[:, 0] = rs
        return pts
    if problem.spatial_dim == 1:
        return np.linspace(dom.lo[0], dom.hi[0], 1001)[:, None]
    xs = np.linspace(dom.lo[0], dom.hi[0], 101)
    ys = np.linspace(dom.lo[1], dom.hi[1], 101)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def emit_solution(path, problem, net):
    pts = _solution_grid(problem)
    nets = getattr(net, "networks", None) or (net,)
    cols = [
        np.asarray(autodiff.evaluate_values(n.layer_widths, n.activation, n.theta, pts))
        for n in nets
    ]
    header = [f"x{j}" for j in range(pts.shape[1])] + [f"u{c}" for c in range(len(cols))]
    rows = [list(pts[i]) + [col[i] for col in cols] for i in range(len(pts))]
    write_csv(path, header, rows)


def _write_json(path, doc: dict):
    Path(path).write_text(dumps_json(doc))


def _try_reference_error(problem, net):
    try:
        return problems.reference_error(net, problem)
    except problems.NoReference:
        return None


def _as_net(problem, widths, activation, theta):
    comps = _component_count(problem)
    count = network.param_count(widths)
    if comps == 1:
        return network.NetworkParams(widths, activation, theta)
    nets = tuple(
        network.NetworkParams(widths, activation, theta[i * count:(i + 1) * count])
        for i in range(comps)
    )
    return network.NetworkStack(nets)


# -- subcommands -------------------------------------------------------------------


def _prepare(args):
    cfg = _load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def cmd_solve(args) -> int:
    cfg, out = _prepare(args)
    log = RunLog(out / "run.log", args.quiet)
    if "sweep" in cfg:
        return _run_sweep(cfg, out, log, args)
    problem = build_problem(cfg)
    widths, activation = build_network_shape(cfg)
    provenance, plan_seed = build_provenance(cfg)
    scfg = build_solver_config(cfg, args.seed)
    init = build_init(cfg, problem, widths, activation)
    count = network.param_count(widths) * _component_count(problem)
    try:
        plan = residual.build_plan(problem, provenance, plan_seed, param_count=count)
    except residual.Underdetermined as exc:
        raise ConfigError(f"sampling too sparse: {exc}")
    system = residual.ResidualSystem(problem, plan, init)
    log.say(f"solve {problem.name}: {system.total_rows} rows, {count} parameters")
    report = solver.solve(system, init, scfg)
    net = _as_net(problem, widths, activation, report.final_theta)
    err = _try_reference_error(problem, net)
    log.say(
        f"{report.termination} after {report.iterations} iterations, "
        f"full norm {report.final_full_norm:.3e}"
        + (f", reference error {err:.3e}" if err is not None else "")
    )
    doc = report.to_dict()
    doc["problem"] = problem.name
    doc["reference_error"] = err
    _write_json(out / "report.json", doc)
    network.save_checkpoint(net, out / "checkpoint.json")
    emit_solution(out / "solution.csv", problem, net)
    log.flush()
    return 0 if report.converged else 2


def _run_sweep(cfg: dict, out: Path, log: RunLog, args) -> int:
    problem = build_problem(cfg)
    _, activation = build_network_shape(cfg)
    sec = _section(cfg, "sweep")
    _check_keys(sec, "sweep", {"points", "nodes", "init_seed"})
    points = [int(p) for p in _field(sec, "sweep", "points", required=True)]
    nodes = _field(sec, "sweep", "nodes", required=True)
    if len(nodes) != len(points):
        raise ConfigError("[sweep] nodes must list one width set per point count")
    init_seed = int(_field(sec, "sweep", "init_seed", default=0))
    scfg = build_solver_config(cfg, args.seed)
    dom = problem.domain
    span = float(dom.hi[0] - dom.lo[0])

    runs = []
    all_converged = True
    for i, npts in enumerate(points):
        for w in nodes[i]:
            widths = (1, int(w), 1)
            count = network.param_count(widths)
            step = span / (npts - 1)
            plan = residual.build_plan(
                problem, residual.UniformGrid(step), 0, param_count=count
            )
            rng = np.random.default_rng([init_seed, npts, int(w)])
            init = network.NetworkParams(widths, activation, rng.normal(size=count))
            system = residual.ResidualSystem(problem, plan, init)
            cell_cfg = replace(
                scfg, seed=int(np.random.SeedSequence((scfg.seed, npts, int(w))).generate_state(1)[0])
            )
            report = solver.solve(system, init, cell_cfg)
            net = network.NetworkParams(widths, activation, report.final_theta)
            err = _try_reference_error(problem, net)
            log.say(
                f"points={npts} nodes={w}: {report.termination} "
                f"iters={report.iterations} error={err if err is not None else 'n/a'}"
            )
            all_converged &= report.converged
            runs.append({
                "sample_points": npts,
                "nodes": int(w),
                "variables": count,
                "iterations": report.iterations,
                "error": err if err is not None else np.nan,
                "converged": report.converged,
            })
    write_csv(out / "table.csv", metrics.TABLE_HEADER, metrics.aggregate_table(runs))
    _write_json(out / "report.json", {"problem": problem.name, "cells": runs})
    log.flush()
    return 0 if all_converged else 2


def cmd_track(args) -> int:
    cfg, out = _prepare(args)
    log = RunLog(out / "run.log", args.quiet)
    problem = build_problem(cfg)
    widths, activation = build_network_shape(cfg)
    provenance, plan_seed = build_provenance(cfg)
    scfg = build_solver_config(cfg, args.seed)
    sec = _section(cfg, "schedule")
    _check_keys(sec, "schedule", {"parameter", "values", "policy", "restart_seed",
                                  "restart_stddev"})
    parameter = _field(sec, "schedule", "parameter", required=True)
    values = [float(v) for v in _field(sec, "schedule", "values", required=True)]
    policy_name = _field(sec, "schedule", "policy", default="warm")
    if policy_name == "warm":
        policy = continuation.WarmStart()
    elif policy_name == "restart":
        policy = continuation.RandomRestart(
            seed=int(_field(sec, "schedule", "restart_seed", default=0)),
            stddev=float(_field(sec, "schedule", "restart_stddev", default=1.0)),
        )
    else:
        raise ConfigError(f"[schedule] policy {policy_name!r} not one of warm/restart")
    schedule = continuation.TrackSchedule(parameter, tuple(values), policy)

    sec_init = _section(cfg, "init")
    init_kind = _field(sec_init, "init", "kind", default="random")
    if init_kind == "random":
        base_init = network.RandomNormal(
            stddev=float(_field(sec_init, "init", "stddev", default=1.0)),
            seed=int(_field(sec_init, "init", "seed", default=0)),
        )
    elif init_kind == "frequency":
        wsig = _field(sec_init, "init", "weight_stddev", default=None)
        base_init = network.FrequencyScaled(
            weight_stddev=None if wsig is None else float(wsig),
            bias_stddev=float(_field(sec_init, "init", "bias_stddev", default=np.pi)),
            seed=int(_field(sec_init, "init", "seed", default=0)),
        )
    else:
        raise ConfigError(f"[init] kind {init_kind!r} not one of random/frequency for track")
    try:
        report = continuation.track(
            problem, schedule, widths, activation, base_init, scfg,
            provenance, plan_seed, error_fn=lambda pr, nt: _try_reference_error(pr, nt),
        )
    except (ValueError, residual.Underdetermined) as exc:
        raise ConfigError(str(exc))
    for r in report.results:
        log.say(
            f"{parameter}={r.value:g}: {r.report.termination} "
            f"iters={r.report.iterations} cond={r.final_condition:.2e}"
            + ("" if r.solution_error is None else f" err={r.solution_error:.3e}")
        )
    report.dump_csv(out / "table.csv")
    _write_json(out / "report.json", report.to_dict())
    final_theta = report.results[-1].report.final_theta
    net = network.NetworkParams(widths, activation, final_theta)
    network.save_checkpoint(net, out / "checkpoint.json")
    emit_solution(out / "solution.csv", problem, net)
    if problem.spatial_dim <= 2:
        try:
            loc = continuation.shock_location(net, problem.domain)
            log.say(f"shock location of final profile: {loc:.6f}")
        except continuation.NoShock:
            log.say("final profile has no interior sign change")
    log.flush()
    return 0 if all(r.report.converged for r in report.results) else 2


def cmd_multistart(args) -> int:
    cfg, out = _prepare(args)
    log = RunLog(out / "run.log", args.quiet)
    problem = build_problem(cfg)
    widths, activation = build_network_shape(cfg)
    provenance, plan_seed = build_provenance(cfg)
    scfg = build_solver_config(cfg, args.seed)
    sec = _section(cfg, "multistart")
    _check_keys(sec, "multistart", {"runs", "distance_threshold", "grid"})
    n_runs = int(_field(sec, "multistart", "runs", default=10))
    threshold = float(_field(sec, "multistart", "distance_threshold", default=0.05))
    grid_n = int(_field(sec, "multistart", "grid", default=201))

    init = build_init(cfg, problem, widths, activation)
    count = network.param_count(widths) * _component_count(problem)
    plan = residual.build_plan(problem, provenance, plan_seed, param_count=count)
    system = residual.ResidualSystem(problem, plan, init)
    log.say(f"multistart {problem.name}: {n_runs} runs, same init, fresh draw streams")

    dom = problem.domain
    if problem.spatial_dim == 1:
        grid = np.linspace(dom.lo[0], dom.hi[0], grid_n)[:, None]
    else:
        side = max(2, int(round(np.sqrt(grid_n))))
        axes = [np.linspace(dom.lo[j], dom.hi[j], side) for j in range(2)]
        gx, gy = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel()], axis=1)

    rows = []
    reps = []
    for k in range(n_runs):
        run_cfg = replace(
            scfg, seed=int(np.random.SeedSequence((scfg.seed, k)).generate_state(1)[0])
        )
        report = solver.solve(system, init, run_cfg)
        net = _as_net(problem, widths, activation, report.final_theta)
        cluster = -1
        if report.converged:
            for ci, (rep_net, _) in enumerate(reps):
                if problems.pattern_distance(net, rep_net, grid) <= threshold:
                    cluster = ci
                    break
            if cluster < 0:
                cluster = len(reps)
                reps.append((net, k))
                emit_solution(out / f"solution_cluster{cluster}.csv", problem, net)
        log.say(
            f"run {k}: {report.termination} iters={report.iterations} cluster="
            + (str(cluster) if cluster >= 0 else "-")
        )
        rows.append([k, run_cfg.seed, report.termination, report.iterations,
                     report.final_full_norm, cluster])
    write_csv(out / "table.csv",
              ["run", "seed", "termination", "iterations", "full_norm", "cluster"],
              rows)
    _write_json(out / "report.json", {
        "problem": problem.name,
        "runs": n_runs,
        "distance_threshold": threshold,
        "clusters": [
            {"index": ci, "representative_run": k} for ci, (_, k) in enumerate(reps)
        ],
        "distinct_patterns": len(reps),
    })
    if reps:
        emit_solution(out / "solution.csv", problem, reps[0][0])
        network.save_checkpoint(reps[0][0], out / "checkpoint.json")
    log.say(f"{len(reps)} distinct pattern(s) across {n_runs} runs")
    log.flush()
    return 0 if reps else 2


def cmd_demo_collocation(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log = RunLog(out / "run.log", args.quiet)
    cases = problems.collocation_failure_demo()
    rows = []
    for c in cases:
        verdict = "real" if c.found_true_solution else "fake"
        log.say(
            f"{c.name} points={c.points}: w={c.w:.8f} b={c.b:.6f} "
            f"iters={c.iterations} residual={c.residual_norm:.2e} "
            f"l2={c.l2_error:.4g} [{verdict}]"
        )
        rows.append([c.name, c.points[0], c.points[1], c.w, c.b, c.iterations,
                     c.residual_norm, c.l2_error, verdict])
    write_csv(out / "table.csv",
              ["set", "x1", "x2", "w", "b", "iterations", "residual", "l2_error",
               "verdict"], rows)
    _write_json(out / "report.json", {
        "cases": [
            {
                "name": c.name, "points": list(c.points), "w": c.w, "b": c.b,
                "iterations": c.iterations, "residual_norm": c.residual_norm,
                "l2_error": c.l2_error, "found_true_solution": c.found_true_solution,
            }
            for c in cases
        ]
    })
    log.flush()
    return 0


def cmd_diagnose(args) -> int:
    cfg, out = _prepare(args)
    log = RunLog(out / "run.log", args.quiet)
    sec = _section(cfg, "diagnose")
    _check_keys(sec, "diagnose", {"rows", "params", "seed", "at", "eta"})
    n = int(_field(sec, "diagnose", "rows", default=6))
    m = int(_field(sec, "diagnose", "params", default=3))
    seed = int(_field(sec, "diagnose", "seed", default=0))
    at = _field(sec, "diagnose", "at", default="zero")
    eta = float(_field(sec, "diagnose", "eta", default=1.0))
    if at not in ("zero", "lstsq"):
        raise ConfigError("[diagnose] at must be 'zero' or 'lstsq'")
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, m))
    b = rng.normal(size=n)
    system = solver.AffineSystem(a, b)
    theta = np.zeros(m) if at == "zero" else np.linalg.lstsq(a, b, rcond=None)[0]
    try:
        lhs, rhs, disc = solver.expectation_diagnostic(system, theta)
        cov = solver.covariance_diagnostic(system, theta, eta=eta)
    except solver.TooLarge as exc:
        raise ConfigError(str(exc))
    eigs = np.linalg.eigvalsh(cov)
    log.say(f"affine {n}x{m} at {at}: step-mean discrepancy {disc:.6f}")
    log.say(f"covariance eigenvalues: min {eigs.min():.3e} max {eigs.max():.3e}")
    _write_json(out / "report.json", {
        "rows": n,
        "params": m,
        "seed": seed,
        "at": at,
        "eta": eta,
        "pseudoinverse_step": [float(v) for v in lhs],
        "mean_subset_step": [float(v) for v in rhs],
        "discrepancy": disc,
        "covariance": [[float(v) for v in row] for row in cov],
        "covariance_eigenvalues": [float(v) for v in eigs],
        "symmetric": bool(np.allclose(cov, cov.T)),
    })
    log.flush()
    return 0


def cmd_reference(args) -> int:
    cfg, out = _prepare(args)
    log = RunLog(out / "run.log", args.quiet)
    problem = build_problem(cfg)
    ref = problem.reference
    if ref is None:
        raise ConfigError(f"problem {problem.name} has no reference solution")
    pts = _solution_grid(problem)
    if isinstance(ref, problems.ClosedForm):
        cols = {"u": ref.fn(pts)}
    elif isinstance(ref, problems.RadialClosedForm):
        r = np.linalg.norm(pts, axis=1)
        cols = {"u": problems.radial_reference(r, problem.spatial_dim)}
    elif isinstance(ref, problems.EntropyProfile):
        if problem.spatial_dim == 1:
            s = pts[:, 0]
        else:
            s = (pts[:, 0] + pts[:, 1]) / np.sqrt(2.0)
        cols = {"u": problems.entropy_profile(s, ref.x0)}
    elif isinstance(ref, problems.ShootingOracle):
        lam = problem.parameter_value()
        roots = problems.shooting_roots(lam, ref.p)
        if not roots:
            raise ConfigError(f"no branch exists at lambda={lam}")
        xs = pts[:, 0]
        cols = {
            f"u_branch{i}": problems._branch_profile(u0, lam, ref.p, xs)
            for i, u0 in enumerate(roots)
        }
        log.say(f"branch values at 0: {[round(u0, 6) for u0 in roots]}")
    else:
        raise ConfigError(f"unhandled reference {ref!r}")
    header = [f"x{j}" for j in range(pts.shape[1])] + list(cols)
    rows = [list(pts[i]) + [c[i] for c in cols.values()] for i in range(len(pts))]
    write_csv(out / "solution.csv", header, rows)
    log.say(f"reference for {problem.name}: {len(rows)} samples")
    log.flush()
    return 0


# -- entry point -------------------------------------------------------------------


COMMANDS = {
    "solve": cmd_solve,
    "track": cmd_track,
    "multistart": cmd_multistart,
    "demo-collocation": cmd_demo_collocation,
    "diagnose": cmd_diagnose,
    "reference": cmd_reference,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="randnewton",
        description="Randomized-subset Newton experiments on collocated differential equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "demo-collocation":
            p.add_argument("--config", required=True, help="TOML config (path or bundled name)")
        p.add_argument("--seed", type=int, default=None, help="override the solver seed")
        p.add_argument("--out", default="runs", help="output directory")
        p.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
