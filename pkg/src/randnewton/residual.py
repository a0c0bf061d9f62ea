"""Collocation sampling plans and residual-row evaluation.

A differential problem discretizes into one tall residual vector: one row
per interior sample per unknown component (the operator residual) plus one
row per boundary entry (value or normal-derivative mismatch). Interior rows
come first, component-major; boundary rows follow in plan order. The row
count must exceed the parameter count, otherwise interpolation artifacts
can masquerade as solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import autodiff
from .serialize import write_csv

__all__ = [
    "Underdetermined",
    "Box",
    "Ball",
    "Dirichlet",
    "Neumann",
    "UniformGrid",
    "RandomUniform",
    "RandomBall",
    "SamplePlan",
    "ProblemSpec",
    "ResidualSystem",
    "build_plan",
    "eval_rows",
    "eval_jacobian_rows",
    "eval_rows_and_jacobian",
    "dump_plan",
]


class Underdetermined(Exception):
    """Fewer residual rows than parameters; the discretization is meaningless."""


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class Ball:
    """Unit ball centered at the origin."""

    dim: int

    @property
    def lo(self):
        return tuple(-1.0 for _ in range(self.dim))

    @property
    def hi(self):
        return tuple(1.0 for _ in range(self.dim))


@dataclass(frozen=True)
class Dirichlet:
    """Row U_c(x) - target(x) for one component at one boundary point."""

    target: Callable[[np.ndarray], np.ndarray]
    component: int = 0


@dataclass(frozen=True)
class Neumann:
    """Row dU_c/d(direction)(x) - target(x) for one component."""

    direction: tuple[float, ...]
    target: Callable[[np.ndarray], np.ndarray]
    component: int = 0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        norm = np.linalg.norm(d)
        if norm == 0.0:
            raise ValueError("Neumann direction must be nonzero")
        object.__setattr__(self, "direction", tuple(d / norm))


BoundaryKind = Dirichlet | Neumann


@dataclass(frozen=True)
class UniformGrid:
    """Axis-aligned grid with approximately this step, endpoints included."""

    step: float


@dataclass(frozen=True)
class RandomUniform:
    """count interior points uniform in a box, plus boundary points on faces."""

    count: int


@dataclass(frozen=True)
class RandomBall:
    """count interior points uniform in the ball, plus points on the sphere."""

    count: int


Provenance = UniformGrid | RandomUniform | RandomBall


@dataclass(frozen=True)
class SamplePlan:
    interior: np.ndarray
    boundary: tuple[tuple[np.ndarray, BoundaryKind], ...]
    seed: int
    provenance: Provenance

    @property
    def interior_count(self) -> int:
        return len(self.interior)

    @property
    def boundary_count(self) -> int:
        return len(self.boundary)


@dataclass(frozen=True)
class ProblemSpec:
    """Everything the residual assembly needs to know about one problem.

    ``interior_residual(u, grad, lap, x, param)`` receives per-component
    lists of generic scalars (arrays over a point batch, or parameter-tangent
    values during Jacobian assembly) and returns one residual per component.
    ``boundary_at(x, component)`` describes the row at a boundary point.
    """

    name: str
    spatial_dim: int
    unknown_components: int
    domain: Box | Ball
    interior_residual: Callable
    boundary_at: Callable[[np.ndarray, int], BoundaryKind]
    parameter: tuple[str, float] | None = None
    reference: object | None = None

    def parameter_value(self):
        return None if self.parameter is None else self.parameter[1]

    def with_parameter(self, value: float) -> "ProblemSpec":
        if self.parameter is None:
            raise ValueError(f"problem {self.name} has no continuation parameter")
        return replace(self, parameter=(self.parameter[0], float(value)))


# -- plan construction -----------------------------------------------------------


def _grid_axes(box: Box, step: float):
    axes = []
    for lo, hi in zip(box.lo, box.hi):
        n = max(2, int(round((hi - lo) / step)) + 1)
        axes.append(np.linspace(lo, hi, n))
    return axes


def _boundary_entries(problem: ProblemSpec, points: np.ndarray):
    entries = []
    for x in points:
        for c in range(problem.unknown_components):
            entries.append((x.copy(), problem.boundary_at(x, c)))
    return entries


def build_plan(problem: ProblemSpec, provenance: Provenance, seed: int,
               param_count: int | None = None) -> SamplePlan:
    """Sample interior and boundary points for one problem.

    Grid plans put a point on every axis node including endpoints and
    classify a node as boundary when any coordinate sits on a face (each
    geometric point appears exactly once, corners included). Random plans
    draw from a generator seeded with ``seed`` and are bit-reproducible.
    When ``param_count`` is given the plan is rejected if it cannot
    overdetermine that many parameters.
    """
    dom = problem.domain
    dim = problem.spatial_dim
    rng = np.random.default_rng(seed)

    if isinstance(provenance, UniformGrid):
        if not isinstance(dom, Box):
            raise ValueError("grid sampling needs a box domain")
        axes = _grid_axes(dom, provenance.step)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        on_face = np.zeros(len(pts), dtype=bool)
        for j, ax in enumerate(axes):
            on_face |= (pts[:, j] == ax[0]) | (pts[:, j] == ax[-1])
        interior = pts[~on_face]
        boundary_pts = pts[on_face]
    elif isinstance(provenance, RandomUniform):
        if not isinstance(dom, Box):
            raise ValueError("uniform box sampling needs a box domain")
        lo = np.asarray(dom.lo, dtype=float)
        hi = np.asarray(dom.hi, dtype=float)
        interior = lo + (hi - lo) * rng.uniform(size=(provenance.count, dim))
        n_bnd = max(10, provenance.count // 5)
        boundary_pts = np.empty((n_bnd, dim))
        faces = [(j, side) for j in range(dim) for side in (0, 1)]
        for k in range(n_bnd):
            j, side = faces[k % len(faces)]
            x = lo + (hi - lo) * rng.uniform(size=dim)
            x[j] = dom.lo[j] if side == 0 else dom.hi[j]
            boundary_pts[k] = x
    elif isinstance(provenance, RandomBall):
        if not isinstance(dom, Ball):
            raise ValueError("ball sampling needs a ball domain")
        dirs = rng.normal(size=(provenance.count, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = rng.uniform(size=(provenance.count, 1)) ** (1.0 / dim)
        interior = dirs * radii
        n_bnd = max(10, provenance.count // 5)
        sphere = rng.normal(size=(n_bnd, dim))
        sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)
        boundary_pts = sphere
    else:
        raise TypeError(f"unknown provenance {provenance!r}")

    boundary = tuple(_boundary_entries(problem, boundary_pts))
    plan = SamplePlan(np.asarray(interior, dtype=float), boundary, seed, provenance)
    if param_count is not None:
        rows = plan.interior_count * problem.unknown_components + plan.boundary_count
        if rows <= param_count:
            raise Underdetermined(
                f"{rows} rows cannot overdetermine {param_count} parameters"
            )
    return plan


def dump_plan(plan: SamplePlan, path) -> None:
    """CSV snapshot of the plan: coordinates, row kind, component."""
    dim = plan.interior.shape[1] if len(plan.interior) else len(plan.boundary[0][0])
    header = [f"x{j}" for j in range(dim)] + ["kind", "component"]
    rows = []
    for x in plan.interior:
        rows.append(list(x) + ["interior", 0])
    for x, kind in plan.boundary:
        label = "dirichlet" if isinstance(kind, Dirichlet) else "neumann"
        rows.append(list(x) + [label, kind.component])
    write_csv(path, header, rows)


# -- residual system ---------------------------------------------------------------


class ResidualSystem:
    """A problem, a plan, and network shapes bound into one row-indexed system.

    Rows 0..N*C-1 are interior (component-major: component c covers rows
    c*N..(c+1)*N-1 in plan order); rows N*C.. are boundary entries in plan
    order. Requesting the same row twice yields the same value twice.
    """

    def __init__(self, problem: ProblemSpec, plan: SamplePlan, template):
        nets = getattr(template, "networks", None) or (template,)
        if len(nets) != problem.unknown_components:
            raise ValueError(
                f"problem {problem.name} has {problem.unknown_components} components, "
                f"template provides {len(nets)}"
            )
        for n in nets:
            if n.layer_widths[0] != problem.spatial_dim:
                raise ValueError("network input width does not match the problem dimension")
            if n.layer_widths[-1] != 1:
                raise ValueError("component networks must have one output")
        self.problem = problem
        self.plan = plan
        self.template = template
        self.shapes = tuple((n.layer_widths, n.activation) for n in nets)
        sizes = [sum(wo * (wi + 1) for wi, wo in zip(w[:-1], w[1:])) for w, _ in self.shapes]
        self.offsets = tuple(int(o) for o in np.cumsum([0] + sizes)[:-1])
        self.param_count = int(sum(sizes))
        self.n_interior = plan.interior_count
        self.n_boundary = plan.boundary_count
        self.components = problem.unknown_components
        self.total_rows = self.n_interior * self.components + self.n_boundary
        if self.total_rows <= self.param_count:
            raise Underdetermined(
                f"{self.total_rows} rows cannot overdetermine {self.param_count} parameters"
            )
        # flatten boundary entries into arrays for batched evaluation
        if self.n_boundary:
            self._b_pts = np.stack([x for x, _ in plan.boundary])
            self._b_comp = np.array([k.component for _, k in plan.boundary])
            self._b_neumann = np.array([isinstance(k, Neumann) for _, k in plan.boundary])
            self._b_dir = np.zeros((self.n_boundary, problem.spatial_dim))
            self._b_target = np.empty(self.n_boundary)
            for j, (x, kind) in enumerate(plan.boundary):
                self._b_target[j] = float(np.asarray(kind.target(x[None, :])).reshape(-1)[0])
                if isinstance(kind, Neumann):
                    self._b_dir[j] = np.asarray(kind.direction, dtype=float)

    def rows(self, theta, rows=None) -> np.ndarray:
        """Method form of eval_rows; the solver drives systems through this."""
        values, _ = self._eval(theta, rows, with_jac=False)
        return values

    def rows_and_jacobian(self, theta, rows=None):
        """Values and Jacobian rows together; one assembly pass."""
        return self._eval(theta, rows, with_jac=True)

    def _check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.param_count,):
            raise ValueError(
                f"theta has shape {theta.shape}, system needs ({self.param_count},)"
            )
        return theta

    def _interior_fields(self, theta, points, with_jac):
        u, grad, lap = [], [], []
        for c, (widths, act) in enumerate(self.shapes):
            uc, gc, lc = autodiff.evaluate_fields(
                widths, act, theta, points,
                lifted=with_jac, total_width=self.param_count, offset=self.offsets[c],
            )
            u.append(uc)
            grad.append(gc)
            lap.append(lc)
        return u, grad, lap

    def _eval(self, theta, rows, with_jac):
        theta = self._check_theta(theta)
        if rows is None:
            rows = np.arange(self.total_rows)
        else:
            rows = np.asarray(rows, dtype=int)
            if rows.size and (rows.min() < 0 or rows.max() >= self.total_rows):
                raise IndexError("row index out of range")
        values = np.empty(len(rows))
        jac = np.zeros((len(rows), self.param_count)) if with_jac else None

        n_int_rows = self.n_interior * self.components
        imask = rows < n_int_rows
        irows = rows[imask]
        if irows.size:
            comps = irows // self.n_interior
            pidx = irows % self.n_interior
            upts, inv = np.unique(pidx, return_inverse=True)
            X = self.plan.interior[upts]
            u, grad, lap = self._interior_fields(theta, X, with_jac)
            xs = [X[:, j] for j in range(X.shape[1])]
            res = self.problem.interior_residual(
                u, grad, lap, xs, self.problem.parameter_value()
            )
            out_pos = np.nonzero(imask)[0]
            for c in range(self.components):
                sel = comps == c
                if not np.any(sel):
                    continue
                rc = res[c]
                if isinstance(rc, autodiff.Jet):
                    vals = np.asarray(rc.v, dtype=float)
                    if with_jac:
                        dense = autodiff.dense_gradient(rc)
                        jac[out_pos[sel]] = dense[inv[sel]]
                else:
                    vals = np.broadcast_to(np.asarray(rc, dtype=float), (len(X),))
                values[out_pos[sel]] = np.broadcast_to(vals, (len(X),))[inv[sel]]

        bmask = ~imask
        brows = rows[bmask] - n_int_rows
        if brows.size:
            out_pos = np.nonzero(bmask)[0]
            for c in range(self.components):
                widths, act = self.shapes[c]
                off = self.offsets[c]
                for neumann in (False, True):
                    sel = (self._b_comp[brows] == c) & (self._b_neumann[brows] == neumann)
                    if not np.any(sel):
                        continue
                    idx = brows[sel]
                    pts = self._b_pts[idx]
                    if neumann:
                        out = autodiff.directional_derivative(
                            widths, act, theta, pts, self._b_dir[idx],
                            lifted=with_jac, total_width=self.param_count, offset=off,
                        )
                    else:
                        out = autodiff.evaluate_values(
                            widths, act, theta, pts,
                            lifted=with_jac, total_width=self.param_count, offset=off,
                        )
                    row = out - self._b_target[idx]
                    if isinstance(row, autodiff.Jet):
                        values[out_pos[sel]] = np.asarray(row.v, dtype=float)
                        if with_jac:
                            jac[out_pos[sel]] = autodiff.dense_gradient(row)
                    else:
                        values[out_pos[sel]] = np.asarray(row, dtype=float)
        return values, jac


def eval_rows(sys: ResidualSystem, theta, rows=None) -> np.ndarray:
    """Residual values for the requested rows (all rows when omitted)."""
    values, _ = sys._eval(theta, rows, with_jac=False)
    return values


def eval_jacobian_rows(sys: ResidualSystem, theta, rows=None) -> np.ndarray:
    """Jacobian rows d(residual)/d(theta) for the requested rows."""
    _, jac = sys._eval(theta, rows, with_jac=True)
    return jac


def eval_rows_and_jacobian(sys: ResidualSystem, theta, rows=None):
    """Values and Jacobian rows in one pass (what the solver iterates on)."""
    return sys._eval(theta, rows, with_jac=True)
