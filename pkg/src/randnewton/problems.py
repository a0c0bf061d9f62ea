"""Benchmark problem catalog, analytic references, and independent oracles.

Seven elliptic problems exercise the solver: a 1D Poisson sanity case with
a known network encoding, a two-branch nonlinear BVP whose exact solutions
come from a scalar shooting equation, viscous Burgers in 1D and 2D tracked
toward the inviscid limit, Poisson in 2D, Laplace with radial forcing on
the unit n-ball, and the steady Gray-Scott system whose multiple patterns
are the multi-solution stress test.

Ground truth never comes from the solver itself: closed forms are evaluated
directly, branch values come from quadrature plus bracketing on the
shooting equation, and branch profiles from a high-accuracy IVP integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from . import autodiff
from .residual import Ball, Box, Dirichlet, Neumann, ProblemSpec

__all__ = [
    "QuadratureFailure",
    "NoReference",
    "ClosedForm",
    "ShootingOracle",
    "EntropyProfile",
    "RadialClosedForm",
    "PROBLEMS",
    "GS_GUESSES_1D",
    "COLLOCATION_SETS",
    "catalog",
    "get",
    "shooting_roots",
    "lambda_star",
    "reference_error",
    "entropy_profile",
    "gray_scott_guess",
    "collocation_failure_demo",
    "CollocationCase",
    "pattern_distance",
]


class QuadratureFailure(Exception):
    """The shooting integral did not meet its accuracy target."""


class NoReference(Exception):
    """The problem carries no reference solution."""


# -- reference descriptors ------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    fn: Callable[[np.ndarray], np.ndarray]
    label: str


@dataclass(frozen=True)
class ShootingOracle:
    """Exact branches come from the scalar equation solved by shooting_roots."""

    p: int = 4


@dataclass(frozen=True)
class EntropyProfile:
    """Piecewise +/- sin(x) with a shock at x0; the inviscid limit profile."""

    x0: float = np.pi / 2


@dataclass(frozen=True)
class RadialClosedForm:
    """u(r; n) = (-r^3 + 3n + 4)/(3n + 3) on the unit n-ball."""


def entropy_profile(s, x0: float = np.pi / 2) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.where(s < x0, np.sin(s), -np.sin(s))


def radial_reference(r, n: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return (-(r**3) + 3 * n + 4) / (3 * n + 3.0)


# -- the catalog ----------------------------------------------------------------


def make_poisson1d() -> ProblemSpec:
    """U_xx + 4 pi^2 sin(2 pi x) = 0 on (0,1), zero boundary values."""

    def interior(u, grad, lap, x, param):
        return [lap[0] + 4 * np.pi**2 * np.sin(2 * np.pi * x[0])]

    def boundary_at(x, component):
        return Dirichlet(lambda p: np.zeros(len(p)), component)

    return ProblemSpec(
        name="poisson1d",
        spatial_dim=1,
        unknown_components=1,
        domain=Box((0.0,), (1.0,)),
        interior_residual=interior,
        boundary_at=boundary_at,
        reference=ClosedForm(lambda p: np.sin(2 * np.pi * p[:, 0]), "sin(2*pi*x)"),
    )


def make_bratu(lam: float = 1.2, p: int = 4) -> ProblemSpec:
    """U_xx + lam (1 + U^p) = 0 on (0,1), U'(0) = 0, U(1) = 0.

    Below a fold value of lam this has two solution branches; the branch
    values u(0) are roots of the shooting equation (see shooting_roots).
    """

    def interior(u, grad, lap, x, param):
        return [lap[0] + param * (1.0 + u[0] ** p)]

    def boundary_at(x, component):
        if abs(x[0]) <= 1e-12:
            return Neumann((1.0,), lambda q: np.zeros(len(q)), component)
        return Dirichlet(lambda q: np.zeros(len(q)), component)

    return ProblemSpec(
        name="bratu_family",
        spatial_dim=1,
        unknown_components=1,
        domain=Box((0.0,), (1.0,)),
        interior_residual=interior,
        boundary_at=boundary_at,
        parameter=("lambda", float(lam)),
        reference=ShootingOracle(p=p),
    )


def make_burgers1d(epsilon: float = 1.0) -> ProblemSpec:
    """-eps U_xx + U U_x = sin(x) cos(x) on (0, pi), zero boundary values."""

    def interior(u, grad, lap, x, param):
        return [u[0] * grad[0][0] - param * lap[0] - np.sin(x[0]) * np.cos(x[0])]

    def boundary_at(x, component):
        return Dirichlet(lambda q: np.zeros(len(q)), component)

    return ProblemSpec(
        name="burgers1d",
        spatial_dim=1,
        unknown_components=1,
        domain=Box((0.0,), (np.pi,)),
        interior_residual=interior,
        boundary_at=boundary_at,
        parameter=("epsilon", float(epsilon)),
        reference=EntropyProfile(),
    )


def make_poisson2d() -> ProblemSpec:
    """Laplacian U + 2 U = 0 on [0, pi]^2 with U = sin(x+y) on the edges.

    sin(x+y) solves this; so does any multiple of sin(x)sin(y) added to it
    for the interior rows alone, which is exactly what the boundary rows
    rule out.
    """

    def interior(u, grad, lap, x, param):
        return [lap[0] + 2.0 * u[0]]

    def boundary_at(x, component):
        return Dirichlet(lambda q: np.sin(q[:, 0] + q[:, 1]), component)

    return ProblemSpec(
        name="poisson2d",
        spatial_dim=2,
        unknown_components=1,
        domain=Box((0.0, 0.0), (np.pi, np.pi)),
        interior_residual=interior,
        boundary_at=boundary_at,
        reference=ClosedForm(lambda p: np.sin(p[:, 0] + p[:, 1]), "sin(x+y)"),
    )


def make_burgers2d(epsilon: float = 1.0) -> ProblemSpec:
    """Diagonal-advection Burgers on [0, pi/sqrt(2)]^2, zero boundary values.

    Restricted to the main diagonal this is the 1D problem in the rotated
    coordinate s = (x+y)/sqrt(2), so the inviscid reference is the same
    entropy profile evaluated along the diagonal.
    """
    root2 = np.sqrt(2.0)

    def interior(u, grad, lap, x, param):
        s = (x[0] + x[1]) / root2
        advect = u[0] * (grad[0][0] + grad[0][1]) / root2
        return [advect - param * lap[0] - np.sin(s) * np.cos(s)]

    def boundary_at(x, component):
        return Dirichlet(lambda q: np.zeros(len(q)), component)

    return ProblemSpec(
        name="burgers2d",
        spatial_dim=2,
        unknown_components=1,
        domain=Box((0.0, 0.0), (np.pi / root2, np.pi / root2)),
        interior_residual=interior,
        boundary_at=boundary_at,
        parameter=("epsilon", float(epsilon)),
        reference=EntropyProfile(),
    )


def make_laplace_ball(n: int = 3) -> ProblemSpec:
    """-Laplacian U = ||x|| on the unit n-ball, U = 1 on the sphere."""
    if n < 2:
        raise ValueError("ball problem needs n >= 2")

    def interior(u, grad, lap, x, param):
        r = np.sqrt(sum(xj**2 for xj in x))
        return [lap[0] + r]

    def boundary_at(x, component):
        return Dirichlet(lambda q: np.ones(len(q)), component)

    return ProblemSpec(
        name="laplace_ball",
        spatial_dim=n,
        unknown_components=1,
        domain=Ball(n),
        interior_residual=interior,
        boundary_at=boundary_at,
        reference=RadialClosedForm(),
    )


GS_DIFFUSION_A = 2.5e-4
GS_DIFFUSION_S = 5e-4
GS_FEED = 0.04
GS_DECAY = 0.065


def make_gray_scott(dim: int = 1) -> ProblemSpec:
    """Steady Gray-Scott activator/substrate system on [0,1]^dim.

    Both time derivatives set to zero; homogeneous Neumann walls (the
    cosine initial guesses all have zero slope at the walls, and no
    boundary condition is otherwise singled out).
    """
    if dim not in (1, 2):
        raise ValueError("gray_scott is built for dim 1 or 2")

    def interior(u, grad, lap, x, param):
        a, s = u
        reaction = s * a**2
        return [
            GS_DIFFUSION_A * lap[0] + reaction - (GS_DECAY + GS_FEED) * a,
            GS_DIFFUSION_S * lap[1] - reaction + GS_FEED * (1.0 - s),
        ]

    def boundary_at(x, component):
        for j in range(dim):
            if abs(x[j]) <= 1e-12 or abs(x[j] - 1.0) <= 1e-12:
                direction = tuple(1.0 if k == j else 0.0 for k in range(dim))
                return Neumann(direction, lambda q: np.zeros(len(q)), component)
        raise ValueError(f"{x} is not on the domain boundary")

    return ProblemSpec(
        name="gray_scott",
        spatial_dim=dim,
        unknown_components=2,
        domain=Box(tuple(0.0 for _ in range(dim)), tuple(1.0 for _ in range(dim))),
        interior_residual=interior,
        boundary_at=boundary_at,
    )


PROBLEMS = {
    "poisson1d": make_poisson1d,
    "bratu_family": make_bratu,
    "burgers1d": make_burgers1d,
    "poisson2d": make_poisson2d,
    "burgers2d": make_burgers2d,
    "laplace_ball": make_laplace_ball,
    "gray_scott": make_gray_scott,
}


def catalog() -> list:
    """All benchmark problems with their default settings."""
    return [make() for make in PROBLEMS.values()]


def get(name: str, **kwargs) -> ProblemSpec:
    if name not in PROBLEMS:
        raise KeyError(f"unknown problem {name!r}, have {sorted(PROBLEMS)}")
    return PROBLEMS[name](**kwargs)


# -- shooting oracle -------------------------------------------------------------

SHOOT_BRACKET = 50.0
# measured once with high-accuracy quadrature; the fold sits where the
# integral's maximum crosses sqrt(2*lam)
_PHI_ARGMAX_HINT = 0.8766424560508848


def _phi(u0: float, p: int) -> float:
    """The branch integral with lambda factored out and the endpoint
    singularity absorbed by s = u0 sin(t)^2."""
    if u0 <= 0.0:
        return 0.0

    def g(t):
        s = u0 * np.sin(t) ** 2
        poly = sum(u0**i * s ** (p - i) for i in range(p + 1)) / (p + 1)
        return 2.0 * u0 * np.sin(t) / np.sqrt(u0 * (1.0 + poly))

    val, err = integrate.quad(g, 0.0, np.pi / 2, epsabs=1e-10, epsrel=1e-10, limit=200)
    if err > 1e-8:
        raise QuadratureFailure(f"branch integral error {err:.2e} at u0={u0}")
    return val


def _phi_max(p: int):
    res = optimize.minimize_scalar(
        lambda u: -_phi(u, p),
        bounds=(1e-6, SHOOT_BRACKET),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x), float(-res.fun)


def shooting_roots(lam: float, p: int = 4) -> list:
    """Initial values u(0) of the exact two-point BVP branches.

    Solves integral(u0) = sqrt(2 * lam) for u0 in (0, 50]. Returns two
    roots below the fold, one near it (the near-double root is reported
    once, merged at gap 5e-3 or when sqrt(2 lam) is within 1e-4 of the
    integral's maximum), none above. lam = 0 is degenerate (the equation
    reduces to 0 = 0 pointwise) and returns no roots by convention.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam == 0.0:
        return []
    target = math.sqrt(2.0 * lam)
    u_max, phi_max = _phi_max(p)
    if target > phi_max + 1e-4:
        return []
    if target > phi_max - 1e-4:
        return [u_max]
    lo = optimize.brentq(lambda u: _phi(u, p) - target, 1e-9, u_max, xtol=1e-12)
    hi = optimize.brentq(lambda u: _phi(u, p) - target, u_max, SHOOT_BRACKET, xtol=1e-12)
    if hi - lo < 5e-3:
        return [0.5 * (lo + hi)]
    return [float(lo), float(hi)]


def lambda_star(p: int = 4, lo: float = 1.0, hi: float = 1.5, tol: float = 1e-4) -> float:
    """Fold value of lam, bracketed by bisection on the root count."""
    if len(shooting_roots(lo, p)) < 2 or len(shooting_roots(hi, p)) == 2:
        raise ValueError("initial bracket does not straddle the fold")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if len(shooting_roots(mid, p)) == 2:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _branch_profile(u0: float, lam: float, p: int, xs: np.ndarray) -> np.ndarray:
    def rhs(x, y):
        return [y[1], -lam * (1.0 + y[0] ** p)]

    sol = integrate.solve_ivp(
        rhs, (0.0, 1.0), [u0, 0.0], t_eval=xs, rtol=1e-10, atol=1e-12, method="DOP853"
    )
    if not sol.success:
        raise QuadratureFailure(f"branch IVP failed: {sol.message}")
    return sol.y[0]


# -- solution error against references --------------------------------------------


def _net_values(net, pts: np.ndarray) -> np.ndarray:
    nets = getattr(net, "networks", None)
    first = nets[0] if nets else net
    return np.asarray(
        autodiff.evaluate_values(first.layer_widths, first.activation, first.theta, pts)
    )


def _l2_1d(net, domain: Box, target_fn, step: float = 1e-3) -> float:
    lo, hi = float(domain.lo[0]), float(domain.hi[0])
    xs = np.arange(lo, hi + step / 2, step)
    u = _net_values(net, xs[:, None])
    diff = (u - target_fn(xs)) ** 2
    return float(np.sqrt(np.trapezoid(diff, xs)))


def _l2_2d(net, domain: Box, target_fn, step: float = 1e-2) -> float:
    xs = np.arange(domain.lo[0], domain.hi[0] + step / 2, step)
    ys = np.arange(domain.lo[1], domain.hi[1] + step / 2, step)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    u = _net_values(net, pts).reshape(len(xs), len(ys))
    diff = (u - target_fn(pts).reshape(len(xs), len(ys))) ** 2
    return float(np.sqrt(np.trapezoid(np.trapezoid(diff, ys, axis=1), xs)))


def _ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _l2_ball_mc(net, n: int, count: int = 100000, seed: int = 314159) -> float:
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(size=(count, 1)) ** (1.0 / n)
    pts = dirs * radii
    u = _net_values(net, pts)
    diff = (u - radial_reference(radii[:, 0], n)) ** 2
    return float(np.sqrt(_ball_volume(n) * diff.mean()))


def reference_error(net, problem: ProblemSpec) -> float:
    """L2 distance between the network and the problem's reference.

    Trapezoid quadrature on boxes (step 1e-3 in 1D, 1e-2 per axis in 2D),
    Monte Carlo with 1e5 fixed-seed points on balls. Multi-branch
    references report the distance to the nearest branch. Inviscid-limit
    profiles are compared directly in 1D and along the diagonal in 2D, so
    for positive viscosity the value measures distance to the limit, not
    to the unknown viscous solution.
    """
    ref = problem.reference
    if ref is None:
        raise NoReference(f"problem {problem.name} has no reference solution")
    if isinstance(ref, ClosedForm):
        if problem.spatial_dim == 1:
            return _l2_1d(net, problem.domain, lambda s: ref.fn(s[:, None]))
        return _l2_2d(net, problem.domain, ref.fn)
    if isinstance(ref, RadialClosedForm):
        return _l2_ball_mc(net, problem.spatial_dim)
    if isinstance(ref, EntropyProfile):
        if problem.spatial_dim == 1:
            return _l2_1d(net, problem.domain, lambda s: entropy_profile(s, ref.x0))
        step = 1e-3
        ss = np.arange(0.0, np.pi + step / 2, step)
        pts = np.stack([ss / np.sqrt(2.0), ss / np.sqrt(2.0)], axis=1)
        u = _net_values(net, pts)
        diff = (u - entropy_profile(ss, ref.x0)) ** 2
        return float(np.sqrt(np.trapezoid(diff, ss)))
    if isinstance(ref, ShootingOracle):
        lam = problem.parameter_value()
        roots = shooting_roots(lam, ref.p)
        if not roots:
            raise NoReference(f"no branch exists at lambda={lam}")
        step = 1e-3
        xs = np.arange(0.0, 1.0 + step / 2, step)
        u = _net_values(net, xs[:, None])
        errs = []
        for u0 in roots:
            prof = _branch_profile(u0, lam, ref.p, xs)
            errs.append(float(np.sqrt(np.trapezoid((u - prof) ** 2, xs))))
        return min(errs)
    raise NoReference(f"unhandled reference descriptor {ref!r}")


# -- Gray-Scott initial guesses (prefit targets) ------------------------------------


def _cos_pair(k: int, sign: float):
    def a_fn(p):
        return sign * 0.3 * np.cos(k * np.pi * p[:, 0]) + 0.5

    def s_fn(p):
        return -sign * 0.3 * np.cos(k * np.pi * p[:, 0]) + 0.5

    return a_fn, s_fn


GS_GUESSES_1D = {
    "IG1": _cos_pair(3, +1.0),
    "IG2": _cos_pair(3, -1.0),
    "IG3": _cos_pair(1, +1.0),
    "IG4": _cos_pair(1, -1.0),
}


def _gs_2d_pair():
    def a_fn(p):
        return 0.3 * np.cos(3 * np.pi * p[:, 0]) * np.cos(3 * np.pi * p[:, 1]) + 0.5

    def s_fn(p):
        return 1.0 - a_fn(p)

    return a_fn, s_fn


def gray_scott_guess(name: str, dim: int = 1):
    """Target (A, S) field pair for prefitting an initial network stack."""
    if dim == 2:
        return _gs_2d_pair()
    if name not in GS_GUESSES_1D:
        raise KeyError(f"unknown guess {name!r}, have {sorted(GS_GUESSES_1D)}")
    return GS_GUESSES_1D[name]


# -- square-collocation failure demo --------------------------------------------------

COLLOCATION_SETS = {
    "CL1": (0.1, 0.8),
    "CL2": (0.8, 0.9),
    "CL3": (0.1, 0.2),
}


@dataclass
class CollocationCase:
    name: str
    points: tuple
    w: float
    b: float
    iterations: int
    residual_norm: float
    l2_error: float
    converged: bool

    @property
    def found_true_solution(self) -> bool:
        return self.converged and self.l2_error < 1e-3


def _reduced_residual(xe: float, xk: float):
    """Two-variable reduced system for a width-1 sine network collocated at
    two points with both boundary values pinned.

    The outer weight is eliminated through the second collocation point xe
    and the outer bias through the left boundary; what remains is the
    interior equation at xk and the right boundary equation in (w, b).
    Holomorphic in both variables, so a complex-step Jacobian is exact.
    """
    pi2 = 4 * np.pi**2

    def residual(w, b):
        r1 = (
            -pi2 * np.sin(2 * np.pi * xe) * np.sin(w * xk + b) / np.sin(w * xe + b)
            + pi2 * np.sin(2 * np.pi * xk)
        )
        amp = pi2 * np.sin(2 * np.pi * xe) / (w**2 * np.sin(w * xe + b))
        r2 = amp * (np.sin(w + b) - np.sin(b))
        return np.array([r1, r2])

    return residual


def _newton_2var(residual, w0: float, b0: float, max_iters: int = 500):
    h = 1e-30
    w, b = w0, b0
    for k in range(max_iters):
        r = residual(w, b)
        rnorm = float(np.linalg.norm(r))
        if rnorm < 1e-12:
            return w, b, k, rnorm, True
        jac = np.zeros((2, 2))
        jac[:, 0] = residual(w + 1j * h, b).imag / h
        jac[:, 1] = residual(w, b + 1j * h).imag / h
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            break
        w, b = float(w - step[0].real), float(b - step[1].real)
    rnorm = float(np.linalg.norm(residual(w, b)))
    return w, b, max_iters, rnorm, rnorm < 1e-8


def collocation_failure_demo() -> list:
    """Plain Newton on three two-point square collocations of the 1D
    Poisson sanity problem, all from the same (1, 1) start.

    Every run lands on a genuine root of its reduced system; only one of
    the three point sets recovers the actual solution, which is the whole
    point: square collocation admits fake solutions and overdetermination
    is what removes them.
    """
    pi2 = 4 * np.pi**2
    xs = np.linspace(0.0, 1.0, 1001)
    true = np.sin(2 * np.pi * xs)
    cases = []
    for name, (p, q) in COLLOCATION_SETS.items():
        residual = _reduced_residual(q, p)
        w, b, iters, rnorm, ok = _newton_2var(residual, 1.0, 1.0)
        amp = pi2 * np.sin(2 * np.pi * q) / (w**2 * np.sin(w * q + b))
        offset = -amp * np.sin(b)
        u = amp * np.sin(w * xs + b) + offset
        l2 = float(np.sqrt(np.trapezoid((u - true) ** 2, xs)))
        cases.append(
            CollocationCase(
                name=name,
                points=(p, q),
                w=w,
                b=b,
                iterations=iters,
                residual_norm=rnorm,
                l2_error=l2,
                converged=ok,
            )
        )
    return cases


# -- pattern comparison ----------------------------------------------------------


def _grid_transforms(grid: np.ndarray):
    """Symmetry images of the grid: 2 reflections in 1D, the square's
    8-element group in 2D. Reflection is about the grid's own bounds."""
    lo = grid.min(axis=0)
    hi = grid.max(axis=0)
    dim = grid.shape[1]
    if dim == 1:
        x = grid[:, 0]
        return [grid, np.stack([lo[0] + hi[0] - x], axis=1)]
    if dim == 2:
        x, y = grid[:, 0], grid[:, 1]
        rx, ry = lo[0] + hi[0] - x, lo[1] + hi[1] - y
        frames = [
            (x, y), (rx, y), (x, ry), (rx, ry),
            (y, x), (ry, x), (y, rx), (ry, rx),
        ]
        return [np.stack(f, axis=1) for f in frames]
    raise ValueError("pattern comparison handles 1D and 2D grids")


def pattern_distance(net_a, net_b, grid) -> float:
    """RMS distance between two activator fields, minimized over the
    domain's reflection/rotation symmetries.

    Accepts bare networks or stacks (component 0 is the activator). Two
    runs that found the same pattern up to a symmetry of the square score
    zero here.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    ua = _net_values(net_a, grid)
    best = np.inf
    for frame in _grid_transforms(grid):
        ub = _net_values(net_b, frame)
        d = float(np.sqrt(np.mean((ua - ub) ** 2)))
        best = min(best, d)
    return best
