"""Dense network parameter containers, initialization, and checkpoints.

A network is a fully connected chain with a smooth activation on every
layer except the last. Parameters live in one flat vector, row-major
weights then biases, layer by layer; that layout is what the solver
differentiates against. Coupled problems use a stack of single-output
networks whose flat vectors concatenate into one unknown vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import autodiff
from .linalg import ZeroMatrix, solve_least_squares
from .serialize import dumps_json

__all__ = [
    "NetworkParams",
    "NetworkStack",
    "Explicit",
    "RandomNormal",
    "FrequencyScaled",
    "FunctionFit",
    "param_count",
    "evaluate",
    "initialize",
    "save_checkpoint",
    "load_checkpoint",
]


def param_count(layer_widths: Sequence[int]) -> int:
    """Flat parameter count: sum over layers of out*(in+1)."""
    widths = tuple(int(w) for w in layer_widths)
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise ValueError(f"invalid layer widths {widths}")
    return sum(wo * (wi + 1) for wi, wo in zip(widths[:-1], widths[1:]))


@dataclass(frozen=True)
class NetworkParams:
    """One dense network: widths, activation name, and the flat parameters."""

    layer_widths: tuple[int, ...]
    activation: str
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if self.activation not in autodiff.ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        expected = param_count(self.layer_widths)
        if theta.ndim != 1 or len(theta) != expected:
            raise ValueError(
                f"theta has {theta.shape} entries, widths {self.layer_widths} need {expected}"
            )
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta entries must be finite")

    def with_theta(self, theta) -> "NetworkParams":
        return NetworkParams(self.layer_widths, self.activation, theta)


@dataclass(frozen=True)
class NetworkStack:
    """Several single-output networks acting as components of one unknown."""

    networks: tuple[NetworkParams, ...]

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([n.theta for n in self.networks])

    @property
    def offsets(self) -> tuple[int, ...]:
        sizes = [len(n.theta) for n in self.networks]
        return tuple(int(o) for o in np.cumsum([0] + sizes)[:-1])

    def with_theta(self, theta) -> "NetworkStack":
        theta = np.asarray(theta, dtype=float)
        nets = []
        pos = 0
        for n in self.networks:
            k = len(n.theta)
            nets.append(n.with_theta(theta[pos : pos + k]))
            pos += k
        if pos != len(theta):
            raise ValueError(f"theta has {len(theta)} entries, stack needs {pos}")
        return NetworkStack(tuple(nets))


def evaluate(net: NetworkParams, x) -> np.ndarray:
    """Network outputs at a single point x; returns an array of output values."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (net.layer_widths[0],):
        raise ValueError(f"point has shape {x.shape}, network expects ({net.layer_widths[0]},)")
    params = autodiff.materialize_params(net.layer_widths, net.theta)
    act = autodiff.ACTIVATIONS[net.activation]
    out = autodiff.forward(net.layer_widths, act, params, list(x))
    return np.array([float(v) for v in out])


# -- initialization -----------------------------------------------------------


@dataclass(frozen=True)
class Explicit:
    """Use the given flat vector as-is."""

    theta: tuple[float, ...]


@dataclass(frozen=True)
class RandomNormal:
    """Independent normal entries with the given moments; seed is mandatory."""

    mean: float = 0.0
    stddev: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class FrequencyScaled:
    """First-layer draws sized so hidden features oscillate on the domain's
    own length scale.

    First-layer weights are N(0, weight_stddev) with the default picked as
    2*pi over the widest domain extent, first-layer biases N(0, bias_stddev)
    to spread phases; later layers get unit normals. Unit-normal starts
    concentrate the initial frequencies near zero on wide boxes, and the
    first few steps then blow the iterate out of reach of any usable root;
    matching the scale keeps early steps sane.
    """

    weight_stddev: float | None = None
    bias_stddev: float = float(np.pi)
    seed: int = 0


@dataclass(frozen=True)
class FunctionFit:
    """Least-squares pre-fit of the network output to a target function.

    The fit runs plain Gauss-Newton on U(x; theta) - target(x) over
    ``points`` uniform samples, capped at ``iters`` sweeps, starting from a
    frequency-scaled draw (first-layer weights N(0, weight_stddev), the
    other parameters N(0, stddev)). Gauss-Newton can shrink frequencies
    far more easily than it can grow them, so the start must already
    oscillate at least as fast as the target; weight_stddev=None uses the
    domain default of FrequencyScaled. It is a warm-up, not a solve; the
    cap keeps it bounded even when the target is outside the network's
    reach.
    """

    target: Callable[[np.ndarray], np.ndarray]
    points: int = 200
    iters: int = 50
    seed: int = 0
    stddev: float = 1.0
    weight_stddev: float | None = None


InitSpec = Explicit | RandomNormal | FrequencyScaled | FunctionFit


def _domain_extent(domain) -> float:
    if hasattr(domain, "radius"):
        return 2.0 * float(domain.radius)
    lo = np.asarray(domain.lo, dtype=float)
    hi = np.asarray(domain.hi, dtype=float)
    return float(np.max(hi - lo))


def _uniform_box_points(lo, hi, count, dim):
    if dim == 1:
        return np.linspace(lo[0], hi[0], count)[:, None]
    per_axis = max(2, int(round(count ** (1.0 / dim))))
    axes = [np.linspace(lo[j], hi[j], per_axis) for j in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def initialize(layer_widths, activation, init: InitSpec, domain=None) -> NetworkParams:
    """Build a NetworkParams from an initialization spec.

    FunctionFit needs ``domain`` (an object with lo/hi bounds) to place its
    sample points.
    """
    widths = tuple(int(w) for w in layer_widths)
    count = param_count(widths)
    if isinstance(init, Explicit):
        theta = np.asarray(init.theta, dtype=float)
        return NetworkParams(widths, activation, theta)
    if isinstance(init, RandomNormal):
        rng = np.random.default_rng(init.seed)
        theta = rng.normal(init.mean, init.stddev, size=count)
        return NetworkParams(widths, activation, theta)
    if isinstance(init, FrequencyScaled):
        wsig = init.weight_stddev
        if wsig is None:
            if domain is None:
                raise ValueError(
                    "FrequencyScaled needs a domain unless weight_stddev is given"
                )
            wsig = 2.0 * np.pi / _domain_extent(domain)
        rng = np.random.default_rng(init.seed)
        parts = []
        for layer, (wi, wo) in enumerate(zip(widths[:-1], widths[1:])):
            if layer == 0:
                parts.append(rng.normal(0.0, wsig, size=wo * wi))
                parts.append(rng.normal(0.0, init.bias_stddev, size=wo))
            else:
                parts.append(rng.normal(0.0, 1.0, size=wo * (wi + 1)))
        return NetworkParams(widths, activation, np.concatenate(parts))
    if isinstance(init, FunctionFit):
        if domain is None:
            raise ValueError("FunctionFit initialization needs a domain")
        wsig = init.weight_stddev
        if wsig is None:
            wsig = 2.0 * np.pi / _domain_extent(domain)
        rng = np.random.default_rng(init.seed)
        parts = []
        for layer, (wi, wo) in enumerate(zip(widths[:-1], widths[1:])):
            if layer == 0:
                parts.append(rng.normal(0.0, wsig, size=wo * wi))
                parts.append(rng.normal(0.0, np.pi, size=wo))
            else:
                parts.append(rng.normal(0.0, init.stddev, size=wo * (wi + 1)))
        theta = np.concatenate(parts)
        if hasattr(domain, "lo"):
            lo, hi = domain.lo, domain.hi
        else:
            lo, hi = domain
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        pts = _uniform_box_points(lo, hi, init.points, widths[0])
        target = np.asarray(init.target(pts), dtype=float).reshape(-1)
        def resid(t):
            out = autodiff.evaluate_values(widths, activation, t, pts)
            return np.asarray(out, dtype=float) - target

        for _ in range(init.iters):
            out = autodiff.evaluate_values(
                widths, activation, theta, pts, lifted=True, total_width=count
            )
            r = np.asarray(out.v, dtype=float) - target
            rnorm = np.linalg.norm(r)
            if rnorm < 1e-12:
                break
            jac = autodiff.dense_gradient(out)
            try:
                step = solve_least_squares(jac, r)
            except ZeroMatrix:
                break
            # plain Gauss-Newton overshoots on these fits; halve until the
            # residual actually drops
            scale = 1.0
            for _ in range(25):
                if np.linalg.norm(resid(theta - scale * step)) < rnorm:
                    break
                scale *= 0.5
            else:
                break
            theta = theta - scale * step
            if scale * np.linalg.norm(step) < 1e-13:
                break
        return NetworkParams(widths, activation, theta)
    raise TypeError(f"unknown init spec {init!r}")


# -- checkpoints ----------------------------------------------------------------


def _net_dict(net: NetworkParams) -> dict:
    return {
        "layer_widths": list(net.layer_widths),
        "activation": net.activation,
        "theta": [float(t) for t in net.theta],
    }


def save_checkpoint(net, path) -> None:
    """Write a JSON checkpoint; accepts a single network or a stack."""
    if isinstance(net, NetworkStack):
        doc = {"networks": [_net_dict(n) for n in net.networks]}
    else:
        doc = _net_dict(net)
    with open(path, "w") as fh:
        fh.write(dumps_json(doc))


def load_checkpoint(path):
    """Read a checkpoint written by save_checkpoint."""
    with open(path) as fh:
        doc = json.load(fh)
    if "networks" in doc:
        nets = tuple(
            NetworkParams(tuple(d["layer_widths"]), d["activation"], np.asarray(d["theta"]))
            for d in doc["networks"]
        )
        return NetworkStack(nets)
    return NetworkParams(tuple(doc["layer_widths"]), doc["activation"], np.asarray(doc["theta"]))
