"""Nested forward-mode differentiation for small dense networks.

Two scalar types compose to give every derivative the residual assembly
needs:

* ``Jet`` carries a value and its gradient with respect to the flat
  parameter vector (first order, vector tangent). The gradient may be
  restricted to a known support (``cols``) so that hidden units of a
  single-hidden-layer network, whose parameters are disjoint, never touch
  the full parameter axis until the output sum.
* ``Dual2`` carries (value, first, second) along one spatial direction.
  Its coefficients can be floats, numpy arrays (a batch of points), or
  Jets, which is what makes the differentiation nested: an outer ``Dual2``
  sweep over a coordinate with ``Jet`` coefficients yields spatial first
  and second derivatives together with their parameter gradients in one
  forward pass.

Values are never mutated; every operation allocates. Activations are
limited to smooth choices (sin, sigmoid, tanh). ReLU is deliberately
absent: rows built from second derivatives need twice-differentiable
activations, and a piecewise-linear unit would zero out exactly the terms
the iteration depends on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Jet",
    "Dual2",
    "TapeGradient",
    "ACTIVATIONS",
    "sin",
    "cos",
    "exp",
    "tanh",
    "sigmoid",
    "forward",
    "layer_slots",
    "materialize_params",
    "lift_params",
    "dense_gradient",
    "evaluate_fields",
    "directional_derivative",
    "laplacian",
    "spatial_gradient",
    "residual_row_gradient",
]


def _x1(c):
    """Append a trailing axis to array factors so they broadcast against gradients."""
    if isinstance(c, np.ndarray):
        return c[..., None]
    return c


class Jet:
    """Value plus gradient w.r.t. the flat parameter vector.

    ``v`` is a float or an array batch; ``g`` has one extra trailing axis of
    length ``width`` (dense, ``cols is None``) or ``len(cols)`` (supported on
    the given sorted column indices).
    """

    __slots__ = ("v", "g", "cols", "width")
    __array_ufunc__ = None

    def __init__(self, v, g, cols, width):
        self.v = v
        self.g = g
        self.cols = cols
        self.width = width

    def __repr__(self):
        support = "dense" if self.cols is None else f"cols={len(self.cols)}"
        return f"Jet(v={self.v!r}, {support}, width={self.width})"

    # -- gradient bookkeeping -------------------------------------------------

    def dense_g(self) -> np.ndarray:
        if self.cols is None:
            return self.g
        out = np.zeros(np.shape(self.g)[:-1] + (self.width,))
        out[..., self.cols] = self.g
        return out

    def _merge(self, other, fa, fb):
        """Return (g, cols) for fa * self.g + fb * other.g in aligned columns."""
        ga = self.g if fa is None else self.g * _x1(fa)
        gb = other.g if fb is None else other.g * _x1(fb)
        if self.cols is other.cols or (
            self.cols is not None
            and other.cols is not None
            and np.array_equal(self.cols, other.cols)
        ):
            return ga + gb, self.cols
        lead = np.broadcast_shapes(ga.shape[:-1], gb.shape[:-1])
        out = np.zeros(lead + (self.width,))
        if self.cols is None:
            out += ga
        else:
            out[..., self.cols] += ga
        if other.cols is None:
            out += gb
        else:
            out[..., other.cols] += gb
        return out, None

    def _chain(self, v, factor):
        """New jet with value v and gradient scaled by d(new)/d(old)."""
        return Jet(v, self.g * _x1(factor), self.cols, self.width)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, o):
        if isinstance(o, Dual2):
            return NotImplemented
        if isinstance(o, Jet):
            g, cols = self._merge(o, None, None)
            return Jet(self.v + o.v, g, cols, self.width)
        return Jet(self.v + o, self.g, self.cols, self.width)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.g, self.cols, self.width)

    def __sub__(self, o):
        if isinstance(o, Dual2):
            return NotImplemented
        if isinstance(o, Jet):
            g, cols = self._merge(o, None, -1.0)
            return Jet(self.v - o.v, g, cols, self.width)
        return Jet(self.v - o, self.g, self.cols, self.width)

    def __rsub__(self, o):
        return Jet(o - self.v, -self.g, self.cols, self.width)

    def __mul__(self, o):
        if isinstance(o, Dual2):
            return NotImplemented
        if isinstance(o, Jet):
            g, cols = self._merge(o, o.v, self.v)
            return Jet(self.v * o.v, g, cols, self.width)
        return Jet(self.v * o, self.g * _x1(o), self.cols, self.width)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Dual2):
            return NotImplemented
        if isinstance(o, Jet):
            inv = 1.0 / o.v
            g, cols = self._merge(o, inv, -self.v * inv * inv)
            return Jet(self.v * inv, g, cols, self.width)
        return Jet(self.v / o, self.g * _x1(1.0 / o), self.cols, self.width)

    def __rtruediv__(self, o):
        inv = 1.0 / self.v
        return self._chain(o * inv, -o * inv * inv)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("jet powers must be integers")
        if n == 0:
            return Jet(self.v * 0.0 + 1.0, self.g * 0.0, self.cols, self.width)
        if n < 0:
            return 1.0 / (self ** (-n))
        out = self
        for _ in range(n - 1):
            out = out * self
        return out


class Dual2:
    """Second-order jet along one spatial direction.

    ``value``, ``first``, ``second`` follow the raw-derivative convention:
    for a composition h = f(u), second(h) = f''(u) first(u)^2 + f'(u)
    second(u). Coefficients may be floats, arrays, or Jets; anything that is
    not a Dual2 is treated as spatially constant.
    """

    __slots__ = ("value", "first", "second")
    __array_ufunc__ = None

    def __init__(self, value, first, second):
        self.value = value
        self.first = first
        self.second = second

    def __repr__(self):
        return f"Dual2({self.value!r}, {self.first!r}, {self.second!r})"

    def __add__(self, o):
        if isinstance(o, Dual2):
            return Dual2(self.value + o.value, self.first + o.first, self.second + o.second)
        return Dual2(self.value + o, self.first, self.second)

    __radd__ = __add__

    def __neg__(self):
        return Dual2(-self.value, -self.first, -self.second)

    def __sub__(self, o):
        if isinstance(o, Dual2):
            return Dual2(self.value - o.value, self.first - o.first, self.second - o.second)
        return Dual2(self.value - o, self.first, self.second)

    def __rsub__(self, o):
        return Dual2(o - self.value, -self.first, -self.second)

    def __mul__(self, o):
        if isinstance(o, Dual2):
            return Dual2(
                self.value * o.value,
                self.first * o.value + self.value * o.first,
                self.second * o.value + 2.0 * (self.first * o.first) + self.value * o.second,
            )
        return Dual2(self.value * o, self.first * o, self.second * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Dual2):
            q = self.value / o.value
            q1 = (self.first - q * o.first) / o.value
            q2 = (self.second - 2.0 * (q1 * o.first) - q * o.second) / o.value
            return Dual2(q, q1, q2)
        inv = 1.0 / o
        return Dual2(self.value * inv, self.first * inv, self.second * inv)

    def __rtruediv__(self, o):
        q = o / self.value
        q1 = -(q * self.first) / self.value
        q2 = -(2.0 * (q1 * self.first) + q * self.second) / self.value
        return Dual2(q, q1, q2)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("dual powers must be integers")
        if n == 0:
            return Dual2(1.0, 0.0, 0.0)
        if n < 0:
            return 1.0 / (self ** (-n))
        out = self
        for _ in range(n - 1):
            out = out * self
        return out


# -- smooth functions on generic scalars ---------------------------------------


def sin(u):
    if isinstance(u, Dual2):
        s, c = sin(u.value), cos(u.value)
        return Dual2(s, c * u.first, -s * (u.first * u.first) + c * u.second)
    if isinstance(u, Jet):
        return u._chain(np.sin(u.v), np.cos(u.v))
    return np.sin(u)


def cos(u):
    if isinstance(u, Dual2):
        s, c = sin(u.value), cos(u.value)
        return Dual2(c, -s * u.first, -c * (u.first * u.first) - s * u.second)
    if isinstance(u, Jet):
        return u._chain(np.cos(u.v), -np.sin(u.v))
    return np.cos(u)


def exp(u):
    if isinstance(u, Dual2):
        e = exp(u.value)
        return Dual2(e, e * u.first, e * (u.first * u.first) + e * u.second)
    if isinstance(u, Jet):
        e = np.exp(u.v)
        return u._chain(e, e)
    return np.exp(u)


def tanh(u):
    if isinstance(u, Dual2):
        t = tanh(u.value)
        dp = 1.0 - t * t
        return Dual2(t, dp * u.first, -2.0 * (t * dp) * (u.first * u.first) + dp * u.second)
    if isinstance(u, Jet):
        t = np.tanh(u.v)
        return u._chain(t, 1.0 - t * t)
    return np.tanh(u)


def sigmoid(u):
    if isinstance(u, Dual2):
        s = sigmoid(u.value)
        dp = s * (1.0 - s)
        ddp = dp * (1.0 - 2.0 * s)
        return Dual2(s, dp * u.first, ddp * (u.first * u.first) + dp * u.second)
    if isinstance(u, Jet):
        s = 1.0 / (1.0 + np.exp(-u.v))
        return u._chain(s, s * (1.0 - s))
    return 1.0 / (1.0 + np.exp(-u))


ACTIVATIONS = {"sin": sin, "sigmoid": sigmoid, "tanh": tanh}


@dataclass(frozen=True)
class TapeGradient:
    """A row value together with its partials w.r.t. every parameter."""

    value: float
    partials: np.ndarray


# -- parameter layout and lifting ----------------------------------------------


def layer_slots(widths):
    """Flat-parameter index arrays per layer: (W slots (out,in), b slots (out,)).

    Layout is row-major weights followed by biases, layer by layer.
    """
    slots = []
    pos = 0
    for w_in, w_out in zip(widths[:-1], widths[1:]):
        w = np.arange(pos, pos + w_out * w_in).reshape(w_out, w_in)
        pos += w_out * w_in
        b = np.arange(pos, pos + w_out)
        pos += w_out
        slots.append((w, b))
    return slots


def materialize_params(widths, theta, offset=0):
    """Plain-float layer parameters [(W rows, b), ...] from the flat vector."""
    params = []
    pos = offset
    for w_in, w_out in zip(widths[:-1], widths[1:]):
        w = [theta[pos + i * w_in : pos + (i + 1) * w_in].tolist() for i in range(w_out)]
        pos += w_out * w_in
        b = theta[pos : pos + w_out].tolist()
        pos += w_out
        params.append((w, b))
    return params


def lift_params(widths, theta, total_width, offset=0):
    """Layer parameters as Jets seeded with one-hot gradients.

    For a single hidden layer, each hidden unit's parameters (its incoming
    row, its bias, and the outgoing weights that consume it) share one
    support array, so unit-local arithmetic stays narrow. Deeper networks
    fall back to dense gradients; every network this package targets with
    more than one hidden layer is small.
    """
    slots = layer_slots(widths)

    def one_hot_dense(slot):
        g = np.zeros(total_width)
        g[offset + slot] = 1.0
        return Jet(float(theta[offset + slot]), g, None, total_width)

    if len(widths) != 3:
        params = []
        for w_slots, b_slots in slots:
            w = [[one_hot_dense(s) for s in row] for row in w_slots]
            b = [one_hot_dense(s) for s in b_slots]
            params.append((w, b))
        return params

    d, hidden, out_dim = widths
    (w1_slots, b1_slots), (w2_slots, b2_slots) = slots
    supports = []
    for i in range(hidden):
        cols = np.concatenate(
            [w1_slots[i], [b1_slots[i]], w2_slots[:, i]]
        ).astype(np.int64) + offset
        supports.append(np.sort(cols))

    def on_support(i, slot):
        cols = supports[i]
        g = np.zeros(len(cols))
        g[np.searchsorted(cols, offset + slot)] = 1.0
        return Jet(float(theta[offset + slot]), g, cols, total_width)

    w1 = [[on_support(i, w1_slots[i, j]) for j in range(d)] for i in range(hidden)]
    b1 = [on_support(i, b1_slots[i]) for i in range(hidden)]
    w2 = [[on_support(i, w2_slots[o, i]) for i in range(hidden)] for o in range(out_dim)]
    b2 = []
    for o in range(out_dim):
        cols = np.array([offset + b2_slots[o]], dtype=np.int64)
        b2.append(Jet(float(theta[offset + b2_slots[o]]), np.ones(1), cols, total_width))
    return [(w1, b1), (w2, b2)]


def dense_gradient(jet: Jet) -> np.ndarray:
    """Gradient broadcast to the value's batch shape, dense over all parameters."""
    g = jet.dense_g()
    target = np.shape(jet.v) + (jet.width,)
    if g.shape != target:
        g = np.broadcast_to(g, target)
    return np.array(g)


# -- generic network forward pass -----------------------------------------------


def _sum_terms(terms):
    """Sum scalar-likes with one allocation for jets of disjoint support."""
    if any(isinstance(t, Dual2) for t in terms):
        values = [t.value if isinstance(t, Dual2) else t for t in terms]
        firsts = [t.first for t in terms if isinstance(t, Dual2)]
        seconds = [t.second for t in terms if isinstance(t, Dual2)]
        return Dual2(_sum_terms(values), _sum_terms(firsts), _sum_terms(seconds))
    jets = [t for t in terms if isinstance(t, Jet)]
    plains = [t for t in terms if not isinstance(t, Jet)]
    plain = sum(plains) if plains else 0.0
    if not jets:
        return plain
    width = jets[0].width
    v = jets[0].v
    for j in jets[1:]:
        v = v + j.v
    if not isinstance(plain, float) or plain != 0.0:
        v = v + plain
    same = all(
        j.cols is jets[0].cols
        or (j.cols is not None and jets[0].cols is not None
            and np.array_equal(j.cols, jets[0].cols))
        for j in jets[1:]
    )
    if same:
        g = jets[0].g
        for j in jets[1:]:
            g = g + j.g
        return Jet(v, g, jets[0].cols, width)
    lead = np.broadcast_shapes(*[j.g.shape[:-1] for j in jets])
    g = np.zeros(lead + (width,))
    for j in jets:
        if j.cols is None:
            g += j.g
        else:
            g[..., j.cols] += j.g
    return Jet(v, g, None, width)


def forward(widths, activation, params, inputs):
    """Run the dense network on generic scalars; returns the output list.

    ``params`` comes from materialize_params or lift_params; ``inputs`` is a
    list of per-coordinate scalars (floats, arrays, Jets, or Dual2). The
    activation applies to every layer except the last.
    """
    h = list(inputs)
    last = len(params) - 1
    for layer, (w, b) in enumerate(params):
        z = []
        for i in range(len(w)):
            row = w[i]
            terms = [row[j] * h[j] for j in range(len(row))]
            terms.append(b[i])
            z.append(_sum_terms(terms))
        if layer == last:
            h = z
        else:
            h = [activation(u) for u in z]
    return h


# -- field evaluation drivers ----------------------------------------------------


def _params_for(widths, theta, lifted, total_width, offset):
    if lifted:
        return lift_params(widths, theta, total_width, offset)
    return materialize_params(widths, theta, offset)


def evaluate_fields(widths, activation, theta, points, *, lifted=False,
                    total_width=None, offset=0, output=0):
    """Value, spatial gradient, and Laplacian of one output over a point batch.

    ``points`` is (B, d). Returns (u, grad, lap) where grad is a list of d
    entries; each entry is an array (B,) or a Jet over the batch when
    ``lifted`` is set.
    """
    points = np.asarray(points, dtype=float)
    n_batch, dim = points.shape
    if total_width is None:
        total_width = len(theta)
    params = _params_for(widths, theta, lifted, total_width, offset)
    act = ACTIVATIONS[activation]
    u = None
    grad = []
    lap = None
    for d_probe in range(dim):
        inputs = [
            Dual2(points[:, j], 1.0 if j == d_probe else 0.0, 0.0)
            for j in range(dim)
        ]
        out = forward(widths, act, params, inputs)[output]
        if d_probe == 0:
            u = out.value
            lap = out.second
        else:
            lap = lap + out.second
        grad.append(out.first)
    return u, grad, lap


def evaluate_values(widths, activation, theta, points, *, lifted=False,
                    total_width=None, offset=0, output=0):
    """Output values only (no spatial derivatives) over a point batch."""
    points = np.asarray(points, dtype=float)
    if total_width is None:
        total_width = len(theta)
    params = _params_for(widths, theta, lifted, total_width, offset)
    act = ACTIVATIONS[activation]
    inputs = [points[:, j] for j in range(points.shape[1])]
    return forward(widths, act, params, inputs)[output]


def directional_derivative(widths, activation, theta, points, directions, *,
                           lifted=False, total_width=None, offset=0, output=0):
    """Directional derivative of one output along per-point directions."""
    points = np.asarray(points, dtype=float)
    directions = np.asarray(directions, dtype=float)
    if total_width is None:
        total_width = len(theta)
    params = _params_for(widths, theta, lifted, total_width, offset)
    act = ACTIVATIONS[activation]
    inputs = [
        Dual2(points[:, j], directions[:, j], 0.0) for j in range(points.shape[1])
    ]
    return forward(widths, act, params, inputs)[output].first


# -- single-point conveniences ----------------------------------------------------


def _single(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    return x[None, :]


def _scalar(v) -> float:
    return float(np.asarray(v).reshape(-1)[0]) if np.ndim(v) else float(v)


def laplacian(net, x) -> float:
    """Sum of unmixed second spatial derivatives of the network output at x."""
    u, grad, lap = evaluate_fields(net.layer_widths, net.activation, net.theta, _single(x))
    return _scalar(lap)


def spatial_gradient(net, x) -> np.ndarray:
    """Spatial gradient of the network output at x."""
    u, grad, lap = evaluate_fields(net.layer_widths, net.activation, net.theta, _single(x))
    return np.array([_scalar(gd) for gd in grad])


def residual_row_gradient(net, x, kind, problem, component: int = 0) -> TapeGradient:
    """One residual row and its parameter gradient at a single point.

    ``kind`` is "interior", "dirichlet", or "neumann". Boundary targets and
    normal directions come from the problem's boundary description at x.
    The network argument may be a single network or a stack; rows of
    multi-component problems see every component's fields.
    """
    nets = getattr(net, "networks", None) or (net,)
    theta = np.concatenate([np.asarray(n.theta, dtype=float) for n in nets])
    total = len(theta)
    pts = _single(x)
    offsets = np.cumsum([0] + [len(n.theta) for n in nets])

    if kind == "interior":
        u, grad, lap = [], [], []
        for c, n in enumerate(nets):
            uc, gc, lc = evaluate_fields(
                n.layer_widths, n.activation, theta, pts,
                lifted=True, total_width=total, offset=int(offsets[c]),
            )
            u.append(uc)
            grad.append(gc)
            lap.append(lc)
        xs = [pts[:, j] for j in range(pts.shape[1])]
        rows = problem.interior_residual(u, grad, lap, xs, problem.parameter_value())
        row = rows[component]
    else:
        bc = problem.boundary_at(np.asarray(x, dtype=float), component)
        n = nets[component]
        if kind == "dirichlet":
            val = evaluate_values(
                n.layer_widths, n.activation, theta, pts,
                lifted=True, total_width=total, offset=int(offsets[component]),
            )
            row = val - bc.target(pts)[0]
        elif kind == "neumann":
            der = directional_derivative(
                n.layer_widths, n.activation, theta, pts,
                np.asarray(bc.direction, dtype=float)[None, :],
                lifted=True, total_width=total, offset=int(offsets[component]),
            )
            row = der - bc.target(pts)[0]
        else:
            raise ValueError(f"unknown row kind {kind!r}")
    if isinstance(row, Jet):
        return TapeGradient(float(np.asarray(row.v).reshape(-1)[0]),
                            dense_gradient(row).reshape(-1, total)[0])
    return TapeGradient(float(np.asarray(row).reshape(-1)[0]), np.zeros(total))
