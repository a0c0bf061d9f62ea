"""Forward-mode derivative checks against central finite differences."""

import numpy as np
import numpy.testing as npt
import pytest

from randnewton import autodiff, network, problems
from randnewton.autodiff import ACTIVATIONS

SHAPES_1D = [(1, 3, 1), (1, 10, 1), (1, 4, 4, 1)]
SHAPES_2D = [(2, 3, 1), (2, 6, 1), (2, 5, 5, 1)]


def make_net(widths, activation, seed):
    rng = np.random.default_rng(seed)
    theta = rng.normal(0.0, 0.8, network.param_count(widths))
    return network.NetworkParams(widths, activation, theta)


def value_at(net, x):
    return float(network.evaluate(net, x)[0])


def fd_laplacian(net, x, h=1e-4):
    total = 0.0
    u0 = value_at(net, x)
    for d in range(len(x)):
        e = np.zeros(len(x))
        e[d] = h
        total += (value_at(net, x + e) - 2.0 * u0 + value_at(net, x - e)) / h**2
    return total


def fd_gradient(net, x, h=1e-5):
    out = np.zeros(len(x))
    for d in range(len(x)):
        e = np.zeros(len(x))
        e[d] = h
        out[d] = (value_at(net, x + e) - value_at(net, x - e)) / (2.0 * h)
    return out


def fd_theta_jacobian(net, x, h=1e-6):
    """Parameter derivatives of u(x; theta) by central differences."""
    base = net.theta
    row = np.zeros(base.size)
    for j in range(base.size):
        tp, tm = base.copy(), base.copy()
        tp[j] += h
        tm[j] -= h
        row[j] = (value_at(net.with_theta(tp), x) - value_at(net.with_theta(tm), x)) / (2 * h)
    return row


class TestScalarTypes:
    def test_jet_arithmetic_chain(self):
        x = autodiff.Jet(1.3, np.array([1.0]), None, 1)
        y = autodiff.sin(x) * x + x**2
        npt.assert_allclose(y.v, np.sin(1.3) * 1.3 + 1.3**2)
        npt.assert_allclose(y.g[0], np.cos(1.3) * 1.3 + np.sin(1.3) + 2 * 1.3)

    def test_dual2_second_derivative_sin(self):
        d = autodiff.Dual2(0.7, 1.0, 0.0)
        out = autodiff.sin(d)
        npt.assert_allclose(out.value, np.sin(0.7))
        npt.assert_allclose(out.first, np.cos(0.7))
        npt.assert_allclose(out.second, -np.sin(0.7))

    def test_dual2_product_rule(self):
        d = autodiff.Dual2(0.4, 1.0, 0.0)
        out = autodiff.exp(d) * autodiff.tanh(d)
        f = np.exp(0.4) * np.tanh(0.4)
        sech2 = 1.0 - np.tanh(0.4) ** 2
        fp = f + np.exp(0.4) * sech2
        fpp = fp + np.exp(0.4) * (sech2 - 2 * np.tanh(0.4) * sech2)
        npt.assert_allclose(out.value, f)
        npt.assert_allclose(out.first, fp)
        npt.assert_allclose(out.second, fpp, rtol=1e-12)

    def test_sigmoid_derivatives(self):
        d = autodiff.Dual2(-0.3, 1.0, 0.0)
        out = autodiff.sigmoid(d)
        s = 1.0 / (1.0 + np.exp(0.3))
        npt.assert_allclose(out.value, s)
        npt.assert_allclose(out.first, s * (1 - s))
        npt.assert_allclose(out.second, s * (1 - s) * (1 - 2 * s))

    def test_pow_requires_integer(self):
        x = autodiff.Jet(2.0, np.array([1.0]), None, 1)
        with pytest.raises(TypeError):
            x ** 0.5


class TestFieldDerivatives:
    """Laplacian and spatial gradient vs finite differences (acceptance 3 support)."""

    @pytest.mark.parametrize("widths", SHAPES_1D + SHAPES_2D)
    @pytest.mark.parametrize("activation", sorted(ACTIVATIONS))
    def test_laplacian_matches_fd(self, widths, activation):
        for seed in range(3):
            net = make_net(widths, activation, seed)
            rng = np.random.default_rng(seed + 100)
            x = rng.uniform(-0.8, 0.8, widths[0])
            npt.assert_allclose(
                autodiff.laplacian(net, x), fd_laplacian(net, x), rtol=1e-4, atol=1e-6
            )

    @pytest.mark.parametrize("widths", SHAPES_2D)
    def test_gradient_matches_fd(self, widths):
        net = make_net(widths, "tanh", 5)
        x = np.array([0.3, -0.2])
        npt.assert_allclose(
            autodiff.spatial_gradient(net, x), fd_gradient(net, x), rtol=1e-6, atol=1e-9
        )

    def test_evaluate_fields_consistent_with_point_helpers(self):
        net = make_net((2, 6, 1), "sin", 9)
        pts = np.random.default_rng(2).uniform(0.0, 1.0, (4, 2))
        vals, grads, laps = autodiff.evaluate_fields(
            net.layer_widths, net.activation, net.theta, pts
        )
        for i, x in enumerate(pts):
            npt.assert_allclose(vals[i], value_at(net, x), rtol=1e-12)
            got_grad = np.array([grads[d][i] for d in range(2)])
            npt.assert_allclose(got_grad, autodiff.spatial_gradient(net, x), rtol=1e-12)
            npt.assert_allclose(laps[i], autodiff.laplacian(net, x), rtol=1e-12)

    def test_directional_derivative_is_gradient_dot(self):
        net = make_net((2, 5, 1), "sigmoid", 13)
        pts = np.array([[0.2, 0.4], [0.9, -0.1]])
        dirs = np.array([[1.0, 0.5], [-0.3, 2.0]])
        got = autodiff.directional_derivative(
            net.layer_widths, net.activation, net.theta, pts, dirs
        )
        for i in range(2):
            expected = autodiff.spatial_gradient(net, pts[i]) @ dirs[i]
            npt.assert_allclose(got[i], expected, rtol=1e-10)


class TestParameterJacobian:
    @pytest.mark.parametrize("widths", [(1, 3, 1), (2, 6, 1), (1, 4, 4, 1)])
    @pytest.mark.parametrize("activation", sorted(ACTIVATIONS))
    def test_value_row_matches_fd(self, widths, activation):
        net = make_net(widths, activation, 17)
        x = np.full(widths[0], 0.2)
        jet = autodiff.evaluate_values(
            net.layer_widths, net.activation, net.theta, x[None, :], lifted=True
        )
        row = autodiff.dense_gradient(jet)[0]
        npt.assert_allclose(row, fd_theta_jacobian(net, x), rtol=1e-4, atol=1e-7)

    def test_supported_and_dense_paths_agree(self):
        # width-3 single-hidden-layer networks use supported-column jets
        net3 = make_net((1, 3, 1), "sin", 8)
        x = np.array([[0.6]])
        jet = autodiff.evaluate_values(net3.layer_widths, "sin", net3.theta, x, lifted=True)
        npt.assert_allclose(
            autodiff.dense_gradient(jet)[0], fd_theta_jacobian(net3, x[0]), rtol=1e-5, atol=1e-8
        )


class TestResidualRowGradient:
    @pytest.mark.parametrize("kind", ["interior", "dirichlet"])
    def test_poisson1d_row_gradient_fd(self, kind):
        prob = problems.get("poisson1d")
        net = make_net((1, 5, 1), "sin", 31)
        x = np.array([0.37]) if kind == "interior" else np.array([1.0])
        tape = autodiff.residual_row_gradient(net, x, kind, prob)
        h = 1e-6
        ref = np.zeros(net.theta.size)
        for j in range(net.theta.size):
            tp, tm = net.theta.copy(), net.theta.copy()
            tp[j] += h
            tm[j] -= h
            rp = autodiff.residual_row_gradient(net.with_theta(tp), x, kind, prob).value
            rm = autodiff.residual_row_gradient(net.with_theta(tm), x, kind, prob).value
            ref[j] = (rp - rm) / (2 * h)
        npt.assert_allclose(tape.partials, ref, rtol=1e-4, atol=1e-6)

    def test_unsupported_activation_rejected(self):
        with pytest.raises(ValueError):
            network.NetworkParams((1, 3, 1), "relu", np.zeros(network.param_count((1, 3, 1))))
