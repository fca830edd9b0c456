import numpy as np
import pytest

from regnas import gradcheck, nn


def _linear_graph(dtype=np.float64):
    lin = nn.Linear(4, 3, rng=np.random.default_rng(0), dtype=dtype)
    nodes = [nn.Node(nn.Input()), nn.Node(lin, (0,)), nn.Node(nn.Tanh(), (1,))]
    return nn.Graph(nodes, [2]), lin


def test_correct_gradient_passes(rng):
    g, _ = _linear_graph()
    assert gradcheck.grad_check(g, rng.normal(size=(5, 4)), rng=rng) < 1e-7


def test_broken_backward_detected(rng):
    class BrokenTanh(nn.Tanh):
        def backward(self, gout, ctx):
            (grad,) = super().backward(gout, ctx)
            return [grad * 1.01]

    lin = nn.Linear(4, 3, rng=np.random.default_rng(0), dtype=np.float64)
    nodes = [nn.Node(nn.Input()), nn.Node(lin, (0,)), nn.Node(BrokenTanh(), (1,))]
    g = nn.Graph(nodes, [2])
    assert gradcheck.grad_check(g, rng.normal(size=(5, 4)), rng=rng) > 1e-3


def test_sign_flip_detected(rng):
    class FlippedLinear(nn.Linear):
        def backward(self, gout, ctx):
            grads = super().backward(gout, ctx)
            self.weight.grad *= -1.0
            return grads

    lin = FlippedLinear(4, 3, rng=np.random.default_rng(0), dtype=np.float64)
    nodes = [nn.Node(nn.Input()), nn.Node(lin, (0,))]
    g = nn.Graph(nodes, [1])
    assert gradcheck.grad_check(g, rng.normal(size=(5, 4)), rng=rng) > 1.0


def test_no_params_returns_zero(rng):
    nodes = [nn.Node(nn.Input()), nn.Node(nn.ReLU(), (0,))]
    g = nn.Graph(nodes, [1])
    assert gradcheck.grad_check(g, rng.normal(size=(2, 2)), rng=rng) == 0.0


def test_multi_output_probe(rng):
    lin = nn.Linear(4, 4, rng=np.random.default_rng(0), dtype=np.float64)
    nodes = [nn.Node(nn.Input()), nn.Node(lin, (0,)), nn.Node(nn.Sigmoid(), (1,))]
    g = nn.Graph(nodes, [1, 2])
    assert gradcheck.grad_check(g, rng.normal(size=(3, 4)), rng=rng) < 1e-7
