"""Minimal dense-tensor layers with hand-written backward passes.

Shapes follow the (batch, channels, height, width) layout for images and
(batch, features) for dense heads.  Ops are stateless with respect to
activations: ``forward`` returns ``(out, ctx)`` and ``backward`` consumes the
ctx, so one layer instance can appear at many graph nodes (weight sharing in
unrolled RNNs) without clobbering caches.
"""

import numpy as np

from .errors import DivergedError, LabelOutOfRange, MissingForwardCache, ShapeMismatch


class Param:
    __slots__ = ("value", "grad")

    def __init__(self, value):
        self.value = np.asarray(value)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0

    def astype(self, dtype):
        self.value = self.value.astype(dtype)
        self.grad = np.zeros_like(self.value)


def _uniform_init(rng, shape, fan_in, dtype):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Op:
    """Base: n-ary tensor op with optional parameters."""

    def params(self):
        return []

    def forward(self, *xs):
        raise NotImplementedError

    def backward(self, gout, ctx):
        raise NotImplementedError


def _im2col(x, kh, kw, stride, pad):
    b, c, h, w = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    hp, wp = x.shape[2], x.shape[3]
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    sb, sc, sh, sw = x.strides
    view = np.lib.stride_tricks.as_strided(
        x,
        shape=(b, c, ho, wo, kh, kw),
        strides=(sb, sc, sh * stride, sw * stride, sh, sw),
        writeable=False,
    )
    # (b, ho, wo, c, kh, kw) contiguous copy for the matmul
    cols = np.ascontiguousarray(view.transpose(0, 2, 3, 1, 4, 5))
    return cols, ho, wo


def _col2im(gcols, x_shape, kh, kw, stride, pad):
    b, c, h, w = x_shape
    hp, wp = h + 2 * pad, w + 2 * pad
    ho, wo = gcols.shape[1], gcols.shape[2]
    gx = np.zeros((b, c, hp, wp), dtype=gcols.dtype)
    g = gcols.transpose(0, 3, 4, 5, 1, 2)  # (b, c, kh, kw, ho, wo)
    for i in range(kh):
        for j in range(kw):
            gx[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += g[:, :, i, j]
    if pad:
        gx = gx[:, :, pad : pad + h, pad : pad + w]
    return gx


class Conv2d(Op):
    def __init__(self, cin, cout, k, stride=1, pad=0, rng=None, dtype=np.float32):
        self.cin, self.cout, self.k, self.stride, self.pad = cin, cout, k, stride, pad
        rng = rng if rng is not None else np.random.default_rng(0)
        fan_in = cin * k * k
        self.weight = Param(_uniform_init(rng, (cout, cin, k, k), fan_in, dtype))
        self.bias = Param(np.zeros(cout, dtype=dtype))

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x):
        if x.shape[1] != self.cin:
            raise ShapeMismatch(f"conv2d expects {self.cin} channels, got {x.shape[1]}")
        cols, ho, wo = _im2col(x, self.k, self.k, self.stride, self.pad)
        w2 = self.weight.value.reshape(self.cout, -1)
        out = cols.reshape(-1, w2.shape[1]) @ w2.T + self.bias.value
        out = out.reshape(x.shape[0], ho, wo, self.cout).transpose(0, 3, 1, 2)
        return out, (x.shape, cols)

    def backward(self, gout, ctx):
        x_shape, cols = ctx
        b = x_shape[0]
        gmat = gout.transpose(0, 2, 3, 1).reshape(-1, self.cout)
        cmat = cols.reshape(gmat.shape[0], -1)
        self.weight.grad += (gmat.T @ cmat).reshape(self.weight.shape)
        self.bias.grad += gmat.sum(axis=0)
        gcols = (gmat @ self.weight.value.reshape(self.cout, -1)).reshape(cols.shape)
        return [_col2im(gcols, x_shape, self.k, self.k, self.stride, self.pad)]


class AvgPool2d(Op):
    """Average pooling; padded cells count toward the divisor."""

    def __init__(self, k, stride=None, pad=0):
        self.k = k
        self.stride = stride if stride is not None else k
        self.pad = pad

    def forward(self, x):
        cols, ho, wo = _im2col(x, self.k, self.k, self.stride, self.pad)
        out = cols.mean(axis=(4, 5)).transpose(0, 3, 1, 2)
        return out, (x.shape, ho, wo)

    def backward(self, gout, ctx):
        x_shape, ho, wo = ctx
        g = gout.transpose(0, 2, 3, 1)[:, :, :, :, None, None] / (self.k * self.k)
        gcols = np.broadcast_to(g, (x_shape[0], ho, wo, x_shape[1], self.k, self.k))
        return [_col2im(np.ascontiguousarray(gcols), x_shape, self.k, self.k, self.stride, self.pad)]


class BatchNorm2d(Op):
    """Pure batch-statistics normalization: no running stats, no affine."""

    def __init__(self, cin, eps=1e-5):
        self.cin, self.eps = cin, eps

    def forward(self, x):
        mu = x.mean(axis=(0, 2, 3), keepdims=True)
        var = x.var(axis=(0, 2, 3), keepdims=True)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu) * inv
        return xhat.astype(x.dtype, copy=False), (xhat, inv)

    def backward(self, gout, ctx):
        xhat, inv = ctx
        m = gout.mean(axis=(0, 2, 3), keepdims=True)
        mx = (gout * xhat).mean(axis=(0, 2, 3), keepdims=True)
        return [(gout - m - xhat * mx) * inv]


class Linear(Op):
    def __init__(self, din, dout, rng=None, dtype=np.float32):
        self.din, self.dout = din, dout
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weight = Param(_uniform_init(rng, (dout, din), din, dtype))
        self.bias = Param(np.zeros(dout, dtype=dtype))

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x):
        if x.shape[-1] != self.din:
            raise ShapeMismatch(f"linear expects {self.din} features, got {x.shape[-1]}")
        return x @ self.weight.value.T + self.bias.value, (x,)

    def backward(self, gout, ctx):
        (x,) = ctx
        g2 = gout.reshape(-1, self.dout)
        x2 = x.reshape(-1, self.din)
        self.weight.grad += g2.T @ x2
        self.bias.grad += g2.sum(axis=0)
        return [gout @ self.weight.value]


class ReLU(Op):
    def forward(self, x):
        mask = x > 0
        return x * mask, (mask,)

    def backward(self, gout, ctx):
        return [gout * ctx[0]]


class Tanh(Op):
    def forward(self, x):
        y = np.tanh(x)
        return y, (y,)

    def backward(self, gout, ctx):
        return [gout * (1.0 - ctx[0] ** 2)]


class Sigmoid(Op):
    def forward(self, x):
        y = 1.0 / (1.0 + np.exp(-x))
        return y, (y,)

    def backward(self, gout, ctx):
        y = ctx[0]
        return [gout * y * (1.0 - y)]


class Identity(Op):
    def forward(self, x):
        return x, ()

    def backward(self, gout, ctx):
        return [gout]


class Add(Op):
    def forward(self, *xs):
        out = xs[0]
        for x in xs[1:]:
            out = out + x
        return out, (len(xs),)

    def backward(self, gout, ctx):
        return [gout] * ctx[0]


class Mul(Op):
    def forward(self, a, b):
        return a * b, (a, b)

    def backward(self, gout, ctx):
        a, b = ctx
        return [gout * b, gout * a]


class GlobalAvgPool(Op):
    def forward(self, x):
        return x.mean(axis=(2, 3)), (x.shape,)

    def backward(self, gout, ctx):
        b, c, h, w = ctx[0]
        return [np.broadcast_to(gout[:, :, None, None] / (h * w), (b, c, h, w)).copy()]


class Input(Op):
    """Placeholder; value supplied at Graph.forward time."""

    def forward(self):
        raise RuntimeError("input node evaluated without a bound value")


class Node:
    __slots__ = ("op", "inputs")

    def __init__(self, op, inputs=()):
        self.op = op
        self.inputs = list(inputs)


class Graph:
    """DAG of ops; node indices must be topologically ordered."""

    def __init__(self, nodes, outputs):
        self.nodes = nodes
        self.outputs = list(outputs)
        self._ctx = None
        self._values = None

    def params(self):
        seen, out = set(), []
        for node in self.nodes:
            for p in node.op.params():
                if id(p) not in seen:
                    seen.add(id(p))
                    out.append(p)
        return out

    def zero_grad(self):
        for p in self.params():
            p.zero_grad()

    def astype(self, dtype):
        for p in self.params():
            p.astype(dtype)
        return self

    def input_ids(self):
        return [i for i, n in enumerate(self.nodes) if isinstance(n.op, Input)]

    def forward(self, inputs, check_finite=True):
        """inputs: array (single input node) or dict node_id -> array."""
        if not isinstance(inputs, dict):
            ids = self.input_ids()
            if len(ids) != 1:
                raise ShapeMismatch("graph has multiple inputs; pass a dict")
            inputs = {ids[0]: inputs}
        values = [None] * len(self.nodes)
        ctx = [None] * len(self.nodes)
        for i, node in enumerate(self.nodes):
            if isinstance(node.op, Input):
                values[i] = np.asarray(inputs[i])
            else:
                xs = [values[j] for j in node.inputs]
                values[i], ctx[i] = node.op.forward(*xs)
        self._ctx, self._values = ctx, values
        outs = [values[i] for i in self.outputs]
        if check_finite and any(not np.all(np.isfinite(o)) for o in outs):
            raise DivergedError("non-finite values in graph output")
        return outs

    def backward(self, out_grads):
        """out_grads: list aligned with self.outputs, or dict node_id -> grad."""
        if self._ctx is None:
            raise MissingForwardCache("backward called before forward")
        if not isinstance(out_grads, dict):
            out_grads = dict(zip(self.outputs, out_grads))
        grads = [None] * len(self.nodes)
        for i, g in out_grads.items():
            grads[i] = np.asarray(g)
        for i in range(len(self.nodes) - 1, -1, -1):
            g = grads[i]
            if g is None or isinstance(self.nodes[i].op, Input):
                continue
            gins = self.nodes[i].op.backward(g, self._ctx[i])
            for j, gin in zip(self.nodes[i].inputs, gins):
                grads[j] = gin if grads[j] is None else grads[j] + gin
        return grads


def mse_loss(pred, target):
    """Mean squared error and its gradient w.r.t. pred."""
    pred, target = np.asarray(pred), np.asarray(target)
    if pred.shape != target.shape:
        raise ShapeMismatch(f"mse shapes {pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    return loss, 2.0 * diff / diff.size


def cross_entropy_loss(logits, labels):
    """Mean negative log-softmax of the true class, plus gradient."""
    logits = np.asarray(logits)
    labels = np.asarray(labels)
    b, n = logits.shape
    if labels.min() < 0 or labels.max() >= n:
        raise LabelOutOfRange(f"labels outside [0, {n})")
    shifted = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logz
    loss = float(-logp[np.arange(b), labels].mean())
    grad = np.exp(logp)
    grad[np.arange(b), labels] -= 1.0
    return loss, grad / b
