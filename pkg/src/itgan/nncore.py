"""Minimal trainable network engine on numpy, 64-bit floats throughout.

Layers: Dense, Conv1D (same/valid padding), MaxPool1D, Dropout (inverted),
Flatten. Activations: linear, relu, leaky_relu (slope 0.2), sigmoid, softmax.
Adam with bias correction, binary and softmax cross-entropy losses, and a
central-difference gradient checker.

Training forward passes cache intermediates for backward; dropout is active
only when a training RNG is supplied, so cached eval-style passes (as used by
the gradient checker) stay deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

LEAKY_SLOPE = 0.2
EPS_CLAMP = 1e-7


# ---------------------------------------------------------------------------
# activations

def _act_forward(name, z):
    if name == "linear":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "leaky_relu":
        return np.where(z >= 0, z, LEAKY_SLOPE * z)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if name == "softmax":
        shifted = z - z.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=-1, keepdims=True)
    raise ValueError(f"unknown activation {name!r}")


def _act_backward(name, z, out, grad_out):
    """Gradient wrt pre-activation z given upstream grad wrt the output."""
    if name == "linear":
        return grad_out
    if name == "relu":
        return grad_out * (z > 0)
    if name == "leaky_relu":
        return grad_out * np.where(z >= 0, 1.0, LEAKY_SLOPE)
    if name == "sigmoid":
        return grad_out * out * (1.0 - out)
    if name == "softmax":
        dot = (grad_out * out).sum(axis=-1, keepdims=True)
        return out * (grad_out - dot)
    raise ValueError(f"unknown activation {name!r}")


# ---------------------------------------------------------------------------
# layer descriptors

@dataclass(frozen=True)
class Dense:
    units: int
    activation: str = "linear"


@dataclass(frozen=True)
class Conv1D:
    filters: int
    kernel: int
    activation: str = "linear"
    padding: str = "same"  # or "valid"


@dataclass(frozen=True)
class MaxPool1D:
    width: int


@dataclass(frozen=True)
class Dropout:
    rate: float


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple
    input_shape: tuple  # (features,) or (length, channels)

    def __post_init__(self):
        shape = self.input_shape
        for desc in self.layers:
            shape = _out_shape(desc, shape)  # raises on inconsistency

    @property
    def output_shape(self):
        shape = self.input_shape
        for desc in self.layers:
            shape = _out_shape(desc, shape)
        return shape


def _out_shape(desc, shape):
    if isinstance(desc, Dense):
        if len(shape) != 1:
            raise ValueError("Dense requires a flat input; add Flatten first")
        return (desc.units,)
    if isinstance(desc, Conv1D):
        if len(shape) != 2:
            raise ValueError("Conv1D requires (length, channels) input")
        length, _ = shape
        if desc.padding == "same":
            return (length, desc.filters)
        if desc.padding == "valid":
            if length < desc.kernel:
                raise ValueError("input shorter than kernel")
            return (length - desc.kernel + 1, desc.filters)
        raise ValueError(f"unknown padding {desc.padding!r}")
    if isinstance(desc, MaxPool1D):
        if len(shape) != 2:
            raise ValueError("MaxPool1D requires (length, channels) input")
        if desc.width < 1 or shape[0] < desc.width:
            raise ValueError("bad pool width")
        return (shape[0] // desc.width, shape[1])
    if isinstance(desc, Dropout):
        if not 0.0 <= desc.rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        return shape
    if isinstance(desc, Flatten):
        return (int(np.prod(shape)),)
    raise TypeError(f"unknown layer descriptor {desc!r}")


# ---------------------------------------------------------------------------
# runtime layers

class _DenseLayer:
    def __init__(self, desc, in_shape, rng):
        fan_in, fan_out = in_shape[0], desc.units
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        self.w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        self.b = np.zeros(fan_out)
        self.activation = desc.activation
        self.params = [self.w, self.b]
        self.grads = [np.zeros_like(self.w), np.zeros_like(self.b)]

    def forward(self, x, train, rng):
        z = x @ self.w + self.b
        out = _act_forward(self.activation, z)
        if train:
            self._cache = (x, z, out)
        return out

    def backward(self, grad_out):
        x, z, out = self._cache
        dz = _act_backward(self.activation, z, out, grad_out)
        self.grads[0][...] = x.T @ dz
        self.grads[1][...] = dz.sum(axis=0)
        return dz @ self.w.T


class _Conv1DLayer:
    def __init__(self, desc, in_shape, rng):
        _, in_ch = in_shape
        k, f = desc.kernel, desc.filters
        fan_in, fan_out = k * in_ch, k * f
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        self.w = rng.uniform(-limit, limit, size=(k, in_ch, f))
        self.b = np.zeros(f)
        self.kernel = k
        self.padding = desc.padding
        self.activation = desc.activation
        self.params = [self.w, self.b]
        self.grads = [np.zeros_like(self.w), np.zeros_like(self.b)]

    def _pad(self, x):
        if self.padding == "valid":
            return x, 0
        left = (self.kernel - 1) // 2
        right = self.kernel - 1 - left
        return np.pad(x, ((0, 0), (left, right), (0, 0))), left

    def forward(self, x, train, rng):
        xp, _ = self._pad(x)
        out_len = xp.shape[1] - self.kernel + 1
        z = np.zeros((x.shape[0], out_len, self.w.shape[2]))
        for k in range(self.kernel):
            z += xp[:, k : k + out_len, :] @ self.w[k]
        z += self.b
        out = _act_forward(self.activation, z)
        if train:
            self._cache = (x, xp, z, out)
        return out

    def backward(self, grad_out):
        x, xp, z, out = self._cache
        dz = _act_backward(self.activation, z, out, grad_out)
        out_len = dz.shape[1]
        dxp = np.zeros_like(xp)
        for k in range(self.kernel):
            window = xp[:, k : k + out_len, :]
            self.grads[0][k] = np.einsum("blc,blf->cf", window, dz)
            dxp[:, k : k + out_len, :] += dz @ self.w[k].T
        self.grads[1][...] = dz.sum(axis=(0, 1))
        if self.padding == "valid":
            return dxp
        left = (self.kernel - 1) // 2
        return dxp[:, left : left + x.shape[1], :]


class _MaxPool1DLayer:
    def __init__(self, desc, in_shape, rng):
        self.width = desc.width
        self.params = []
        self.grads = []

    def forward(self, x, train, rng):
        n, length, ch = x.shape
        out_len = length // self.width
        trimmed = x[:, : out_len * self.width, :]
        windows = trimmed.reshape(n, out_len, self.width, ch)
        idx = windows.argmax(axis=2)
        out = np.take_along_axis(windows, idx[:, :, None, :], axis=2)[:, :, 0, :]
        if train:
            self._cache = (x.shape, idx)
        return out

    def backward(self, grad_out):
        in_shape, idx = self._cache
        n, length, ch = in_shape
        out_len = length // self.width
        dwin = np.zeros((n, out_len, self.width, ch))
        np.put_along_axis(dwin, idx[:, :, None, :], grad_out[:, :, None, :], axis=2)
        dx = np.zeros(in_shape)
        dx[:, : out_len * self.width, :] = dwin.reshape(n, out_len * self.width, ch)
        return dx


class _DropoutLayer:
    def __init__(self, desc, in_shape, rng):
        self.rate = desc.rate
        self.params = []
        self.grads = []
        self._mask = None

    def forward(self, x, train, rng):
        # inverted dropout: only active with a training RNG; the gradient
        # checker runs train-mode caching with rng=None and gets identity
        if train and rng is not None and self.rate > 0.0:
            self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
            return x * self._mask
        self._mask = None
        return x

    def backward(self, grad_out):
        if self._mask is None:
            return grad_out
        return grad_out * self._mask


class _FlattenLayer:
    def __init__(self, desc, in_shape, rng):
        self.params = []
        self.grads = []

    def forward(self, x, train, rng):
        if train:
            self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out):
        return grad_out.reshape(self._shape)


_LAYER_CLASSES = {
    Dense: _DenseLayer,
    Conv1D: _Conv1DLayer,
    MaxPool1D: _MaxPool1DLayer,
    Dropout: _DropoutLayer,
    Flatten: _FlattenLayer,
}


class Network:
    """An ordered layer stack with explicit forward/backward."""

    def __init__(self, spec, layers):
        self.spec = spec
        self.layers = layers

    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != tuple(self.spec.input_shape):
            raise ValueError(
                f"batch shape {x.shape[1:]} does not match input {self.spec.input_shape}"
            )
        for layer in self.layers:
            x = layer.forward(x, train, rng)
        return x

    def backward(self, grad_out):
        """Backprop from output gradient; returns the input gradient."""
        for layer in reversed(self.layers):
            if not hasattr(layer, "_cache") and layer.params:
                raise RuntimeError("backward called without a cached training forward")
            grad_out = layer.backward(grad_out)
        return grad_out

    def parameters(self):
        return [p for layer in self.layers for p in layer.params]

    def gradients(self):
        return [g for layer in self.layers for g in layer.grads]

    def check_finite(self):
        for p in self.parameters():
            if not np.isfinite(p).all():
                raise FloatingPointError("non-finite network parameter")


def init_network(spec, seed):
    """Glorot-uniform weights, zero biases, deterministic in seed."""
    rng = np.random.default_rng(seed)
    layers = []
    shape = spec.input_shape
    for desc in spec.layers:
        layers.append(_LAYER_CLASSES[type(desc)](desc, shape, rng))
        shape = _out_shape(desc, shape)
    return Network(spec, layers)


# ---------------------------------------------------------------------------
# losses (defined on network outputs)

def bce_loss(pred, target):
    """Mean binary cross-entropy; returns (loss, grad wrt pred)."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64).reshape(pred.shape)
    p = np.clip(pred, EPS_CLAMP, 1.0 - EPS_CLAMP)
    loss = -np.mean(target * np.log(p) + (1.0 - target) * np.log(1.0 - p))
    grad = (p - target) / (p * (1.0 - p)) / p.size
    grad = np.where((pred > EPS_CLAMP) & (pred < 1.0 - EPS_CLAMP), grad, 0.0)
    return float(loss), grad


def softmax_ce_loss(probs, labels):
    """Mean cross-entropy against integer labels; probs already softmaxed."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = probs.shape[0]
    p_true = np.clip(probs[np.arange(n), labels], EPS_CLAMP, 1.0)
    loss = -np.mean(np.log(p_true))
    grad = np.zeros_like(probs)
    grad[np.arange(n), labels] = -1.0 / (p_true * n)
    return float(loss), grad


# ---------------------------------------------------------------------------
# Adam

@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(params, grads, state):
    """One in-place Adam update with bias correction."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** state.t)
        v_hat = v / (1.0 - b2 ** state.t)
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)


# ---------------------------------------------------------------------------
# gradient checker

def grad_check(net, batch, loss_fn, eps=1e-5):
    """Max elementwise relative error between backprop and central differences.

    Runs with caching but without dropout, so the pass is deterministic.
    """
    batch = np.asarray(batch, dtype=np.float64)
    out = net.forward(batch, train=True, rng=None)
    _, grad_out = loss_fn(out)
    net.backward(grad_out)
    analytic = [g.copy() for g in net.gradients()]

    worst = 0.0
    for p, ga in zip(net.parameters(), analytic):
        flat = p.reshape(-1)
        gflat = ga.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            lo_plus, _ = loss_fn(net.forward(batch, train=True, rng=None))
            flat[i] = orig - eps
            lo_minus, _ = loss_fn(net.forward(batch, train=True, rng=None))
            flat[i] = orig
            gn = (lo_plus - lo_minus) / (2.0 * eps)
            denom = max(1e-8, abs(gflat[i]) + abs(gn))
            worst = max(worst, abs(gflat[i] - gn) / denom)
    return worst
