"""Minimal classical deep-learning stack: ops, layers, losses, optimizers.

Tensors are plain numpy float64 arrays in row-major order. Ops operate on a
single example (channels-first for images); the training loop owns batching.
Every forward op has an explicit backward companion, and each backward is
validated against central finite differences in the test suite.

Checkpoint format (little-endian): magic ``QSER``, u32 format version,
u32 header length, a UTF-8 JSON header describing layer specs and array
shapes, then the parameter arrays as raw 8-byte floats in header order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DataError, ModelError

CHECKPOINT_MAGIC = b"QSER"
CHECKPOINT_VERSION = 1

OPTIMIZER_KINDS = ("adam", "sgd", "rmsprop", "adadelta", "adagrad")

# Kind-specific constants follow the optimizers' original papers.
_EPS_DEFAULTS = {"adam": 1e-8, "rmsprop": 1e-8, "adadelta": 1e-6, "adagrad": 1e-10, "sgd": 0.0}
_RHO_DEFAULTS = {"rmsprop": 0.99, "adadelta": 0.9}


# ---------------------------------------------------------------------------
# Functional ops
# ---------------------------------------------------------------------------

def _windows(x: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    # (C, OH, OW, kh, kw) view over all kernel placements
    if x.ndim != 3:
        raise ModelError(f"expected a (C, H, W) tensor, got shape {x.shape}")
    if kh > x.shape[1] or kw > x.shape[2]:
        raise ModelError(f"kernel ({kh}x{kw}) larger than input {x.shape[1:]} in conv/pool")
    if stride < 1:
        raise ModelError(f"stride must be >= 1, got {stride}")
    return sliding_window_view(x, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int = 1) -> np.ndarray:
    """Valid cross-correlation. x: (C, H, W); w: (F, C, kh, kw); b: (F,)."""
    if x.shape[0] != w.shape[1]:
        raise ModelError(f"conv input has {x.shape[0]} channels, kernel expects {w.shape[1]}")
    win = _windows(x, w.shape[2], w.shape[3], stride)
    return np.einsum("fckl,cijkl->fij", w, win, optimize=True) + b[:, None, None]


def conv2d_backward(
    x: np.ndarray, w: np.ndarray, stride: int, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of conv2d w.r.t. input, weights, bias."""
    kh, kw = w.shape[2], w.shape[3]
    win = _windows(x, kh, kw, stride)
    db = grad_out.sum(axis=(1, 2))
    dw = np.einsum("fij,cijkl->fckl", grad_out, win, optimize=True)
    dx = np.zeros_like(x)
    oh, ow = grad_out.shape[1], grad_out.shape[2]
    spread = np.einsum("fij,fckl->cijkl", grad_out, w, optimize=True)
    for ki in range(kh):
        for kj in range(kw):
            dx[:, ki : ki + oh * stride : stride, kj : kj + ow * stride : stride] += spread[
                :, :, :, ki, kj
            ]
    return dx, dw, db


def dense(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map. x: (in,); w: (out, in); b: (out,)."""
    if x.shape != (w.shape[1],):
        raise ModelError(f"dense expects input of width {w.shape[1]}, got shape {x.shape}")
    return w @ x + b


def dense_backward(
    x: np.ndarray, w: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return w.T @ grad_out, np.outer(grad_out, x), grad_out.copy()


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, grad_out, 0.0)


def maxpool2d(x: np.ndarray, k: int, stride: int | None = None) -> np.ndarray:
    """Max over k x k windows; stride defaults to k."""
    stride = k if stride is None else stride
    win = _windows(x, k, k, stride)
    return win.reshape(*win.shape[:3], -1).max(axis=-1)


def maxpool2d_backward(
    x: np.ndarray, k: int, stride: int | None, grad_out: np.ndarray
) -> np.ndarray:
    """Routes each window's gradient to its max; ties go to the lowest index."""
    stride = k if stride is None else stride
    win = _windows(x, k, k, stride)
    c, oh, ow = win.shape[:3]
    flat_idx = win.reshape(c, oh, ow, -1).argmax(axis=-1)  # argmax picks the first max
    ki, kj = flat_idx // k, flat_idx % k
    ci, oi, oj = np.meshgrid(np.arange(c), np.arange(oh), np.arange(ow), indexing="ij")
    dx = np.zeros_like(x)
    np.add.at(dx, (ci, oi * stride + ki, oj * stride + kj), grad_out)
    return dx


def flatten(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1)


def flatten_backward(in_shape: tuple[int, ...], grad_out: np.ndarray) -> np.ndarray:
    return grad_out.reshape(in_shape)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def softmax_cross_entropy(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Max-subtracted softmax; returns (-log p[label], p - one_hot(label))."""
    if not 0 <= label < len(logits):
        raise DataError(f"label {label} out of range for {len(logits)} classes")
    z = logits - logits.max()
    log_norm = np.log(np.exp(z).sum())
    loss = float(log_norm - z[label])
    grad = np.exp(z - log_norm)
    grad[label] -= 1.0
    return loss, grad


# ---------------------------------------------------------------------------
# Layer objects (single-example forward/backward with cached activations)
# ---------------------------------------------------------------------------

class Layer:
    """Base layer: stateless by default; parameterized layers carry params/grads."""

    params: list[np.ndarray]
    grads: list[np.ndarray]

    def __init__(self):
        self.params = []
        self.grads = []

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def out_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        raise NotImplementedError

    def zero_grads(self) -> None:
        for g in self.grads:
            g[...] = 0.0


class Conv2D(Layer):
    def __init__(self, in_channels: int, out_channels: int, kernel: int, stride: int = 1,
                 rng: np.random.Generator | None = None):
        super().__init__()
        self.in_channels, self.out_channels = in_channels, out_channels
        self.kernel, self.stride = kernel, stride
        fan_in = in_channels * kernel * kernel
        bound = np.sqrt(1.0 / fan_in)
        rng = rng or np.random.default_rng(0)
        self.w = rng.uniform(-bound, bound, size=(out_channels, in_channels, kernel, kernel))
        self.b = rng.uniform(-bound, bound, size=out_channels)
        self.params = [self.w, self.b]
        self.grads = [np.zeros_like(self.w), np.zeros_like(self.b)]
        self._x: np.ndarray | None = None

    def forward(self, x):
        self._x = x
        return conv2d(x, self.w, self.b, self.stride)

    def backward(self, grad_out):
        dx, dw, db = conv2d_backward(self._x, self.w, self.stride, grad_out)
        self.grads[0] += dw
        self.grads[1] += db
        return dx

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if c != self.in_channels:
            raise ModelError(f"conv expects {self.in_channels} channels, got {c}")
        if self.kernel > h or self.kernel > w:
            raise ModelError(f"kernel {self.kernel} larger than input {h}x{w}")
        oh = (h - self.kernel) // self.stride + 1
        ow = (w - self.kernel) // self.stride + 1
        return (self.out_channels, oh, ow)


class ReLU(Layer):
    def __init__(self):
        super().__init__()
        self._x = None

    def forward(self, x):
        self._x = x
        return relu(x)

    def backward(self, grad_out):
        return relu_backward(self._x, grad_out)

    def out_shape(self, in_shape):
        return in_shape


class MaxPool2D(Layer):
    def __init__(self, k: int, stride: int | None = None):
        super().__init__()
        self.k = k
        self.stride = k if stride is None else stride
        self._x = None

    def forward(self, x):
        self._x = x
        return maxpool2d(x, self.k, self.stride)

    def backward(self, grad_out):
        return maxpool2d_backward(self._x, self.k, self.stride, grad_out)

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if self.k > h or self.k > w:
            raise ModelError(f"pool window {self.k} larger than input {h}x{w}")
        return (c, (h - self.k) // self.stride + 1, (w - self.k) // self.stride + 1)


class Flatten(Layer):
    def __init__(self):
        super().__init__()
        self._shape = None

    def forward(self, x):
        self._shape = x.shape
        return flatten(x)

    def backward(self, grad_out):
        return flatten_backward(self._shape, grad_out)

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)


class Dense(Layer):
    def __init__(self, in_width: int, out_width: int, rng: np.random.Generator | None = None):
        super().__init__()
        self.in_width, self.out_width = in_width, out_width
        bound = np.sqrt(1.0 / in_width)
        rng = rng or np.random.default_rng(0)
        self.w = rng.uniform(-bound, bound, size=(out_width, in_width))
        self.b = rng.uniform(-bound, bound, size=out_width)
        self.params = [self.w, self.b]
        self.grads = [np.zeros_like(self.w), np.zeros_like(self.b)]
        self._x = None

    def forward(self, x):
        self._x = x
        return dense(x, self.w, self.b)

    def backward(self, grad_out):
        dx, dw, db = dense_backward(self._x, self.w, grad_out)
        self.grads[0] += dw
        self.grads[1] += db
        return dx

    def out_shape(self, in_shape):
        if in_shape != (self.in_width,):
            raise ModelError(f"dense expects shape ({self.in_width},), got {in_shape}")
        return (self.out_width,)


class Softmax(Layer):
    """Final activation for prediction; training uses softmax_cross_entropy on logits."""

    def __init__(self):
        super().__init__()
        self._y = None

    def forward(self, x):
        self._y = softmax(x)
        return self._y

    def backward(self, grad_out):
        y = self._y
        return y * (grad_out - grad_out @ y)

    def out_shape(self, in_shape):
        return in_shape


# ---------------------------------------------------------------------------
# Optimizers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerConfig:
    """One of Table-style {adam, sgd, rmsprop, adadelta, adagrad}.

    eps/rho of None resolve to the kind's default. Weight decay is classic
    coupled L2: wd * param is added to the gradient before the update rule.
    """

    kind: str
    learning_rate: float
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float | None = None
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ModelError(f"unknown optimizer {self.kind!r}; expected one of {OPTIMIZER_KINDS}")
        if self.learning_rate < 0:
            raise ModelError(f"learning rate must be >= 0, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ModelError(f"weight decay must be >= 0, got {self.weight_decay}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ModelError("Adam betas must lie in [0, 1)")

    @property
    def eps_value(self) -> float:
        return _EPS_DEFAULTS[self.kind] if self.eps is None else self.eps

    @property
    def rho_value(self) -> float:
        return _RHO_DEFAULTS.get(self.kind, 0.0) if self.rho is None else self.rho


def init_optimizer_state(params: list[np.ndarray]) -> dict:
    return {
        "t": 0,
        "m": [np.zeros_like(p) for p in params],
        "v": [np.zeros_like(p) for p in params],
        "u": [np.zeros_like(p) for p in params],
    }


def optimizer_step(
    state: dict, params: list[np.ndarray], grads: list[np.ndarray], config: OptimizerConfig
) -> tuple[list[np.ndarray], dict]:
    """One update over a parameter list; returns (new params, new state)."""
    if len(params) != len(grads):
        raise ModelError("params and grads must have matching lengths")
    lr, wd, eps, rho = (
        config.learning_rate, config.weight_decay, config.eps_value, config.rho_value,
    )
    t = state["t"] + 1
    new_params, new_m, new_v, new_u = [], [], [], []
    for p, g, m, v, u in zip(params, grads, state["m"], state["v"], state["u"]):
        if p.shape != g.shape:
            raise ModelError(f"param/grad shape mismatch: {p.shape} vs {g.shape}")
        g = g + wd * p if wd else g
        if config.kind == "sgd":
            p = p - lr * g
        elif config.kind == "adam":
            m = config.beta1 * m + (1 - config.beta1) * g
            v = config.beta2 * v + (1 - config.beta2) * g * g
            m_hat = m / (1 - config.beta1**t)
            v_hat = v / (1 - config.beta2**t)
            p = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        elif config.kind == "rmsprop":
            v = rho * v + (1 - rho) * g * g
            p = p - lr * g / (np.sqrt(v) + eps)
        elif config.kind == "adagrad":
            v = v + g * g
            p = p - lr * g / (np.sqrt(v) + eps)
        elif config.kind == "adadelta":
            v = rho * v + (1 - rho) * g * g
            step = -np.sqrt(u + eps) / np.sqrt(v + eps) * g
            u = rho * u + (1 - rho) * step * step
            p = p + lr * step
        new_params.append(p)
        new_m.append(m)
        new_v.append(v)
        new_u.append(u)
    return new_params, {"t": t, "m": new_m, "v": new_v, "u": new_u}


# ---------------------------------------------------------------------------
# Checkpoint I/O
# ---------------------------------------------------------------------------

def save_checkpoint(path, header: dict, arrays: list[np.ndarray]) -> None:
    header = dict(header)
    header["shapes"] = [list(a.shape) for a in arrays]
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(blob)))
        fh.write(blob)
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[dict, list[np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ModelError(f"not a qser checkpoint (magic {magic!r} at byte 0)")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != CHECKPOINT_VERSION:
            raise ModelError(f"unsupported checkpoint version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        arrays = []
        for shape in header["shapes"]:
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise ModelError("checkpoint truncated while reading parameter arrays")
            arrays.append(np.frombuffer(raw, dtype="<f8").astype(float).reshape(shape))
    return header, arrays
