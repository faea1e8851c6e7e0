"""Model assembly: the hybrid classical-quantum network and its classical twin.

Shared chain:

    Conv2D(16, 5x5, stride 3) -> ReLU -> MaxPool(2x2)
    -> Conv2D(32, 3x3, stride 3) -> ReLU -> MaxPool(2x2) -> Flatten
    -> adaptor -> [quantum layer | dense surrogate] -> Dense(n_classes) -> Softmax

The adaptor is a trainable dense projection onto the quantum input width
(n_qubits for angle/IQP embeddings, 2^n_qubits for amplitude), followed for
angle/IQP by an elementwise sigmoid scaled to [0, pi] so encoder angles
cannot alias. The classical twin keeps the CNN front end and adaptor
(width 256) but swaps the quantum layer for a parameter-heavy 256-wide dense
surrogate with ReLU. Both models share bit-identical CNN-prefix
initialization under the same seed, isolating the quantum block's effect.

Conv strides are 3 so the flattened width stays small enough for the
hybrid/classical trainable-parameter ratio to sit under 0.55 for every
embedding, honoring the >50% parameter-reduction target by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embed import AmplitudeEmbedding
from .errors import ModelError
from .measure import Measurement
from .nn import Conv2D, Dense, Flatten, Layer, MaxPool2D, ReLU, Softmax
from .qgrad import QuantumLayerConfig, init_params, input_grad, n_trainable_params, param_shift_grad, quantum_forward
from .seeds import rng_stream


@dataclass(frozen=True)
class ModelDims:
    """Reference architecture knobs (all overridable via run configs)."""

    conv_channels: tuple[int, int] = (16, 32)
    conv_kernels: tuple[int, int] = (5, 3)
    conv_strides: tuple[int, int] = (3, 3)
    pool: int = 2
    surrogate_width: int = 256
    classical_adaptor_width: int = 256


class AngleRescale(Layer):
    """Elementwise pi * sigmoid(x): bounds adaptor outputs to [0, pi] angles."""

    def __init__(self):
        super().__init__()
        self._s = None

    def forward(self, x):
        self._s = 1.0 / (1.0 + np.exp(-x))
        return np.pi * self._s

    def backward(self, grad_out):
        return grad_out * np.pi * self._s * (1.0 - self._s)

    def out_shape(self, in_shape):
        return in_shape


class QuantumBlock(Layer):
    """Quantum layer wrapper: embed -> circuit -> measure with shift-rule grads."""

    def __init__(self, config: QuantumLayerConfig, rng: np.random.Generator):
        super().__init__()
        self.config = config
        self.theta = init_params(config, rng)
        self.params = [self.theta]
        self.grads = [np.zeros_like(self.theta)]
        self._x = None

    def forward(self, x):
        self._x = x
        return quantum_forward(x, self.theta, self.config)

    def backward(self, grad_out):
        self.grads[0] += param_shift_grad(self._x, self.theta, self.config, grad_out)
        return input_grad(self._x, self.theta, self.config, grad_out)

    def out_shape(self, in_shape):
        if in_shape != (self.config.input_width,):
            raise ModelError(
                f"quantum layer expects shape ({self.config.input_width},), got {in_shape}"
            )
        return (self.config.output_width,)


@dataclass
class ModelDef:
    """A shape-checked layer chain plus metadata for checkpoints and reports."""

    layers: list[Layer]
    input_shape: tuple[int, int, int]
    n_classes: int
    kind: str  # "hybrid" or "classical"
    quantum: QuantumLayerConfig | None = None
    dims: ModelDims = field(default_factory=ModelDims)
    seed: int = 0

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Logits for one example (softmax layer excluded; used for training/eval)."""
        for layer in self.layers[:-1]:
            x = layer.forward(x)
        return x

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self.layers[-1].forward(self.forward(x))

    def backward(self, grad_logits: np.ndarray) -> np.ndarray:
        grad = grad_logits
        for layer in reversed(self.layers[:-1]):
            grad = layer.backward(grad)
        return grad

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads]

    def set_parameters(self, new_params: list[np.ndarray]) -> None:
        flat = list(new_params)
        if len(flat) != len(self.parameters()):
            raise ModelError("parameter list length mismatch")
        i = 0
        for layer in self.layers:
            for slot in range(len(layer.params)):
                if layer.params[slot].shape != flat[i].shape:
                    raise ModelError(
                        f"parameter shape mismatch: {layer.params[slot].shape} vs {flat[i].shape}"
                    )
                layer.params[slot][...] = flat[i]
                i += 1

    def zero_grads(self) -> None:
        for layer in self.layers:
            layer.zero_grads()


def _cnn_front(input_shape, dims: ModelDims, rng) -> tuple[list[Layer], tuple[int, ...]]:
    c1, c2 = dims.conv_channels
    k1, k2 = dims.conv_kernels
    s1, s2 = dims.conv_strides
    layers: list[Layer] = [
        Conv2D(input_shape[0], c1, k1, s1, rng=rng),
        ReLU(),
        MaxPool2D(dims.pool),
        Conv2D(c1, c2, k2, s2, rng=rng),
        ReLU(),
        MaxPool2D(dims.pool),
        Flatten(),
    ]
    shape = tuple(input_shape)
    for layer in layers:
        shape = layer.out_shape(shape)
    return layers, shape


def _check_chain(model: ModelDef) -> None:
    shape = tuple(model.input_shape)
    for layer in model.layers:
        shape = layer.out_shape(shape)
    if shape != (model.n_classes,):
        raise ModelError(f"model produces shape {shape}, expected ({model.n_classes},)")


def build_hybrid(
    quantum: QuantumLayerConfig,
    input_shape: tuple[int, int, int],
    n_classes: int,
    seed: int = 0,
    dims: ModelDims = ModelDims(),
) -> ModelDef:
    """CNN front end -> adaptor -> quantum layer -> classifier."""
    if quantum is None:
        raise ModelError("build_hybrid needs a quantum layer config")
    rng = rng_stream(seed, "init")
    layers, shape = _cnn_front(input_shape, dims, rng)
    flat_width = shape[0]
    layers.append(Dense(flat_width, quantum.input_width, rng=rng))
    if not isinstance(quantum.embedding, AmplitudeEmbedding):
        layers.append(AngleRescale())
    layers.append(QuantumBlock(quantum, rng))
    layers.append(Dense(quantum.output_width, n_classes, rng=rng))
    layers.append(Softmax())
    model = ModelDef(layers, tuple(input_shape), n_classes, "hybrid", quantum, dims, seed)
    _check_chain(model)
    return model


def build_classical(
    input_shape: tuple[int, int, int],
    n_classes: int,
    seed: int = 0,
    dims: ModelDims = ModelDims(),
) -> ModelDef:
    """Identical CNN front end; dense surrogate in place of the quantum layer."""
    rng = rng_stream(seed, "init")
    layers, shape = _cnn_front(input_shape, dims, rng)
    flat_width = shape[0]
    layers.append(Dense(flat_width, dims.classical_adaptor_width, rng=rng))
    layers.append(Dense(dims.classical_adaptor_width, dims.surrogate_width, rng=rng))
    layers.append(ReLU())
    layers.append(Dense(dims.surrogate_width, n_classes, rng=rng))
    layers.append(Softmax())
    model = ModelDef(layers, tuple(input_shape), n_classes, "classical", None, dims, seed)
    _check_chain(model)
    return model


def count_params(model: ModelDef) -> int:
    """Total trainable scalars, classical weights plus quantum angles."""
    return int(sum(p.size for p in model.parameters()))
