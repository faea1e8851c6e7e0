"""Differentiable quantum layer: embed -> circuit -> measure, with gradients.

Parameter gradients use the two-point parameter-shift rule, exact for every
trainable gate in this package (all are half-angle Pauli rotations):

    df/dt = (f(t + pi/2) - f(t - pi/2)) / 2

Input gradients reuse the same rule on the encoder angles for Angle and IQP
embeddings (IQP pair phases f_i * f_j contribute through the chain rule; the
diagonal CPHASE generator admits the identical two-point shift). Amplitude
embedding has no angle structure, so its input gradient falls back to central
finite differences on the raw, pre-normalization features.

Each shifted evaluation is a complete, independent forward pass (two per
parameter); evaluations are advanced through the gate sequence together as a
batch of statevector rows, which changes nothing numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .embed import AmplitudeEmbedding, AngleEmbedding, EmbeddingKind, amplitude_embed, embedding_ops, input_width
from .errors import LayerError
from .measure import Measurement, measure_batch, output_width
from .qcircuit import CircuitKind, StronglyEntangling, build_circuit
from .qstate import CircuitSpec, apply_gates_batch, bind_params, gate_base_angles

_SHIFT = np.pi / 2
_AMPLITUDE_FD_STEP = 1e-6


@dataclass(frozen=True)
class QuantumLayerConfig:
    """Quantum-layer hyperparameters: register size, encoder, ansatz, readout."""

    n_qubits: int = 8
    embedding: EmbeddingKind = field(default_factory=AngleEmbedding)
    circuit: CircuitKind = field(default_factory=StronglyEntangling)
    measurement: Measurement = Measurement.PAULI_Z

    @property
    def input_width(self) -> int:
        return input_width(self.embedding, self.n_qubits)

    @property
    def output_width(self) -> int:
        return output_width(self.measurement, self.n_qubits)


@lru_cache(maxsize=None)
def circuit_spec(kind: CircuitKind | CircuitSpec, n_qubits: int) -> CircuitSpec:
    # config.circuit is usually a builder kind, but a literal CircuitSpec is
    # accepted for custom ansatze (its trainable gates must be RX/RY/RZ/ROT3
    # for the shift rule to stay exact; the builders only emit those).
    if isinstance(kind, CircuitSpec):
        if kind.n_qubits != n_qubits:
            raise LayerError(
                f"circuit is for {kind.n_qubits} qubits, layer has {n_qubits}"
            )
        return kind
    return build_circuit(kind, n_qubits)


def n_trainable_params(config: QuantumLayerConfig) -> int:
    return circuit_spec(config.circuit, config.n_qubits).n_params


def init_params(config: QuantumLayerConfig, rng: np.random.Generator) -> np.ndarray:
    """Trainable angles drawn uniformly from [0, 2*pi)."""
    return rng.uniform(0.0, 2.0 * np.pi, size=n_trainable_params(config))


@dataclass
class _Pipeline:
    """One embed+circuit evaluation plan shared by a batch of shifted runs."""

    features: np.ndarray
    params: np.ndarray
    init_amps: np.ndarray  # (2^n,)
    gates: tuple  # embedding gates followed by circuit gates
    angles: np.ndarray  # (n_gates, 3) baked angle table
    param_pos: list[tuple[int, int]]  # trainable param -> (gate index, slot)
    sens: list | None  # embedding FeatureGates (None for amplitude)


def _prepare(features, params, config: QuantumLayerConfig) -> _Pipeline:
    features = np.asarray(features, dtype=float)
    params = np.asarray(params, dtype=float)
    if features.shape != (config.input_width,):
        raise LayerError(
            f"quantum layer expects input width {config.input_width}, "
            f"got shape {features.shape}"
        )
    spec = circuit_spec(config.circuit, config.n_qubits)
    if params.shape != (spec.n_params,):
        raise LayerError(
            f"circuit expects {spec.n_params} parameter(s), got shape {params.shape}"
        )
    init, embed_gates, sens = embedding_ops(features, config.embedding, config.n_qubits)
    circuit_gates = bind_params(spec, params)
    gates = tuple(embed_gates) + circuit_gates
    offset = len(embed_gates)
    param_pos = [(offset + gi, slot) for gi, slot in spec.param_slots]
    return _Pipeline(
        features, params, init.amps, gates, gate_base_angles(gates), param_pos, sens
    )


def _evaluate_rows(pipe: _Pipeline, config: QuantumLayerConfig,
                   angles: np.ndarray, init_rows: np.ndarray | None = None) -> np.ndarray:
    if init_rows is None:
        init_rows = np.broadcast_to(pipe.init_amps, (angles.shape[0], pipe.init_amps.size))
    amps = np.array(init_rows, dtype=complex, copy=True)
    apply_gates_batch(amps, pipe.gates, config.n_qubits, angles)
    return measure_batch(amps, config.n_qubits, config.measurement)


def quantum_forward(features, params, config: QuantumLayerConfig) -> np.ndarray:
    """measure(apply_circuit(embed(features), params), config.measurement)."""
    pipe = _prepare(features, params, config)
    return _evaluate_rows(pipe, config, pipe.angles[None, :, :])[0]


def param_shift_grad(features, params, config: QuantumLayerConfig, upstream) -> np.ndarray:
    """d(upstream . output)/d(params) by the two-point parameter-shift rule."""
    pipe = _prepare(features, params, config)
    upstream = _check_upstream(upstream, config)
    n_params = len(pipe.param_pos)
    if n_params == 0:
        return np.zeros(0)
    angles = np.repeat(pipe.angles[None, :, :], 2 * n_params, axis=0)
    for j, (gi, slot) in enumerate(pipe.param_pos):
        angles[2 * j, gi, slot] += _SHIFT
        angles[2 * j + 1, gi, slot] -= _SHIFT
    out = _evaluate_rows(pipe, config, angles)
    return (out[0::2] - out[1::2]) / 2.0 @ upstream


def input_grad(features, params, config: QuantumLayerConfig, upstream) -> np.ndarray:
    """d(upstream . output)/d(features).

    Angle/IQP: parameter-shift on each encoder angle, chained through
    d(angle)/d(feature). Amplitude: central finite differences (h = 1e-6)
    on the raw features.
    """
    pipe = _prepare(features, params, config)
    upstream = _check_upstream(upstream, config)
    n_features = len(pipe.features)
    grad = np.zeros(n_features)

    if isinstance(config.embedding, AmplitudeEmbedding):
        h = _AMPLITUDE_FD_STEP
        inits = np.empty((2 * n_features, pipe.init_amps.size), dtype=complex)
        for i in range(n_features):
            bumped = pipe.features.copy()
            bumped[i] += h
            inits[2 * i] = amplitude_embed(bumped, config.n_qubits).amps
            bumped[i] = pipe.features[i] - h
            inits[2 * i + 1] = amplitude_embed(bumped, config.n_qubits).amps
        angles = np.repeat(pipe.angles[None, :, :], 2 * n_features, axis=0)
        out = _evaluate_rows(pipe, config, angles, init_rows=inits)
        return (out[0::2] - out[1::2]) / (2.0 * h) @ upstream

    if not pipe.sens:
        return grad
    angles = np.repeat(pipe.angles[None, :, :], 2 * len(pipe.sens), axis=0)
    for k, fg in enumerate(pipe.sens):
        angles[2 * k, fg.gate_index, 0] += _SHIFT
        angles[2 * k + 1, fg.gate_index, 0] -= _SHIFT
    out = _evaluate_rows(pipe, config, angles)
    dangle = (out[0::2] - out[1::2]) / 2.0 @ upstream
    for k, fg in enumerate(pipe.sens):
        for feature_index, coeff in fg.sensitivities:
            grad[feature_index] += coeff * dangle[k]
    return grad


def _check_upstream(upstream, config: QuantumLayerConfig) -> np.ndarray:
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != (config.output_width,):
        raise LayerError(
            f"upstream gradient must have width {config.output_width}, "
            f"got shape {upstream.shape}"
        )
    return upstream
