"""Classical-to-quantum feature embeddings.

Three encoders turn a real feature vector into a quantum state:

* Angle: one rotation per qubit, R_axis(features[i]) on qubit i.
* Amplitude: features zero-padded to 2^n, L2-normalized, written directly
  as amplitudes.
* IQP: per repeat, H on every qubit, RZ(f_i) on each qubit, then
  CPHASE(f_i * f_j) on every ordered pair i < j.

Features are taken as raw angles: no clamping or range mapping happens here
(the model adaptor owns range control). Angle/IQP embeddings also expose
their gate list together with d(angle)/d(feature) coefficients so the
gradient module can parameter-shift through the encoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmbeddingError
from .qstate import GateOp, StateVector, _apply_gate_inplace, new_zero_state

ANGLE_AXES = ("X", "Y", "Z")


@dataclass(frozen=True)
class AngleEmbedding:
    axis: str = "X"

    def __post_init__(self):
        if self.axis not in ANGLE_AXES:
            raise ConfigError(f"angle axis must be one of {ANGLE_AXES}, got {self.axis!r}")


@dataclass(frozen=True)
class AmplitudeEmbedding:
    pass


@dataclass(frozen=True)
class IQPEmbedding:
    repeats: int = 1

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError(f"IQP repeats must be >= 1, got {self.repeats}")


EmbeddingKind = AngleEmbedding | AmplitudeEmbedding | IQPEmbedding


def input_width(kind: EmbeddingKind, n_qubits: int) -> int:
    """Feature-vector length the embedding expects on `n_qubits` qubits."""
    return 2**n_qubits if isinstance(kind, AmplitudeEmbedding) else n_qubits


# A gate whose angle depends on the input features: gate list position plus
# the nonzero partial derivatives d(angle)/d(feature_i) at the current input.
@dataclass(frozen=True)
class FeatureGate:
    gate_index: int
    sensitivities: tuple[tuple[int, float], ...]


def angle_gates(features: np.ndarray, axis: str = "X") -> list[GateOp]:
    kind = {"X": "RX", "Y": "RY", "Z": "RZ"}[axis]
    return [GateOp(kind, (i,), (float(f),)) for i, f in enumerate(features)]


def iqp_gates(features: np.ndarray, repeats: int = 1) -> list[GateOp]:
    n = len(features)
    gates: list[GateOp] = []
    for _ in range(repeats):
        gates.extend(GateOp("H", (i,)) for i in range(n))
        gates.extend(GateOp("RZ", (i,), (float(features[i]),)) for i in range(n))
        for i in range(n):
            for j in range(i + 1, n):
                gates.append(GateOp("CPHASE", (i, j), (float(features[i] * features[j]),)))
    return gates


def _as_features(features, what: str, expected_len: int | None = None) -> np.ndarray:
    arr = np.asarray(features, dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise EmbeddingError(f"{what} expects a non-empty 1-D feature vector, got shape {arr.shape}")
    if expected_len is not None and len(arr) != expected_len:
        raise EmbeddingError(
            f"{what} expects a length-{expected_len} feature vector, got length {len(arr)}"
        )
    if not np.isfinite(arr).all():
        raise EmbeddingError(f"{what} features must be finite")
    return arr


def angle_embed(features, axis: str = "X") -> StateVector:
    """R_axis(features[i]) applied to qubit i of |0...0>; n_qubits = len(features)."""
    if axis not in ANGLE_AXES:
        raise ConfigError(f"angle axis must be one of {ANGLE_AXES}, got {axis!r}")
    arr = _as_features(features, "angle embedding")
    state = new_zero_state(len(arr))
    for gate in angle_gates(arr, axis):
        _apply_gate_inplace(state.amps, gate, state.n_qubits)
    return state


def amplitude_embed(features, n_qubits: int) -> StateVector:
    """Features zero-padded to 2^n and L2-normalized as real amplitudes."""
    arr = np.asarray(features, dtype=float)
    if arr.ndim != 1 or not 1 <= len(arr) <= 2**n_qubits:
        raise EmbeddingError(
            f"amplitude embedding takes 1..{2**n_qubits} features, got shape {arr.shape}"
        )
    if not np.isfinite(arr).all():
        raise EmbeddingError("amplitude embedding features must be finite")
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise EmbeddingError("amplitude embedding is undefined for an all-zero input")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[: len(arr)] = arr / norm
    return StateVector(n_qubits, amps)


def iqp_embed(features, repeats: int = 1) -> StateVector:
    """Diagonal-phase embedding: (H^n, RZ(f_i), CPHASE(f_i f_j)) x repeats."""
    if repeats < 1:
        raise ConfigError(f"IQP repeats must be >= 1, got {repeats}")
    arr = _as_features(features, "IQP embedding")
    state = new_zero_state(len(arr))
    for gate in iqp_gates(arr, repeats):
        _apply_gate_inplace(state.amps, gate, state.n_qubits)
    return state


def embed(features, kind: EmbeddingKind, n_qubits: int) -> StateVector:
    """Dispatch on the embedding kind; validates the feature width."""
    arr = np.asarray(features, dtype=float)
    if isinstance(kind, AngleEmbedding):
        _as_features(arr, "angle embedding", n_qubits)
        return angle_embed(arr, kind.axis)
    if isinstance(kind, AmplitudeEmbedding):
        if arr.ndim != 1 or len(arr) != 2**n_qubits:
            raise EmbeddingError(
                f"amplitude embedding expects {2**n_qubits} features, got shape {arr.shape}"
            )
        return amplitude_embed(arr, n_qubits)
    if isinstance(kind, IQPEmbedding):
        _as_features(arr, "IQP embedding", n_qubits)
        return iqp_embed(arr, kind.repeats)
    raise ConfigError(f"unknown embedding kind {kind!r}")


def embedding_ops(
    features: np.ndarray, kind: EmbeddingKind, n_qubits: int
) -> tuple[StateVector, list[GateOp], list[FeatureGate] | None]:
    """Embedding as (initial state, gate list, feature-gate sensitivities).

    Angle/IQP return |0...0> plus their encoder gates and, for each
    feature-dependent gate, the chain-rule coefficients needed by the
    parameter-shift input gradient. Amplitude returns the embedded state with
    an empty gate list and None (its input gradient path is finite
    differences on the raw features).
    """
    arr = np.asarray(features, dtype=float)
    if isinstance(kind, AmplitudeEmbedding):
        return amplitude_embed(arr, n_qubits), [], None
    if isinstance(kind, AngleEmbedding):
        arr = _as_features(arr, "angle embedding", n_qubits)
        gates = angle_gates(arr, kind.axis)
        sens = [FeatureGate(i, ((i, 1.0),)) for i in range(n_qubits)]
        return new_zero_state(n_qubits), gates, sens
    if isinstance(kind, IQPEmbedding):
        arr = _as_features(arr, "IQP embedding", n_qubits)
        gates = iqp_gates(arr, kind.repeats)
        sens: list[FeatureGate] = []
        pos = 0
        for _ in range(kind.repeats):
            pos += n_qubits  # H wall carries no angles
            for i in range(n_qubits):
                sens.append(FeatureGate(pos, ((i, 1.0),)))
                pos += 1
            for i in range(n_qubits):
                for j in range(i + 1, n_qubits):
                    # angle = f_i * f_j, so d(angle)/df_i = f_j and vice versa
                    sens.append(FeatureGate(pos, ((i, float(arr[j])), (j, float(arr[i])))))
                    pos += 1
        return new_zero_state(n_qubits), gates, sens
    raise ConfigError(f"unknown embedding kind {kind!r}")
