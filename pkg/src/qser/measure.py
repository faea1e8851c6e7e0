"""Quantum measurements: project statevectors onto classical feature vectors.

Five schemes are supported. All are exact (no shot sampling) so the forward
pass stays deterministic and differentiable:

* PauliZ   - per-qubit <Z_i>, in [-1, 1]
* PauliX   - per-qubit <X_i>, in [-1, 1]
* ZProb    - per-qubit probability of measuring |1>, i.e. (1 - <Z_i>) / 2
* ZPlusPauliZ - elementwise ZProb + PauliZ = (1 + <Z_i>) / 2
* Probability - full Born-rule distribution |amps|^2 over 2^n basis states

Output width is n_qubits for every scheme except Probability (2^n).
"""

from __future__ import annotations

from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import ConfigError
from .qstate import StateVector, _H_MATRIX, _apply_single


class Measurement(str, Enum):
    PAULI_Z = "pauliz"
    PAULI_X = "paulix"
    Z_PROB = "zprob"
    Z_PLUS_PAULI_Z = "z_plus_pauliz"
    PROBABILITY = "probability"


def output_width(kind: Measurement, n_qubits: int) -> int:
    return 2**n_qubits if kind is Measurement.PROBABILITY else n_qubits


@lru_cache(maxsize=None)
def _z_signs(n: int) -> np.ndarray:
    # row i holds +1/-1 per basis index depending on bit i (qubit 0 = MSB)
    idx = np.arange(2**n)
    bits = (idx[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    return 1.0 - 2.0 * bits


def probabilities(state: StateVector) -> np.ndarray:
    """Born-rule probabilities |amps[b]|^2 for every basis index b."""
    amps = state.amps
    return amps.real**2 + amps.imag**2


def expect_pauliz(state: StateVector) -> np.ndarray:
    """<Z_i> for each qubit i: +1 weight where bit i is 0, -1 where it is 1."""
    return _z_signs(state.n_qubits) @ probabilities(state)


def expect_paulix(state: StateVector) -> np.ndarray:
    """<X_i> for each qubit i, via the off-diagonal amplitude pairing."""
    n = state.n_qubits
    out = np.empty(n)
    for q in range(n):
        view = state.amps.reshape(2**q, 2, 2 ** (n - 1 - q))
        out[q] = 2.0 * np.sum(view[:, 0, :].conj() * view[:, 1, :]).real
    return out


def expect_paulix_via_hadamard(state: StateVector) -> np.ndarray:
    """<X_i> computed as <Z_i> after rotating qubit i with H (cross-check path)."""
    n = state.n_qubits
    out = np.empty(n)
    for q in range(n):
        amps = state.amps.copy()
        _apply_single(amps, _H_MATRIX, q, n)
        out[q] = float(_z_signs(n)[q] @ (amps.real**2 + amps.imag**2))
    return out


def prob_one_z(state: StateVector) -> np.ndarray:
    """Per-qubit probability of outcome |1>: (1 - <Z_i>) / 2."""
    return (1.0 - expect_pauliz(state)) / 2.0


def measure(state: StateVector, kind: Measurement) -> np.ndarray:
    if kind is Measurement.PAULI_Z:
        return expect_pauliz(state)
    if kind is Measurement.PAULI_X:
        return expect_paulix(state)
    if kind is Measurement.Z_PROB:
        return prob_one_z(state)
    if kind is Measurement.Z_PLUS_PAULI_Z:
        return prob_one_z(state) + expect_pauliz(state)
    if kind is Measurement.PROBABILITY:
        return probabilities(state)
    raise ConfigError(f"unknown measurement kind {kind!r}")


def measure_batch(amps: np.ndarray, n_qubits: int, kind: Measurement) -> np.ndarray:
    """Measurement over a batch of statevector rows: (B, 2^n) -> (B, width)."""
    probs = amps.real**2 + amps.imag**2
    if kind is Measurement.PROBABILITY:
        return probs
    if kind is Measurement.PAULI_X:
        b = amps.shape[0]
        out = np.empty((b, n_qubits))
        for q in range(n_qubits):
            view = amps.reshape(b, 2**q, 2, 2 ** (n_qubits - 1 - q))
            out[:, q] = 2.0 * np.sum(view[:, :, 0, :].conj() * view[:, :, 1, :], axis=(1, 2)).real
        return out
    z = probs @ _z_signs(n_qubits).T
    if kind is Measurement.PAULI_Z:
        return z
    if kind is Measurement.Z_PROB:
        return (1.0 - z) / 2.0
    if kind is Measurement.Z_PLUS_PAULI_Z:
        return (1.0 + z) / 2.0
    raise ConfigError(f"unknown measurement kind {kind!r}")
