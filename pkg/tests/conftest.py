"""Shared test helpers: random circuit generation and finite differences."""

import numpy as np
import pytest

from qser.qstate import CircuitSpec, GateOp

SINGLE_KINDS = ("RX", "RY", "RZ", "ROT3", "H", "X", "Z")
ALL_KINDS = SINGLE_KINDS + ("CNOT", "CPHASE")


def random_circuit(rng: np.random.Generator, n_qubits: int, n_gates: int,
                   trainable: bool = False) -> tuple[CircuitSpec, np.ndarray]:
    """A random gate list over the full gate set; returns (spec, bound params).

    With trainable=True, every rotation angle becomes a trainable slot and
    the returned params vector carries its value.
    """
    gates = []
    slots = []
    params = []
    for _ in range(n_gates):
        kind = ALL_KINDS[rng.integers(len(ALL_KINDS))]
        if kind in ("CNOT", "CPHASE") and n_qubits < 2:
            kind = "RX"
        if kind in ("CNOT", "CPHASE"):
            control = int(rng.integers(n_qubits))
            target = (control + 1 + int(rng.integers(n_qubits - 1))) % n_qubits
            angle = (float(rng.uniform(0, 2 * np.pi)),) if kind == "CPHASE" else ()
            gates.append(GateOp(kind, (control, target), angle))
        else:
            wire = int(rng.integers(n_qubits))
            n_angles = {"ROT3": 3, "RX": 1, "RY": 1, "RZ": 1}.get(kind, 0)
            angles = tuple(float(a) for a in rng.uniform(0, 2 * np.pi, n_angles))
            if trainable and n_angles:
                for s in range(n_angles):
                    slots.append((len(gates), s))
                    params.append(angles[s])
            gates.append(GateOp(kind, (wire,), angles))
    return CircuitSpec(n_qubits, tuple(gates), tuple(slots)), np.array(params)


def random_state(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return amps / np.linalg.norm(amps)


def central_diff(f, x: np.ndarray, h: float) -> np.ndarray:
    """Central finite-difference gradient of scalar f at x."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        bumped = x.copy()
        bumped.flat[i] += h
        hi = f(bumped)
        bumped.flat[i] = x.flat[i] - h
        lo = f(bumped)
        grad.flat[i] = (hi - lo) / (2 * h)
    return grad


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
