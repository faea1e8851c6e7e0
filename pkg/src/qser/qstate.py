"""Dense statevector simulation kernel.

Conventions (used by every module in the package):

* Basis ordering: basis index ``b = sum_i q_i * 2**(n-1-i)``, i.e. qubit 0 is
  the most significant bit. ``|10>`` on two qubits is index 2.
* Gate matrices follow the half-angle convention: ``RX(t) = exp(-i t X / 2)``
  and likewise for RY/RZ. ``ROT3(a, b, c)`` applies RZ(a), then RY(b), then
  RZ(c) (matrix product ``RZ(c) @ RY(b) @ RZ(a)``). ``CPHASE(t)`` multiplies
  the ``|11>`` amplitude of its wire pair by ``exp(i t)``.
* Amplitudes are contiguous complex128; gates are applied by stride iteration
  over amplitude pairs, O(2^n) per gate. The only full-matrix construction
  lives in `dense_unitary`, the test oracle.

All operations are pure: inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CircuitError, ConfigError

MAX_QUBITS = 12
MAX_DENSE_QUBITS = 6

GATE_KINDS = ("RX", "RY", "RZ", "ROT3", "H", "X", "Z", "CNOT", "CPHASE")
TWO_QUBIT_KINDS = ("CNOT", "CPHASE")
PARAM_COUNTS = {
    "RX": 1, "RY": 1, "RZ": 1, "ROT3": 3,
    "H": 0, "X": 0, "Z": 0, "CNOT": 0, "CPHASE": 1,
}

_SQRT2_INV = 1.0 / np.sqrt(2.0)
_H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV
_X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
_Z_MATRIX = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class GateOp:
    """One gate: kind, target wires, and bound angle parameters (radians)."""

    kind: str
    wires: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        expected_wires = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.wires) != expected_wires:
            raise CircuitError(
                f"{self.kind} takes {expected_wires} wire(s), got {self.wires}"
            )
        if len(set(self.wires)) != len(self.wires):
            raise CircuitError(f"{self.kind} wires must be distinct, got {self.wires}")
        if len(self.params) != PARAM_COUNTS[self.kind]:
            raise CircuitError(
                f"{self.kind} takes {PARAM_COUNTS[self.kind]} parameter(s), "
                f"got {len(self.params)}"
            )
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))


@dataclass(frozen=True)
class CircuitSpec:
    """Ordered gate list plus the map from trainable-parameter position to gate slot.

    ``param_slots[p] == (gate_index, slot)`` means trainable parameter p fills
    ``gates[gate_index].params[slot]`` when the circuit is applied.
    """

    n_qubits: int
    gates: tuple[GateOp, ...]
    param_slots: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "param_slots", tuple(self.param_slots))
        for gate in self.gates:
            for w in gate.wires:
                if not 0 <= w < self.n_qubits:
                    raise CircuitError(
                        f"wire {w} out of range for {self.n_qubits}-qubit circuit"
                    )
        seen = set()
        for gi, slot in self.param_slots:
            if not 0 <= gi < len(self.gates):
                raise CircuitError(f"param slot refers to missing gate {gi}")
            if not 0 <= slot < len(self.gates[gi].params):
                raise CircuitError(f"gate {gi} has no parameter slot {slot}")
            if (gi, slot) in seen:
                raise CircuitError(f"gate {gi} slot {slot} mapped twice")
            seen.add((gi, slot))

    @property
    def n_params(self) -> int:
        return len(self.param_slots)


@dataclass
class StateVector:
    """Complex amplitudes over the 2^n computational basis states."""

    n_qubits: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (2**self.n_qubits,):
            raise ConfigError(
                f"amplitude array must have length {2**self.n_qubits}, "
                f"got shape {self.amps.shape}"
            )
        if not np.isfinite(self.amps).all():
            raise ConfigError("amplitudes must be finite")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())


def new_zero_state(n_qubits: int) -> StateVector:
    """|0...0> on `n_qubits` qubits."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    e = np.exp(-0.5j * theta)
    return np.array([[e, 0], [0, np.conj(e)]])


def single_qubit_matrix(kind: str, params: tuple[float, ...]) -> np.ndarray:
    """2x2 matrix of a single-qubit gate kind under the package conventions."""
    if kind == "RX":
        return _rx(params[0])
    if kind == "RY":
        return _ry(params[0])
    if kind == "RZ":
        return _rz(params[0])
    if kind == "ROT3":
        a, b, c = params
        return _rz(c) @ _ry(b) @ _rz(a)
    if kind == "H":
        return _H_MATRIX
    if kind == "X":
        return _X_MATRIX
    if kind == "Z":
        return _Z_MATRIX
    raise CircuitError(f"{kind} is not a single-qubit gate")


def _apply_single(amps: np.ndarray, mat: np.ndarray, wire: int, n: int) -> None:
    # qubit 0 is the MSB, so wire q splits the index as (left=2^q, 2, right=2^(n-1-q))
    view = amps.reshape(2**wire, 2, 2 ** (n - 1 - wire))
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    view[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1


def _pair_index(n: int, control: int, target: int, cv: int, tv: int):
    idx: list = [slice(None)] * n
    idx[control], idx[target] = cv, tv
    return tuple(idx)


def _apply_cnot(amps: np.ndarray, control: int, target: int, n: int) -> None:
    view = amps.reshape((2,) * n)
    i10 = _pair_index(n, control, target, 1, 0)
    i11 = _pair_index(n, control, target, 1, 1)
    tmp = view[i10].copy()
    view[i10] = view[i11]
    view[i11] = tmp


def _apply_cphase(amps: np.ndarray, control: int, target: int, theta: float, n: int) -> None:
    view = amps.reshape((2,) * n)
    view[_pair_index(n, control, target, 1, 1)] *= np.exp(1j * theta)


def _check_gate(gate: GateOp, n_qubits: int) -> None:
    for w in gate.wires:
        if not 0 <= w < n_qubits:
            raise CircuitError(f"wire {w} out of range for {n_qubits} qubits")


def _apply_gate_inplace(amps: np.ndarray, gate: GateOp, n: int) -> None:
    if gate.kind == "CNOT":
        _apply_cnot(amps, gate.wires[0], gate.wires[1], n)
    elif gate.kind == "CPHASE":
        _apply_cphase(amps, gate.wires[0], gate.wires[1], gate.params[0], n)
    else:
        _apply_single(amps, single_qubit_matrix(gate.kind, gate.params), gate.wires[0], n)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Apply one gate; returns a new StateVector."""
    _check_gate(gate, state.n_qubits)
    amps = state.amps.copy()
    _apply_gate_inplace(amps, gate, state.n_qubits)
    return StateVector(state.n_qubits, amps)


def bind_params(circuit: CircuitSpec, params: np.ndarray) -> tuple[GateOp, ...]:
    """Gate list with trainable slots filled from `params` (length must match)."""
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.n_params,):
        raise CircuitError(
            f"circuit expects {circuit.n_params} parameter(s), got shape {params.shape}"
        )
    if circuit.n_params == 0:
        return circuit.gates
    fills: dict[int, dict[int, float]] = {}
    for p, (gi, slot) in enumerate(circuit.param_slots):
        fills.setdefault(gi, {})[slot] = float(params[p])
    gates = list(circuit.gates)
    for gi, slots in fills.items():
        gate = gates[gi]
        new_params = list(gate.params)
        for slot, value in slots.items():
            new_params[slot] = value
        gates[gi] = GateOp(gate.kind, gate.wires, tuple(new_params))
    return tuple(gates)


def apply_circuit(state: StateVector, circuit: CircuitSpec, params: np.ndarray = ()) -> StateVector:
    """Apply all gates in order, trainable slots filled from `params`."""
    if circuit.n_qubits != state.n_qubits:
        raise CircuitError(
            f"circuit is for {circuit.n_qubits} qubits, state has {state.n_qubits}"
        )
    amps = state.amps.copy()
    for gate in bind_params(circuit, params):
        _apply_gate_inplace(amps, gate, state.n_qubits)
    return StateVector(state.n_qubits, amps)


def gate_dense_matrix(gate: GateOp, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of one gate, built explicitly (oracle path).

    Single-qubit gates are Kronecker products of identities with the 2x2
    matrix; CNOT/CPHASE are built column-by-column from their action on basis
    indices. Independent of the stride-iteration kernel by construction.
    """
    _check_gate(gate, n_qubits)
    dim = 2**n_qubits
    if gate.kind not in TWO_QUBIT_KINDS:
        mat = np.array([[1.0 + 0j]])
        small = single_qubit_matrix(gate.kind, gate.params)
        for q in range(n_qubits):
            mat = np.kron(mat, small if q == gate.wires[0] else np.eye(2))
        return mat
    control, target = gate.wires
    cbit = 1 << (n_qubits - 1 - control)
    tbit = 1 << (n_qubits - 1 - target)
    full = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        if gate.kind == "CNOT":
            full[b ^ tbit if b & cbit else b, b] = 1.0
        else:  # CPHASE
            phase = np.exp(1j * gate.params[0]) if (b & cbit and b & tbit) else 1.0
            full[b, b] = phase
    return full


def dense_unitary(circuit: CircuitSpec, params: np.ndarray = ()) -> np.ndarray:
    """Full unitary of the circuit as an explicit matrix product. n_qubits <= 6."""
    if circuit.n_qubits > MAX_DENSE_QUBITS:
        raise CircuitError(
            f"dense_unitary supports at most {MAX_DENSE_QUBITS} qubits, "
            f"got {circuit.n_qubits}"
        )
    unitary = np.eye(2**circuit.n_qubits, dtype=complex)
    for gate in bind_params(circuit, params):
        unitary = gate_dense_matrix(gate, circuit.n_qubits) @ unitary
    return unitary


def gate_base_angles(gates: tuple[GateOp, ...]) -> np.ndarray:
    """(n_gates, 3) table of baked gate angles, zero-padded per gate."""
    table = np.zeros((len(gates), 3))
    for gi, gate in enumerate(gates):
        for s, value in enumerate(gate.params):
            table[gi, s] = value
    return table


def apply_gates_batch(amps: np.ndarray, gates, n: int, angles: np.ndarray) -> np.ndarray:
    """Apply a gate list to a batch of statevectors, in place.

    amps: (B, 2^n) complex, one row per independent evaluation.
    angles: (B, n_gates, 3) per-row gate angles (rows evaluate the same gate
    sequence with possibly different parameters). Rows are mathematically
    independent; results are bit-identical to row-by-row evaluation.
    """
    cols = np.ascontiguousarray(amps.T)  # batch-last: unit-stride inner loops
    _apply_gates_cols(cols, gates, n, angles)
    amps[...] = cols.T
    return amps


def _apply_gates_cols(cols: np.ndarray, gates, n: int, angles: np.ndarray) -> None:
    # cols: (2^n, B); each column is one evaluation. Per-evaluation gate
    # coefficients have shape (B,) and broadcast along the trailing batch
    # axis; all reads and writes run over contiguous (R, B) blocks.
    b = cols.shape[1]
    saved = np.empty((cols.shape[0] // 2) * b, dtype=complex)
    mixed = np.empty_like(saved)
    for gi, gate in enumerate(gates):
        kind = gate.kind
        if kind == "CNOT":
            view = cols.reshape((2,) * n + (b,))
            i10 = _pair_index(n, gate.wires[0], gate.wires[1], 1, 0)
            i11 = _pair_index(n, gate.wires[0], gate.wires[1], 1, 1)
            tmp = view[i10].copy()
            view[i10] = view[i11]
            view[i11] = tmp
            continue
        if kind == "CPHASE":
            view = cols.reshape((2,) * n + (b,))
            i11 = _pair_index(n, gate.wires[0], gate.wires[1], 1, 1)
            view[i11] *= np.exp(1j * angles[:, gi, 0])
            continue
        wire = gate.wires[0]
        view = cols.reshape(2**wire, 2, 2 ** (n - 1 - wire), b)
        if kind == "RZ":
            e = np.exp(-0.5j * angles[:, gi, 0])
            view[:, 0] *= e
            view[:, 1] *= np.conj(e)
            continue
        if kind == "Z":
            view[:, 1] *= -1.0
            continue
        if kind == "H":
            m00 = m01 = m10 = complex(_SQRT2_INV)
            m11 = complex(-_SQRT2_INV)
        elif kind == "X":
            m00, m01, m10, m11 = 0j, 1 + 0j, 1 + 0j, 0j
        elif kind == "RX":
            half = 0.5 * angles[:, gi, 0]
            c, s = np.cos(half), np.sin(half)
            m00, m01, m10, m11 = c + 0j, -1j * s, -1j * s, c + 0j
        elif kind == "RY":
            half = 0.5 * angles[:, gi, 0]
            c, s = np.cos(half) + 0j, np.sin(half) + 0j
            m00, m01, m10, m11 = c, -s, s, c
        elif kind == "ROT3":
            a, bb, c = angles[:, gi, 0], angles[:, gi, 1], angles[:, gi, 2]
            cos_b = np.cos(0.5 * bb)
            sin_b = np.sin(0.5 * bb)
            sum_p = np.exp(-0.5j * (a + c))
            dif_p = np.exp(-0.5j * (a - c))
            m00 = sum_p * cos_b
            m01 = -np.conj(dif_p) * sin_b
            m10 = dif_p * sin_b
            m11 = np.conj(sum_p) * cos_b
        else:
            raise CircuitError(f"unknown gate kind {kind!r}")
        v0 = view[:, 0]
        v1 = view[:, 1]
        a0 = saved.reshape(v0.shape)
        t1 = mixed.reshape(v0.shape)
        np.copyto(a0, v0)
        np.multiply(a0, m00, out=v0)
        v0 += np.multiply(v1, m01, out=t1)
        np.multiply(v1, m11, out=v1)
        v1 += np.multiply(a0, m10, out=t1)


def reduced_purity(state: StateVector, qubit: int = 0) -> float:
    """Tr(rho_q^2) of the reduced single-qubit state, via marginalization.

    1 for product states; 0.5 for a maximally entangled qubit.
    """
    n = state.n_qubits
    if not 0 <= qubit < n:
        raise CircuitError(f"qubit {qubit} out of range for {n}-qubit state")
    view = np.moveaxis(state.amps.reshape((2,) * n), qubit, 0).reshape(2, -1)
    rho = view @ view.conj().T
    return float(np.real(np.trace(rho @ rho)))
