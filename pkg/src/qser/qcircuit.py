"""Trainable circuit families: strongly entangling layers and random layers.

Both builders return a CircuitSpec whose trainable slots are enumerated in
gate order. The random-layers construction is a pure function of its
arguments: gate choices come from PCG64 streams seeded per layer with
``SeedSequence([seed, layer_index])``, so gate lists are reproducible across
platforms and runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .qstate import CircuitSpec, GateOp

_ROTATION_KINDS = ("RX", "RY", "RZ")


@dataclass(frozen=True)
class StronglyEntangling:
    """Per layer: a 3-angle rotation on every qubit, then a nearest-neighbor CNOT ring."""

    n_layers: int = 2

    def __post_init__(self):
        if self.n_layers < 1:
            raise ConfigError(f"n_layers must be >= 1, got {self.n_layers}")


@dataclass(frozen=True)
class RandomLayers:
    """Per layer: `rots_per_layer` slots, each a random rotation or (with
    probability `imprimitive_ratio`) a CNOT on a random ordered wire pair.

    rots_per_layer = None means one slot per qubit.
    """

    n_layers: int = 1
    rots_per_layer: int | None = None
    seed: int = 42
    imprimitive_ratio: float = 0.3

    def __post_init__(self):
        if self.n_layers < 1:
            raise ConfigError(f"n_layers must be >= 1, got {self.n_layers}")
        if self.rots_per_layer is not None and self.rots_per_layer < 1:
            raise ConfigError(f"rots_per_layer must be >= 1, got {self.rots_per_layer}")
        if not 0.0 <= self.imprimitive_ratio <= 1.0:
            raise ConfigError(
                f"imprimitive_ratio must be in [0, 1], got {self.imprimitive_ratio}"
            )


CircuitKind = StronglyEntangling | RandomLayers


def build_strongly_entangling(n_qubits: int, n_layers: int) -> CircuitSpec:
    """3 * n_layers * n_qubits trainable parameters; ring CNOTs close each layer."""
    if n_qubits < 2:
        raise ConfigError(f"strongly entangling layers need >= 2 qubits, got {n_qubits}")
    if n_layers < 1:
        raise ConfigError(f"n_layers must be >= 1, got {n_layers}")
    gates: list[GateOp] = []
    slots: list[tuple[int, int]] = []
    for _ in range(n_layers):
        for q in range(n_qubits):
            slots.extend((len(gates), s) for s in range(3))
            gates.append(GateOp("ROT3", (q,), (0.0, 0.0, 0.0)))
        for q in range(n_qubits):
            gates.append(GateOp("CNOT", (q, (q + 1) % n_qubits)))
    return CircuitSpec(n_qubits, tuple(gates), tuple(slots))


def build_random_layers(
    n_qubits: int,
    n_layers: int = 1,
    rots_per_layer: int | None = None,
    seed: int = 42,
    imprimitive_ratio: float = 0.3,
) -> CircuitSpec:
    """Seeded random gate list; trainable rotations, parameter-free CNOTs.

    Draw order per slot is fixed: a uniform branch draw, then either
    (control, target) as two integer draws (target skips the control wire)
    or (rotation kind, wire) as two integer draws.
    """
    if n_qubits < 2:
        raise ConfigError(f"random layers need >= 2 qubits, got {n_qubits}")
    if n_layers < 1:
        raise ConfigError(f"n_layers must be >= 1, got {n_layers}")
    if not 0.0 <= imprimitive_ratio <= 1.0:
        raise ConfigError(f"imprimitive_ratio must be in [0, 1], got {imprimitive_ratio}")
    if rots_per_layer is None:
        rots_per_layer = n_qubits
    if rots_per_layer < 1:
        raise ConfigError(f"rots_per_layer must be >= 1, got {rots_per_layer}")

    gates: list[GateOp] = []
    slots: list[tuple[int, int]] = []
    for layer in range(n_layers):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([int(seed), layer]))
        )
        for _ in range(rots_per_layer):
            if rng.random() < imprimitive_ratio:
                control = int(rng.integers(n_qubits))
                offset = int(rng.integers(n_qubits - 1))
                target = (control + 1 + offset) % n_qubits
                gates.append(GateOp("CNOT", (control, target)))
            else:
                kind = _ROTATION_KINDS[int(rng.integers(3))]
                wire = int(rng.integers(n_qubits))
                slots.append((len(gates), 0))
                gates.append(GateOp(kind, (wire,), (0.0,)))
    return CircuitSpec(n_qubits, tuple(gates), tuple(slots))


def build_circuit(kind: CircuitKind, n_qubits: int) -> CircuitSpec:
    if isinstance(kind, StronglyEntangling):
        return build_strongly_entangling(n_qubits, kind.n_layers)
    if isinstance(kind, RandomLayers):
        return build_random_layers(
            n_qubits, kind.n_layers, kind.rots_per_layer, kind.seed, kind.imprimitive_ratio
        )
    raise ConfigError(f"unknown circuit kind {kind!r}")


def param_count(circuit: CircuitSpec) -> int:
    """Number of trainable parameter slots."""
    return circuit.n_params


def format_circuit(circuit: CircuitSpec) -> str:
    """Human-readable gate list, one gate per line, trainable slots shown as t[k]."""
    slot_names = {gs: f"t[{p}]" for p, gs in enumerate(circuit.param_slots)}
    lines = [f"qubits: {circuit.n_qubits}"]
    for gi, gate in enumerate(circuit.gates):
        if gate.params:
            rendered = ", ".join(
                slot_names.get((gi, s), f"{v:.6g}") for s, v in enumerate(gate.params)
            )
            args = f"({rendered})"
        else:
            args = ""
        wires = ", ".join(f"q{w}" for w in gate.wires)
        lines.append(f"{gate.kind}{args} @ {wires}")
    lines.append(f"{circuit.n_params} trainable parameters")
    return "\n".join(lines)
