"""Config parsing and serialization shared by checkpoints, grids, and the CLI.

Run configs are JSON documents with sections ``features``, ``data``,
``model``, ``train``, and (for grid runs) ``grid``. Validation is strict:
unknown keys are rejected and every value is range-checked, with errors
naming the full field path (e.g. ``train.learning_rate``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .embed import ANGLE_AXES, AmplitudeEmbedding, AngleEmbedding, EmbeddingKind, IQPEmbedding
from .errors import ConfigError
from .measure import Measurement
from .model import ModelDims
from .nn import OPTIMIZER_KINDS, OptimizerConfig
from .qcircuit import CircuitKind, RandomLayers, StronglyEntangling
from .qgrad import QuantumLayerConfig

EMBEDDING_NAMES = ("angle", "amplitude", "iqp")
CIRCUIT_NAMES = ("random_layers", "strongly_entangling")
MEASUREMENT_NAMES = tuple(m.value for m in Measurement)

# Table-driven grid defaults. The learning-rate list corrects the published
# duplicate (0.001 twice) to the set the best-model reports actually draw from.
GRID_LEARNING_RATES = (0.001, 0.0001, 0.00001)
GRID_OPTIMIZERS = ("adam", "sgd", "rmsprop", "adadelta", "adagrad")
GRID_WEIGHT_DECAYS = (0.0, 0.01, 0.001)
GRID_EMBEDDINGS = ("angle", "amplitude", "iqp")
GRID_CIRCUITS = ("random_layers", "strongly_entangling")
GRID_MEASUREMENTS = ("pauliz", "paulix", "z_plus_pauliz", "probability")


@dataclass(frozen=True)
class HyperParams:
    """One training configuration (a single grid point when used by search)."""

    learning_rate: float = 0.001
    optimizer: str = "adam"
    weight_decay: float = 0.0
    quantum: QuantumLayerConfig | None = None
    epochs: int = 30
    batch_size: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.optimizer not in OPTIMIZER_KINDS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(self.optimizer, self.learning_rate, self.weight_decay)


@dataclass(frozen=True)
class GridSpace:
    """Axes of the hyperparameter grid, enumerated lexicographically in this
    field order (learning rate, optimizer, weight decay, embedding, circuit,
    measurement)."""

    learning_rates: tuple[float, ...] = GRID_LEARNING_RATES
    optimizers: tuple[str, ...] = GRID_OPTIMIZERS
    weight_decays: tuple[float, ...] = GRID_WEIGHT_DECAYS
    embeddings: tuple[str, ...] = GRID_EMBEDDINGS
    circuits: tuple[str, ...] = GRID_CIRCUITS
    measurements: tuple[str, ...] = GRID_MEASUREMENTS

    def __post_init__(self):
        for name, values, allowed in (
            ("optimizers", self.optimizers, OPTIMIZER_KINDS),
            ("embeddings", self.embeddings, EMBEDDING_NAMES),
            ("circuits", self.circuits, CIRCUIT_NAMES),
            ("measurements", self.measurements, MEASUREMENT_NAMES),
        ):
            if not values:
                raise ConfigError(f"grid.{name} must be non-empty")
            for v in values:
                if v not in allowed:
                    raise ConfigError(f"grid.{name}: unknown value {v!r}")
        if not self.learning_rates or any(lr <= 0 for lr in self.learning_rates):
            raise ConfigError("grid.learning_rates must be positive and non-empty")
        if not self.weight_decays or any(wd < 0 for wd in self.weight_decays):
            raise ConfigError("grid.weight_decays must be >= 0 and non-empty")

    @property
    def size(self) -> int:
        return (
            len(self.learning_rates) * len(self.optimizers) * len(self.weight_decays)
            * len(self.embeddings) * len(self.circuits) * len(self.measurements)
        )


# ---------------------------------------------------------------------------
# Kind <-> name/JSON mapping
# ---------------------------------------------------------------------------

def embedding_from_name(name: str, axis: str = "X", repeats: int = 1) -> EmbeddingKind:
    if name == "angle":
        return AngleEmbedding(axis)
    if name == "amplitude":
        return AmplitudeEmbedding()
    if name == "iqp":
        return IQPEmbedding(repeats)
    raise ConfigError(f"unknown embedding {name!r}; expected one of {EMBEDDING_NAMES}")


def circuit_from_name(
    name: str,
    n_layers: int | None = None,
    rots_per_layer: int | None = None,
    seed: int = 42,
    imprimitive_ratio: float = 0.3,
) -> CircuitKind:
    if name == "strongly_entangling":
        return StronglyEntangling(2 if n_layers is None else n_layers)
    if name == "random_layers":
        return RandomLayers(1 if n_layers is None else n_layers, rots_per_layer,
                            seed, imprimitive_ratio)
    raise ConfigError(f"unknown circuit {name!r}; expected one of {CIRCUIT_NAMES}")


def embedding_to_json(kind: EmbeddingKind) -> dict:
    if isinstance(kind, AngleEmbedding):
        return {"kind": "angle", "axis": kind.axis}
    if isinstance(kind, AmplitudeEmbedding):
        return {"kind": "amplitude"}
    if isinstance(kind, IQPEmbedding):
        return {"kind": "iqp", "repeats": kind.repeats}
    raise ConfigError(f"unknown embedding kind {kind!r}")


def embedding_from_json(doc: dict, where: str = "embedding") -> EmbeddingKind:
    doc = _as_section(doc, where)
    kind = _get_str(doc, "kind", where, EMBEDDING_NAMES)
    if kind == "angle":
        axis = _get_str(doc, "axis", where, ANGLE_AXES, default="X")
        _reject_unknown(doc, {"kind", "axis"}, where)
        return AngleEmbedding(axis)
    if kind == "amplitude":
        _reject_unknown(doc, {"kind"}, where)
        return AmplitudeEmbedding()
    repeats = _get_int(doc, "repeats", where, low=1, default=1)
    _reject_unknown(doc, {"kind", "repeats"}, where)
    return IQPEmbedding(repeats)


def circuit_to_json(kind: CircuitKind) -> dict:
    if isinstance(kind, StronglyEntangling):
        return {"kind": "strongly_entangling", "n_layers": kind.n_layers}
    if isinstance(kind, RandomLayers):
        return {
            "kind": "random_layers",
            "n_layers": kind.n_layers,
            "rots_per_layer": kind.rots_per_layer,
            "seed": kind.seed,
            "imprimitive_ratio": kind.imprimitive_ratio,
        }
    raise ConfigError(f"unknown circuit kind {kind!r}")


def circuit_from_json(doc: dict, where: str = "circuit") -> CircuitKind:
    doc = _as_section(doc, where)
    kind = _get_str(doc, "kind", where, CIRCUIT_NAMES)
    if kind == "strongly_entangling":
        n_layers = _get_int(doc, "n_layers", where, low=1, default=2)
        _reject_unknown(doc, {"kind", "n_layers"}, where)
        return StronglyEntangling(n_layers)
    n_layers = _get_int(doc, "n_layers", where, low=1, default=1)
    rots = doc.get("rots_per_layer")
    if rots is not None:
        rots = _get_int(doc, "rots_per_layer", where, low=1)
    seed = _get_int(doc, "seed", where, default=42)
    ratio = _get_float(doc, "imprimitive_ratio", where, low=0.0, high=1.0, default=0.3)
    _reject_unknown(doc, {"kind", "n_layers", "rots_per_layer", "seed", "imprimitive_ratio"}, where)
    return RandomLayers(n_layers, rots, seed, ratio)


def measurement_from_name(name: str) -> Measurement:
    try:
        return Measurement(name)
    except ValueError:
        raise ConfigError(
            f"unknown measurement {name!r}; expected one of {MEASUREMENT_NAMES}"
        ) from None


def quantum_to_json(config: QuantumLayerConfig) -> dict:
    return {
        "n_qubits": config.n_qubits,
        "embedding": embedding_to_json(config.embedding),
        "circuit": circuit_to_json(config.circuit),
        "measurement": config.measurement.value,
    }


def quantum_from_json(doc: dict, where: str = "model.quantum") -> QuantumLayerConfig:
    doc = _as_section(doc, where)
    n_qubits = _get_int(doc, "n_qubits", where, low=1, high=12, default=8)
    embedding = embedding_from_json(doc.get("embedding", {"kind": "angle"}), f"{where}.embedding")
    circuit = circuit_from_json(
        doc.get("circuit", {"kind": "strongly_entangling"}), f"{where}.circuit"
    )
    measurement = measurement_from_name(
        _get_str(doc, "measurement", where, MEASUREMENT_NAMES, default="pauliz")
    )
    _reject_unknown(doc, {"n_qubits", "embedding", "circuit", "measurement"}, where)
    return QuantumLayerConfig(n_qubits, embedding, circuit, measurement)


def dims_to_json(dims: ModelDims) -> dict:
    return {
        "conv_channels": list(dims.conv_channels),
        "conv_kernels": list(dims.conv_kernels),
        "conv_strides": list(dims.conv_strides),
        "pool": dims.pool,
        "surrogate_width": dims.surrogate_width,
        "classical_adaptor_width": dims.classical_adaptor_width,
    }


def dims_from_json(doc: dict, where: str = "model.dims") -> ModelDims:
    doc = _as_section(doc, where)
    channels = _get_int_pair(doc, "conv_channels", where, default=(16, 32))
    kernels = _get_int_pair(doc, "conv_kernels", where, default=(5, 3))
    strides = _get_int_pair(doc, "conv_strides", where, default=(3, 3))
    pool = _get_int(doc, "pool", where, low=1, default=2)
    surrogate = _get_int(doc, "surrogate_width", where, low=1, default=256)
    adaptor = _get_int(doc, "classical_adaptor_width", where, low=1, default=256)
    _reject_unknown(doc, {"conv_channels", "conv_kernels", "conv_strides", "pool",
                          "surrogate_width", "classical_adaptor_width"}, where)
    return ModelDims(channels, kernels, strides, pool, surrogate, adaptor)


def hyperparams_to_json(hp: HyperParams) -> dict:
    doc = {
        "learning_rate": hp.learning_rate,
        "optimizer": hp.optimizer,
        "weight_decay": hp.weight_decay,
        "epochs": hp.epochs,
        "batch_size": hp.batch_size,
        "seed": hp.seed,
    }
    if hp.quantum is not None:
        doc["quantum"] = quantum_to_json(hp.quantum)
    return doc


# ---------------------------------------------------------------------------
# Strict JSON helpers
# ---------------------------------------------------------------------------

_MISSING = object()


def _as_section(doc, where: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object, got {type(doc).__name__}")
    return doc


def _reject_unknown(doc: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")


def _get_str(doc: dict, key: str, where: str, allowed=None, default=_MISSING) -> str:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"{where}.{key}: required")
    if not isinstance(value, str):
        raise ConfigError(f"{where}.{key}: expected a string, got {value!r}")
    if allowed is not None and value not in allowed:
        raise ConfigError(f"{where}.{key}: {value!r} not in {tuple(allowed)}")
    return value


def _get_int(doc: dict, key: str, where: str, low=None, high=None, default=_MISSING) -> int:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"{where}.{key}: required")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
    if low is not None and value < low:
        raise ConfigError(f"{where}.{key}: must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ConfigError(f"{where}.{key}: must be <= {high}, got {value}")
    return value


def _get_float(doc: dict, key: str, where: str, low=None, high=None, default=_MISSING) -> float:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"{where}.{key}: required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    value = float(value)
    if low is not None and value < low:
        raise ConfigError(f"{where}.{key}: must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ConfigError(f"{where}.{key}: must be <= {high}, got {value}")
    return value


def _get_bool(doc: dict, key: str, where: str, default=_MISSING) -> bool:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"{where}.{key}: required")
    if not isinstance(value, bool):
        raise ConfigError(f"{where}.{key}: expected a boolean, got {value!r}")
    return value


def _get_int_pair(doc: dict, key: str, where: str, default=_MISSING) -> tuple[int, int]:
    value = doc.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"{where}.{key}: required")
    value = tuple(value) if isinstance(value, (list, tuple)) else value
    if (
        not isinstance(value, tuple) or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in value)
    ):
        raise ConfigError(f"{where}.{key}: expected a pair of positive integers, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Run configs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Validated contents of a run-config JSON document."""

    n_mels: int = 128
    split_seed: int = 0
    split_fractions: tuple[float, float, float] = (0.7, 0.15, 0.15)
    stratified: bool = True
    valence_scheme: str | None = None
    model_kind: str = "hybrid"
    quantum: QuantumLayerConfig | None = None
    dims: ModelDims = field(default_factory=ModelDims)
    hp: HyperParams = field(default_factory=HyperParams)
    grid: GridSpace | None = None
    grid_epochs: int = 10


def load_run_config(path, need_grid: bool = False) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_run_config(raw, need_grid=need_grid)


def parse_run_config(raw: dict, need_grid: bool = False) -> RunConfig:
    raw = _as_section(raw, "config")
    _reject_unknown(raw, {"features", "data", "model", "train", "grid"}, "config")

    features = _as_section(raw.get("features", {}), "features")
    n_mels = _get_int(features, "n_mels", "features", low=1, default=128)
    _reject_unknown(features, {"n_mels"}, "features")

    data = _as_section(raw.get("data", {}), "data")
    split_seed = _get_int(data, "split_seed", "data", default=0)
    fractions = data.get("split_fractions", [0.7, 0.15, 0.15])
    if (not isinstance(fractions, (list, tuple)) or len(fractions) != 3
            or any(isinstance(f, bool) or not isinstance(f, (int, float)) or f <= 0
                   for f in fractions)):
        raise ConfigError(f"data.split_fractions: expected three positive numbers, got {fractions!r}")
    fractions = tuple(float(f) for f in fractions)
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError(f"data.split_fractions: must sum to 1, got {sum(fractions)}")
    stratified = _get_bool(data, "stratified", "data", default=True)
    valence_scheme = data.get("valence_scheme")
    if valence_scheme is not None and valence_scheme not in ("iemocap", "recola"):
        raise ConfigError(f"data.valence_scheme: {valence_scheme!r} not in ('iemocap', 'recola')")
    _reject_unknown(data, {"split_seed", "split_fractions", "stratified", "valence_scheme"}, "data")

    model = _as_section(raw.get("model", {}), "model")
    model_kind = _get_str(model, "kind", "model", ("hybrid", "classical"), default="hybrid")
    quantum = None
    if model_kind == "hybrid":
        quantum = quantum_from_json(model.get("quantum", {}), "model.quantum")
    elif "quantum" in model:
        raise ConfigError("model.quantum: not allowed for a classical model")
    dims = dims_from_json(model.get("dims", {}), "model.dims")
    _reject_unknown(model, {"kind", "quantum", "dims"}, "model")

    train = _as_section(raw.get("train", {}), "train")
    hp = HyperParams(
        learning_rate=_get_float(train, "learning_rate", "train", low=0.0, default=0.001),
        optimizer=_get_str(train, "optimizer", "train", OPTIMIZER_KINDS, default="adam"),
        weight_decay=_get_float(train, "weight_decay", "train", low=0.0, default=0.0),
        quantum=quantum,
        epochs=_get_int(train, "epochs", "train", low=0, default=30),
        batch_size=_get_int(train, "batch_size", "train", low=1, default=16),
        seed=_get_int(train, "seed", "train", default=0),
    )
    _reject_unknown(train, {"learning_rate", "optimizer", "weight_decay", "epochs",
                            "batch_size", "seed"}, "train")

    grid = None
    grid_epochs = 10
    if "grid" in raw or need_grid:
        gdoc = _as_section(raw.get("grid", {}), "grid")
        grid_epochs = _get_int(gdoc, "epochs_per_point", "grid", low=0, default=10)
        axes = {}
        for key, default in (
            ("learning_rates", GRID_LEARNING_RATES),
            ("optimizers", GRID_OPTIMIZERS),
            ("weight_decays", GRID_WEIGHT_DECAYS),
            ("embeddings", GRID_EMBEDDINGS),
            ("circuits", GRID_CIRCUITS),
            ("measurements", GRID_MEASUREMENTS),
        ):
            value = gdoc.get(key, list(default))
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(f"grid.{key}: expected a non-empty list")
            axes[key] = tuple(value)
        _reject_unknown(gdoc, {"epochs_per_point", *axes}, "grid")
        grid = GridSpace(**axes)

    return RunConfig(
        n_mels=n_mels,
        split_seed=split_seed,
        split_fractions=fractions,
        stratified=stratified,
        valence_scheme=valence_scheme,
        model_kind=model_kind,
        quantum=quantum,
        dims=dims,
        hp=hp,
        grid=grid,
        grid_epochs=grid_epochs,
    )
