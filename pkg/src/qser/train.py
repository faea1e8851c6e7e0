"""Training loop, evaluation (UAR), grid search, and model checkpointing.

Training is mini-batch cross-entropy, deterministic for a given seed: the
shuffle order comes from a named seed stream, batch items are reduced in a
fixed order, and the quantum layer is exact, so reruns reproduce losses and
UAR bit-for-bit. Grid points are independent and may run in a process pool;
results are keyed by point index, making the ranking identical for any
worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import (
    GridSpace,
    HyperParams,
    circuit_from_name,
    dims_from_json,
    dims_to_json,
    embedding_from_name,
    hyperparams_to_json,
    measurement_from_name,
    quantum_from_json,
    quantum_to_json,
)
from .errors import EvaluationError, ModelError, QserError, TrainingAbortError
from .model import ModelDef, ModelDims, build_classical, build_hybrid, count_params
from .nn import init_optimizer_state, load_checkpoint, optimizer_step, save_checkpoint, softmax_cross_entropy
from .qgrad import QuantumLayerConfig
from .seeds import rng_stream

Dataset = list[tuple[np.ndarray, int]]


@dataclass(frozen=True)
class EvalReport:
    per_class_recall: tuple[float, ...]
    uar: float
    confusion: tuple[tuple[int, ...], ...]  # rows = true class
    trainable_params: int

    def to_json(self) -> dict:
        return {
            "per_class_recall": list(self.per_class_recall),
            "uar": self.uar,
            "confusion": [list(row) for row in self.confusion],
            "trainable_params": self.trainable_params,
        }


def evaluate(model: ModelDef, test_set: Dataset) -> EvalReport:
    """Per-class recall, their unweighted mean (UAR), and the confusion matrix."""
    n = model.n_classes
    confusion = np.zeros((n, n), dtype=int)
    seen = set()
    for x, label in test_set:
        if not 0 <= label < n:
            raise EvaluationError(f"label {label} out of range for {n} classes")
        seen.add(label)
        pred = int(np.argmax(model.forward(x)))
        confusion[label, pred] += 1
    missing = sorted(set(range(n)) - seen)
    if missing:
        raise EvaluationError(f"class(es) {missing} absent from the evaluation set")
    recalls = confusion.diagonal() / confusion.sum(axis=1)
    return EvalReport(
        per_class_recall=tuple(float(r) for r in recalls),
        uar=float(recalls.mean()),
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        trainable_params=count_params(model),
    )


def train_model(
    model: ModelDef, train_set: Dataset, val_set: Dataset, hp: HyperParams
) -> tuple[ModelDef, list[dict]]:
    """Train in place for hp.epochs; history holds per-epoch loss and val UAR."""
    if hp.epochs > 0 and not train_set:
        raise ModelError("training set is empty")
    for x, _ in train_set:
        if tuple(x.shape) != tuple(model.input_shape):
            raise ModelError(
                f"feature tensor shape {x.shape} != model input {model.input_shape}"
            )
    opt_config = hp.optimizer_config()
    state = init_optimizer_state(model.parameters())
    shuffle_rng = rng_stream(hp.seed, "shuffle", 1)
    history: list[dict] = []
    for epoch in range(hp.epochs):
        order = shuffle_rng.permutation(len(train_set))
        epoch_loss = 0.0
        for start in range(0, len(order), hp.batch_size):
            batch = order[start : start + hp.batch_size]
            model.zero_grads()
            batch_loss = 0.0
            for i in batch:
                x, label = train_set[i]
                logits = model.forward(x)
                loss, grad = softmax_cross_entropy(logits, label)
                batch_loss += loss
                model.backward(grad / len(batch))
            if not np.isfinite(batch_loss):
                raise TrainingAbortError(
                    f"non-finite loss at epoch {epoch}, batch starting at {start}"
                )
            new_params, state = optimizer_step(
                state, model.parameters(), model.gradients(), opt_config
            )
            model.set_parameters(new_params)
            epoch_loss += batch_loss
        entry = {"epoch": epoch, "train_loss": epoch_loss / len(train_set)}
        if val_set:
            entry["val_uar"] = evaluate(model, val_set).uar
        history.append(entry)
    return model, history


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridResult:
    index: int
    hp: HyperParams
    val_uar: float  # nan when the point failed
    trainable_params: int
    status: str  # "ok" or "failed: <reason>"


def enumerate_grid(
    space: GridSpace,
    base: HyperParams,
    n_qubits: int = 8,
) -> list[HyperParams]:
    """All grid points in the documented lexicographic order.

    Axis order matches the hyperparameter table: learning rate, optimizer,
    weight decay, embedding, circuit, measurement. Non-grid fields (epochs,
    batch size, seed, qubit count) come from `base`.
    """
    points = []
    for lr in space.learning_rates:
        for opt in space.optimizers:
            for wd in space.weight_decays:
                for emb in space.embeddings:
                    for circ in space.circuits:
                        for meas in space.measurements:
                            quantum = QuantumLayerConfig(
                                n_qubits=n_qubits,
                                embedding=embedding_from_name(emb),
                                circuit=circuit_from_name(circ),
                                measurement=measurement_from_name(meas),
                            )
                            points.append(
                                HyperParams(
                                    learning_rate=lr,
                                    optimizer=opt,
                                    weight_decay=wd,
                                    quantum=quantum,
                                    epochs=base.epochs,
                                    batch_size=base.batch_size,
                                    seed=base.seed,
                                )
                            )
    return points


def _run_grid_point(args) -> GridResult:
    index, hp, train_set, val_set, input_shape, n_classes, dims = args
    try:
        model = build_hybrid(hp.quantum, input_shape, n_classes, seed=hp.seed, dims=dims)
        _, history = train_model(model, train_set, val_set, hp)
        val_uar = history[-1]["val_uar"] if history else evaluate(model, val_set).uar
        return GridResult(index, hp, float(val_uar), count_params(model), "ok")
    except QserError as exc:
        return GridResult(index, hp, float("nan"), 0, f"failed: {exc}")


def grid_search(
    space: GridSpace,
    datasets: tuple[Dataset, Dataset],
    budget_epochs: int,
    base: HyperParams = HyperParams(),
    input_shape: tuple[int, int, int] = (1, 128, 126),
    n_classes: int = 2,
    dims: ModelDims = ModelDims(),
    workers: int = 1,
) -> list[GridResult]:
    """Exhaustively train every grid point; ranked by val UAR.

    Every point trains with the same seed at the (reduced) `budget_epochs`.
    Ties break toward fewer trainable parameters, then enumeration order.
    Points that fail to build or train are recorded as failed, never fatal.
    """
    train_set, val_set = datasets
    base = HyperParams(
        learning_rate=base.learning_rate, optimizer=base.optimizer,
        weight_decay=base.weight_decay, quantum=base.quantum,
        epochs=budget_epochs, batch_size=base.batch_size, seed=base.seed,
    )
    points = enumerate_grid(space, base)
    jobs = [
        (i, hp, train_set, val_set, tuple(input_shape), n_classes, dims)
        for i, hp in enumerate(points)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_grid_point, jobs))
    else:
        results = [_run_grid_point(job) for job in jobs]
    results.sort(key=lambda r: (r.status != "ok", -(r.val_uar if r.status == "ok" else 0.0),
                                r.trainable_params, r.index))
    return results


def write_grid_csv(path, results: list[GridResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "point_index", "lr", "optimizer", "weight_decay", "embedding",
            "circuit", "measurement", "val_uar", "params", "status",
        ])
        for r in results:
            q = r.hp.quantum
            emb = quantum_to_json(q)["embedding"]["kind"] if q else ""
            circ = quantum_to_json(q)["circuit"]["kind"] if q else ""
            meas = q.measurement.value if q else ""
            uar = "" if np.isnan(r.val_uar) else f"{r.val_uar:.10f}"
            writer.writerow([
                r.index, f"{r.hp.learning_rate:g}", r.hp.optimizer,
                f"{r.hp.weight_decay:g}", emb, circ, meas, uar,
                r.trainable_params, r.status,
            ])


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_model(path, model: ModelDef) -> None:
    header = {
        "kind": model.kind,
        "input_shape": list(model.input_shape),
        "n_classes": model.n_classes,
        "seed": model.seed,
        "dims": dims_to_json(model.dims),
        "quantum": quantum_to_json(model.quantum) if model.quantum else None,
        "layer_specs": [type(layer).__name__ for layer in model.layers],
    }
    save_checkpoint(path, header, model.parameters())


def load_model(path) -> ModelDef:
    header, arrays = load_checkpoint(path)
    input_shape = tuple(header["input_shape"])
    dims = dims_from_json(header["dims"])
    if header["kind"] == "hybrid":
        quantum = quantum_from_json(header["quantum"])
        model = build_hybrid(quantum, input_shape, header["n_classes"],
                             seed=header["seed"], dims=dims)
    else:
        model = build_classical(input_shape, header["n_classes"],
                                seed=header["seed"], dims=dims)
    expected = [type(layer).__name__ for layer in model.layers]
    if header.get("layer_specs") != expected:
        raise ModelError(
            f"checkpoint layer specs {header.get('layer_specs')} do not match "
            f"the reconstructed model {expected}"
        )
    model.set_parameters(arrays)
    return model


def write_history_csv(path, history: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_uar"])
        for entry in history:
            uar = entry.get("val_uar")
            writer.writerow([
                entry["epoch"],
                f"{entry['train_loss']:.12g}",
                "" if uar is None else f"{uar:.12g}",
            ])
