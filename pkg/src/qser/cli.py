"""Command-line interface: one binary, five subcommands.

    qser features --in <dir|manifest> --out <dir> [--mels N]
    qser synth    --classes {2,4} --per-class N --seed S --out <dir>
    qser train    --config run.json --manifest m.csv --out <dir>
    qser grid     --config grid.json --manifest m.csv --out <dir> [--workers K]
    qser inspect  --embedding E --circuit C --layers L --qubits N

Exit codes are a stable scripting contract: 0 success, 1 partial data
failure, 2 configuration error, 3 numeric abort during training.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (
    CIRCUIT_NAMES,
    EMBEDDING_NAMES,
    RunConfig,
    circuit_from_name,
    embedding_from_name,
    load_run_config,
)
from .data import SplitSpec, SyntheticConfig, generate_synthetic, load_dataset, load_manifest, split
from .errors import ConfigError, IngestionError, QserError, TrainingAbortError
from .features import MelConfig, save_features, wav_to_features
from .model import ModelDims, build_classical, build_hybrid, count_params
from .qcircuit import build_circuit, format_circuit
from .train import evaluate, grid_search, save_model, train_model, write_grid_csv, write_history_csv

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def cmd_features(args) -> int:
    src = Path(args.in_path)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if src.is_dir():
        wavs = sorted(src.glob("*.wav"))
    elif src.is_file():
        wavs = [Path(line.strip()) for line in src.read_text().splitlines() if line.strip()]
        wavs = [p if p.is_absolute() else src.parent / p for p in wavs]
    else:
        print(f"error: input {src} does not exist", file=sys.stderr)
        return EXIT_CONFIG
    config = MelConfig(n_mels=args.mels)
    done, failures = 0, 0
    for wav in wavs:
        try:
            features = wav_to_features(wav, config)
            save_features(out_dir / (wav.stem + ".qft"), features)
            done += 1
        except QserError as exc:
            failures += 1
            print(f"error: {wav}: {exc}", file=sys.stderr)
    print(f"features: {done} file(s) written, {failures} failure(s)")
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_synth(args) -> int:
    config = SyntheticConfig(n_mels=args.mels, snr_db=args.snr)
    manifest = generate_synthetic(args.per_class, args.classes, args.seed, args.out, config)
    print(f"synth: wrote {args.classes * args.per_class} examples, manifest {manifest}")
    return EXIT_OK


def _load_sets(config: RunConfig, manifest_path):
    examples = load_manifest(manifest_path, valence_scheme=config.valence_scheme)
    spec = SplitSpec(config.split_seed, config.split_fractions, config.stratified)
    train_ex, val_ex, test_ex = split(examples, spec)
    return load_dataset(train_ex), load_dataset(val_ex), load_dataset(test_ex)


def _input_shape(train_set) -> tuple[int, int, int]:
    if not train_set:
        raise ConfigError("dataset is empty")
    return tuple(train_set[0][0].shape)


def cmd_train(args) -> int:
    config = load_run_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_set, val_set, test_set = _load_sets(config, args.manifest)
    n_classes = max(label for _, label in train_set + val_set + test_set) + 1
    shape = _input_shape(train_set)
    if config.model_kind == "hybrid":
        model = build_hybrid(config.quantum, shape, n_classes,
                             seed=config.hp.seed, dims=config.dims)
    else:
        model = build_classical(shape, n_classes, seed=config.hp.seed, dims=config.dims)
    model, history = train_model(model, train_set, val_set, config.hp)
    report = evaluate(model, test_set)
    save_model(out_dir / "model.qser", model)
    write_history_csv(out_dir / "history.csv", history)
    (out_dir / "report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n")
    print(f"train: final test UAR {report.uar:.4f}, trainable_params {report.trainable_params}")
    return EXIT_OK


def cmd_grid(args) -> int:
    config = load_run_config(args.config, need_grid=True)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_set, val_set, test_set = _load_sets(config, args.manifest)
    n_classes = max(label for _, label in train_set + val_set + test_set) + 1
    shape = _input_shape(train_set)
    results = grid_search(
        config.grid, (train_set, val_set), config.grid_epochs, base=config.hp,
        input_shape=shape, n_classes=n_classes, dims=config.dims, workers=args.workers,
    )
    write_grid_csv(out_dir / "grid.csv", results)
    best = next((r for r in results if r.status == "ok"), None)
    if best is None:
        print("grid: every point failed", file=sys.stderr)
        return EXIT_PARTIAL
    print(f"grid: {len(results)} points, best val UAR {best.val_uar:.4f} "
          f"(point {best.index}, {best.trainable_params} params)")
    if args.retrain_best:
        hp = best.hp
        full_hp = type(hp)(
            learning_rate=hp.learning_rate, optimizer=hp.optimizer,
            weight_decay=hp.weight_decay, quantum=hp.quantum,
            epochs=config.hp.epochs, batch_size=hp.batch_size, seed=hp.seed,
        )
        model = build_hybrid(hp.quantum, shape, n_classes, seed=hp.seed, dims=config.dims)
        model, history = train_model(model, train_set, val_set, full_hp)
        report = evaluate(model, test_set)
        save_model(out_dir / "best.qser", model)
        write_history_csv(out_dir / "best_history.csv", history)
        (out_dir / "best_report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n")
        print(f"grid: best point retrained at {full_hp.epochs} epochs, "
              f"test UAR {report.uar:.4f}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    embedding = embedding_from_name(args.embedding, axis=args.axis, repeats=args.repeats)
    circuit_kind = circuit_from_name(
        args.circuit, n_layers=args.layers, rots_per_layer=args.rots,
        seed=args.circuit_seed, imprimitive_ratio=args.ratio,
    )
    spec = build_circuit(circuit_kind, args.qubits)
    print(f"embedding: {type(embedding).__name__} (input width "
          f"{2**args.qubits if args.embedding == 'amplitude' else args.qubits})")
    print(format_circuit(spec))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qser", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="extract .qft mel features from WAV files")
    p.add_argument("--in", dest="in_path", required=True,
                   help="directory of .wav files or a text file listing them")
    p.add_argument("--out", required=True, help="output directory for .qft files")
    p.add_argument("--mels", type=int, default=128)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("synth", help="generate the synthetic corpus")
    p.add_argument("--classes", type=int, choices=(2, 4), required=True)
    p.add_argument("--per-class", dest="per_class", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--snr", type=float, default=10.0, help="signal-to-noise ratio in dB")
    p.add_argument("--mels", type=int, default=128)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train one model from a run config")
    p.add_argument("--config", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", help="run the hyperparameter grid search")
    p.add_argument("--config", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--retrain-best", action="store_true",
                   help="retrain the best point at the full epoch budget")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("inspect", help="print a circuit as a text gate list")
    p.add_argument("--embedding", choices=EMBEDDING_NAMES, default="angle")
    p.add_argument("--circuit", choices=CIRCUIT_NAMES, default="strongly_entangling")
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--qubits", type=int, default=8)
    p.add_argument("--axis", choices=("X", "Y", "Z"), default="X")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--rots", type=int, default=None)
    p.add_argument("--ratio", type=float, default=0.3)
    p.add_argument("--circuit-seed", dest="circuit_seed", type=int, default=42)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TrainingAbortError as exc:
        print(f"error: training aborted: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
