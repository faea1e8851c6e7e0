"""CLI tests: subcommands end to end, exit codes, rerun byte-identity."""

import json

import numpy as np
import pytest

from qser.cli import main
from qser.data import load_manifest
from qser.features import AudioClip, load_features, write_wav_pcm16

TINY_MODEL = {
    "kind": "hybrid",
    "quantum": {
        "n_qubits": 3,
        "embedding": {"kind": "angle", "axis": "X"},
        "circuit": {"kind": "strongly_entangling", "n_layers": 1},
        "measurement": "pauliz",
    },
    "dims": {
        "conv_channels": [2, 3],
        "conv_kernels": [3, 3],
        "conv_strides": [3, 3],
        "pool": 2,
        "surrogate_width": 8,
        "classical_adaptor_width": 8,
    },
}


def write_config(path, epochs=1, extra_train=None, model=None, grid=None):
    config = {
        "data": {"split_seed": 1, "split_fractions": [0.6, 0.2, 0.2], "stratified": True},
        "model": model or TINY_MODEL,
        "train": {"learning_rate": 0.01, "optimizer": "adam", "weight_decay": 0.0,
                  "epochs": epochs, "batch_size": 4, "seed": 3,
                  **(extra_train or {})},
    }
    if grid is not None:
        config["grid"] = grid
    path.write_text(json.dumps(config))
    return path


@pytest.fixture
def corpus(tmp_path):
    assert main(["synth", "--classes", "2", "--per-class", "8", "--seed", "5",
                 "--out", str(tmp_path / "corpus"), "--snr", "25", "--mels", "32"]) == 0
    return tmp_path / "corpus" / "manifest.csv"


def test_synth_counts_and_determinism(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["synth", "--classes", "2", "--per-class", "3", "--seed", "9",
                     "--out", str(out), "--mels", "16"]) == 0
    a = load_manifest(out_a / "manifest.csv")
    b = load_manifest(out_b / "manifest.csv")
    assert len(a) == 6
    for ea, eb in zip(a, b):
        assert ea.feature_path.read_bytes() == eb.feature_path.read_bytes()


def test_features_empty_dir(tmp_path, capsys):
    (tmp_path / "wavs").mkdir()
    assert main(["features", "--in", str(tmp_path / "wavs"),
                 "--out", str(tmp_path / "out")]) == 0
    assert "0 file(s)" in capsys.readouterr().out


def test_features_converts_wavs(tmp_path):
    wavs = tmp_path / "wavs"
    wavs.mkdir()
    t = np.arange(22050) / 22050
    for name in ("a", "b", "c"):
        write_wav_pcm16(wavs / f"{name}.wav", AudioClip(22050, 0.2 * np.sin(880 * t)))
    assert main(["features", "--in", str(wavs), "--out", str(tmp_path / "out"),
                 "--mels", "32"]) == 0
    outs = sorted((tmp_path / "out").glob("*.qft"))
    assert [p.stem for p in outs] == ["a", "b", "c"]
    assert load_features(outs[0]).shape == (32, 126)


def test_features_partial_failure_exit_one(tmp_path, capsys):
    wavs = tmp_path / "wavs"
    wavs.mkdir()
    t = np.arange(22050) / 22050
    write_wav_pcm16(wavs / "good.wav", AudioClip(22050, 0.2 * np.sin(880 * t)))
    (wavs / "corrupt.wav").write_bytes(b"not a wav at all")
    assert main(["features", "--in", str(wavs), "--out", str(tmp_path / "out")]) == 1
    captured = capsys.readouterr()
    assert "corrupt.wav" in captured.err
    assert "1 failure(s)" in captured.out
    assert len(list((tmp_path / "out").glob("*.qft"))) == 1


def test_train_writes_artifacts(tmp_path, corpus, capsys):
    config = write_config(tmp_path / "run.json", epochs=1)
    out = tmp_path / "run"
    assert main(["train", "--config", str(config), "--manifest", str(corpus),
                 "--out", str(out)]) == 0
    assert (out / "model.qser").exists()
    assert (out / "history.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert set(report) == {"per_class_recall", "uar", "confusion", "trainable_params"}
    assert "trainable_params" in capsys.readouterr().out


def test_train_zero_epochs_keeps_params(tmp_path, corpus):
    config = write_config(tmp_path / "run.json", epochs=0)
    out = tmp_path / "run"
    assert main(["train", "--config", str(config), "--manifest", str(corpus),
                 "--out", str(out)]) == 0
    history = (out / "history.csv").read_text().strip().splitlines()
    assert history == ["epoch,train_loss,val_uar"]


def test_train_rerun_is_byte_identical(tmp_path, corpus):
    config = write_config(tmp_path / "run.json", epochs=2)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["train", "--config", str(config), "--manifest", str(corpus),
                     "--out", str(out)]) == 0
    assert (out_a / "history.csv").read_bytes() == (out_b / "history.csv").read_bytes()
    assert (out_a / "model.qser").read_bytes() == (out_b / "model.qser").read_bytes()


def test_train_config_validation_exit_two(tmp_path, corpus, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"train": {"learning_rate": -1}}))
    assert main(["train", "--config", str(bad), "--manifest", str(corpus),
                 "--out", str(tmp_path / "o")]) == 2
    assert "train.learning_rate" in capsys.readouterr().err

    bad.write_text(json.dumps({"trian": {}}))
    assert main(["train", "--config", str(bad), "--manifest", str(corpus),
                 "--out", str(tmp_path / "o")]) == 2


def test_classical_model_via_config(tmp_path, corpus, capsys):
    model = {"kind": "classical", "dims": TINY_MODEL["dims"]}
    config = write_config(tmp_path / "run.json", epochs=1, model=model)
    assert main(["train", "--config", str(config), "--manifest", str(corpus),
                 "--out", str(tmp_path / "o")]) == 0


def test_param_counts_hybrid_vs_classical(tmp_path, corpus, capsys):
    # default reference dims: the printed counts must satisfy the <= 0.55 ratio
    hybrid_model = {
        "kind": "hybrid",
        "quantum": {"n_qubits": 8,
                    "embedding": {"kind": "amplitude"},
                    "circuit": {"kind": "strongly_entangling", "n_layers": 2},
                    "measurement": "pauliz"},
    }
    config = write_config(tmp_path / "h.json", epochs=0, model=hybrid_model)
    assert main(["train", "--config", str(config), "--manifest", str(corpus),
                 "--out", str(tmp_path / "h")]) == 0
    hybrid_params = int(capsys.readouterr().out.split("trainable_params")[-1])

    config = write_config(tmp_path / "c.json", epochs=0, model={"kind": "classical"})
    assert main(["train", "--config", str(config), "--manifest", str(corpus),
                 "--out", str(tmp_path / "c")]) == 0
    classical_params = int(capsys.readouterr().out.split("trainable_params")[-1])
    assert hybrid_params / classical_params <= 0.55


def test_grid_command_and_worker_independence(tmp_path, corpus):
    grid = {
        "epochs_per_point": 1,
        "learning_rates": [0.01, 0.001],
        "optimizers": ["adam"],
        "weight_decays": [0.0],
        "embeddings": ["angle"],
        "circuits": ["strongly_entangling"],
        "measurements": ["pauliz"],
    }
    config = write_config(tmp_path / "grid.json", epochs=1, grid=grid)
    out_a, out_b, out_c = tmp_path / "g1", tmp_path / "g2", tmp_path / "g3"
    assert main(["grid", "--config", str(config), "--manifest", str(corpus),
                 "--out", str(out_a), "--workers", "1"]) == 0
    assert main(["grid", "--config", str(config), "--manifest", str(corpus),
                 "--out", str(out_b), "--workers", "2"]) == 0
    assert main(["grid", "--config", str(config), "--manifest", str(corpus),
                 "--out", str(out_c), "--workers", "1"]) == 0
    grid_a = (out_a / "grid.csv").read_bytes()
    assert grid_a == (out_b / "grid.csv").read_bytes()
    assert grid_a == (out_c / "grid.csv").read_bytes()
    lines = grid_a.decode().strip().splitlines()
    assert len(lines) == 3  # header + 2 points


def test_inspect_strongly_entangling(capsys):
    assert main(["inspect", "--circuit", "strongly_entangling", "--qubits", "4",
                 "--layers", "1"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert sum(1 for ln in lines if ln.startswith("ROT3")) == 4
    assert sum(1 for ln in lines if ln.startswith("CNOT")) == 4
    assert "12 trainable parameters" in out


def test_inspect_larger_register(capsys):
    assert main(["inspect", "--circuit", "strongly_entangling", "--qubits", "8",
                 "--layers", "2"]) == 0
    assert "48 trainable parameters" in capsys.readouterr().out


def test_inspect_random_layers_ratio_one(capsys):
    assert main(["inspect", "--circuit", "random_layers", "--qubits", "4",
                 "--ratio", "1.0"]) == 0
    assert "0 trainable parameters" in capsys.readouterr().out
