"""Data layer tests: manifests, valence rules, splits, synthetic corpus."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qser.data import (
    Example,
    SplitSpec,
    SyntheticConfig,
    binarize_valence,
    generate_synthetic,
    load_dataset,
    load_manifest,
    split,
)
from qser.errors import ConfigError, DataError, IngestionError
from qser.features import load_features, save_features


def make_manifest(tmp_path, rows, header="path,label"):
    for rel, _ in rows:
        target = tmp_path / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        save_features(target, np.zeros((4, 4)))
    manifest = tmp_path / "manifest.csv"
    lines = [header] + [f"{rel},{val}" for rel, val in rows]
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# Valence binarization
# ---------------------------------------------------------------------------

def test_iemocap_threshold():
    assert binarize_valence(2.9, "iemocap") == 0
    assert binarize_valence(3.0, "iemocap") == 1
    assert binarize_valence(1.0, "iemocap") == 0
    assert binarize_valence(5.0, "iemocap") == 1


def test_recola_sign_rule():
    assert binarize_valence(-0.1, "recola") == 0
    assert binarize_valence(0.2, "recola") == 1


def test_recola_zero_is_rejected():
    with pytest.raises(DataError):
        binarize_valence(0.0, "recola")


def test_binarize_rejects_nan_and_bad_scheme():
    with pytest.raises(DataError):
        binarize_valence(float("nan"), "iemocap")
    with pytest.raises(ConfigError):
        binarize_valence(1.0, "msp")


@given(a=st.floats(min_value=-10, max_value=10, allow_nan=False),
       b=st.floats(min_value=-10, max_value=10, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_binarize_is_monotone(a, b):
    lo, hi = sorted((a, b))
    assert binarize_valence(lo, "iemocap") <= binarize_valence(hi, "iemocap")
    if lo != 0.0 and hi != 0.0:
        assert binarize_valence(lo, "recola") <= binarize_valence(hi, "recola")


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------

def test_manifest_header_only(tmp_path):
    manifest = make_manifest(tmp_path, [])
    assert load_manifest(manifest) == []


def test_manifest_preserves_file_order(tmp_path):
    manifest = make_manifest(tmp_path, [("a.qft", 0), ("b.qft", 1), ("c.qft", 0)])
    examples = load_manifest(manifest)
    assert [e.feature_path.name for e in examples] == ["a.qft", "b.qft", "c.qft"]
    assert [e.label for e in examples] == [0, 1, 0]


def test_manifest_missing_file_names_line(tmp_path):
    manifest = make_manifest(tmp_path, [("a.qft", 0)])
    manifest.write_text("path,label\na.qft,0\nmissing.qft,1\n")
    with pytest.raises(IngestionError, match="line 3"):
        load_manifest(manifest)


def test_manifest_bad_label_names_line(tmp_path):
    manifest = make_manifest(tmp_path, [("a.qft", 0)])
    manifest.write_text("path,label\na.qft,zebra\n")
    with pytest.raises(IngestionError, match="line 2"):
        load_manifest(manifest)


def test_manifest_bad_header_rejected(tmp_path):
    manifest = tmp_path / "m.csv"
    manifest.write_text("file,klass\n")
    with pytest.raises(IngestionError, match="header"):
        load_manifest(manifest)


def test_valence_manifest_binarizes(tmp_path):
    manifest = make_manifest(tmp_path, [("a.qft", "2.5"), ("b.qft", "4.0")],
                             header="path,valence")
    examples = load_manifest(manifest, valence_scheme="iemocap")
    assert [e.label for e in examples] == [0, 1]
    assert [e.raw_label for e in examples] == ["2.5", "4.0"]


def test_valence_manifest_needs_scheme(tmp_path):
    manifest = make_manifest(tmp_path, [("a.qft", "2.5")], header="path,valence")
    with pytest.raises(ConfigError):
        load_manifest(manifest)


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------

def fake_examples(counts: dict[int, int]) -> list[Example]:
    out = []
    for label, count in counts.items():
        out.extend(Example(f"/x/{label}/{i}.qft", label) for i in range(count))
    return out


def test_split_sizes_single_class():
    examples = fake_examples({0: 10})
    tr, va, te = split(examples, SplitSpec(0, (0.8, 0.1, 0.1), stratified=False))
    assert (len(tr), len(va), len(te)) == (8, 1, 1)


def test_split_deterministic():
    examples = fake_examples({0: 20, 1: 20})
    spec = SplitSpec(seed=5, fractions=(0.6, 0.2, 0.2))
    first = split(examples, spec)
    second = split(examples, spec)
    assert first == second
    different = split(examples, SplitSpec(seed=6, fractions=(0.6, 0.2, 0.2)))
    assert first != different


def test_split_stratified_balance():
    examples = fake_examples({0: 50, 1: 50})
    tr, va, te = split(examples, SplitSpec(3, (0.5, 0.25, 0.25)))
    train_labels = [e.label for e in tr]
    assert train_labels.count(0) == 25 and train_labels.count(1) == 25


def test_split_disjoint_and_exhaustive():
    examples = fake_examples({0: 17, 1: 23, 2: 9})
    tr, va, te = split(examples, SplitSpec(11, (0.7, 0.15, 0.15)))
    pieces = [e.feature_path for e in tr + va + te]
    assert len(pieces) == len(examples)
    assert len(set(pieces)) == len(examples)


def test_split_rejects_bad_fractions():
    with pytest.raises(ConfigError):
        SplitSpec(0, (0.5, 0.25, 0.20))
    with pytest.raises(ConfigError):
        SplitSpec(0, (1.0, 0.0, 0.0))


# ---------------------------------------------------------------------------
# Synthetic corpus
# ---------------------------------------------------------------------------

def test_synthetic_counts_and_manifest(tmp_path):
    manifest = generate_synthetic(10, 2, seed=1, out_dir=tmp_path / "c")
    examples = load_manifest(manifest)
    assert len(examples) == 20
    labels = [e.label for e in examples]
    assert labels.count(0) == 10 and labels.count(1) == 10
    features = load_features(examples[0].feature_path)
    assert features.shape == (128, 126)


def test_synthetic_byte_identical_reruns(tmp_path):
    m1 = generate_synthetic(4, 2, seed=9, out_dir=tmp_path / "a")
    m2 = generate_synthetic(4, 2, seed=9, out_dir=tmp_path / "b")
    for e1, e2 in zip(load_manifest(m1), load_manifest(m2)):
        assert e1.feature_path.read_bytes() == e2.feature_path.read_bytes()
    assert m1.read_text() == m2.read_text()


def test_synthetic_seed_changes_corpus(tmp_path):
    m1 = generate_synthetic(2, 2, seed=1, out_dir=tmp_path / "a")
    m2 = generate_synthetic(2, 2, seed=2, out_dir=tmp_path / "b")
    e1, e2 = load_manifest(m1)[0], load_manifest(m2)[0]
    assert e1.feature_path.read_bytes() != e2.feature_path.read_bytes()


def test_synthetic_noiseless_class_geometry(tmp_path):
    # without noise, class ridges separate: every inter-class distance beats
    # every intra-class distance
    config = SyntheticConfig(snr_db=float("inf"))
    manifest = generate_synthetic(5, 2, seed=3, out_dir=tmp_path / "c", config=config)
    examples = load_manifest(manifest)
    flat = {i: load_features(e.feature_path).ravel() for i, e in enumerate(examples)}
    labels = [e.label for e in examples]
    intra, inter = [], []
    for i in range(len(examples)):
        for j in range(i + 1, len(examples)):
            d = np.linalg.norm(flat[i] - flat[j])
            (intra if labels[i] == labels[j] else inter).append(d)
    assert max(intra) < min(inter)


def nearest_centroid_uar(examples) -> float:
    data = [(load_features(e.feature_path).ravel(), e.label) for e in examples]
    labels = sorted({label for _, label in data})
    centroids = {
        k: np.mean([x for x, label in data if label == k], axis=0) for k in labels
    }
    recalls = []
    for k in labels:
        members = [(x, label) for x, label in data if label == k]
        hits = sum(
            1 for x, _ in members
            if min(centroids, key=lambda c: np.linalg.norm(x - centroids[c])) == k
        )
        recalls.append(hits / len(members))
    return float(np.mean(recalls))


def test_synthetic_high_snr_is_centroid_separable(tmp_path):
    config = SyntheticConfig(snr_db=20.0)
    for n_classes in (2, 4):
        manifest = generate_synthetic(25, n_classes, seed=13,
                                      out_dir=tmp_path / f"c{n_classes}", config=config)
        assert nearest_centroid_uar(load_manifest(manifest)) >= 0.95


def test_synthetic_rejects_bad_args(tmp_path):
    with pytest.raises(ConfigError):
        generate_synthetic(5, 3, seed=0, out_dir=tmp_path)
    with pytest.raises(ConfigError):
        generate_synthetic(0, 2, seed=0, out_dir=tmp_path)


def test_load_dataset_adds_channel_axis(tmp_path):
    manifest = generate_synthetic(2, 2, seed=0, out_dir=tmp_path / "c")
    pairs = load_dataset(load_manifest(manifest))
    assert pairs[0][0].shape == (1, 128, 126)
    assert {label for _, label in pairs} == {0, 1}
