"""Dataset manifests, label mapping, splits, and the synthetic corpus.

Manifests are CSV files with header ``path,label`` (integer class labels) or
``path,valence`` (real-valued annotations to be binarized). Paths are
resolved relative to the manifest's directory.

The synthetic corpus stands in for the license-restricted SER corpora: each
class is a band-limited energy ridge at a class-specific mel band with a
class-specific temporal slope, plus seeded Gaussian noise at a configurable
SNR. Layout: ``<out>/<class>/<idx>.qft`` plus ``<out>/manifest.csv``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, IngestionError
from .features import load_features, save_features
from .seeds import rng_stream

# 4-class label order is alphabetical and fixed so confusion matrices compare.
FOUR_CLASS_LABELS = ("angry", "happy", "neutral", "sad")
VALENCE_LABELS = ("low", "high")


@dataclass(frozen=True)
class Example:
    feature_path: Path
    label: int
    raw_label: str = ""


@dataclass(frozen=True)
class SplitSpec:
    seed: int = 0
    fractions: tuple[float, float, float] = (0.7, 0.15, 0.15)
    stratified: bool = True

    def __post_init__(self):
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions):
            raise ConfigError(f"need three positive fractions, got {self.fractions}")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ConfigError(f"fractions must sum to 1, got {sum(self.fractions)}")


def binarize_valence(value: float, scheme: str) -> int:
    """0 (low) / 1 (high) under the corpus-specific rule.

    iemocap: low iff value < 3 (annotations 1..5). recola: low iff value < 0;
    an exact 0 is rejected because the rule only covers signed values.
    """
    value = float(value)
    if not np.isfinite(value):
        raise DataError(f"valence must be finite, got {value}")
    scheme = scheme.lower()
    if scheme == "iemocap":
        return 0 if value < 3.0 else 1
    if scheme == "recola":
        if value == 0.0:
            raise DataError("RECOLA valence of exactly 0 is neither negative nor positive")
        return 0 if value < 0.0 else 1
    raise ConfigError(f"unknown valence scheme {scheme!r}; expected iemocap or recola")


def load_manifest(path, valence_scheme: str | None = None) -> list[Example]:
    """Parse a manifest CSV; rows with a `valence` column are binarized.

    `valence_scheme` is required for valence manifests. Every referenced
    feature file must exist.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"{path}: cannot read manifest ({exc})") from exc
    reader = csv.reader(text.splitlines())
    rows = list(reader)
    if not rows:
        raise IngestionError(f"{path}: empty manifest (missing header, line 1)")
    header = [h.strip().lower() for h in rows[0]]
    if header == ["path", "label"]:
        dimensional = False
    elif header == ["path", "valence"]:
        dimensional = True
        if valence_scheme is None:
            raise ConfigError(f"{path}: valence manifest needs a valence scheme")
    else:
        raise IngestionError(f"{path}: header must be path,label or path,valence (line 1)")

    examples: list[Example] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise IngestionError(f"{path}: expected 2 fields, got {len(row)} (line {lineno})")
        rel, raw = row[0].strip(), row[1].strip()
        feature_path = (path.parent / rel).resolve()
        if not feature_path.is_file():
            raise IngestionError(f"{path}: missing feature file {rel!r} (line {lineno})")
        try:
            if dimensional:
                label = binarize_valence(float(raw), valence_scheme)
            else:
                label = int(raw)
        except ValueError as exc:
            raise IngestionError(f"{path}: unparsable label {raw!r} (line {lineno})") from exc
        if label < 0:
            raise IngestionError(f"{path}: negative label {label} (line {lineno})")
        examples.append(Example(feature_path, label, raw))
    return examples


def split(
    examples: list[Example], spec: SplitSpec
) -> tuple[list[Example], list[Example], list[Example]]:
    """Deterministic (seeded) train/val/test split, optionally stratified.

    Stratified splitting shuffles within each class and cuts at rounded
    cumulative-fraction boundaries, keeping per-class proportions within
    one example.
    """
    rng = rng_stream(spec.seed, "shuffle", 0)

    def cut(items: list[Example]) -> tuple[list[Example], list[Example], list[Example]]:
        order = rng.permutation(len(items))
        shuffled = [items[i] for i in order]
        b1 = round(spec.fractions[0] * len(items))
        b2 = round((spec.fractions[0] + spec.fractions[1]) * len(items))
        return shuffled[:b1], shuffled[b1:b2], shuffled[b2:]

    if not spec.stratified:
        return cut(list(examples))

    by_class: dict[int, list[Example]] = {}
    for ex in examples:
        by_class.setdefault(ex.label, []).append(ex)
    for label, members in sorted(by_class.items()):
        if not members:
            raise DataError(f"class {label} has no examples to stratify")
    train: list[Example] = []
    val: list[Example] = []
    test: list[Example] = []
    for label in sorted(by_class):
        tr, va, te = cut(by_class[label])
        train.extend(tr)
        val.extend(va)
        test.extend(te)
    return train, val, test


@dataclass(frozen=True)
class SyntheticConfig:
    n_mels: int = 128
    n_frames: int = 126
    snr_db: float = 10.0
    ridge_width: float = 5.0
    center_jitter: float = 2.0
    slope_jitter: float = 0.02


def _ridge(config: SyntheticConfig, class_index: int, n_classes: int,
           rng: np.random.Generator) -> np.ndarray:
    # class signature: center band spread evenly over the mel axis, slope
    # alternating in sign and growing with the class index
    center = (class_index + 1) * config.n_mels / (n_classes + 1)
    slope = (0.15 + 0.1 * (class_index // 2)) * (1 if class_index % 2 == 0 else -1)
    center = center + rng.uniform(-config.center_jitter, config.center_jitter)
    slope = slope + rng.uniform(-config.slope_jitter, config.slope_jitter)
    frames = np.arange(config.n_frames) - config.n_frames / 2.0
    track = center + slope * frames
    mels = np.arange(config.n_mels)
    return np.exp(-((mels[:, None] - track[None, :]) ** 2) / (2.0 * config.ridge_width**2))


def generate_synthetic(
    n_per_class: int,
    n_classes: int,
    seed: int,
    out_dir,
    config: SyntheticConfig = SyntheticConfig(),
) -> Path:
    """Write a seeded synthetic corpus; returns the manifest path.

    Byte-identical for identical arguments: every file draws from its own
    PCG64 stream keyed by (seed, class, index).
    """
    if n_classes not in (2, 4):
        raise ConfigError(f"synthetic corpus supports 2 or 4 classes, got {n_classes}")
    if n_per_class < 1:
        raise ConfigError(f"n_per_class must be >= 1, got {n_per_class}")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IngestionError(f"cannot create output directory {out_dir}: {exc}") from exc

    rows: list[tuple[str, int]] = []
    for label in range(n_classes):
        class_dir = out_dir / str(label)
        class_dir.mkdir(exist_ok=True)
        for idx in range(n_per_class):
            rng = rng_stream(seed, "synth", label, idx)
            signal = _ridge(config, label, n_classes, rng)
            if config.snr_db is not None and np.isfinite(config.snr_db):
                signal_rms = np.sqrt(np.mean(signal**2))
                noise_std = signal_rms / (10.0 ** (config.snr_db / 20.0))
                signal = signal + rng.normal(0.0, noise_std, size=signal.shape)
            rel = f"{label}/{idx}.qft"
            save_features(out_dir / rel, signal)
            rows.append((rel, label))

    manifest = out_dir / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label"])
        writer.writerows(rows)
    return manifest


def load_dataset(examples: list[Example]) -> list[tuple[np.ndarray, int]]:
    """Materialize (features, label) pairs; features get a leading channel axis."""
    out = []
    for ex in examples:
        feats = load_features(ex.feature_path)
        out.append((feats[None, :, :], ex.label))
    return out
