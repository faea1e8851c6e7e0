"""Audio-to-Mel-spectrogram pipeline.

Every utterance is resampled to 22050 Hz, fixed to 3 s (truncate or
zero-pad at the end), then turned into a log-power Mel spectrogram with a
2048-sample Hann window and 512-sample hop. Without center padding that is
exactly 1 + (66150 - 2048) // 512 = 126 frames.

Fixed choices not covered by the rate/duration/window/hop contract: periodic
Hann window, HTK mel scale (2595 * log10(1 + f/700)) with peak-1 triangular
filters, log10 with a 1e-10 floor, mono conversion by channel averaging.

Feature files (.qft, little-endian): magic ``QFT1``, u32 n_mels,
u32 n_frames, then n_mels * n_frames 8-byte floats row-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, IngestionError

QFT_MAGIC = b"QFT1"

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3

# windowed-sinc kernel half-width, in zero crossings of the sinc
_RESAMPLE_TAPS = 16


@dataclass(frozen=True)
class AudioClip:
    sample_rate: int
    samples: np.ndarray

    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class MelConfig:
    target_rate: int = 22050
    duration: float = 3.0
    window: int = 2048
    hop: int = 512
    n_mels: int = 128
    fmin: float = 0.0
    fmax: float | None = None  # None means target_rate / 2
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.window < self.hop:
            raise ConfigError(f"window ({self.window}) must be >= hop ({self.hop})")
        if self.n_mels < 1:
            raise ConfigError(f"n_mels must be >= 1, got {self.n_mels}")
        if self.target_rate <= 0 or self.duration <= 0:
            raise ConfigError("target_rate and duration must be positive")

    @property
    def fmax_value(self) -> float:
        return self.target_rate / 2.0 if self.fmax is None else self.fmax

    @property
    def n_samples(self) -> int:
        return int(round(self.target_rate * self.duration))

    @property
    def n_frames(self) -> int:
        return 1 + (self.n_samples - self.window) // self.hop


# ---------------------------------------------------------------------------
# WAV ingestion
# ---------------------------------------------------------------------------

def load_wav(path) -> AudioClip:
    """Parse a PCM-16 or float-32 RIFF/WAVE file into mono samples in [-1, 1].

    Stereo input is averaged to mono. Parse failures raise IngestionError
    with the byte offset of the offending structure.
    """
    data = Path(path).read_bytes()

    def fail(offset: int, why: str):
        raise IngestionError(f"{path}: {why} (byte offset {offset})")

    if len(data) < 12:
        fail(0, "file too short for a RIFF header")
    if data[0:4] != b"RIFF":
        fail(0, f"expected RIFF magic, found {data[0:4]!r}")
    if data[8:12] != b"WAVE":
        fail(8, f"expected WAVE form type, found {data[8:12]!r}")

    fmt = None
    raw = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = pos + 8
        if body + chunk_size > len(data):
            fail(pos, f"chunk {chunk_id!r} overruns the file")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                fail(pos, "fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", data, body)
        elif chunk_id == b"data":
            raw = (body, chunk_size)
        pos = body + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        fail(len(data), "missing fmt chunk")
    if raw is None:
        fail(len(data), "missing data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    body, size = raw
    if n_channels not in (1, 2):
        fail(body, f"unsupported channel count {n_channels}")
    if audio_format == _WAVE_FORMAT_PCM and bits == 16:
        count = size // 2
        samples = np.frombuffer(data, dtype="<i2", count=count, offset=body)
        samples = samples.astype(float) / 32768.0
    elif audio_format == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        count = size // 4
        samples = np.frombuffer(data, dtype="<f4", count=count, offset=body).astype(float)
    else:
        fail(body, f"unsupported format (code {audio_format}, {bits}-bit)")
    if n_channels == 2:
        samples = samples[: (len(samples) // 2) * 2].reshape(-1, 2).mean(axis=1)
    if not np.isfinite(samples).all():
        fail(body, "non-finite sample values")
    return AudioClip(int(sample_rate), samples)


def write_wav_pcm16(path, clip: AudioClip) -> None:
    """Mono 16-bit PCM writer (used by tests and tooling)."""
    pcm = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    body = pcm.tobytes()
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 36 + len(body)) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, clip.sample_rate,
                                       clip.sample_rate * 2, 2, 16))
        fh.write(b"data" + struct.pack("<I", len(body)) + body)


# ---------------------------------------------------------------------------
# Resampling and length normalization
# ---------------------------------------------------------------------------

def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited windowed-sinc resampling to `target_rate`.

    Output length is round(len * target / source). Kernel weights are
    renormalized per output sample, which preserves DC exactly (including at
    the edges, where the input is extended by edge replication) and reduces
    to the identity when the rates already match.
    """
    if target_rate <= 0 or clip.sample_rate <= 0:
        raise ConfigError("sample rates must be positive")
    if target_rate == clip.sample_rate:
        return AudioClip(target_rate, clip.samples.copy())
    src = clip.samples
    n_out = int(round(len(src) * target_rate / clip.sample_rate))
    if len(src) == 0 or n_out == 0:
        return AudioClip(target_rate, np.zeros(0))

    ratio = target_rate / clip.sample_rate
    cutoff = min(1.0, ratio)  # fraction of the input Nyquist retained
    half = int(np.ceil(_RESAMPLE_TAPS / cutoff))
    offsets = np.arange(-half, half + 1)
    padded = np.pad(src, half + 1, mode="edge")

    out = np.empty(n_out)
    chunk = 8192
    for start in range(0, n_out, chunk):
        # output sample k sits at input time k / ratio
        t = np.arange(start, min(start + chunk, n_out)) / ratio
        base = np.floor(t).astype(int)
        x = base[:, None] + offsets[None, :] - t[:, None]
        hann = 0.5 + 0.5 * np.cos(np.pi * np.clip(x / half, -1.0, 1.0))
        kernel = cutoff * np.sinc(cutoff * x) * hann
        taps = padded[base[:, None] + offsets[None, :] + half + 1]
        out[start : start + len(t)] = (kernel * taps).sum(axis=1) / kernel.sum(axis=1)
    return AudioClip(target_rate, out)


def fix_length(clip: AudioClip, duration: float) -> AudioClip:
    """Exactly round(rate * duration) samples: truncate or zero-pad at the end."""
    n = int(round(clip.sample_rate * duration))
    if len(clip.samples) >= n:
        return AudioClip(clip.sample_rate, clip.samples[:n].copy())
    out = np.zeros(n)
    out[: len(clip.samples)] = clip.samples
    return AudioClip(clip.sample_rate, out)


# ---------------------------------------------------------------------------
# Mel spectrogram
# ---------------------------------------------------------------------------

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def mel_filterbank(config: MelConfig) -> np.ndarray:
    """(n_mels, window//2 + 1) peak-1 triangular filters on the HTK mel scale."""
    n_bins = config.window // 2 + 1
    bin_hz = np.arange(n_bins) * config.target_rate / config.window
    points = mel_to_hz(
        np.linspace(hz_to_mel(config.fmin), hz_to_mel(config.fmax_value), config.n_mels + 2)
    )
    bank = np.zeros((config.n_mels, n_bins))
    for k in range(config.n_mels):
        left, center, right = points[k], points[k + 1], points[k + 2]
        rising = (bin_hz - left) / (center - left)
        falling = (right - bin_hz) / (right - center)
        bank[k] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return bank


def mel_filter_centers(config: MelConfig) -> np.ndarray:
    """Center frequency (Hz) of each mel filter."""
    points = mel_to_hz(
        np.linspace(hz_to_mel(config.fmin), hz_to_mel(config.fmax_value), config.n_mels + 2)
    )
    return points[1:-1]


def mel_spectrogram(clip: AudioClip, config: MelConfig = MelConfig()) -> np.ndarray:
    """(n_mels, n_frames) log10 mel power spectrogram, floored at log_floor."""
    if clip.sample_rate != config.target_rate:
        raise ConfigError(
            f"clip rate {clip.sample_rate} != configured rate {config.target_rate}"
        )
    if len(clip.samples) != config.n_samples:
        raise ConfigError(
            f"clip length {len(clip.samples)} != configured length {config.n_samples}; "
            "run fix_length first"
        )
    n_frames = config.n_frames
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(config.window) / config.window)
    starts = np.arange(n_frames) * config.hop
    frames = np.stack([clip.samples[s : s + config.window] for s in starts])
    spectrum = np.fft.rfft(frames * window, axis=1)
    power = spectrum.real**2 + spectrum.imag**2  # (n_frames, n_bins)
    mel_power = mel_filterbank(config) @ power.T  # (n_mels, n_frames)
    return np.log10(np.maximum(mel_power, config.log_floor))


# ---------------------------------------------------------------------------
# Feature file I/O
# ---------------------------------------------------------------------------

def save_features(path, features: np.ndarray) -> None:
    features = np.asarray(features, dtype=float)
    if features.ndim != 2:
        raise ConfigError(f"feature tensor must be 2-D, got shape {features.shape}")
    with open(path, "wb") as fh:
        fh.write(QFT_MAGIC)
        fh.write(struct.pack("<II", features.shape[0], features.shape[1]))
        fh.write(np.ascontiguousarray(features, dtype="<f8").tobytes())


def load_features(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != QFT_MAGIC:
        raise IngestionError(f"{path}: expected QFT1 magic, found {data[:4]!r} (byte offset 0)")
    if len(data) < 12:
        raise IngestionError(f"{path}: truncated header (byte offset 4)")
    n_mels, n_frames = struct.unpack_from("<II", data, 4)
    expected = 12 + 8 * n_mels * n_frames
    if len(data) != expected:
        raise IngestionError(
            f"{path}: expected {expected} bytes for {n_mels}x{n_frames}, got {len(data)} "
            "(byte offset 12)"
        )
    return np.frombuffer(data, dtype="<f8", offset=12).astype(float).reshape(n_mels, n_frames)


def wav_to_features(path, config: MelConfig = MelConfig()) -> np.ndarray:
    """Full pipeline: load, resample, fix length, mel spectrogram."""
    clip = load_wav(path)
    clip = resample(clip, config.target_rate)
    clip = fix_length(clip, config.duration)
    return mel_spectrogram(clip, config)
