"""Feature pipeline tests: WAV parsing, resampling, framing, mel filterbank."""

import struct

import numpy as np
import pytest

from qser.errors import ConfigError, IngestionError
from qser.features import (
    AudioClip,
    MelConfig,
    fix_length,
    hz_to_mel,
    load_features,
    load_wav,
    mel_filter_centers,
    mel_spectrogram,
    mel_to_hz,
    resample,
    save_features,
    wav_to_features,
    write_wav_pcm16,
)


def write_wav_raw(path, sample_rate, frames: bytes, bits=16, fmt=1, channels=1):
    block = channels * bits // 8
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 36 + len(frames)) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<IHHIIHH", 16, fmt, channels, sample_rate,
                                       sample_rate * block, block, bits))
        fh.write(b"data" + struct.pack("<I", len(frames)) + frames)


def test_load_wav_all_zero(tmp_path):
    path = tmp_path / "zero.wav"
    write_wav_raw(path, 22050, np.zeros(100, dtype="<i2").tobytes())
    clip = load_wav(path)
    assert clip.sample_rate == 22050
    assert np.array_equal(clip.samples, np.zeros(100))


def test_load_wav_full_scale_16bit(tmp_path):
    path = tmp_path / "full.wav"
    write_wav_raw(path, 8000, np.array([32767, -32768], dtype="<i2").tobytes())
    clip = load_wav(path)
    assert clip.samples[0] == pytest.approx(32767 / 32768)
    assert clip.samples[1] == pytest.approx(-1.0)


def test_load_wav_stereo_averages(tmp_path):
    path = tmp_path / "stereo.wav"
    left = np.full(50, 16384, dtype="<i2")
    right = np.full(50, -16384, dtype="<i2")
    frames = np.column_stack([left, right]).ravel().tobytes()
    write_wav_raw(path, 16000, frames, channels=2)
    clip = load_wav(path)
    assert np.allclose(clip.samples, 0.0)


def test_load_wav_float32(tmp_path):
    path = tmp_path / "f32.wav"
    data = np.array([0.25, -0.5, 1.0], dtype="<f4").tobytes()
    write_wav_raw(path, 44100, data, bits=32, fmt=3)
    clip = load_wav(path)
    assert np.allclose(clip.samples, [0.25, -0.5, 1.0])


def test_load_wav_reports_byte_offsets(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"RIFX" + b"\x00" * 20)
    with pytest.raises(IngestionError, match="byte offset 0"):
        load_wav(path)
    path.write_bytes(b"RIFF" + struct.pack("<I", 4) + b"EVAW")
    with pytest.raises(IngestionError, match="byte offset 8"):
        load_wav(path)


def test_load_wav_rejects_unsupported_format(tmp_path):
    path = tmp_path / "ulaw.wav"
    write_wav_raw(path, 8000, b"\x00\x00", bits=8, fmt=7)
    with pytest.raises(IngestionError, match="unsupported format"):
        load_wav(path)


def test_pcm16_writer_roundtrip(tmp_path):
    t = np.arange(4410) / 44100
    original = 0.4 * np.sin(2 * np.pi * 440 * t)
    path = tmp_path / "sine.wav"
    write_wav_pcm16(path, AudioClip(44100, original))
    back = load_wav(path)
    assert back.sample_rate == 44100
    assert np.max(np.abs(back.samples - original)) < 1e-4  # 16-bit quantization


def test_resample_same_rate_is_identity(rng):
    samples = rng.normal(size=500)
    clip = AudioClip(22050, samples)
    out = resample(clip, 22050)
    assert np.array_equal(out.samples, samples)


def test_resample_output_length():
    clip = AudioClip(44100, np.zeros(44100))
    assert len(resample(clip, 22050).samples) == 22050
    clip = AudioClip(16000, np.zeros(16000))
    assert len(resample(clip, 22050).samples) == 22050


def test_resample_preserves_dc():
    for src_rate, dst_rate in ((44100, 22050), (16000, 22050), (48000, 22050)):
        clip = AudioClip(src_rate, np.full(src_rate // 5, 0.7))
        out = resample(clip, dst_rate)
        assert np.max(np.abs(out.samples - 0.7)) < 1e-3


def test_resample_sine_keeps_dominant_bin():
    t = np.arange(44100) / 44100
    clip = AudioClip(44100, np.sin(2 * np.pi * 440 * t))
    out = resample(clip, 22050)
    spectrum = np.abs(np.fft.rfft(out.samples))
    peak_hz = np.argmax(spectrum) * 22050 / len(out.samples)
    assert peak_hz == pytest.approx(440.0, abs=1.0)


def test_fix_length_truncates_and_pads():
    rate = 22050
    long_clip = AudioClip(rate, np.arange(rate * 5, dtype=float))
    fixed = fix_length(long_clip, 3.0)
    assert len(fixed.samples) == 66150
    assert np.array_equal(fixed.samples, np.arange(66150, dtype=float))

    short_clip = AudioClip(rate, np.ones(rate))
    fixed = fix_length(short_clip, 3.0)
    assert len(fixed.samples) == 66150
    assert np.all(fixed.samples[:rate] == 1.0)
    assert np.all(fixed.samples[rate:] == 0.0)

    exact = AudioClip(rate, np.arange(66150, dtype=float))
    assert np.array_equal(fix_length(exact, 3.0).samples, exact.samples)


def test_frame_count_formula():
    config = MelConfig()
    assert config.n_samples == 66150
    assert config.n_frames == 1 + (66150 - 2048) // 512 == 126


def test_mel_shape_is_constant(rng):
    config = MelConfig()
    for _ in range(3):
        clip = AudioClip(22050, rng.normal(size=66150) * 0.1)
        assert mel_spectrogram(clip, config).shape == (128, 126)


def test_mel_silence_hits_log_floor():
    out = mel_spectrogram(AudioClip(22050, np.zeros(66150)), MelConfig())
    assert np.all(out == -10.0)


def test_mel_440hz_peaks_at_nearest_filter():
    config = MelConfig()
    t = np.arange(66150) / 22050
    clip = AudioClip(22050, np.sin(2 * np.pi * 440 * t))
    out = mel_spectrogram(clip, config)
    # oracle: the HTK mel-scale filter centers, computed from the formula
    centers = mel_to_hz(np.linspace(hz_to_mel(0.0), hz_to_mel(11025.0), 130))[1:-1]
    nearest = int(np.argmin(np.abs(centers - 440.0)))
    assert np.array_equal(mel_filter_centers(config), centers)
    assert np.all(out.argmax(axis=0) == nearest)


def test_mel_energy_monotone_in_scale(rng):
    config = MelConfig()
    wave = rng.normal(size=66150) * 0.05
    base = mel_spectrogram(AudioClip(22050, wave), config)
    louder = mel_spectrogram(AudioClip(22050, 3.0 * wave), config)
    unfloored = base > np.log10(config.log_floor)
    assert np.all(louder[unfloored] >= base[unfloored])


def test_mel_rejects_wrong_length_or_rate():
    with pytest.raises(ConfigError):
        mel_spectrogram(AudioClip(22050, np.zeros(1000)), MelConfig())
    with pytest.raises(ConfigError):
        mel_spectrogram(AudioClip(16000, np.zeros(66150)), MelConfig())


def test_hz_mel_roundtrip():
    freqs = np.array([0.0, 440.0, 1000.0, 11025.0])
    assert np.allclose(mel_to_hz(hz_to_mel(freqs)), freqs, atol=1e-9)


def test_qft_roundtrip_and_errors(tmp_path, rng):
    features = rng.normal(size=(64, 126))
    path = tmp_path / "x.qft"
    save_features(path, features)
    assert np.array_equal(load_features(path), features)

    bad = tmp_path / "bad.qft"
    bad.write_bytes(b"NOPE" + b"\x00" * 8)
    with pytest.raises(IngestionError, match="magic"):
        load_features(bad)
    truncated = tmp_path / "short.qft"
    truncated.write_bytes(b"QFT1" + struct.pack("<II", 4, 4) + b"\x00" * 10)
    with pytest.raises(IngestionError):
        load_features(truncated)


def test_wav_to_features_end_to_end(tmp_path):
    t = np.arange(44100 * 2) / 44100
    path = tmp_path / "tone.wav"
    write_wav_pcm16(path, AudioClip(44100, 0.5 * np.sin(2 * np.pi * 440 * t)))
    out = wav_to_features(path, MelConfig(n_mels=64))
    assert out.shape == (64, 126)
    assert np.all(np.isfinite(out))


def test_pipeline_is_deterministic(tmp_path, rng):
    t = np.arange(44100) / 44100
    path = tmp_path / "tone.wav"
    write_wav_pcm16(path, AudioClip(44100, 0.3 * np.sin(2 * np.pi * 523 * t)))
    a = wav_to_features(path)
    b = wav_to_features(path)
    assert np.array_equal(a, b)
