"""Audio resampling, 128-channel log-mel extraction, and 25Hz token accounting.

The token rate is fixed by the downstream encoder chain: 10ms mel hops
(100 frames/s), a stride-2 encoder (50/s), and a stride-2 pool (25/s), so one
second of audio costs 25 tokens. Only lengths and channel counts are
contractual here; filter quality is not under test.
"""

from __future__ import annotations

import io
import math
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import InputError

TARGET_RATE = 16_000
N_MELS = 128
WIN_SAMPLES = 400  # 25 ms at 16 kHz
HOP_SAMPLES = 160  # 10 ms at 16 kHz
TOKENS_PER_SECOND = 25
# Windowed-sinc resampler parameters (scipy polyphase kernel).
RESAMPLE_WINDOW = ("kaiser", 5.0)


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray  # float amplitudes in [-1, 1]
    sample_rate: int

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise InputError(f"sample rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise InputError("waveform must be mono (1-D)")
        if not np.all(np.isfinite(self.samples)):
            raise InputError("waveform contains non-finite samples")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class MelSpectrogram:
    frames: np.ndarray  # [n_frames, N_MELS]
    hop_s: float

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class AudioTokenBudget:
    duration_s: float
    token_count: int


def resample(w: Waveform, target_rate: int = TARGET_RATE) -> Waveform:
    """Resample with a polyphase windowed-sinc kernel; identity if rates match."""
    if len(w.samples) == 0:
        raise InputError("cannot resample an empty waveform")
    if w.sample_rate == target_rate:
        return w
    g = math.gcd(target_rate, w.sample_rate)
    out = resample_poly(w.samples, target_rate // g, w.sample_rate // g, window=RESAMPLE_WINDOW)
    return Waveform(samples=np.asarray(out, dtype=np.float32), sample_rate=target_rate)


def _mel_scale(hz: np.ndarray) -> np.ndarray:
    # Linear below 1 kHz, logarithmic above (Slaney convention).
    mel = hz / (200.0 / 3.0)
    log_region = hz >= 1000.0
    logstep = math.log(6.4) / 27.0
    mel = np.where(log_region, 15.0 + np.log(np.maximum(hz, 1e-9) / 1000.0) / logstep, mel)
    return mel


def _mel_to_hz(mel: np.ndarray) -> np.ndarray:
    hz = mel * (200.0 / 3.0)
    log_region = mel >= 15.0
    logstep = math.log(6.4) / 27.0
    hz = np.where(log_region, 1000.0 * np.exp(logstep * (mel - 15.0)), hz)
    return hz


def mel_filterbank(n_mels: int = N_MELS, n_fft: int = WIN_SAMPLES, rate: int = TARGET_RATE) -> np.ndarray:
    """Triangular mel filters [n_mels, n_fft//2 + 1], area-normalized."""
    fft_hz = np.linspace(0.0, rate / 2.0, n_fft // 2 + 1)
    mel_pts = np.linspace(0.0, float(_mel_scale(np.array([rate / 2.0]))[0]), n_mels + 2)
    hz_pts = _mel_to_hz(mel_pts)
    fb = np.zeros((n_mels, len(fft_hz)))
    for m in range(n_mels):
        lo, mid, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        up = (fft_hz - lo) / max(mid - lo, 1e-9)
        down = (hi - fft_hz) / max(hi - mid, 1e-9)
        fb[m] = np.maximum(0.0, np.minimum(up, down)) * (2.0 / (hi - lo))
    return fb


_FILTERBANK: np.ndarray | None = None


def log_mel(w: Waveform) -> MelSpectrogram:
    """128-channel log-mel with a 25 ms window and 10 ms hop.

    Frame count is exactly ceil(n_samples / 160); magnitudes are log10-
    compressed, floored at 8 decades below the peak, then affinely mapped
    into roughly [-1, 1].
    """
    global _FILTERBANK
    if w.sample_rate != TARGET_RATE:
        raise InputError(f"log_mel expects {TARGET_RATE} Hz input, got {w.sample_rate}")
    if len(w.samples) == 0:
        raise InputError("cannot compute mel of an empty waveform")
    n = len(w.samples)
    n_frames = -(-n // HOP_SAMPLES)

    half = WIN_SAMPLES // 2
    x = w.samples.astype(np.float64)
    pad_mode = "reflect" if n > WIN_SAMPLES else "constant"
    right = half + (n_frames - 1) * HOP_SAMPLES + WIN_SAMPLES - n - half
    padded = np.pad(x, (half, max(right, half)), mode=pad_mode)
    windows = np.lib.stride_tricks.sliding_window_view(padded, WIN_SAMPLES)[:: HOP_SAMPLES]
    windows = windows[:n_frames]

    t = np.arange(WIN_SAMPLES)
    hann = 0.5 * (1.0 - np.cos(2.0 * np.pi * t / WIN_SAMPLES))
    spec = np.fft.rfft(windows * hann, axis=1)
    power = np.abs(spec) ** 2

    if _FILTERBANK is None:
        _FILTERBANK = mel_filterbank()
    mel = power @ _FILTERBANK.T
    log_spec = np.log10(np.maximum(mel, 1e-10))
    log_spec = np.maximum(log_spec, log_spec.max() - 8.0)
    log_spec = (log_spec + 4.0) / 4.0
    return MelSpectrogram(frames=log_spec, hop_s=HOP_SAMPLES / TARGET_RATE)


def audio_token_count(duration_s: float) -> int:
    """Closed-form token cost: ceil(25 * seconds)."""
    if duration_s < 0:
        raise InputError(f"duration must be non-negative, got {duration_s}")
    return math.ceil(TOKENS_PER_SECOND * duration_s)


def audio_token_budget(duration_s: float) -> AudioTokenBudget:
    return AudioTokenBudget(duration_s=duration_s, token_count=audio_token_count(duration_s))


def read_wav(source: str | Path | bytes) -> Waveform:
    """Load 16-bit PCM WAV from a path or raw bytes; stereo is averaged to mono."""
    if isinstance(source, bytes):
        fh = io.BytesIO(source)
    else:
        fh = open(source, "rb")
    try:
        with wave.open(fh, "rb") as wf:
            if wf.getsampwidth() != 2:
                raise InputError(f"only 16-bit PCM WAV is supported, got {8 * wf.getsampwidth()}-bit")
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    finally:
        fh.close()
    data = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    channels = max(1, len(data) // max(wf.getnframes(), 1))
    if channels > 1:
        data = data.reshape(-1, channels).mean(axis=1)
    if len(data) == 0:
        raise InputError("WAV file contains no samples")
    return Waveform(samples=data, sample_rate=rate)


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write mono 16-bit PCM WAV."""
    pcm = np.clip(w.samples, -1.0, 1.0)
    pcm16 = (pcm * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(w.sample_rate)
        wf.writeframes(pcm16.tobytes())


def pcm16_bytes(samples: np.ndarray) -> bytes:
    """Encode float samples as 16-bit little-endian mono PCM."""
    return (np.clip(samples, -1.0, 1.0) * 32767.0).astype("<i2").tobytes()


def pcm16_to_float(data: bytes) -> np.ndarray:
    return np.frombuffer(data, dtype="<i2").astype(np.float32) / 32768.0
