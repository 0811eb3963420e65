"""Self-contained F0 estimation from WAV audio.

A simplified Boersma-style autocorrelation tracker: per frame, the
normalized autocorrelation of the Hann-windowed signal is divided by the
window's own autocorrelation, local peaks are searched within the lag
range allowed by the pitch floor/ceiling, and the best peak is refined by
parabolic interpolation. There is no cross-frame path optimization; users
who need parity with a reference pitch extractor should supply F0 CSVs
instead (the batch pipeline caches this module's output in that format).
"""

from __future__ import annotations

import math
import wave as wave_io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from f0entrain.errors import ComputeError, ParseError, ValidationError
from f0entrain.types import F0Track

# Static per-candidate preference for shorter lags: breaks ties between a
# period and its multiples without cross-frame tracking.
OCTAVE_COST = 0.01

# A frame participates in voicing only if its RMS is at least this
# fraction of the whole file's RMS.
RMS_GATE = 0.01


@dataclass(frozen=True)
class Wave:
    """Mono audio with samples scaled to [-1, 1]."""

    sample_rate: float
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValidationError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class PitchConfig:
    floor: float = 75.0
    ceiling: float = 600.0
    time_step: float = 0.01
    voicing_threshold: float = 0.45
    window: float = 0.04

    def validate(self, sample_rate: float) -> None:
        if not 0 < self.floor < self.ceiling < sample_rate / 2:
            raise ValidationError(
                f"need 0 < floor < ceiling < sample_rate/2, got "
                f"floor={self.floor}, ceiling={self.ceiling}, rate={sample_rate}"
            )
        if self.time_step <= 0:
            raise ValidationError(f"time_step must be positive, got {self.time_step}")
        if not 0 < self.voicing_threshold < 1:
            raise ValidationError(
                f"voicing_threshold must be in (0, 1), got {self.voicing_threshold}"
            )


def read_wav(path: str | Path) -> Wave:
    """Read a 16-bit PCM WAV file; stereo is downmixed by averaging."""
    try:
        with wave_io.open(str(path), "rb") as fh:
            n_channels = fh.getnchannels()
            sampwidth = fh.getsampwidth()
            rate = fh.getframerate()
            comptype = fh.getcomptype()
            frames = fh.readframes(fh.getnframes())
    except (wave_io.Error, EOFError) as exc:
        raise ParseError(f"{path}: corrupt or unreadable WAV header ({exc})") from exc
    if comptype != "NONE" or sampwidth != 2:
        raise ParseError(
            f"{path}: unsupported encoding (need 16-bit PCM, got "
            f"{8 * sampwidth}-bit, compression {comptype!r})"
        )
    data = np.frombuffer(frames, dtype="<i2").astype(np.float64)
    if n_channels > 1:
        data = data.reshape(-1, n_channels).mean(axis=1)
    return Wave(sample_rate=float(rate), samples=data / 32768.0)


def write_wav(wave: Wave, path: str | Path) -> None:
    """Write mono 16-bit PCM (mainly for tests and small demos)."""
    pcm = np.clip(np.round(wave.samples * 32767.0), -32768, 32767).astype("<i2")
    with wave_io.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(int(wave.sample_rate))
        fh.writeframes(pcm.tobytes())


def _frame_candidates(acf_ratio: np.ndarray, lag_min: int, lag_max: int):
    """Local autocorrelation peaks in [lag_min, lag_max], parabolic-refined.

    Yields (refined_lag, peak_value) pairs.
    """
    for lag in range(lag_min, lag_max + 1):
        r0, r1, r2 = acf_ratio[lag - 1], acf_ratio[lag], acf_ratio[lag + 1]
        if not (r1 > r0 and r1 >= r2):
            continue
        denom = r0 - 2.0 * r1 + r2
        if denom >= 0.0:  # flat or degenerate; keep the integer peak
            yield float(lag), float(r1)
            continue
        delta = 0.5 * (r0 - r2) / denom
        delta = max(-0.5, min(0.5, delta))
        value = r1 - 0.25 * (r0 - r2) * delta
        yield lag + delta, float(value)


def estimate_f0(wave: Wave, config: PitchConfig = PitchConfig()) -> F0Track:
    """Estimate an F0 track with one sample per ``config.time_step``.

    A frame is voiced iff its best autocorrelation peak reaches the voicing
    threshold and its RMS passes the relative gate; everything is
    normalized, so the result is invariant to rescaling the waveform.
    """
    config.validate(wave.sample_rate)
    fs = wave.sample_rate
    x = wave.samples
    frame_len = int(round(config.window * fs))
    if frame_len < 8 or x.size < frame_len:
        raise ComputeError(
            f"wave too short: {x.size} samples < one {config.window}s analysis window"
        )

    lag_min = max(2, math.ceil(fs / config.ceiling))
    lag_max = min(frame_len - 2, math.floor(fs / config.floor))
    if lag_max <= lag_min:
        raise ValidationError("pitch search range is empty for this window/rate")

    n_frames = int(math.floor((x.size - frame_len) / (config.time_step * fs))) + 1
    window = np.hanning(frame_len)

    fft_len = 1 << int(math.ceil(math.log2(2 * frame_len)))
    win_spec = np.fft.rfft(window, fft_len)
    acf_win = np.fft.irfft(win_spec * np.conj(win_spec), fft_len)[: lag_max + 2]
    acf_win = acf_win / acf_win[0]

    global_ms = float(np.mean(x * x))
    values = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)

    for i in range(n_frames):
        start = int(round(i * config.time_step * fs))
        frame = x[start : start + frame_len]
        frame_ms = float(np.mean(frame * frame))
        if global_ms <= 0.0 or frame_ms < (RMS_GATE**2) * global_ms:
            continue
        windowed = (frame - frame.mean()) * window
        energy = float(np.dot(windowed, windowed))
        if energy <= 0.0:
            continue
        spec = np.fft.rfft(windowed, fft_len)
        acf = np.fft.irfft(spec * np.conj(spec), fft_len)[: lag_max + 2]
        acf_ratio = (acf / energy) / acf_win

        best_f0 = 0.0
        best_strength = -np.inf
        best_value = 0.0
        for lag, value in _frame_candidates(acf_ratio, lag_min, lag_max):
            strength = value - OCTAVE_COST * math.log2(lag / fs * config.floor)
            if strength > best_strength:
                best_strength = strength
                best_value = value
                best_f0 = fs / lag
        if best_value >= config.voicing_threshold:
            values[i] = best_f0
            voiced[i] = True

    return F0Track(
        start_time=frame_len / (2.0 * fs),
        step=config.time_step,
        values=values,
        voiced=voiced,
    )
