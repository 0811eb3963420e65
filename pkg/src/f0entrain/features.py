"""Per-word parameterization of cleaned F0 contours.

Each word's pitch samples are summarized by five features:

* ``mean``   - average of the raw pitch values (Hz)
* ``median`` - median of the raw pitch values (Hz)
* ``slope``  - slope of the least-squares line through the values against
  time normalized to [0, 1] across the word (Hz per unit)
* ``range``  - 95th minus 5th percentile of the fitted line's values (Hz)
* ``drop``   - last minus first fitted value divided by the real elapsed
  time between the first and last sample (Hz/s); note this is a rate,
  unlike ``slope`` which is a duration-free total change

Words whose slice yields fewer than 2 samples are dropped consistently
from all five per-utterance contours.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from f0entrain.errors import ComputeError
from f0entrain.quantiles import quantile
from f0entrain.types import F0Track, WordSpan
from f0entrain import ingest

FEATURE_NAMES = ("mean", "median", "slope", "range", "drop")

SEMITONES_PER_OCTAVE = 12.0


@dataclass(frozen=True)
class WordFeatures:
    mean: float
    median: float
    slope: float
    range: float
    drop: float

    def value(self, feature: str) -> float:
        return getattr(self, feature)


@dataclass(frozen=True)
class ParamContour:
    """One feature's per-word values for a single utterance, in word order."""

    feature: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if v.size < 1 or not np.all(np.isfinite(v)):
            raise ComputeError(f"{self.feature} contour must be non-empty and finite")


@dataclass(frozen=True)
class UtteranceFeatures:
    speaker: str
    utterance_index: int
    words: tuple[tuple[WordSpan, WordFeatures], ...]


def linear_fit(segment: F0Track) -> tuple[float, float]:
    """OLS line through the segment's values against normalized time.

    Time is mapped affinely onto [0, 1]; returns (intercept at 0, slope
    over the unit interval). Raises ComputeError for segments with fewer
    than 2 samples.
    """
    y = segment.values
    n = y.size
    if n < 2:
        raise ComputeError("degenerate fit: need at least 2 samples")
    t = np.arange(n, dtype=np.float64) / (n - 1)
    t_centered = t - 0.5
    slope = float(np.dot(t_centered, y - y.mean()) / np.dot(t_centered, t_centered))
    intercept = float(y.mean() - slope * 0.5)
    return intercept, slope


def word_features(segment: F0Track, span: WordSpan) -> WordFeatures:
    """Five-feature summary of one word's pitch samples (see module doc)."""
    y = segment.values
    n = y.size
    if n < 2:
        raise ComputeError(f"word {span.text!r}: need at least 2 samples, got {n}")
    intercept, slope = linear_fit(segment)
    fitted = intercept + slope * (np.arange(n, dtype=np.float64) / (n - 1))
    elapsed = (n - 1) * segment.step
    return WordFeatures(
        mean=float(y.mean()),
        median=quantile(y, 0.5),
        slope=slope,
        range=quantile(fitted, 0.95) - quantile(fitted, 0.05),
        drop=(float(fitted[-1]) - float(fitted[0])) / elapsed,
    )


def to_semitones(track: F0Track, reference_hz: float) -> F0Track:
    """Convert a fully voiced track to semitones re ``reference_hz``."""
    if reference_hz <= 0:
        raise ValueError(f"semitone reference must be positive, got {reference_hz}")
    if not track.fully_voiced:
        raise ComputeError("semitone conversion expects a fully voiced track")
    values = SEMITONES_PER_OCTAVE * np.log2(track.values / reference_hz)
    return F0Track(track.start_time, track.step, values, np.ones(len(track), dtype=bool))


def parameterize_utterance(
    track: F0Track,
    spans: list[WordSpan],
    speaker: str,
    utterance_index: int,
) -> tuple[UtteranceFeatures, int]:
    """Per-word features for a cleaned track; returns (features, n_dropped).

    Words shorter than one sample step or with a single sample are dropped.
    """
    words: list[tuple[WordSpan, WordFeatures]] = []
    dropped = 0
    for span in spans:
        try:
            segment = ingest.slice_track(track, span)
        except ComputeError:
            dropped += 1
            continue
        if len(segment) < 2:
            dropped += 1
            continue
        words.append((span, word_features(segment, span)))
    return UtteranceFeatures(speaker, utterance_index, tuple(words)), dropped


def build_contours(utt: UtteranceFeatures) -> dict[str, ParamContour]:
    """One contour per feature; the i-th value comes from the i-th retained word."""
    if not utt.words:
        raise ComputeError(
            f"empty utterance: no retained words for speaker {utt.speaker!r} "
            f"utterance {utt.utterance_index}"
        )
    return {
        name: ParamContour(name, np.array([wf.value(name) for _, wf in utt.words]))
        for name in FEATURE_NAMES
    }
