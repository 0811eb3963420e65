"""Toolkit for measuring F0 entrainment in paired speech-imitation corpora.

Pipeline: ingest word alignments and pitch tracks (or estimate pitch from
WAV), clean the F0 contours, parameterize them per word into five prosodic
features, compare imitator and model contours with dynamic time warping,
and evaluate the resulting entrainment measures with paired t-tests,
Pearson correlations, and intraclass correlation coefficients.
"""

__version__ = "0.1.0"

from f0entrain.types import F0Track, WordSpan

__all__ = ["F0Track", "WordSpan", "__version__"]
