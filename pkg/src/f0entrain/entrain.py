"""Entrainment measures over parameterized F0 contours.

For each imitation event, the imitator's and the model's per-word contours
are compared with dynamic time warping (Euclidean local cost on the 1-D
feature values, unnormalized path cost). Per speaker and feature:

* ``e_raw``  - mean DTW distance to the real partner across imitated
  utterances (larger = less entrained);
* ``e_opt``  - mean of the speaker's distances after corpus-wide
  per-feature outlier removal (Tukey fences) and z-transformation;
* partner / other distance - ``e_raw`` against the real partner vs. the
  average over surrogate (non-partner) pairings on the same utterance
  indices, same-sex pool by default;
* inner-dyad distance - difference of the two partners' ``e_raw`` values
  divided by their mean; positive means the first member is less entrained.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from f0entrain import kernels
from f0entrain.errors import ComputeError
from f0entrain.features import FEATURE_NAMES
from f0entrain.ingest import CorpusManifest
from f0entrain.quantiles import iqr_fences

ROLE_IMITATOR = "imitator"
ROLE_MODEL = "model"

# contour store: (speaker, utterance_index, role) -> {feature: values}
ContourMap = Mapping[tuple[str, int, str], Mapping[str, np.ndarray]]


@dataclass(frozen=True)
class DtwSample:
    imitator: str
    model: str
    utterance_index: int
    feature: str
    distance: float


@dataclass(frozen=True)
class EntrainmentScore:
    speaker: str
    feature: str
    e_raw: float
    e_opt: float | None
    n_used: int
    e_opt_alt: float | None = None  # alternative normalization, when requested


@dataclass(frozen=True)
class PartnerOther:
    speaker: str
    feature: str
    partner_distance: float
    other_distance: float
    n_surrogates: int


@dataclass(frozen=True)
class DyadScore:
    dyad: tuple[str, str]
    feature: str
    inner_dyad: float


def dtw_distance(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """Classic DTW cost between two non-empty 1-D sequences.

    Local cost |a_i - b_j|; diagonal, horizontal, and vertical steps each
    add one local cost; the path is boundary-to-boundary with no warping
    window; the total path cost is returned unnormalized.
    """
    if len(a) == 0 or len(b) == 0:
        raise ComputeError("dtw_distance requires non-empty sequences")
    return kernels.dtw_distance(a, b)


def compute_samples(manifest: CorpusManifest, contours: ContourMap) -> list[DtwSample]:
    """DTW distances for every real imitation event x feature, in manifest order."""
    samples = []
    for rec in manifest.utterances:
        imit = contours[(rec.imitator, rec.index, ROLE_IMITATOR)]
        model = contours[(rec.model, rec.index, ROLE_MODEL)]
        for feature in FEATURE_NAMES:
            samples.append(
                DtwSample(
                    imitator=rec.imitator,
                    model=rec.model,
                    utterance_index=rec.index,
                    feature=feature,
                    distance=dtw_distance(imit[feature], model[feature]),
                )
            )
    return samples


def e_raw(imitator: str, feature: str, samples: Iterable[DtwSample]) -> float:
    """Mean real-partner DTW distance for one speaker and feature."""
    values = [s.distance for s in samples if s.imitator == imitator and s.feature == feature]
    if not values:
        raise ComputeError(f"no DTW samples for speaker {imitator!r}, feature {feature!r}")
    return float(np.mean(values))


def partner_distance(target: str, feature: str, samples: Iterable[DtwSample]) -> float:
    """Real-dyad distance; by definition identical to ``e_raw``."""
    return e_raw(target, feature, samples)


class NormalizedSamples(NamedTuple):
    z: np.ndarray        # z-scores of the retained samples, input order
    kept: np.ndarray     # boolean mask over the input samples
    mean: float          # mean of the retained samples
    sd: float            # sample standard deviation (n-1) of the retained samples


def normalize_samples(values: Sequence[float] | np.ndarray) -> NormalizedSamples:
    """Outlier-filtered z-transform of a pooled sample set.

    Samples outside the Tukey fences [q25 - 1.5*IQR, q75 + 1.5*IQR] are
    dropped; the rest are z-scored with their mean and sample standard
    deviation (n-1 denominator). Requires >= 4 samples and non-degenerate
    spread after removal.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size < 4:
        raise ComputeError(f"normalization needs at least 4 samples, got {x.size}")
    lo, hi = iqr_fences(x)
    kept = (x >= lo) & (x <= hi)
    retained = x[kept]
    mean = float(retained.mean())
    sd = float(retained.std(ddof=1))
    if sd == 0.0:
        raise ComputeError("zero variance: all retained samples are equal")
    return NormalizedSamples((retained - mean) / sd, kept, mean, sd)


def other_distance(
    target: str,
    feature: str,
    manifest: CorpusManifest,
    contours: ContourMap,
    pool: str = "same-sex",
) -> tuple[float, int]:
    """Average surrogate-pair distance for one speaker and feature.

    Each non-partner in the pool is paired with the target on shared
    utterance indices: the target's imitation of index k against the
    candidate's model-role rendition of index k. Candidates with no index
    overlap are skipped. Returns (mean over candidates, candidate count).
    """
    if pool not in ("same-sex", "all"):
        raise ValueError(f"unknown surrogate pool policy {pool!r}")
    partner = manifest.partner_of(target)
    target_sex = manifest.speaker(target).sex
    imitated = {
        k: c for (spk, k, role), c in contours.items()
        if spk == target and role == ROLE_IMITATOR
    }
    if not imitated:
        raise ComputeError(f"speaker {target!r} has no imitation contours")

    candidates = []
    for s in manifest.speakers:
        if s.id in (target, partner):
            continue
        if pool == "same-sex" and (s.sex is None or s.sex != target_sex):
            continue
        candidates.append(s.id)
    if not candidates:
        raise ComputeError(f"empty surrogate pool for speaker {target!r} (pool={pool})")

    per_candidate = []
    for cand in candidates:
        distances = []
        for k in sorted(imitated):
            model = contours.get((cand, k, ROLE_MODEL))
            if model is None:
                continue
            distances.append(dtw_distance(imitated[k][feature], model[feature]))
        if distances:
            per_candidate.append(float(np.mean(distances)))
    if not per_candidate:
        raise ComputeError(
            f"no surrogate candidate shares utterance indices with speaker {target!r}"
        )
    return float(np.mean(per_candidate)), len(per_candidate)


def inner_dyad_distance(a_score: float, b_score: float) -> float:
    """(E_A - E_B) / mean(E_A, E_B); positive means A is less entrained.

    Defined as 0 when both scores are 0 (perfect mutual imitation).
    """
    mean = (a_score + b_score) / 2.0
    if mean == 0.0:
        if a_score == 0.0 and b_score == 0.0:
            return 0.0
        raise ComputeError("inner-dyad distance undefined: scores average to zero")
    return (a_score - b_score) / mean


@dataclass(frozen=True)
class CorpusMeasurement:
    samples: tuple[DtwSample, ...]
    speaker_scores: tuple[EntrainmentScore, ...]
    partner_other: tuple[PartnerOther, ...]
    dyad_scores: tuple[DyadScore, ...]

    def e_raw_table(self) -> dict[str, dict[str, float]]:
        table: dict[str, dict[str, float]] = {}
        for s in self.speaker_scores:
            table.setdefault(s.speaker, {})[s.feature] = s.e_raw
        return table

    def e_opt_table(self) -> dict[str, dict[str, float]]:
        table: dict[str, dict[str, float]] = {}
        for s in self.speaker_scores:
            if s.e_opt is not None:
                table.setdefault(s.speaker, {})[s.feature] = s.e_opt
        return table


def measure_corpus(
    manifest: CorpusManifest,
    contours: ContourMap,
    surrogate_pool: str = "same-sex",
    norm: str = "sd",
    norm_scope: str = "corpus",
    with_surrogates: bool = True,
    with_normalization: bool = True,
) -> CorpusMeasurement:
    """All entrainment measures for a parameterized corpus.

    ``norm`` selects the z-transform divisor: sample standard deviation
    (``sd``, the default) or standard error of the mean (``se``); with
    ``se`` both variants are computed and the alternative is reported in
    ``EntrainmentScore.e_opt_alt``. ``norm_scope`` pools normalization
    statistics corpus-wide (default) or per speaker.
    ``with_normalization=False`` skips the z-transform (``e_opt`` comes
    back None), which is needed for degenerate corpora such as perfect
    imitation where every distance is zero.
    """
    if norm not in ("sd", "se"):
        raise ValueError(f"unknown normalization mode {norm!r}")
    if norm_scope not in ("corpus", "speaker"):
        raise ValueError(f"unknown normalization scope {norm_scope!r}")
    samples = compute_samples(manifest, contours)
    speakers = sorted({rec.imitator for rec in manifest.utterances})

    by_feature: dict[str, list[DtwSample]] = {f: [] for f in FEATURE_NAMES}
    for s in samples:
        by_feature[s.feature].append(s)

    corpus_norms: dict[str, NormalizedSamples] = {}
    if with_normalization and norm_scope == "corpus":
        for feature in FEATURE_NAMES:
            corpus_norms[feature] = normalize_samples(
                np.array([s.distance for s in by_feature[feature]])
            )

    scores: list[EntrainmentScore] = []
    for speaker in speakers:
        for feature in FEATURE_NAMES:
            feature_samples = by_feature[feature]
            raw_value = e_raw(speaker, feature, feature_samples)
            if not with_normalization:
                n_own = sum(1 for s in feature_samples if s.imitator == speaker)
                scores.append(EntrainmentScore(speaker, feature, raw_value, None, n_own))
                continue
            if norm_scope == "speaker":
                pool_samples = [s for s in feature_samples if s.imitator == speaker]
                normed = normalize_samples(np.array([s.distance for s in pool_samples]))
            else:
                pool_samples = feature_samples
                normed = corpus_norms[feature]
            owner = np.array([s.imitator == speaker for s in pool_samples])
            keep_owner = normed.kept & owner
            if not keep_owner.any():
                raise ComputeError(
                    f"all samples of speaker {speaker!r} removed as outliers "
                    f"for feature {feature!r}"
                )
            own_z = normed.z[owner[normed.kept]]
            n_retained_pool = int(np.count_nonzero(normed.kept))
            e_opt_sd = float(own_z.mean())
            # the SE-of-mean divisor rescales every z-score by sqrt(n) of the pool
            e_opt_se = e_opt_sd * float(np.sqrt(n_retained_pool))
            scores.append(
                EntrainmentScore(
                    speaker=speaker,
                    feature=feature,
                    e_raw=raw_value,
                    e_opt=e_opt_sd,
                    n_used=int(np.count_nonzero(keep_owner)),
                    e_opt_alt=e_opt_se if norm == "se" else None,
                )
            )

    partner_other: list[PartnerOther] = []
    if with_surrogates:
        for speaker in speakers:
            for feature in FEATURE_NAMES:
                other, n_sur = other_distance(
                    speaker, feature, manifest, contours, pool=surrogate_pool
                )
                partner_other.append(
                    PartnerOther(
                        speaker=speaker,
                        feature=feature,
                        partner_distance=partner_distance(speaker, feature, by_feature[feature]),
                        other_distance=other,
                        n_surrogates=n_sur,
                    )
                )

    raw = {(s.speaker, s.feature): s.e_raw for s in scores}
    dyad_scores = []
    for a, b in manifest.dyads:
        for feature in FEATURE_NAMES:
            if (a, feature) not in raw or (b, feature) not in raw:
                continue
            dyad_scores.append(
                DyadScore(
                    dyad=(a, b),
                    feature=feature,
                    inner_dyad=inner_dyad_distance(raw[(a, feature)], raw[(b, feature)]),
                )
            )

    return CorpusMeasurement(
        samples=tuple(samples),
        speaker_scores=tuple(scores),
        partner_other=tuple(partner_other),
        dyad_scores=tuple(dyad_scores),
    )
