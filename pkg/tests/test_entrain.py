import numpy as np
import pytest

from f0entrain import entrain
from f0entrain.entrain import (
    ROLE_IMITATOR,
    ROLE_MODEL,
    DtwSample,
    e_raw,
    inner_dyad_distance,
    measure_corpus,
    normalize_samples,
    other_distance,
    partner_distance,
)
from f0entrain.errors import ComputeError
from f0entrain.features import FEATURE_NAMES
from f0entrain.ingest import load_manifest
from f0entrain.quantiles import iqr_fences

from conftest import write_manifest_doc


def _sample(imitator, feature, distance, model="X", index=0):
    return DtwSample(imitator, model, index, feature, distance)


# ---------------------------------------------------------------------------
# e_raw / partner


def test_e_raw_is_mean():
    samples = [_sample("A", "mean", 2.0), _sample("A", "mean", 4.0)]
    assert e_raw("A", "mean", samples) == 3.0


def test_e_raw_filters_speaker_and_feature():
    samples = [
        _sample("A", "mean", 2.0),
        _sample("A", "slope", 50.0),
        _sample("B", "mean", 9.0),
    ]
    assert e_raw("A", "mean", samples) == 2.0


def test_e_raw_no_samples():
    with pytest.raises(ComputeError):
        e_raw("A", "mean", [])


def test_partner_distance_is_e_raw():
    samples = [_sample("A", "mean", 1.0), _sample("A", "mean", 5.0)]
    assert partner_distance("A", "mean", samples) == e_raw("A", "mean", samples)


# ---------------------------------------------------------------------------
# normalization


def test_normalize_z_scores():
    out = normalize_samples([1.0, 2.0, 3.0, 2.0])
    assert out.kept.all()
    assert out.z.mean() == pytest.approx(0.0, abs=1e-12)
    assert out.z.std(ddof=1) == pytest.approx(1.0, rel=1e-12)


def test_normalize_simple_triplet_values():
    # after the fences drop the 100, the retained (1, 2, 3) z-score to -1, 0, 1
    out = normalize_samples([1.0, 2.0, 3.0, 100.0])
    # fences from type-7 quartiles (1.75, 27.25) exclude only the 100
    lo, hi = iqr_fences([1.0, 2.0, 3.0, 100.0])
    assert list(out.kept) == [True, True, True, False]
    assert np.allclose(out.z, [-1.0, 0.0, 1.0])
    assert lo < 1.0 and hi < 100.0


def test_normalize_all_equal_rejected():
    with pytest.raises(ComputeError, match="zero variance"):
        normalize_samples([5.0, 5.0, 5.0, 5.0])


def test_normalize_too_few_rejected():
    with pytest.raises(ComputeError, match="at least 4"):
        normalize_samples([1.0, 2.0, 3.0])


def test_normalize_retained_moments(rng):
    x = rng.lognormal(3.0, 0.6, size=400)
    out = normalize_samples(x)
    assert abs(out.z.mean()) < 1e-9
    assert abs(out.z.std(ddof=1) - 1.0) < 1e-9


# ---------------------------------------------------------------------------
# inner dyad


def test_inner_dyad_examples():
    assert inner_dyad_distance(3.0, 1.0) == pytest.approx(1.0)
    assert inner_dyad_distance(1.0, 3.0) == pytest.approx(-1.0)
    assert inner_dyad_distance(2.5, 2.5) == 0.0
    assert inner_dyad_distance(0.0, 0.0) == 0.0


def test_inner_dyad_antisymmetry_exact(rng):
    for _ in range(200):
        a, b = rng.uniform(0.01, 50, size=2)
        assert inner_dyad_distance(a, b) == -inner_dyad_distance(b, a)


# ---------------------------------------------------------------------------
# surrogate pairing on a hand-built two-dyad corpus


def _two_dyad_contours():
    """Two same-sex dyads (A,B), (C,D); every speaker has imitator and
    model contours at indices 0 and 1."""
    doc = {
        "speakers": [{"id": s, "sex": "F"} for s in "ABCD"],
        "dyads": [["A", "B"], ["C", "D"]],
        "utterances": [],
    }
    for a, b in (("A", "B"), ("C", "D")):
        for k in (0, 1):
            for imit, model in ((a, b), (b, a)):
                doc["utterances"].append(
                    {
                        "index": k,
                        "imitator": imit,
                        "model": model,
                        "imitator_f0": f"{imit}{k}i.csv",
                        "model_f0": f"{model}{k}m.csv",
                        "imitator_align": f"{imit}{k}i.json",
                        "model_align": f"{model}{k}m.json",
                    }
                )
    base = {"A": 10.0, "B": 11.0, "C": 30.0, "D": 55.0}
    contours = {}
    for spk in "ABCD":
        for k in (0, 1):
            for role in (ROLE_IMITATOR, ROLE_MODEL):
                values = np.array([base[spk] + k, base[spk] + k + 1.0, base[spk] + k + 2.0])
                contours[(spk, k, role)] = {f: values for f in FEATURE_NAMES}
    return doc, contours


def test_other_distance_counts_both_nonpartners(tmp_path):
    doc, contours = _two_dyad_contours()
    manifest = load_manifest(write_manifest_doc(doc, tmp_path))
    value, n = other_distance("A", "mean", manifest, contours)
    assert n == 2  # C and D both eligible
    # E_raw^(A,C) pairs A's imitations (10+k..) with C's models (30+k..):
    # each word differs by 20 -> DTW 60 per utterance; for D 45 -> 135
    assert value == pytest.approx((60.0 + 135.0) / 2.0)


def test_other_distance_single_dyad_empty_pool(tmp_path):
    doc, contours = _two_dyad_contours()
    doc["speakers"] = doc["speakers"][:2]
    doc["dyads"] = [["A", "B"]]
    doc["utterances"] = [u for u in doc["utterances"] if u["imitator"] in "AB"]
    manifest = load_manifest(write_manifest_doc(doc, tmp_path))
    with pytest.raises(ComputeError, match="empty surrogate pool"):
        other_distance("A", "mean", manifest, contours)


def test_other_distance_same_sex_pool_respects_sex(tmp_path):
    doc, contours = _two_dyad_contours()
    doc["speakers"] = [
        {"id": "A", "sex": "F"},
        {"id": "B", "sex": "F"},
        {"id": "C", "sex": "M"},
        {"id": "D", "sex": "M"},
    ]
    manifest = load_manifest(write_manifest_doc(doc, tmp_path))
    with pytest.raises(ComputeError, match="empty surrogate pool"):
        other_distance("A", "mean", manifest, contours)
    value, n = other_distance("A", "mean", manifest, contours, pool="all")
    assert n == 2 and value > 0


def test_candidates_without_shared_indices_skipped(tmp_path):
    doc, contours = _two_dyad_contours()
    manifest = load_manifest(write_manifest_doc(doc, tmp_path))
    # strip C's model contours entirely: only D remains usable
    contours = {k: v for k, v in contours.items() if not (k[0] == "C" and k[2] == ROLE_MODEL)}
    value, n = other_distance("A", "mean", manifest, contours)
    assert n == 1
    assert value == pytest.approx(135.0)


def test_measure_corpus_end_to_end(tmp_path):
    doc, contours = _two_dyad_contours()
    manifest = load_manifest(write_manifest_doc(doc, tmp_path))
    meas = measure_corpus(manifest, contours)
    # A's contours (10+k, 11+k, 12+k) vs B's (11+k, ...): the warped path
    # (0,0),(1,0),(2,1),(2,2) costs 1+0+0+1 = 2, beating the diagonal's 3
    po = {(p.speaker, p.feature): p for p in meas.partner_other}
    assert po[("A", "mean")].partner_distance == pytest.approx(2.0)
    assert po[("A", "mean")].other_distance > po[("A", "mean")].partner_distance
    # corpus-wide normalized samples have mean 0 / sd 1
    for feature in FEATURE_NAMES:
        z = []
        values = np.array([s.distance for s in meas.samples if s.feature == feature])
        normed = normalize_samples(values)
        z = normed.z
        assert abs(z.mean()) < 1e-9
        assert abs(z.std(ddof=1) - 1.0) < 1e-9
    # dyads are antisymmetric by construction
    for d in meas.dyad_scores:
        a, b = d.dyad
        raw = meas.e_raw_table()
        assert d.inner_dyad == -inner_dyad_distance(raw[b][d.feature], raw[a][d.feature])


def test_e_opt_sums_to_zero_for_symmetric_two_speaker_corpus(tmp_path):
    doc, contours = _two_dyad_contours()
    doc["speakers"] = doc["speakers"][:2]
    doc["dyads"] = [["A", "B"]]
    doc["utterances"] = [u for u in doc["utterances"] if u["imitator"] in "AB"]
    # symmetric perturbation so distances spread but mirror across speakers
    for k in (0, 1):
        contours[("A", k, ROLE_IMITATOR)] = {
            f: contours[("A", k, ROLE_IMITATOR)][f] + (k + 1.0) for f in FEATURE_NAMES
        }
        contours[("B", k, ROLE_IMITATOR)] = {
            f: contours[("B", k, ROLE_IMITATOR)][f] + (k + 1.0) for f in FEATURE_NAMES
        }
    manifest = load_manifest(write_manifest_doc(doc, tmp_path))
    meas = measure_corpus(manifest, contours, with_surrogates=False)
    for feature in FEATURE_NAMES:
        by_speaker = [s for s in meas.speaker_scores if s.feature == feature]
        assert len(by_speaker) == 2
        assert sum(s.e_opt for s in by_speaker) == pytest.approx(0.0, abs=1e-9)


def test_e_opt_weighted_zero_mean_across_corpus(tmp_path):
    doc, contours = _two_dyad_contours()
    manifest = load_manifest(write_manifest_doc(doc, tmp_path))
    meas = measure_corpus(manifest, contours)
    for feature in FEATURE_NAMES:
        weighted = [
            s.e_opt * s.n_used for s in meas.speaker_scores if s.feature == feature
        ]
        assert sum(weighted) == pytest.approx(0.0, abs=1e-9)


def test_norm_se_reports_both(tmp_path):
    doc, contours = _two_dyad_contours()
    manifest = load_manifest(write_manifest_doc(doc, tmp_path))
    meas = measure_corpus(manifest, contours, norm="se")
    s = meas.speaker_scores[0]
    n_pool = 8  # 4 speakers x 2 utterances, none removed
    assert s.e_opt_alt == pytest.approx(s.e_opt * np.sqrt(n_pool))
