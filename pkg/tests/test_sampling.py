from collections import Counter

import numpy as np
import pytest
from scipy import stats

from linkeval import (
    Clustering,
    ClusterSample,
    census_sample,
    expected_error_weights,
    sample_pps,
    sample_uniform,
)
from linkeval.sampling import DESIGN_PPS, DESIGN_UNIFORM, sample_from_weights


def test_single_cluster_any_k():
    truth = Clustering.from_pairs([("r1", "a"), ("r2", "a")])
    sample = sample_pps(truth, 7, rng_seed=1)
    assert len(sample) == 7
    assert all(d.cluster_id == "a" and d.p_c == 1.0 for d in sample)


def test_pps_weights_are_relative_sizes(canonical_truth):
    sample = sample_pps(canonical_truth, 50, rng_seed=3)
    for d in sample:
        assert d.p_c == pytest.approx(len(d.members) / 5)
        assert d.seed_record in d.members


def test_pps_long_run_frequency(canonical_truth):
    k = 100_000
    sample = sample_pps(canonical_truth, k, rng_seed=11)
    freq = Counter(d.cluster_id for d in sample)
    assert freq["a"] / k == pytest.approx(3 / 5, abs=0.01)


def test_uniform_long_run_frequency(canonical_truth):
    k = 100_000
    sample = sample_uniform(canonical_truth, k, rng_seed=11)
    freq = Counter(d.cluster_id for d in sample)
    assert freq["a"] / k == pytest.approx(1 / 2, abs=0.01)
    assert all(d.p_c == 1.0 for d in sample)


def test_determinism(canonical_truth):
    s1 = sample_pps(canonical_truth, 20, rng_seed=42)
    s2 = sample_pps(canonical_truth, 20, rng_seed=42)
    assert [d.cluster_id for d in s1] == [d.cluster_id for d in s2]
    assert [d.seed_record for d in s1] == [d.seed_record for d in s2]
    s3 = sample_pps(canonical_truth, 20, rng_seed=43)
    assert [d.seed_record for d in s1] != [d.seed_record for d in s3]


def test_empty_or_bad_k(canonical_truth):
    with pytest.raises(ValueError):
        sample_pps(canonical_truth, 0, rng_seed=1)
    with pytest.raises(ValueError):
        sample_uniform(canonical_truth, -3, rng_seed=1)


@pytest.mark.parametrize("design,expected", [
    (DESIGN_PPS, "size"),
    (DESIGN_UNIFORM, "flat"),
])
def test_chi_square_goodness_of_fit(design, expected):
    # ten clusters, sizes 1..10
    pairs = []
    r = 0
    for i, s in enumerate(range(1, 11)):
        for _ in range(s):
            pairs.append((f"r{r}", f"c{i}"))
            r += 1
    truth = Clustering.from_pairs(pairs)
    k = 100_000
    sampler = sample_pps if design == DESIGN_PPS else sample_uniform
    sample = sampler(truth, k, rng_seed=99)
    freq = Counter(d.cluster_id for d in sample)
    observed = np.array([freq[f"c{i}"] for i in range(10)])
    if expected == "size":
        probs = np.arange(1, 11) / 55
    else:
        probs = np.full(10, 1 / 10)
    chi = stats.chisquare(observed, f_exp=probs * k)
    assert chi.pvalue > 1e-3


def test_census_samples(canonical_truth):
    uniform = census_sample(canonical_truth)
    assert len(uniform) == 2
    assert {d.cluster_id for d in uniform} == {"a", "b"}
    pps = census_sample(canonical_truth, DESIGN_PPS)
    assert len(pps) == 5
    assert Counter(d.cluster_id for d in pps) == {"a": 3, "b": 2}


def test_sample_jsonl_round_trip(tmp_path, canonical_truth):
    sample = sample_pps(canonical_truth, 10, rng_seed=5)
    path = tmp_path / "sample.jsonl"
    sample.to_jsonl(path)
    again = ClusterSample.from_jsonl(path)
    assert len(again) == 10
    assert [d.members for d in again] == [d.members for d in sample]
    assert [d.p_c for d in again] == [d.p_c for d in sample]
    assert again.design == DESIGN_PPS


# -- expected-error weights -------------------------------------------------------


def test_expected_error_weights_confident_case():
    pred = Clustering.from_pairs([("r1", "x"), ("r2", "x"), ("r3", "y")])
    probs = {("r1", "r2"): 1.0}
    w = expected_error_weights(pred, probs)
    assert w == {"r1": 0.0, "r2": 0.0, "r3": 0.0}


def test_expected_error_weights_external_candidate():
    pred = Clustering.from_pairs([("r1", "x"), ("r2", "y")])
    w = expected_error_weights(pred, {("r1", "r2"): 0.4})
    assert w["r1"] == pytest.approx(0.4)
    assert w["r2"] == pytest.approx(0.4)


def test_expected_error_weights_internal_uncertainty():
    # predicted cluster of size 3 with internal probabilities 0.9 and 0.2
    pred = Clustering.from_pairs([("r1", "x"), ("r2", "x"), ("r3", "x")])
    probs = {("r1", "r2"): 0.9, ("r1", "r3"): 0.2}
    w = expected_error_weights(pred, probs)
    assert w["r1"] == pytest.approx((1 - 0.9) + (1 - 0.2))


def test_expected_error_weights_probability_range():
    pred = Clustering.from_pairs([("r1", "x"), ("r2", "x")])
    with pytest.raises(ValueError, match="outside"):
        expected_error_weights(pred, {("r1", "r2"): 1.5})


def test_sample_from_weights(canonical_truth):
    weights = {r: (2.0 if r in ("r4", "r5") else 0.0) for r in canonical_truth.membership}
    sample = sample_from_weights(canonical_truth, weights, 25, rng_seed=4)
    assert all(d.cluster_id == "b" for d in sample)
    assert all(d.p_c == pytest.approx(1.0) for d in sample)  # all mass on cluster b
    with pytest.raises(ValueError, match="zero"):
        sample_from_weights(canonical_truth, {r: 0.0 for r in canonical_truth.membership}, 5, 1)
