import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkeval import (
    AttributeTable,
    Clustering,
    avg_cluster_size,
    census_sample,
    compute_summary,
    estimate_summary,
    hill_number,
    homonymy_rate,
    matching_rate,
    name_variation_rate,
)
from linkeval.estimators import FLAG_SINGLE_DRAW
from linkeval.sampling import DESIGN_PPS, ClusterDraw, ClusterSample
from linkeval.summary import summary_target

from oracles import eq8_point, eq9_var


def sized_clustering(*sizes: int) -> Clustering:
    pairs = []
    r = 0
    for i, s in enumerate(sizes):
        for _ in range(s):
            pairs.append((f"r{r}", f"c{i}"))
            r += 1
    return Clustering.from_pairs(pairs)


def test_avg_cluster_size(canonical_truth):
    assert avg_cluster_size(canonical_truth) == 2.5
    assert avg_cluster_size(sized_clustering(*([1] * 8000))) == 1.0


def test_matching_rate(canonical_truth):
    assert matching_rate(canonical_truth) == 1.0
    assert matching_rate(sized_clustering(1, 1, 2)) == 0.5


def test_matching_rate_rldata_shape():
    c = sized_clustering(*([2] * 100), *([1] * 800))
    assert matching_rate(c) == 200 / 1000
    assert avg_cluster_size(c) == pytest.approx(1000 / 900)


def test_hill_numbers_frozen_values():
    c = sized_clustering(1, 1, 2)
    assert hill_number(c, 0) == 2.0
    assert hill_number(c, 2) == pytest.approx(1.8, abs=1e-12)
    # exp(-(2/3)ln(2/3) - (1/3)ln(1/3)) computed by hand
    expected_h1 = math.exp(-(2 / 3) * math.log(2 / 3) - (1 / 3) * math.log(1 / 3))
    assert hill_number(c, 1) == pytest.approx(expected_h1, abs=1e-12)
    assert expected_h1 == pytest.approx(1.8899, abs=1e-4)
    assert hill_number(c, math.inf) == pytest.approx(1.5, abs=1e-12)


def test_hill_negative_order_rejected(canonical_truth):
    with pytest.raises(ValueError, match="nonnegative"):
        hill_number(canonical_truth, -0.5)


def test_hill_continuity_at_one():
    c = sized_clustering(1, 1, 2, 3, 3, 3, 7)
    h1 = hill_number(c, 1)
    for eps in (1e-6, -1e-6):
        assert abs(hill_number(c, 1 + eps) - h1) / h1 < 1e-4


@settings(max_examples=40)
@given(st.lists(st.integers(min_value=1, max_value=12), min_size=1, max_size=25))
def test_hill_monotone_in_q(sizes):
    c = sized_clustering(*sizes)
    grid = [0.0, 0.5, 1.0, 1.5, 2.0, 4.0, math.inf]
    values = [hill_number(c, q) for q in grid]
    for lo, hi in zip(values, values[1:]):
        assert lo >= hi - 1e-9
    assert all(v >= 1.0 - 1e-12 for v in values)


@settings(max_examples=40)
@given(st.lists(st.integers(min_value=1, max_value=9), min_size=1, max_size=30))
def test_matching_rate_singleton_identity(sizes):
    c = sized_clustering(*sizes)
    singletons = sum(1 for s in sizes if s == 1)
    assert matching_rate(c) == pytest.approx(1 - singletons / c.universe_size, abs=1e-12)


def labelled(labels: dict[str, str]) -> AttributeTable:
    return AttributeTable.from_rows([(r, s, {}) for r, s in labels.items()])


def test_homonymy_rate_examples():
    truth = Clustering.from_pairs([("r1", "a"), ("r2", "a"), ("r3", "b")])
    attrs = labelled({"r1": "A", "r2": "A", "r3": "A"})
    assert homonymy_rate(truth, attrs) == 1.0

    attrs_unique = labelled({"r1": "A", "r2": "B", "r3": "C"})
    assert homonymy_rate(truth, attrs_unique) == 0.0

    truth3 = Clustering.from_pairs([("r1", "a"), ("r2", "a"), ("r3", "b"), ("r4", "c")])
    attrs3 = labelled({"r1": "A", "r2": "A", "r3": "A", "r4": "B"})
    # enumerated by hand: clusters a and b leak label A, c is clean
    assert homonymy_rate(truth3, attrs3) == pytest.approx(2 / 3)


def test_name_variation_rate_examples():
    pair = Clustering.from_pairs([("r1", "a"), ("r2", "a")])
    assert name_variation_rate(pair, labelled({"r1": "A", "r2": "B"})) == 1.0
    assert name_variation_rate(pair, labelled({"r1": "A", "r2": "A"})) == 0.0

    two = Clustering.from_pairs([("r1", "a"), ("r2", "a"), ("r3", "b"), ("r4", "b")])
    attrs = labelled({"r1": "A", "r2": "A", "r3": "A", "r4": "B"})
    assert name_variation_rate(two, attrs) == 0.5


def test_refinement_zero_rates():
    # name partition refines the clustering -> no homonymy
    truth = Clustering.from_pairs([("r1", "a"), ("r2", "a"), ("r3", "b")])
    refined = labelled({"r1": "A", "r2": "B", "r3": "C"})
    assert homonymy_rate(truth, refined) == 0.0
    # clustering refines the name partition -> no variation
    coarse = labelled({"r1": "A", "r2": "A", "r3": "A"})
    assert name_variation_rate(truth, coarse) == 0.0


def test_missing_label_is_error(canonical_truth):
    attrs = labelled({"r1": "A"})
    with pytest.raises(ValueError, match="no label"):
        homonymy_rate(canonical_truth, attrs)


def test_summary_report_shape(canonical_truth, canonical_attrs):
    report = compute_summary(canonical_truth, canonical_attrs)
    d = report.to_dict()
    assert d["v"] == 1
    assert d["avg_cluster_size"] == 2.5
    assert 0 <= d["matching_rate"] <= 1
    assert d["hill"][-1][0] == "inf"


# -- estimation from samples ---------------------------------------------------


def test_estimate_avg_size_census_pps(canonical_truth):
    # record-census realizes the pps design: unadjusted ratio is exactly N/|C|
    sample = census_sample(canonical_truth, DESIGN_PPS)
    est = estimate_summary(sample, "avg_size")
    target = summary_target("avg_size")
    f = [len(d.members) / d.p_c for d in sample.draws]
    g = [1.0 / d.p_c for d in sample.draws]
    fbar_over_gbar = (sum(f) / len(f)) / (sum(g) / len(g))
    assert fbar_over_gbar == pytest.approx(2.5, abs=1e-12)
    # the reported point applies the bias adjustment; freeze it via the literal oracle
    assert est.point == pytest.approx(eq8_point(f, g), abs=1e-12)
    assert est.std == pytest.approx(math.sqrt(eq9_var(f, g)), abs=1e-12)


def test_estimate_avg_size_census_uniform(canonical_truth):
    sample = census_sample(canonical_truth)
    f = [len(d.members) / d.p_c for d in sample.draws]
    g = [1.0 / d.p_c for d in sample.draws]
    assert (sum(f) / sum(g)) == pytest.approx(2.5, abs=1e-12)
    est = estimate_summary(sample, "avg_size")
    assert est.point == pytest.approx(eq8_point(f, g), abs=1e-12)


def test_estimate_matching_rate_single_draw(canonical_truth):
    draw = ClusterDraw(cluster_id="b", members=frozenset({"r4", "r5"}), p_c=2 / 5)
    sample = ClusterSample(draws=(draw,), design=DESIGN_PPS)
    est = estimate_summary(sample, "matching_rate")
    assert est.point == 1.0
    assert est.std == 0.0
    assert FLAG_SINGLE_DRAW in est.flags


def test_estimate_homonymy_uses_global_index(canonical_truth):
    # r3's label escapes cluster b's sample even though r1/r2 are unsampled
    attrs = labelled({"r1": "A", "r2": "A", "r3": "A", "r4": "B", "r5": "B"})
    truth = Clustering.from_pairs([("r1", "a"), ("r2", "a"), ("r3", "b"), ("r4", "c"), ("r5", "c")])
    sample = census_sample(truth)
    est = estimate_summary(sample, "homonymy_rate", attrs=attrs)
    # clusters a and b leak label A; c is clean -> 2/3 on a census
    f = [1.0 if cid in ("a", "b") else 0.0 for cid in ("a", "b", "c")]
    assert est.point == pytest.approx(eq8_point(f, [1.0, 1.0, 1.0]), abs=1e-12)


def test_estimate_name_variation(canonical_truth):
    attrs = labelled({"r1": "A", "r2": "A", "r3": "B", "r4": "C", "r5": "C"})
    sample = census_sample(canonical_truth)
    est = estimate_summary(sample, "name_variation_rate", attrs=attrs)
    f = [1.0, 0.0]  # cluster a varies (A,A,B), cluster b does not
    assert est.point == pytest.approx(eq8_point(f, [1.0, 1.0]), abs=1e-12)


def test_estimate_empty_sample_rejected():
    sample = ClusterSample(draws=())
    with pytest.raises(Exception, match="empty"):
        estimate_summary(sample, "avg_size")


def test_hill_estimation_refused():
    with pytest.raises(ValueError, match="not supported"):
        summary_target("hill")
