import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkeval import AttributeTable, Clustering, name_index
from linkeval.model import normalize_label, same_label_records


def test_from_pairs_builds_inverse_index():
    c = Clustering.from_pairs([("r1", "a"), ("r2", "a"), ("r3", "b"), ("r4", "b"), ("r5", "b")])
    assert c.universe_size == 5
    assert c.clusters == {"a": frozenset({"r1", "r2"}), "b": frozenset({"r3", "r4", "r5"})}
    assert sum(len(m) for m in c.clusters.values()) == c.universe_size
    for r, cid in c.membership.items():
        assert r in c.clusters[cid]


def test_duplicate_record_rejected():
    with pytest.raises(ValueError, match="duplicate record 'r1'"):
        Clustering.from_pairs([("r1", "a"), ("r1", "b")])


def test_empty_input_rejected(tmp_path):
    with pytest.raises(ValueError, match="empty"):
        Clustering.from_pairs([])
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        Clustering.from_csv(empty)


def test_csv_header_enforced(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("record,cluster\nr1,a\n")
    with pytest.raises(ValueError, match="expected header"):
        Clustering.from_csv(f)


def test_csv_round_trip(tmp_path, canonical_truth):
    out = tmp_path / "members.csv"
    canonical_truth.to_csv(out)
    again = Clustering.from_csv(out)
    assert again.membership == canonical_truth.membership
    assert again.clusters == canonical_truth.clusters
    # a second round trip is byte-identical
    out2 = tmp_path / "members2.csv"
    again.to_csv(out2)
    assert out.read_bytes() == out2.read_bytes()


def test_restrict_intersects_and_drops_empty():
    c = Clustering.from_pairs([("r1", "a"), ("r2", "a"), ("r3", "b")])
    r = c.restrict({"r1", "r3"})
    assert r.clusters == {"a": frozenset({"r1"}), "b": frozenset({"r3"})}
    assert r.universe_size == 2


def test_restrict_identity_and_empty(canonical_truth):
    full = canonical_truth.restrict(set(canonical_truth.membership))
    assert full.clusters == canonical_truth.clusters
    empty = canonical_truth.restrict(set())
    assert empty.universe_size == 0
    assert empty.clusters == {}


def test_restrict_unknown_ids_listed(canonical_truth):
    with pytest.raises(ValueError, match="unknown record ids: 'zz'"):
        canonical_truth.restrict({"r1", "zz"})


def test_restrict_idempotent(canonical_truth):
    keep = {"r1", "r4", "r5"}
    once = canonical_truth.restrict(keep)
    twice = once.restrict(keep)
    assert once.clusters == twice.clusters
    assert once.membership == twice.membership


def test_name_index_groups_by_label():
    attrs = AttributeTable.from_rows([("r1", "A", {}), ("r2", "A", {}), ("r3", "B", {})])
    idx = name_index(attrs)
    assert idx == {"A": frozenset({"r1", "r2"}), "B": frozenset({"r3"})}


def test_name_index_distinct_labels_are_singletons():
    attrs = AttributeTable.from_rows([(f"r{i}", f"L{i}", {}) for i in range(5)])
    idx = name_index(attrs)
    for rid in attrs.labels:
        assert same_label_records(idx, attrs, rid) == frozenset({rid})


def test_name_index_empty_table():
    attrs = AttributeTable.from_rows([])
    assert name_index(attrs) == {}


def test_name_index_missing_label_named():
    attrs = AttributeTable.from_rows([("r1", "A", {})])
    with pytest.raises(ValueError, match="no label for record 'r9'"):
        name_index(attrs, scope=["r1", "r9"])


def test_label_normalization_nfc_and_trim():
    # same name, composed vs decomposed accents plus stray whitespace
    attrs = AttributeTable.from_rows([("r1", "José ", {}), ("r2", " José", {})])
    idx = name_index(attrs)
    assert len(idx) == 1
    assert normalize_label("José ") == normalize_label("José")


def test_attribute_csv_round_trip(tmp_path, canonical_attrs):
    out = tmp_path / "attrs.csv"
    canonical_attrs.to_csv(out)
    again = AttributeTable.from_csv(out)
    assert again.labels == canonical_attrs.labels
    assert again.attributes_of("r1") == canonical_attrs.attributes_of("r1")


@st.composite
def partitions(draw):
    n = draw(st.integers(min_value=1, max_value=40))
    k = draw(st.integers(min_value=1, max_value=10))
    assign = draw(st.lists(st.integers(min_value=0, max_value=k - 1), min_size=n, max_size=n))
    return [(f"r{i}", f"c{a}") for i, a in enumerate(assign)]


@settings(max_examples=50)
@given(partitions())
def test_partition_round_trip_property(tmp_path_factory, pairs):
    c = Clustering.from_pairs(pairs)
    path = tmp_path_factory.mktemp("rt") / "m.csv"
    c.to_csv(path)
    again = Clustering.from_csv(path)
    assert again.membership == c.membership
    assert again.clusters == c.clusters
    assert sum(len(m) for m in again.clusters.values()) == again.universe_size


def test_malformed_rows_reported_with_line_numbers(tmp_path):
    bad_membership = tmp_path / "m.csv"
    bad_membership.write_text("record_id,cluster_id\nr1,a\nr2\n")
    with pytest.raises(ValueError, match="line 3: expected 2 fields"):
        Clustering.from_csv(bad_membership)

    bad_attrs = tmp_path / "a.csv"
    bad_attrs.write_text("record_id,label,city\nr1,Ann,Tempe\nr2,Bo\n")
    with pytest.raises(ValueError, match="line 3: expected 3 fields"):
        AttributeTable.from_csv(bad_attrs)
