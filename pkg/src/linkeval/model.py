"""Canonical data model: records, clusterings, and record attributes.

A clustering is a partition of a record universe, stored as a bidirectional
map (record -> cluster id, cluster id -> member set). Both directions are
kept in sync at construction time and the objects are treated as immutable
afterwards, so they are safe to share across workers.
"""

from __future__ import annotations

import csv
import io
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

RecordId = str
ClusterId = str

MEMBERSHIP_HEADER = ["record_id", "cluster_id"]


def _check_id(value: str, what: str) -> str:
    if not isinstance(value, str) or value == "":
        raise ValueError(f"{what} must be a non-empty string, got {value!r}")
    return value


@dataclass(frozen=True)
class Clustering:
    """A partition of a record universe.

    ``membership`` maps each record to exactly one cluster id and
    ``clusters`` is its exact inverse index; ``universe_size`` is the number
    of records covered. Use :meth:`from_pairs` or :meth:`from_csv` instead
    of the raw constructor so the partition invariants are enforced.
    """

    membership: dict[RecordId, ClusterId]
    clusters: dict[ClusterId, frozenset[RecordId]]
    universe_size: int

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[RecordId, ClusterId]]) -> "Clustering":
        """Build a validated clustering from (record_id, cluster_id) pairs.

        Raises ``ValueError`` on duplicate record ids, empty ids, or an
        empty input.
        """
        membership: dict[RecordId, ClusterId] = {}
        members: dict[ClusterId, list[RecordId]] = {}
        for record_id, cluster_id in pairs:
            _check_id(record_id, "record_id")
            _check_id(cluster_id, "cluster_id")
            if record_id in membership:
                raise ValueError(f"duplicate record {record_id!r}")
            membership[record_id] = cluster_id
            members.setdefault(cluster_id, []).append(record_id)
        if not membership:
            raise ValueError("empty clustering: no records")
        clusters = {cid: frozenset(recs) for cid, recs in members.items()}
        return cls(membership=membership, clusters=clusters, universe_size=len(membership))

    @classmethod
    def from_csv(cls, path: str | Path) -> "Clustering":
        """Read a membership file (CSV with header ``record_id,cluster_id``)."""
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return cls.from_csv_file(fh, source=str(path))

    @classmethod
    def from_csv_file(cls, fh: io.TextIOBase, source: str = "<stream>") -> "Clustering":
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{source}: empty membership file")
        if [h.strip() for h in header] != MEMBERSHIP_HEADER:
            raise ValueError(
                f"{source}: expected header {','.join(MEMBERSHIP_HEADER)!r}, got {','.join(header)!r}"
            )

        def rows():
            for line_no, row in enumerate(reader, 2):
                if not row:
                    continue
                if len(row) != 2:
                    raise ValueError(f"line {line_no}: expected 2 fields, got {len(row)}")
                yield row[0], row[1]

        try:
            return cls.from_pairs(rows())
        except ValueError as exc:
            raise ValueError(f"{source}: {exc}") from None

    def to_csv(self, path: str | Path) -> None:
        """Write the membership file back out (record order preserved)."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(MEMBERSHIP_HEADER)
            for record_id, cluster_id in self.membership.items():
                writer.writerow([record_id, cluster_id])

    # -- queries -----------------------------------------------------------

    def cluster_of(self, record_id: RecordId) -> ClusterId:
        try:
            return self.membership[record_id]
        except KeyError:
            raise KeyError(f"record {record_id!r} is not in the clustering") from None

    def members(self, cluster_id: ClusterId) -> frozenset[RecordId]:
        try:
            return self.clusters[cluster_id]
        except KeyError:
            raise KeyError(f"unknown cluster {cluster_id!r}") from None

    def cluster_sizes(self) -> list[int]:
        return [len(c) for c in self.clusters.values()]

    def records(self) -> Iterator[RecordId]:
        return iter(self.membership)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def __contains__(self, record_id: RecordId) -> bool:
        return record_id in self.membership

    def restrict(self, keep: Iterable[RecordId]) -> "Clustering":
        """Intersect every cluster with ``keep``; empty intersections drop.

        ``keep`` must be a subset of the universe; unknown ids are reported.
        An empty ``keep`` produces an empty clustering (N=0).
        """
        keep_set = set(keep)
        unknown = sorted(r for r in keep_set if r not in self.membership)
        if unknown:
            shown = ", ".join(repr(r) for r in unknown[:10])
            more = "" if len(unknown) <= 10 else f" (+{len(unknown) - 10} more)"
            raise ValueError(f"restrict: unknown record ids: {shown}{more}")
        if not keep_set:
            return Clustering(membership={}, clusters={}, universe_size=0)
        membership = {r: c for r, c in self.membership.items() if r in keep_set}
        members: dict[ClusterId, list[RecordId]] = {}
        for r, c in membership.items():
            members.setdefault(c, []).append(r)
        clusters = {cid: frozenset(recs) for cid, recs in members.items()}
        return Clustering(membership=membership, clusters=clusters, universe_size=len(membership))


def normalize_label(label: str) -> str:
    """NFC-normalize and trim a label; this is the equality used by n(r)."""
    return unicodedata.normalize("NFC", label).strip()


@dataclass(frozen=True)
class AttributeTable:
    """Per-record label plus arbitrary named string attributes.

    ``labels`` stores the raw label strings; comparisons through
    :func:`name_index` use :func:`normalize_label` equality.
    """

    labels: dict[RecordId, str]
    extra: dict[RecordId, dict[str, str]] = field(default_factory=dict)
    columns: tuple[str, ...] = ()

    @classmethod
    def from_rows(
        cls,
        rows: Iterable[tuple[RecordId, str, Mapping[str, str]]],
    ) -> "AttributeTable":
        labels: dict[RecordId, str] = {}
        extra: dict[RecordId, dict[str, str]] = {}
        columns: tuple[str, ...] = ()
        for record_id, label, attrs in rows:
            _check_id(record_id, "record_id")
            if record_id in labels:
                raise ValueError(f"duplicate record {record_id!r} in attribute table")
            labels[record_id] = label
            if attrs:
                extra[record_id] = dict(attrs)
                if not columns:
                    columns = tuple(attrs.keys())
        return cls(labels=labels, extra=extra, columns=columns)

    @classmethod
    def from_csv(cls, path: str | Path) -> "AttributeTable":
        """Read an attribute file with header ``record_id,label,<attr>,...``."""
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ValueError(f"{path}: empty attribute file")
            header = [h.strip() for h in header]
            if header[:2] != ["record_id", "label"]:
                raise ValueError(
                    f"{path}: expected header to start with 'record_id,label', got {','.join(header)!r}"
                )
            attr_names = header[2:]

            def rows():
                for line_no, row in enumerate(reader, 2):
                    if not row:
                        continue
                    if len(row) != len(header):
                        raise ValueError(
                            f"{path}: line {line_no}: expected {len(header)} fields, got {len(row)}"
                        )
                    yield row[0], row[1], dict(zip(attr_names, row[2:]))

            table = cls.from_rows(rows())
            return cls(labels=table.labels, extra=table.extra, columns=tuple(attr_names))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["record_id", "label", *self.columns])
            for record_id, label in self.labels.items():
                attrs = self.extra.get(record_id, {})
                writer.writerow([record_id, label, *(attrs.get(c, "") for c in self.columns)])

    def label_of(self, record_id: RecordId) -> str:
        try:
            return self.labels[record_id]
        except KeyError:
            raise ValueError(f"no label for record {record_id!r}") from None

    def attributes_of(self, record_id: RecordId) -> dict[str, str]:
        out = {"label": self.label_of(record_id)}
        out.update(self.extra.get(record_id, {}))
        return out

    def __contains__(self, record_id: RecordId) -> bool:
        return record_id in self.labels

    def __len__(self) -> int:
        return len(self.labels)


def name_index(
    attrs: AttributeTable,
    scope: Iterable[RecordId] | None = None,
) -> dict[str, frozenset[RecordId]]:
    """Group records by normalized label: the map behind n(r).

    ``scope`` defaults to every record in the table. Records in scope with
    no label entry are an error (label-based statistics are undefined for
    them).
    """
    groups: dict[str, set[RecordId]] = {}
    records = attrs.labels.keys() if scope is None else scope
    for record_id in records:
        if record_id not in attrs.labels:
            raise ValueError(f"no label for record {record_id!r}")
        key = normalize_label(attrs.labels[record_id])
        groups.setdefault(key, set()).add(record_id)
    return {k: frozenset(v) for k, v in groups.items()}


def same_label_records(
    index: Mapping[str, frozenset[RecordId]],
    attrs: AttributeTable,
    record_id: RecordId,
) -> frozenset[RecordId]:
    """n(r): the set of records sharing ``record_id``'s normalized label."""
    return index[normalize_label(attrs.label_of(record_id))]
