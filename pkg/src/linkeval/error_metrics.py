"""Record-wise and cluster-wise error metrics for a predicted clustering.

Given a ground-truth cluster and a predicted clustering, each member record
gets an error profile (EI, SDE, OCE, UCE, ROCE, RUCE, H) and the cluster
gets the member average of each field. One row per sampled cluster forms
the error table that every downstream estimator consumes.

The H field is the per-record log-homogeneity term
``ln((|pred(r)| - OCE(r)) / |pred(r)|)``; the numerator is the
truth/prediction intersection size, which always contains r itself, so the
log argument is never zero.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .model import Clustering, RecordId
from .sampling import ClusterSample

ERROR_TABLE_COLUMNS = [
    "cluster_id",
    "size",
    "p_c",
    "EI",
    "SDE",
    "OCE",
    "UCE",
    "ROCE",
    "RUCE",
    "H",
]


@dataclass(frozen=True)
class RecordErrors:
    """Error profile of one record of a ground-truth cluster."""

    record: RecordId
    ei: int
    sde: int
    oce: int
    uce: int
    roce: float
    ruce: float
    h: float


@dataclass(frozen=True)
class ClusterErrors:
    """Member-averaged error profile of one ground-truth cluster.

    ``p_c`` is the sampling weight attached when the row belongs to a
    sample; rows built outside a sample carry ``p_c = 1.0``.
    """

    cluster_id: str
    size: int
    ei: float
    sde: float
    oce: float
    uce: float
    roce: float
    ruce: float
    h: float
    p_c: float = 1.0

    def with_weight(self, p_c: float) -> "ClusterErrors":
        if p_c <= 0:
            raise ValueError(f"cluster {self.cluster_id!r}: sampling weight must be positive, got {p_c}")
        return ClusterErrors(
            cluster_id=self.cluster_id,
            size=self.size,
            ei=self.ei,
            sde=self.sde,
            oce=self.oce,
            uce=self.uce,
            roce=self.roce,
            ruce=self.ruce,
            h=self.h,
            p_c=p_c,
        )


def record_errors(truth_cluster: Iterable[RecordId], prediction: Clustering) -> list[RecordErrors]:
    """Per-record error metrics of one true cluster against a prediction.

    Pure set algebra, no sampling involved. Every member must exist in the
    prediction; a missing record is a hard error (silent singleton
    imputation would mask pipeline bugs).
    """
    members = list(truth_cluster)
    if not members:
        raise ValueError("empty truth cluster")
    true_size = len(members)
    pred_ids: list[str] = []
    for r in members:
        if r not in prediction:
            raise ValueError(f"record {r!r} is missing from the prediction")
        pred_ids.append(prediction.membership[r])
    # |c ∩ pred(r)| = how many members of the true cluster share r's predicted cluster
    overlap = Counter(pred_ids)
    out = []
    for r, pid in zip(members, pred_ids):
        pred_size = len(prediction.clusters[pid])
        common = overlap[pid]
        oce = pred_size - common
        uce = true_size - common
        ei = 0 if (oce == 0 and uce == 0) else 1
        out.append(
            RecordErrors(
                record=r,
                ei=ei,
                sde=pred_size - true_size,
                oce=oce,
                uce=uce,
                roce=oce / pred_size,
                ruce=uce / true_size,
                h=math.log(common / pred_size),
            )
        )
    return out


def cluster_errors(
    truth_cluster: Iterable[RecordId],
    prediction: Clustering,
    cluster_id: str = "",
    p_c: float = 1.0,
) -> ClusterErrors:
    """Member averages of :func:`record_errors` for one true cluster."""
    recs = record_errors(truth_cluster, prediction)
    n = len(recs)
    return ClusterErrors(
        cluster_id=cluster_id,
        size=n,
        ei=sum(r.ei for r in recs) / n,
        sde=sum(r.sde for r in recs) / n,
        oce=sum(r.oce for r in recs) / n,
        uce=sum(r.uce for r in recs) / n,
        roce=sum(r.roce for r in recs) / n,
        ruce=sum(r.ruce for r in recs) / n,
        h=sum(r.h for r in recs) / n,
        p_c=p_c,
    )


@dataclass(frozen=True)
class ErrorTable:
    """One :class:`ClusterErrors` row per sampled cluster draw.

    Repeated draws of the same cluster stay as separate rows
    (with-replacement semantics). Rows are ordered by cluster id, then by
    draw position, so the table is deterministic no matter how the rows
    were computed.
    """

    rows: tuple[ClusterErrors, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def filter(self, keep) -> "ErrorTable":
        return ErrorTable(rows=tuple(r for r in self.rows if keep(r)))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(ERROR_TABLE_COLUMNS)
            for r in self.rows:
                writer.writerow(
                    [
                        r.cluster_id,
                        r.size,
                        repr(r.p_c),
                        repr(r.ei),
                        repr(r.sde),
                        repr(r.oce),
                        repr(r.uce),
                        repr(r.roce),
                        repr(r.ruce),
                        repr(r.h),
                    ]
                )

    @classmethod
    def from_csv(cls, path: str | Path) -> "ErrorTable":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ERROR_TABLE_COLUMNS:
                raise ValueError(
                    f"{path}: expected header {','.join(ERROR_TABLE_COLUMNS)!r}, got {header!r}"
                )
            rows = []
            for row in reader:
                if not row:
                    continue
                cid, size, p_c, ei, sde, oce, uce, roce, ruce, h = row
                rows.append(
                    ClusterErrors(
                        cluster_id=cid,
                        size=int(size),
                        p_c=float(p_c),
                        ei=float(ei),
                        sde=float(sde),
                        oce=float(oce),
                        uce=float(uce),
                        roce=float(roce),
                        ruce=float(ruce),
                        h=float(h),
                    )
                )
        return cls(rows=tuple(rows))


def error_table(sample: ClusterSample, prediction: Clustering) -> ErrorTable:
    """Error-metric rows for every draw of a cluster sample."""
    rows: list[tuple[str, int, ClusterErrors]] = []
    for i, draw in enumerate(sample.draws):
        if draw.p_c <= 0:
            raise ValueError(
                f"draw {i} (cluster {draw.cluster_id!r}): sampling weight must be positive, got {draw.p_c}"
            )
        row = cluster_errors(draw.members, prediction, cluster_id=draw.cluster_id, p_c=draw.p_c)
        rows.append((draw.cluster_id, i, row))
    rows.sort(key=lambda t: (t[0], t[1]))
    return ErrorTable(rows=tuple(r for _, _, r in rows))


def pair_count_sums(rows: Sequence[ClusterErrors]) -> tuple[float, float, float]:
    """(2|P|, 2|T∩P|, 2|T|) contributions summed over the given rows.

    Exact over a census of the true clusters:
    ``sum |c|(|c|-1+SDE(c))`` counts twice the predicted pairs,
    ``sum |c|(|c|-1-UCE(c))`` twice the common pairs, and
    ``sum |c|(|c|-1)`` twice the true pairs.
    """
    two_p = sum(r.size * (r.size - 1 + r.sde) for r in rows)
    two_tp = sum(r.size * (r.size - 1 - r.uce) for r in rows)
    two_t = sum(r.size * (r.size - 1) for r in rows)
    return two_p, two_tp, two_t
