"""Summary statistics of a clustering, and their estimation from samples.

The statistics describe the cluster-size distribution (average size,
matching rate, Hill-number curve) and label noise (homonymy rate, name
variation rate). Computed directly on a full clustering they are monitoring
indicators; their ground-truth values can be estimated from a weighted
cluster sample through the same ratio machinery as the performance metrics.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

from .estimators import (
    FLAG_SINGLE_DRAW,
    Estimate,
    EstimationError,
    RatioTarget,
    ratio_estimate,
    unadjusted_ratio,
)
from .model import AttributeTable, Clustering, RecordId, name_index, normalize_label
from .sampling import ClusterSample

DEFAULT_HILL_GRID = (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, math.inf)

SUMMARY_METRICS = ("avg_size", "matching_rate", "homonymy_rate", "name_variation_rate")


@dataclass(frozen=True)
class SummaryReport:
    avg_cluster_size: float
    matching_rate: float
    homonymy_rate: float | None
    name_variation_rate: float | None
    hill: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "avg_cluster_size": self.avg_cluster_size,
            "matching_rate": self.matching_rate,
            "homonymy_rate": self.homonymy_rate,
            "name_variation_rate": self.name_variation_rate,
            "hill": [["inf" if math.isinf(q) else q, h] for q, h in self.hill],
        }


def _size_distribution(clustering: Clustering) -> dict[int, float]:
    if clustering.n_clusters == 0:
        raise ValueError("summary statistics are undefined on an empty clustering")
    counts = Counter(len(c) for c in clustering.clusters.values())
    total = clustering.n_clusters
    return {size: cnt / total for size, cnt in counts.items()}


def avg_cluster_size(clustering: Clustering) -> float:
    """Mean cluster size N/|C|."""
    if clustering.n_clusters == 0:
        raise ValueError("summary statistics are undefined on an empty clustering")
    return clustering.universe_size / clustering.n_clusters


def matching_rate(clustering: Clustering) -> float:
    """Share of records sitting in a cluster of size at least two."""
    if clustering.n_clusters == 0:
        raise ValueError("summary statistics are undefined on an empty clustering")
    matched = sum(len(c) for c in clustering.clusters.values() if len(c) > 1)
    return matched / clustering.universe_size


def hill_number(clustering: Clustering, q: float) -> float:
    """Diversity of the cluster-size distribution at order q.

    Exponentiated Renyi entropy of the distribution of cluster sizes, with
    the continuous extensions: q=0 counts the distinct sizes, q=1 is the
    exponentiated Shannon entropy, and q=inf is the reciprocal of the most
    common size's prevalence (the Renyi limit).
    """
    if q < 0:
        raise ValueError(f"Hill number order must be nonnegative, got {q}")
    probs = _size_distribution(clustering)
    if math.isinf(q):
        return 1.0 / max(probs.values())
    if q == 0:
        return float(len(probs))
    if q == 1:
        return math.exp(-sum(p * math.log(p) for p in probs.values()))
    total = sum(p**q for p in probs.values())
    return total ** (1.0 / (1.0 - q))


def hill_curve(clustering: Clustering, grid: Iterable[float] = DEFAULT_HILL_GRID) -> tuple[tuple[float, float], ...]:
    return tuple((q, hill_number(clustering, q)) for q in grid)


def _cluster_has_homonym(
    cluster: frozenset[RecordId],
    attrs: AttributeTable,
    index: Mapping[str, frozenset[RecordId]],
) -> bool:
    # some member shares its label with a record outside the cluster
    return any(not index[normalize_label(attrs.label_of(r))] <= cluster for r in cluster)


def _cluster_has_variation(cluster: frozenset[RecordId], attrs: AttributeTable) -> bool:
    labels = {normalize_label(attrs.label_of(r)) for r in cluster}
    return len(labels) > 1


def homonymy_rate(
    clustering: Clustering,
    attrs: AttributeTable,
    index: Mapping[str, frozenset[RecordId]] | None = None,
) -> float:
    """Share of clusters containing a record whose label escapes the cluster."""
    if clustering.n_clusters == 0:
        raise ValueError("summary statistics are undefined on an empty clustering")
    if index is None:
        index = name_index(attrs, scope=clustering.records())
    hits = sum(1 for c in clustering.clusters.values() if _cluster_has_homonym(c, attrs, index))
    return hits / clustering.n_clusters


def name_variation_rate(clustering: Clustering, attrs: AttributeTable) -> float:
    """Share of clusters whose members carry more than one label."""
    if clustering.n_clusters == 0:
        raise ValueError("summary statistics are undefined on an empty clustering")
    hits = sum(1 for c in clustering.clusters.values() if _cluster_has_variation(c, attrs))
    return hits / clustering.n_clusters


def compute_summary(
    clustering: Clustering,
    attrs: AttributeTable | None = None,
    hill_grid: Iterable[float] = DEFAULT_HILL_GRID,
) -> SummaryReport:
    """Full summary report of a clustering; label rates need attributes."""
    homonymy = variation = None
    if attrs is not None:
        homonymy = homonymy_rate(clustering, attrs)
        variation = name_variation_rate(clustering, attrs)
    return SummaryReport(
        avg_cluster_size=avg_cluster_size(clustering),
        matching_rate=matching_rate(clustering),
        homonymy_rate=homonymy,
        name_variation_rate=variation,
        hill=hill_curve(clustering, hill_grid),
    )


# -- estimation from cluster samples ------------------------------------------


def summary_target(
    which: str,
    attrs: AttributeTable | None = None,
    index: Mapping[str, frozenset[RecordId]] | None = None,
) -> RatioTarget:
    """Ratio representation of a summary statistic over sampled clusters.

    These targets act on raw sampled clusters instead of error rows, so the
    row type is a small shim created by :func:`estimate_summary`.
    """
    if which == "avg_size":
        return RatioTarget(name="avg_size", f=lambda row: float(row.size), g=lambda row: 1.0)
    if which == "matching_rate":
        return RatioTarget(
            name="matching_rate",
            f=lambda row: float(row.size) if row.size > 1 else 0.0,
            g=lambda row: float(row.size),
        )
    if which in ("homonymy_rate", "name_variation_rate"):
        if attrs is None:
            raise ValueError(f"{which} estimation needs an attribute table for the record universe")
        if which == "homonymy_rate":
            if index is None:
                raise ValueError("homonymy_rate estimation needs a name index over the full universe")
            return RatioTarget(
                name="homonymy_rate",
                f=lambda row: 1.0 if _cluster_has_homonym(row.members, attrs, index) else 0.0,
                g=lambda row: 1.0,
            )
        return RatioTarget(
            name="name_variation_rate",
            f=lambda row: 1.0 if _cluster_has_variation(row.members, attrs) else 0.0,
            g=lambda row: 1.0,
        )
    if which == "hill":
        raise ValueError(
            "estimating Hill numbers from a cluster sample is not supported: existing "
            "diversity estimators only apply under uniform weights, so the curve is "
            "reported for predictions only"
        )
    raise ValueError(f"unknown summary statistic {which!r}; known: {', '.join(SUMMARY_METRICS)}")


@dataclass(frozen=True)
class _SampledClusterRow:
    """Adapter giving sampled clusters the row surface the targets expect."""

    members: frozenset[RecordId]
    size: int
    p_c: float


def estimate_summary(
    sample: ClusterSample,
    which: str,
    attrs: AttributeTable | None = None,
    index: Mapping[str, frozenset[RecordId]] | None = None,
) -> Estimate:
    """Estimate a summary statistic of the unseen true clustering.

    Homonymy needs a name index over the whole record universe; the
    escape check runs against the sampled cluster only. A single-draw
    sample yields the unadjusted ratio with zero std, flagged.
    """
    if len(sample) == 0:
        raise EstimationError("empty sample")
    if which == "homonymy_rate" and index is None:
        if attrs is None:
            raise ValueError("homonymy_rate estimation needs an attribute table for the record universe")
        index = name_index(attrs)
    target = summary_target(which, attrs=attrs, index=index)
    rows = [
        _SampledClusterRow(members=d.members, size=len(d.members), p_c=d.p_c)
        for d in sample.draws
    ]
    if len(rows) == 1:
        point = unadjusted_ratio(rows, target)
        return Estimate(
            metric=target.name,
            point=point,
            std=0.0,
            k=1,
            design=sample.design,
            flags=(FLAG_SINGLE_DRAW,),
        )
    return ratio_estimate(rows, target, design=sample.design)
