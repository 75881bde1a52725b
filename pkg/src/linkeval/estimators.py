"""Bias-adjusted ratio estimators for entity-resolution performance metrics.

Every metric here is a ratio of two expectations over a randomly sampled
ground-truth cluster, ``theta = E[f(c)/p_c] / E[g(c)/p_c]``, where f and g
are plain functions of a cluster's error profile. The estimator replaces
the expectations with sample means over the error-table rows, applies a
second-order bias adjustment, and reports a variance estimate:

    point = (fbar/gbar) * (1 + (1/(k(k-1))) * sum_i (g_i/gbar)(f_i/fbar - g_i/gbar))
    var   = (fbar/gbar)^2 * (1/(k(k-1))) * sum_i (g_i/gbar - f_i/fbar)^2

with f_i = f(c_i)/p_i and g_i = g(c_i)/p_i, under with-replacement i.i.d.
draw semantics.

``RatioTarget.f``/``g`` exclude the 1/p_c factor; the estimator applies the
inverse-probability weighting itself. On a census (each true cluster once)
the unweighted sums of f and g reproduce the population metric exactly for
any positive weights, which is the machine-checkable form of the
representation identities; :func:`census_ratio` computes that.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .error_metrics import ClusterErrors
from .model import Clustering

FLAG_ZERO_NUMERATOR = "zero-numerator-mean"
FLAG_SINGLE_DRAW = "single-draw-unadjusted"


class EstimationError(ValueError):
    """Raised when an estimate cannot be formed from the given rows."""


@dataclass(frozen=True)
class RatioTarget:
    """A metric expressed as a ratio of cluster-level functions.

    ``f`` and ``g`` map an error-table row to the numerator and denominator
    contributions, without any sampling-weight factor. ``complement``
    reports 1 - ratio instead of the ratio (used by homogeneity, whose
    variance is unchanged by the affine flip).
    """

    name: str
    f: Callable[[ClusterErrors], float]
    g: Callable[[ClusterErrors], float]
    complement: bool = False


@dataclass(frozen=True)
class Estimate:
    """Point estimate with estimated standard deviation and provenance."""

    metric: str
    point: float
    std: float
    k: int
    design: str = ""
    flags: tuple[str, ...] = ()

    def interval(self, width: float = 2.0) -> tuple[float, float]:
        """point +/- width * std (width=2 is the coverage_2 convention)."""
        return (self.point - width * self.std, self.point + width * self.std)

    def clamped(self) -> "Estimate":
        """Copy with the point forced into [0, 1] (reporting-side only)."""
        return Estimate(
            metric=self.metric,
            point=min(1.0, max(0.0, self.point)),
            std=self.std,
            k=self.k,
            design=self.design,
            flags=self.flags + ("clamped",),
        )


def estimate_to_dict(est: Estimate) -> dict:
    return {
        "v": 1,
        "metric": est.metric,
        "point": est.point,
        "std": est.std,
        "k": est.k,
        "design": est.design,
        "flags": list(est.flags),
    }


def estimates_to_json(estimates: Sequence[Estimate]) -> str:
    """Canonical JSON for a list of estimates (shared by CLI and service)."""
    return json.dumps([estimate_to_dict(e) for e in estimates], sort_keys=True, indent=2) + "\n"


def ratio_point_std(f: np.ndarray, g: np.ndarray) -> tuple[float, float, tuple[str, ...]]:
    """Bias-adjusted ratio and standard deviation from weighted row values.

    ``f`` and ``g`` already include the 1/p_c weighting. Returns
    (point, std, flags); a zero numerator mean falls back to the unadjusted
    ratio 0 with the f_i/fbar terms taken as 0, flagged.
    """
    k = f.shape[0]
    if k < 2:
        raise EstimationError(f"insufficient sample: need at least 2 rows, got {k}")
    fbar = float(f.mean())
    gbar = float(g.mean())
    if gbar == 0.0:
        raise EstimationError("denominator mean is zero; target undefined on this sample")
    scale = 1.0 / (k * (k - 1))
    g_rel = g / gbar
    if fbar == 0.0:
        f_rel = np.zeros_like(f)
        flags: tuple[str, ...] = (FLAG_ZERO_NUMERATOR,)
    else:
        f_rel = f / fbar
        flags = ()
    adjustment = 1.0 + scale * float(np.sum(g_rel * (f_rel - g_rel)))
    point = (fbar / gbar) * adjustment
    var = (fbar / gbar) ** 2 * scale * float(np.sum((g_rel - f_rel) ** 2))
    return point, math.sqrt(var), flags


def _weighted_values(rows: Sequence[ClusterErrors], target: RatioTarget) -> tuple[np.ndarray, np.ndarray]:
    f = np.array([target.f(r) / r.p_c for r in rows], dtype=float)
    g = np.array([target.g(r) / r.p_c for r in rows], dtype=float)
    return f, g


def ratio_estimate(rows: Iterable[ClusterErrors], target: RatioTarget, design: str = "") -> Estimate:
    """Bias-adjusted estimate of a ratio target from error-table rows."""
    rows = list(rows)
    f, g = _weighted_values(rows, target)
    point, std, flags = ratio_point_std(f, g)
    if target.complement:
        point = 1.0 - point
    return Estimate(metric=target.name, point=point, std=std, k=len(rows), design=design, flags=flags)


def unadjusted_ratio(rows: Iterable[ClusterErrors], target: RatioTarget) -> float:
    """Plain fbar/gbar with inverse-probability weighting, no adjustment."""
    rows = list(rows)
    if not rows:
        raise EstimationError("empty sample")
    f, g = _weighted_values(rows, target)
    gbar = float(g.mean())
    if gbar == 0.0:
        raise EstimationError("denominator mean is zero; target undefined on this sample")
    ratio = float(f.mean()) / gbar
    return 1.0 - ratio if target.complement else ratio


def census_ratio(rows: Iterable[ClusterErrors], target: RatioTarget) -> float:
    """sum f / sum g over census rows: the exact population identity.

    The sampling weights cancel out of the ratio of expectations, so on a
    sample containing each true cluster exactly once this equals the
    population metric for any positive p_c.
    """
    rows = list(rows)
    num = sum(target.f(r) for r in rows)
    den = sum(target.g(r) for r in rows)
    if den == 0:
        raise EstimationError("census denominator is zero; target undefined")
    ratio = num / den
    return 1.0 - ratio if target.complement else ratio


# -- target catalogue -------------------------------------------------------


def pairwise_precision_target() -> RatioTarget:
    """Shared-pair precision: common pairs over predicted pairs."""
    return RatioTarget(
        name="pairwise_precision",
        f=lambda r: r.size * (r.size - 1 - r.uce),
        g=lambda r: r.size * (r.size - 1 + r.sde),
    )


def pairwise_recall_target() -> RatioTarget:
    return RatioTarget(
        name="pairwise_recall",
        f=lambda r: r.size * (r.size - 1 - r.uce),
        g=lambda r: r.size * (r.size - 1),
    )


def pairwise_f_target(beta: float = 1.0) -> RatioTarget:
    """Weighted harmonic mean of pairwise precision and recall."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    shrink = 1.0 / (1.0 + beta * beta)
    return RatioTarget(
        name=f"pairwise_f_{beta:g}",
        f=lambda r: r.size * (r.size - 1 - r.uce),
        g=lambda r: r.size * (r.size - 1 + shrink * r.sde),
    )


def _correct(r: ClusterErrors) -> float:
    # EI(c) is exactly 0/1 on a true cluster; 1 - EI is the correctness indicator
    return 1.0 - r.ei


def cluster_precision_target(n_records: int, n_pred_clusters: int) -> RatioTarget:
    """Exactly-recovered clusters over all predicted clusters."""
    if n_records < 1 or n_pred_clusters < 1:
        raise ValueError("cluster metrics need the record count and predicted-cluster count")
    return RatioTarget(
        name="cluster_precision",
        f=lambda r: n_records * _correct(r) / n_pred_clusters,
        g=lambda r: float(r.size),
    )


def cluster_recall_target() -> RatioTarget:
    return RatioTarget(
        name="cluster_recall",
        f=_correct,
        g=lambda r: 1.0,
    )


def cluster_f_target(n_records: int, n_pred_clusters: int, beta: float = 1.0) -> RatioTarget:
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n_records < 1 or n_pred_clusters < 1:
        raise ValueError("cluster metrics need the record count and predicted-cluster count")
    b2 = beta * beta
    return RatioTarget(
        name=f"cluster_f_{beta:g}",
        f=lambda r: n_records * (1.0 + b2) * _correct(r),
        g=lambda r: n_records * b2 + n_pred_clusters * r.size,
    )


def bcubed_precision_target() -> RatioTarget:
    """Record-averaged precision with equal weight on each true cluster."""
    return RatioTarget(
        name="bcubed_precision",
        f=lambda r: 1.0 - r.roce,
        g=lambda r: 1.0,
    )


def bcubed_recall_target() -> RatioTarget:
    return RatioTarget(
        name="bcubed_recall",
        f=lambda r: 1.0 - r.ruce,
        g=lambda r: 1.0,
    )


def homogeneity_target(n_records: int) -> RatioTarget:
    """1 minus the ratio of conditional to marginal clustering entropy."""
    if n_records < 2:
        raise ValueError("homogeneity needs the total record count N >= 2")
    return RatioTarget(
        name="homogeneity",
        f=lambda r: r.size * r.h,
        g=lambda r: r.size * math.log(r.size / n_records),
        complement=True,
    )


def _check_homogeneity_rows(rows: Sequence[ClusterErrors], n_records: int) -> None:
    if all(r.size >= n_records for r in rows):
        raise EstimationError(
            "homogeneity undefined: every sampled cluster spans the whole record universe,"
            " so the clustering entropy is zero"
        )


# -- convenience wrappers ----------------------------------------------------


def pairwise_precision(rows: Iterable[ClusterErrors], design: str = "") -> Estimate:
    return ratio_estimate(rows, pairwise_precision_target(), design=design)


def pairwise_recall(rows: Iterable[ClusterErrors], design: str = "") -> Estimate:
    return ratio_estimate(rows, pairwise_recall_target(), design=design)


def pairwise_f(rows: Iterable[ClusterErrors], beta: float = 1.0, design: str = "") -> Estimate:
    return ratio_estimate(rows, pairwise_f_target(beta), design=design)


def cluster_precision(rows: Iterable[ClusterErrors], n_records: int, n_pred_clusters: int, design: str = "") -> Estimate:
    return ratio_estimate(rows, cluster_precision_target(n_records, n_pred_clusters), design=design)


def cluster_recall(rows: Iterable[ClusterErrors], design: str = "") -> Estimate:
    return ratio_estimate(rows, cluster_recall_target(), design=design)


def cluster_f(
    rows: Iterable[ClusterErrors],
    n_records: int,
    n_pred_clusters: int,
    beta: float = 1.0,
    design: str = "",
) -> Estimate:
    return ratio_estimate(rows, cluster_f_target(n_records, n_pred_clusters, beta), design=design)


def bcubed_precision(rows: Iterable[ClusterErrors], design: str = "") -> Estimate:
    return ratio_estimate(rows, bcubed_precision_target(), design=design)


def bcubed_recall(rows: Iterable[ClusterErrors], design: str = "") -> Estimate:
    return ratio_estimate(rows, bcubed_recall_target(), design=design)


def homogeneity(rows: Iterable[ClusterErrors], n_records: int, design: str = "") -> Estimate:
    rows = list(rows)
    _check_homogeneity_rows(rows, n_records)
    return ratio_estimate(rows, homogeneity_target(n_records), design=design)


def subgroup_estimate(
    rows: Iterable[ClusterErrors],
    member_filter: Callable[[ClusterErrors], bool],
    target: RatioTarget,
    design: str = "",
) -> Estimate:
    """Estimate a target on the sub-sample of true clusters passing a filter.

    The filter applies to whole true clusters, never to record subsets, so
    cross-boundary errors stay visible. Fewer than 2 surviving rows is an
    error.
    """
    kept = [r for r in rows if member_filter(r)]
    if len(kept) < 2:
        raise EstimationError(
            f"subgroup too small: {len(kept)} row(s) survive the filter, need at least 2"
        )
    return ratio_estimate(kept, target, design=design)


# -- exact oracle ------------------------------------------------------------


@dataclass(frozen=True)
class OracleMetrics:
    """Exact metric values computed from full truth and prediction."""

    pairwise_precision: float
    pairwise_recall: float
    cluster_precision: float
    cluster_recall: float
    bcubed_precision: float
    bcubed_recall: float
    homogeneity: float
    n_records: int
    n_true_clusters: int
    n_pred_clusters: int
    betas: dict = field(default_factory=dict)

    def pairwise_f(self, beta: float = 1.0) -> float:
        return _f_beta(self.pairwise_precision, self.pairwise_recall, beta)

    def cluster_f(self, beta: float = 1.0) -> float:
        return _f_beta(self.cluster_precision, self.cluster_recall, beta)

    def value(self, metric: str, beta: float = 1.0) -> float:
        if metric.startswith("pairwise_f"):
            return self.pairwise_f(beta)
        if metric.startswith("cluster_f"):
            return self.cluster_f(beta)
        return getattr(self, metric)


def _f_beta(p: float, r: float, beta: float) -> float:
    b2 = beta * beta
    if p == 0.0 and r == 0.0:
        return 0.0
    return (1.0 + b2) * p * r / (b2 * p + r)


def oracle_metrics(truth: Clustering, prediction: Clustering) -> OracleMetrics:
    """Exact P, R, cP, cR, B3 precision/recall, and homogeneity.

    Pair counts come from intersection counting, not materialized pairs, so
    this scales far past the desk-size instances it is mostly used on.
    """
    if set(truth.membership) != set(prediction.membership):
        raise ValueError("truth and prediction must cover the same record universe")
    n = truth.universe_size
    # contingency counts |c ∩ chat| over co-occurring (true, predicted) pairs
    inter: Counter = Counter()
    for r, cid in truth.membership.items():
        inter[(cid, prediction.membership[r])] += 1

    pairs_true = sum(s * (s - 1) // 2 for s in map(len, truth.clusters.values()))
    pairs_pred = sum(s * (s - 1) // 2 for s in map(len, prediction.clusters.values()))
    pairs_common = sum(s * (s - 1) // 2 for s in inter.values())

    # vacuous 1.0 when a pair universe is empty (matches the perfect-prediction identity)
    pw_p = pairs_common / pairs_pred if pairs_pred else 1.0
    pw_r = pairs_common / pairs_true if pairs_true else 1.0

    exact = 0
    for (cid, pid), s in inter.items():
        if s == len(truth.clusters[cid]) and s == len(prediction.clusters[pid]):
            exact += 1
    c_p = exact / prediction.n_clusters
    c_r = exact / truth.n_clusters

    b3_p = 0.0
    b3_r = 0.0
    for cid, members in truth.clusters.items():
        size = len(members)
        acc_p = 0.0
        acc_r = 0.0
        for r in members:
            pid = prediction.membership[r]
            common = inter[(cid, pid)]
            acc_p += common / len(prediction.clusters[pid])
            acc_r += common / size
        b3_p += acc_p / size
        b3_r += acc_r / size
    b3_p /= truth.n_clusters
    b3_r /= truth.n_clusters

    h_truth = 0.0
    for members in truth.clusters.values():
        q = len(members) / n
        h_truth -= q * math.log(q)
    h_cond = 0.0
    for (cid, pid), s in inter.items():
        h_cond -= (s / n) * math.log(s / len(prediction.clusters[pid]))
    if h_truth == 0.0:
        homog = float("nan")
    else:
        homog = 1.0 - h_cond / h_truth

    return OracleMetrics(
        pairwise_precision=pw_p,
        pairwise_recall=pw_r,
        cluster_precision=c_p,
        cluster_recall=c_r,
        bcubed_precision=b3_p,
        bcubed_recall=b3_r,
        homogeneity=homog,
        n_records=n,
        n_true_clusters=truth.n_clusters,
        n_pred_clusters=prediction.n_clusters,
    )


# -- metric registry for CLI/service -----------------------------------------

PAIRWISE_METRICS = ("pairwise_precision", "pairwise_recall", "pairwise_f")
CLUSTER_METRICS = ("cluster_precision", "cluster_recall", "cluster_f")
BCUBED_METRICS = ("bcubed_precision", "bcubed_recall")
ALL_METRICS = PAIRWISE_METRICS + CLUSTER_METRICS + BCUBED_METRICS + ("homogeneity",)


def build_target(
    metric: str,
    beta: float = 1.0,
    n_records: int | None = None,
    n_pred_clusters: int | None = None,
) -> RatioTarget:
    """Look up a metric target by name, wiring in globals where needed."""
    if metric == "pairwise_precision":
        return pairwise_precision_target()
    if metric == "pairwise_recall":
        return pairwise_recall_target()
    if metric == "pairwise_f":
        return pairwise_f_target(beta)
    if metric == "bcubed_precision":
        return bcubed_precision_target()
    if metric == "bcubed_recall":
        return bcubed_recall_target()
    if metric in ("cluster_precision", "cluster_f", "homogeneity") and n_records is None:
        raise ValueError(f"metric {metric!r} needs the total record count")
    if metric in ("cluster_precision", "cluster_f") and n_pred_clusters is None:
        raise ValueError(f"metric {metric!r} needs the predicted-cluster count")
    if metric == "cluster_precision":
        return cluster_precision_target(n_records, n_pred_clusters)
    if metric == "cluster_recall":
        return cluster_recall_target()
    if metric == "cluster_f":
        return cluster_f_target(n_records, n_pred_clusters, beta)
    if metric == "homogeneity":
        return homogeneity_target(n_records)
    raise ValueError(f"unknown metric {metric!r}; known: {', '.join(ALL_METRICS)}")
