"""Cluster-sampling designs and the sampled-cluster container.

The recommended design samples records uniformly with replacement and keeps
the cluster containing each drawn record; a cluster of size ``|c|`` then has
per-draw probability ``|c|/N`` (probability proportional to size). Uniform
cluster sampling and externally supplied weights are also supported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .model import Clustering, RecordId

DESIGN_PPS = "pps_record"
DESIGN_UNIFORM = "uniform_cluster"
DESIGN_EXPECTED_ERROR = "expected_error"
DESIGN_EXTERNAL = "external"


@dataclass(frozen=True)
class ClusterDraw:
    """One with-replacement draw: a ground-truth cluster and its weight."""

    cluster_id: str
    members: frozenset[RecordId]
    p_c: float
    seed_record: RecordId | None = None


@dataclass(frozen=True)
class ClusterSample:
    """Ordered with-replacement draws of ground-truth clusters.

    Duplicate clusters are allowed and kept as separate draws. Under the
    ``pps_record`` design every draw has ``p_c = |c|/N``; under
    ``uniform_cluster`` the weight is constant.
    """

    draws: tuple[ClusterDraw, ...]
    design: str = DESIGN_EXTERNAL
    rng_seed: int | None = None

    def __len__(self) -> int:
        return len(self.draws)

    def __iter__(self):
        return iter(self.draws)

    def to_jsonl(self, path: str | Path) -> None:
        """One JSON object per draw: {seed_record, members, p_c, design}."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for d in self.draws:
                fh.write(
                    json.dumps(
                        {
                            "v": 1,
                            "seed_record": d.seed_record,
                            "cluster_id": d.cluster_id,
                            "members": sorted(d.members),
                            "p_c": d.p_c,
                            "design": self.design,
                        },
                        sort_keys=True,
                    )
                )
                fh.write("\n")

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ClusterSample":
        draws: list[ClusterDraw] = []
        design = DESIGN_EXTERNAL
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                members = frozenset(obj["members"])
                if not members:
                    raise ValueError(f"{path}:{line_no}: empty cluster")
                p_c = float(obj["p_c"])
                if p_c <= 0:
                    raise ValueError(f"{path}:{line_no}: p_c must be positive, got {p_c}")
                # benchmark files carry no explicit cluster id; derive the same
                # membership-based id the labeling export uses
                cid = obj.get("cluster_id") or ("b-" + min(members))
                draws.append(
                    ClusterDraw(
                        cluster_id=cid,
                        members=members,
                        p_c=p_c,
                        seed_record=obj.get("seed_record"),
                    )
                )
                design = obj.get("design", design)
        if not draws:
            raise ValueError(f"{path}: empty sample file")
        return cls(draws=tuple(draws), design=design)


def sample_pps(truth: Clustering, k: int, rng_seed: int) -> ClusterSample:
    """Sample k clusters via uniform record draws with replacement.

    Each draw lands in the cluster of a uniformly chosen record, so cluster
    c is drawn with probability |c|/N per draw; that probability is stored
    as the draw weight. Reproducible from the seed.
    """
    if k < 1:
        raise ValueError(f"sample size must be >= 1, got {k}")
    if truth.universe_size == 0:
        raise ValueError("cannot sample from an empty clustering")
    rng = np.random.default_rng(rng_seed)
    records = list(truth.membership)
    n = truth.universe_size
    idx = rng.integers(0, n, size=k)
    draws = []
    for i in idx:
        seed_record = records[int(i)]
        cid = truth.membership[seed_record]
        members = truth.clusters[cid]
        draws.append(
            ClusterDraw(cluster_id=cid, members=members, p_c=len(members) / n, seed_record=seed_record)
        )
    return ClusterSample(draws=tuple(draws), design=DESIGN_PPS, rng_seed=rng_seed)


def sample_uniform(truth: Clustering, k: int, rng_seed: int) -> ClusterSample:
    """Sample k clusters uniformly with replacement (p_c constant = 1)."""
    if k < 1:
        raise ValueError(f"sample size must be >= 1, got {k}")
    if truth.universe_size == 0:
        raise ValueError("cannot sample from an empty clustering")
    rng = np.random.default_rng(rng_seed)
    cluster_ids = list(truth.clusters)
    idx = rng.integers(0, len(cluster_ids), size=k)
    draws = []
    for i in idx:
        cid = cluster_ids[int(i)]
        draws.append(ClusterDraw(cluster_id=cid, members=truth.clusters[cid], p_c=1.0))
    return ClusterSample(draws=tuple(draws), design=DESIGN_UNIFORM, rng_seed=rng_seed)


def census_sample(truth: Clustering, design: str = DESIGN_UNIFORM) -> ClusterSample:
    """The idealized sample that realizes a design exactly.

    ``uniform_cluster``: every cluster exactly once with constant weight.
    ``pps_record``: every record drawn once, so each cluster appears |c|
    times with weight |c|/N. Ratio estimates over these samples reproduce
    population values exactly, which is what makes them useful as oracles.
    """
    n = truth.universe_size
    draws = []
    if design == DESIGN_UNIFORM:
        for cid, members in truth.clusters.items():
            draws.append(ClusterDraw(cluster_id=cid, members=members, p_c=1.0))
    elif design == DESIGN_PPS:
        for cid, members in truth.clusters.items():
            for seed in sorted(members):
                draws.append(
                    ClusterDraw(cluster_id=cid, members=members, p_c=len(members) / n, seed_record=seed)
                )
    else:
        raise ValueError(f"census_sample supports {DESIGN_UNIFORM!r} and {DESIGN_PPS!r}, got {design!r}")
    return ClusterSample(draws=tuple(draws), design=design)


def expected_error_weights(
    prediction: Clustering,
    match_probs: Mapping[tuple[RecordId, RecordId], float],
) -> dict[RecordId, float]:
    """Record weights proportional to the expected labeling workload.

    For each record the weight is the expected number of overclustering
    removals plus expected underclustering additions:
    ``sum over other predicted-cluster members of (1 - p)`` plus
    ``sum over outside candidates of p``. Pairs absent from ``match_probs``
    contribute p = 0, so an unlisted within-cluster pair counts as a full
    expected removal and an unlisted outside pair contributes nothing.
    """
    by_record: dict[RecordId, dict[RecordId, float]] = {}
    for (a, b), p in match_probs.items():
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"match probability for pair ({a!r}, {b!r}) outside [0,1]: {p}")
        by_record.setdefault(a, {})[b] = p
        by_record.setdefault(b, {})[a] = p
    weights: dict[RecordId, float] = {}
    for r, cid in prediction.membership.items():
        cluster = prediction.clusters[cid]
        probs = by_record.get(r, {})
        removal = sum(1.0 - probs.get(other, 0.0) for other in cluster if other != r)
        addition = sum(p for other, p in probs.items() if other not in cluster)
        weights[r] = removal + addition
    return weights


def sample_from_weights(
    truth: Clustering,
    record_weights: Mapping[RecordId, float],
    k: int,
    rng_seed: int,
) -> ClusterSample:
    """Record draws with probability proportional to nonnegative weights.

    The per-draw probability of cluster c is the normalized sum of its
    member weights; that value is stored as p_c.
    """
    if k < 1:
        raise ValueError(f"sample size must be >= 1, got {k}")
    records = list(truth.membership)
    w = np.array([record_weights.get(r, 0.0) for r in records], dtype=float)
    if (w < 0).any():
        raise ValueError("record weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("all record weights are zero; nothing to sample")
    probs = w / total
    cluster_prob: dict[str, float] = {}
    for r, p in zip(records, probs):
        cid = truth.membership[r]
        cluster_prob[cid] = cluster_prob.get(cid, 0.0) + float(p)
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(len(records), size=k, replace=True, p=probs)
    draws = []
    for i in idx:
        seed_record = records[int(i)]
        cid = truth.membership[seed_record]
        draws.append(
            ClusterDraw(
                cluster_id=cid,
                members=truth.clusters[cid],
                p_c=cluster_prob[cid],
                seed_record=seed_record,
            )
        )
    return ClusterSample(draws=tuple(draws), design=DESIGN_EXPECTED_ERROR, rng_seed=rng_seed)
