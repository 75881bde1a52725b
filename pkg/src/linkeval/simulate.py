"""Synthetic populations, a field-agreement matcher, and the Monte-Carlo
harness that measures estimator bias, RMSE, and confidence-interval coverage.

The harness replicates sample-and-estimate many times against a known truth.
All randomness flows from one master seed with a fixed splitting rule: the
stream for replication ``rep`` is seeded by ``master_seed XOR rep`` (plus
the design/size cell indices), so runs are bit-identical for a given seed
and resumable from a checkpoint.
"""

from __future__ import annotations

import csv
import json
import string
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .error_metrics import ClusterErrors, cluster_errors
from .estimators import (
    EstimationError,
    RatioTarget,
    build_target,
    oracle_metrics,
    ratio_point_std,
)
from .model import AttributeTable, Clustering
from .sampling import DESIGN_PPS, DESIGN_UNIFORM

RLDATA_FIELDS = ("first", "last", "birth_day", "birth_month", "birth_year")

_VOWELS = "aeiou"
_CONSONANTS = "bcdfghjklmnprstvwz"


def _name_pool(rng: np.random.Generator, n: int, syllables: tuple[int, int]) -> list[str]:
    pool = set()
    lo, hi = syllables
    while len(pool) < n:
        k = int(rng.integers(lo, hi + 1))
        parts = []
        for _ in range(k):
            parts.append(_CONSONANTS[int(rng.integers(len(_CONSONANTS)))])
            parts.append(_VOWELS[int(rng.integers(len(_VOWELS)))])
        if rng.random() < 0.4:
            parts.append(_CONSONANTS[int(rng.integers(len(_CONSONANTS)))])
        pool.add("".join(parts).capitalize())
    return sorted(pool)


def _zipf_probs(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def _typo(rng: np.random.Generator, value: str) -> str:
    """One character-level error: substitute, delete, or transpose."""
    if len(value) == 0:
        return value
    op = int(rng.integers(3)) if len(value) >= 2 else 0
    pos = int(rng.integers(len(value)))
    if op == 0:
        alphabet = string.digits if value[pos].isdigit() else string.ascii_lowercase
        repl = alphabet[int(rng.integers(len(alphabet)))]
        while repl == value[pos]:
            repl = alphabet[int(rng.integers(len(alphabet)))]
        return value[:pos] + repl + value[pos + 1 :]
    if op == 1:
        return value[:pos] + value[pos + 1 :]
    pos = min(pos, len(value) - 2)
    return value[:pos] + value[pos + 1] + value[pos] + value[pos + 2 :]


def generate_rldata_like(
    n_pairs: int = 1000,
    n_singletons: int = 8000,
    corruption: float | dict[str, float] = 0.05,
    rng_seed: int = 0,
    n_first: int = 600,
    n_last: int = 900,
    zipf_s: float = 0.8,
    year_range: tuple[int, int] = (1930, 2006),
) -> tuple[Clustering, AttributeTable]:
    """Synthetic personal-record population with duplicated individuals.

    Produces ``n_pairs`` individuals with two records each and
    ``n_singletons`` with one, carrying first name, last name, and birth
    day/month/year. Names come from finite Zipf-weighted pools so distinct
    individuals sometimes collide, and the second record of each pair gets
    an independent per-field chance of a typo. ``corruption`` is either one
    rate for every field or a per-field dict.
    """
    if isinstance(corruption, dict):
        rates = {f: float(corruption.get(f, 0.0)) for f in RLDATA_FIELDS}
    else:
        rates = {f: float(corruption) for f in RLDATA_FIELDS}
    for f, rate in rates.items():
        if not (0.0 <= rate <= 1.0):
            raise ValueError(f"corruption rate for {f!r} outside [0,1]: {rate}")

    rng = np.random.default_rng(rng_seed)
    firsts = _name_pool(rng, n_first, (2, 3))
    lasts = _name_pool(rng, n_last, (2, 4))
    p_first = _zipf_probs(n_first, zipf_s)
    p_last = _zipf_probs(n_last, zipf_s)

    n_entities = n_pairs + n_singletons
    ent_first = rng.choice(n_first, size=n_entities, p=p_first)
    ent_last = rng.choice(n_last, size=n_entities, p=p_last)
    ent_day = rng.integers(1, 29, size=n_entities)
    ent_month = rng.integers(1, 13, size=n_entities)
    ent_year = rng.integers(year_range[0], year_range[1], size=n_entities)

    pairs = []
    rows = []
    for e in range(n_entities):
        cid = f"e{e:05d}"
        base = {
            "first": firsts[int(ent_first[e])],
            "last": lasts[int(ent_last[e])],
            "birth_day": str(int(ent_day[e])),
            "birth_month": str(int(ent_month[e])),
            "birth_year": str(int(ent_year[e])),
        }
        copies = 2 if e < n_pairs else 1
        for dup in range(1, copies + 1):
            rid = f"{cid}-{dup}"
            fields = dict(base)
            if dup > 1:
                for f in RLDATA_FIELDS:
                    if rng.random() < rates[f]:
                        fields[f] = _typo(rng, fields[f])
            pairs.append((rid, cid))
            rows.append((rid, f"{fields['first']} {fields['last']}", fields))
    truth = Clustering.from_pairs(pairs)
    attrs = AttributeTable.from_rows(rows)
    return truth, attrs


def all_but_one_match(attrs: AttributeTable, exact: bool = False) -> Clustering:
    """Link records that agree on at least 4 of the 5 personal fields.

    Predicted clusters are the connected components of the link graph. Two
    records agree on >= 4 of 5 fields exactly when they share one of the
    five leave-one-field-out signatures, so grouping by those signatures
    finds every qualifying pair without materializing record pairs;
    ``exact=True`` instead compares all pairs directly (slow, used for
    cross-checking).
    """
    records = list(attrs.labels)
    fields = {}
    for rid in records:
        row = attrs.extra.get(rid, {})
        missing = [f for f in RLDATA_FIELDS if f not in row]
        if missing:
            raise ValueError(f"record {rid!r} is missing fields: {', '.join(missing)}")
        fields[rid] = tuple(row[f] for f in RLDATA_FIELDS)

    parent = {rid: rid for rid in records}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra

    if exact:
        for i, a in enumerate(records):
            fa = fields[a]
            for b in records[i + 1 :]:
                agree = sum(x == y for x, y in zip(fa, fields[b]))
                if agree >= 4:
                    union(a, b)
    else:
        for drop in range(len(RLDATA_FIELDS)):
            groups: dict[tuple, str] = {}
            for rid in records:
                sig = fields[rid][:drop] + fields[rid][drop + 1 :]
                anchor = groups.get(sig)
                if anchor is None:
                    groups[sig] = rid
                else:
                    union(anchor, rid)

    return Clustering.from_pairs((rid, f"m-{find(rid)}") for rid in records)


def rldata_from_csv(path: str | Path) -> tuple[Clustering, AttributeTable]:
    """Load the original RLData10000-style CSV if the user supplies it.

    Expected columns: fname_c1, lname_c1, by, bm, bd and an identity column
    (``ent_id`` or ``identity``); a leading row-number column is tolerated.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        field_map = {
            "first": ["fname_c1", "fname", "first"],
            "last": ["lname_c1", "lname", "last"],
            "birth_year": ["by", "birth_year"],
            "birth_month": ["bm", "birth_month"],
            "birth_day": ["bd", "birth_day"],
        }
        id_candidates = ["ent_id", "identity", "identity.RLdata10000", "true_id"]
        pairs = []
        rows = []
        for i, raw in enumerate(reader, 1):
            rid = f"rl{i:05d}"
            ent = next((raw[c] for c in id_candidates if c in raw and raw[c] != ""), None)
            if ent is None:
                raise ValueError(f"{path}: no identity column found (tried {', '.join(id_candidates)})")
            fields = {}
            for f, cands in field_map.items():
                val = next((raw[c] for c in cands if c in raw and raw[c] is not None), None)
                if val is None:
                    raise ValueError(f"{path}: missing column for field {f!r}")
                fields[f] = val.strip()
            pairs.append((rid, f"ent-{ent}"))
            rows.append((rid, f"{fields['first']} {fields['last']}", fields))
    truth = Clustering.from_pairs(pairs)
    attrs = AttributeTable.from_rows(rows)
    return truth, attrs


# -- synthetic truths and perturbed predictions -------------------------------


def clustering_from_sizes(sizes: Sequence[int], prefix: str = "t") -> Clustering:
    """Clustering with the given cluster sizes; ids are synthesized."""
    pairs = []
    r = 0
    for i, s in enumerate(sizes):
        if s < 1:
            raise ValueError(f"cluster size must be >= 1, got {s}")
        for _ in range(s):
            pairs.append((f"r{r:06d}", f"{prefix}{i:05d}"))
            r += 1
    return Clustering.from_pairs(pairs)


def heavy_tail_sizes(n_clusters: int, rng_seed: int, alpha: float = 2.0, max_size: int = 150) -> list[int]:
    """Zipf-tailed cluster sizes clipped to a maximum."""
    rng = np.random.default_rng(rng_seed)
    sizes = rng.zipf(alpha, size=n_clusters)
    return [int(min(s, max_size)) for s in sizes]


def random_clustering(n_records: int, max_clusters: int, rng_seed: int) -> Clustering:
    """Uniform random partition: each record picks one of <= max_clusters."""
    if n_records < 1 or max_clusters < 1:
        raise ValueError("need n_records >= 1 and max_clusters >= 1")
    rng = np.random.default_rng(rng_seed)
    assign = rng.integers(0, max_clusters, size=n_records)
    return Clustering.from_pairs(
        (f"r{i:06d}", f"t{int(c):05d}") for i, c in enumerate(assign)
    )


def perturb_clustering(
    truth: Clustering,
    rng_seed: int,
    split_prob: float = 0.1,
    merge_prob: float = 0.1,
    move_prob: float = 0.02,
) -> Clustering:
    """Randomly split, merge, and move to fabricate an imperfect prediction."""
    rng = np.random.default_rng(rng_seed)
    groups: list[list[str]] = [sorted(c) for c in truth.clusters.values()]

    split_out: list[list[str]] = []
    for g in groups:
        if len(g) >= 2 and rng.random() < split_prob:
            cut = int(rng.integers(1, len(g)))
            order = list(rng.permutation(len(g)))
            split_out.append([g[i] for i in order[:cut]])
            split_out.append([g[i] for i in order[cut:]])
        else:
            split_out.append(g)

    merged: list[list[str]] = []
    pending: list[str] | None = None
    order = list(rng.permutation(len(split_out)))
    for idx in order:
        g = split_out[idx]
        if pending is not None:
            merged.append(pending + g)
            pending = None
        elif rng.random() < merge_prob:
            pending = g
        else:
            merged.append(g)
    if pending is not None:
        merged.append(pending)

    if move_prob > 0 and len(merged) >= 2:
        moves: list[tuple[str, int]] = []
        for gi, g in enumerate(merged):
            for r in g:
                if rng.random() < move_prob:
                    target = int(rng.integers(len(merged)))
                    if target != gi:
                        moves.append((r, target))
        moved = {r for r, _ in moves}
        merged = [[r for r in g if r not in moved] for g in merged]
        for r, target in moves:
            merged[target].append(r)
        merged = [g for g in merged if g]

    pairs = []
    for gi, g in enumerate(merged):
        for r in g:
            pairs.append((r, f"p{gi:05d}"))
    return Clustering.from_pairs(pairs)


def merge_largest(truth: Clustering, n_merges: int) -> Clustering:
    """Prediction that pairwise-merges the largest true clusters.

    Concentrates overclustering errors in big clusters, the regime where
    uniform cluster sampling goes blind.
    """
    ordered = sorted(truth.clusters.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    pairs = []
    merged = 0
    i = 0
    while i < len(ordered):
        cid, members = ordered[i]
        if merged < n_merges and i + 1 < len(ordered) and len(ordered[i + 1][1]) >= 2:
            other_id, other = ordered[i + 1]
            group = f"p{i:05d}"
            for r in members | other:
                pairs.append((r, group))
            i += 2
            merged += 1
        else:
            for r in members:
                pairs.append((r, f"p{i:05d}"))
            i += 1
    return Clustering.from_pairs(pairs)


# -- Monte-Carlo harness ------------------------------------------------------


@dataclass(frozen=True)
class SimCell:
    """Aggregated results for one (metric, design, sample size) cell."""

    metric: str
    design: str
    size: int
    truth_value: float
    bias: float
    rmse: float
    coverage_2: float
    mean_std: float
    reps: int
    n_failed: int
    failed_reps: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "design": self.design,
            "size": self.size,
            "truth": self.truth_value,
            "bias": self.bias,
            "rmse": self.rmse,
            "coverage_2": self.coverage_2,
            "mean_std": self.mean_std,
            "reps": self.reps,
            "n_failed": self.n_failed,
            "failed_reps": list(self.failed_reps),
        }


@dataclass(frozen=True)
class SimReport:
    cells: tuple[SimCell, ...]
    config: dict

    def cell(self, metric: str, design: str, size: int) -> SimCell:
        for c in self.cells:
            if c.metric == metric and c.design == design and c.size == size:
                return c
        raise KeyError(f"no cell for ({metric}, {design}, {size})")

    def to_dict(self) -> dict:
        return {"v": 1, "config": self.config, "cells": [c.to_dict() for c in self.cells]}

    def to_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    def to_csv(self, path: str | Path) -> None:
        """Tidy table: one row per metric x design x size."""
        cols = ["metric", "design", "size", "truth", "bias", "rmse", "coverage_2", "mean_std", "reps", "n_failed"]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(cols)
            for c in self.cells:
                d = c.to_dict()
                writer.writerow([repr(d[k]) if isinstance(d[k], float) else d[k] for k in cols])


def _error_rows(truth: Clustering, prediction: Clustering) -> list[ClusterErrors]:
    return [
        cluster_errors(members, prediction, cluster_id=cid)
        for cid, members in truth.clusters.items()
    ]


class _CellRunner:
    """Vectorized replication loop for one (design, size) cell."""

    def __init__(
        self,
        rows: list[ClusterErrors],
        targets: dict[str, RatioTarget],
        rec_cluster: np.ndarray,
        sizes: np.ndarray,
        master_seed: int,
    ) -> None:
        self.rec_cluster = rec_cluster
        self.sizes = sizes
        self.n_records = int(rec_cluster.shape[0])
        self.n_clusters = int(sizes.shape[0])
        self.master_seed = master_seed
        self.targets = targets
        self.f0 = {
            m: np.array([t.f(r) for r in rows], dtype=float) for m, t in targets.items()
        }
        self.g0 = {
            m: np.array([t.g(r) for r in rows], dtype=float) for m, t in targets.items()
        }

    def run_rep(self, rep: int, d_idx: int, s_idx: int, design: str, k: int) -> dict[str, tuple]:
        rng = np.random.default_rng([self.master_seed ^ rep, d_idx, s_idx])
        if design == DESIGN_PPS:
            recs = rng.integers(0, self.n_records, size=k)
            idx = self.rec_cluster[recs]
            p = self.sizes[idx] / self.n_records
        elif design == DESIGN_UNIFORM:
            idx = rng.integers(0, self.n_clusters, size=k)
            p = np.ones(k)
        else:
            raise ValueError(f"unknown design {design!r}")
        out = {}
        for m, t in self.targets.items():
            f = self.f0[m][idx] / p
            g = self.g0[m][idx] / p
            try:
                point, std, _ = ratio_point_std(f, g)
                if t.complement:
                    point = 1.0 - point
                out[m] = (point, std)
            except EstimationError:
                out[m] = (None, None)
        return out


def run_simulation(
    truth: Clustering,
    prediction: Clustering,
    designs: Sequence[str] = (DESIGN_PPS,),
    sizes: Sequence[int] = (200, 400, 800),
    reps: int = 1000,
    metrics: Sequence[str] = ("pairwise_precision", "pairwise_recall"),
    rng_seed: int = 0,
    beta: float = 1.0,
    checkpoint_path: str | Path | None = None,
    workers: int = 1,
) -> SimReport:
    """Replicated sample-and-estimate study against a known truth.

    Per cell (metric x design x size) reports bias, RMSE, coverage of the
    point +/- 2 std interval, and the mean estimated std. Replications that
    fail (degenerate samples) are excluded from bias/RMSE with a counted
    flag and counted as non-covering. Deterministic given the seed; a
    checkpoint file written every 100 reps makes long runs resumable.
    """
    if rng_seed < 0:
        raise ValueError("rng_seed must be nonnegative")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    oracle = oracle_metrics(truth, prediction)
    targets = {
        m: build_target(m, beta=beta, n_records=oracle.n_records, n_pred_clusters=oracle.n_pred_clusters)
        for m in metrics
    }

    cluster_ids = list(truth.clusters)
    cluster_index = {cid: i for i, cid in enumerate(cluster_ids)}
    rows = _error_rows(truth, prediction)
    sizes_arr = np.array([len(truth.clusters[cid]) for cid in cluster_ids], dtype=float)
    rec_cluster = np.empty(truth.universe_size, dtype=np.int64)
    for j, r in enumerate(truth.membership):
        rec_cluster[j] = cluster_index[truth.membership[r]]

    runner = _CellRunner(rows, targets, rec_cluster, sizes_arr, rng_seed)

    config = {
        "designs": list(designs),
        "sizes": list(sizes),
        "reps": reps,
        "metrics": list(metrics),
        "seed": rng_seed,
        "beta": beta,
        "n_records": oracle.n_records,
        "n_true_clusters": oracle.n_true_clusters,
        "n_pred_clusters": oracle.n_pred_clusters,
    }

    state = _load_checkpoint(checkpoint_path, config)

    checkpoint_lock = threading.Lock()

    def run_cell(d_idx: int, s_idx: int) -> dict[str, list]:
        design, k = designs[d_idx], sizes[s_idx]
        key = f"{design}|{k}"
        cell_state = state["cells"].setdefault(
            key, {m: {"points": [], "stds": []} for m in metrics}
        )
        # a checkpoint written mid-rep can leave metric lists misaligned; resume
        # from the shortest one
        done = min(len(cell_state[m]["points"]) for m in metrics)
        for m in metrics:
            cell_state[m]["points"] = cell_state[m]["points"][:done]
            cell_state[m]["stds"] = cell_state[m]["stds"][:done]
        for rep in range(done, reps):
            result = runner.run_rep(rep, d_idx, s_idx, design, k)
            for m in metrics:
                point, std = result[m]
                cell_state[m]["points"].append(point)
                cell_state[m]["stds"].append(std)
            if checkpoint_path is not None and (rep + 1) % 100 == 0:
                with checkpoint_lock:
                    _save_checkpoint(checkpoint_path, config, state)
        return cell_state

    jobs = [(d, s) for d in range(len(designs)) for s in range(len(sizes))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {ds: pool.submit(run_cell, *ds) for ds in jobs}
            results = {ds: fut.result() for ds, fut in futures.items()}
    else:
        results = {ds: run_cell(*ds) for ds in jobs}

    if checkpoint_path is not None:
        _save_checkpoint(checkpoint_path, config, state)

    cells = []
    for d_idx, s_idx in jobs:
        design, k = designs[d_idx], sizes[s_idx]
        for m in metrics:
            truth_value = oracle.value(m, beta)
            points = results[(d_idx, s_idx)][m]["points"]
            stds = results[(d_idx, s_idx)][m]["stds"]
            ok = [(p, s) for p, s in zip(points, stds) if p is not None]
            failed = tuple(i for i, p in enumerate(points) if p is None)
            covered = sum(1 for p, s in ok if abs(p - truth_value) <= 2.0 * s)
            if ok:
                pts = np.array([p for p, _ in ok])
                bias = float(pts.mean() - truth_value)
                rmse = float(np.sqrt(np.mean((pts - truth_value) ** 2)))
                mean_std = float(np.mean([s for _, s in ok]))
            else:
                bias = rmse = mean_std = float("nan")
            cells.append(
                SimCell(
                    metric=m,
                    design=design,
                    size=k,
                    truth_value=truth_value,
                    bias=bias,
                    rmse=rmse,
                    coverage_2=covered / reps,
                    mean_std=mean_std,
                    reps=reps,
                    n_failed=len(failed),
                    failed_reps=failed,
                )
            )
    return SimReport(cells=tuple(cells), config=config)


def _load_checkpoint(path: str | Path | None, config: dict) -> dict:
    if path is None or not Path(path).exists():
        return {"config": config, "cells": {}}
    with open(path, "r", encoding="utf-8") as fh:
        state = json.load(fh)
    # rep count may grow between runs (per-rep streams are independent);
    # everything else must match for the saved draws to be reusable
    saved = {k: v for k, v in state.get("config", {}).items() if k != "reps"}
    wanted = {k: v for k, v in config.items() if k != "reps"}
    if saved != wanted:
        raise ValueError(
            f"checkpoint {path} was created with a different configuration; "
            "remove it or match the original parameters"
        )
    return state


def _save_checkpoint(path: str | Path, config: dict, state: dict) -> None:
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump({"config": config, "cells": state["cells"]}, fh)
    tmp.replace(path)
