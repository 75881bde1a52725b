"""Single-threaded timing worker for the million-record performance check.

Fabricates a 10^6-record prediction, then measures the time to build the
clustering, compute the summary statistics, and produce the error table for
a 400-cluster benchmark. Prints one JSON object on stdout.
"""

import json
import resource
import sys
import time

import numpy as np


def main() -> None:
    sizes = np.concatenate(
        [
            np.ones(550_000, dtype=np.int64),
            np.full(150_000, 2, dtype=np.int64),
            np.full(30_000, 5, dtype=np.int64),
        ]
    )
    rng = np.random.default_rng(0)
    rng.shuffle(sizes)
    n = int(sizes.sum())
    cluster_idx = np.repeat(np.arange(sizes.size), sizes)
    records = [f"r{i}" for i in range(n)]
    cluster_ids = [f"c{i}" for i in range(sizes.size)]
    pairs = [(records[i], cluster_ids[cluster_idx[i]]) for i in range(n)]

    from linkeval import Clustering, compute_summary, error_table
    from linkeval.error_metrics import ERROR_TABLE_COLUMNS
    from linkeval.sampling import ClusterDraw, ClusterSample

    t0 = time.perf_counter()
    prediction = Clustering.from_pairs(pairs)
    report = compute_summary(prediction)

    # 400-cluster benchmark with some records swapped across sampled clusters
    rng2 = np.random.default_rng(1)
    chosen = rng2.choice(sizes.size, size=400, replace=False)
    members = [set(prediction.clusters[f"c{i}"]) for i in chosen]
    for j in range(0, 398, 2):
        a, b = members[j], members[j + 1]
        if len(a) > 1:
            moved = min(a)
            a.discard(moved)
            b.add(moved)
    draws = tuple(
        ClusterDraw(cluster_id=f"b{j:04d}", members=frozenset(m), p_c=len(m) / n)
        for j, m in enumerate(members)
        if m
    )
    table = error_table(ClusterSample(draws=draws), prediction)
    elapsed = time.perf_counter() - t0

    maxrss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(
        json.dumps(
            {
                "n_records": n,
                "n_clusters": prediction.n_clusters,
                "n_rows": len(table),
                "columns": len(ERROR_TABLE_COLUMNS),
                "avg_cluster_size": report.avg_cluster_size,
                "elapsed_s": elapsed,
                "maxrss_mb": maxrss_mb,
            }
        )
    )


if __name__ == "__main__":
    sys.exit(main())
