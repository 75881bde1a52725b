"""The human labeling workflow, scripted: from seed records to a benchmark.

A session samples seed records, freezes each seed's predicted cluster as a
starting point, and the labeler edits it: removals for wrongly included
records, additions (found via typo-tolerant search) for missing ones. QC
validates the edits, finalize computes the design weight, and the export is
a reusable weighted benchmark that feeds the estimators. Every step is one
journal event, so replaying the journal reproduces the session exactly.
"""

import json
import tempfile
from pathlib import Path

from linkeval import (
    Clustering,
    AttributeTable,
    TokenIndex,
    create_session,
    error_table,
    export_benchmark,
    pairwise_precision,
    qc_check,
)
from linkeval.labeling import DIRECTION_OVER, Journal, audit_frequencies, replay_events

prediction = Clustering.from_pairs(
    [("r1", "x"), ("r2", "x"), ("r3", "y"), ("r4", "y"), ("r5", "y")]
)
attrs = AttributeTable.from_rows(
    [
        ("r1", "Lutgard De Jonghe", {}),
        ("r2", "L. C. De Jonghe", {}),
        ("r3", "Lutgard C. De Jonghe", {}),
        ("r4", "Stuart Lindsay", {}),
        ("r5", "Stuart Lindsay", {}),
    ]
)

workdir = Path(tempfile.mkdtemp())
journal_path = workdir / "session.jsonl"
session = create_session(
    prediction, attrs, design="pps_record", k=2, rng_seed=2, journal=Journal(journal_path)
)
print(f"created session {session.session_id} with {len(session.tasks)} tasks")
for task in session.tasks.values():
    print(f"  {task.task_id}: seed {task.seed_record}, predicted cluster {sorted(task.predicted_cluster)}")

index = TokenIndex.build(attrs)

print("\n== task 1: the seed's predicted cluster holds a stranger ==")
session.claim_task("t0001", "ann")
session.apply_edit("t0001", remove="r3", labeler="ann")
print("removed r3 (different person merged in); resolved:", sorted(session.tasks["t0001"].resolved_cluster()))

print("\n== task 2: search finds the record the prediction split off ==")
session.claim_task("t0002", "ann")
hits = index.search("Lutgard Jonhge")  # note the typo; the index tolerates one edit
print("search 'Lutgard Jonhge' ->", [rid for rid, _ in hits])
session.apply_edit("t0002", add="r3", labeler="ann")

print("\n== QC, finalize, export ==")
flags = qc_check(session, attrs=attrs)
print(f"QC flags: {[f.kind for f in flags] or 'none'}")
for tid in ("t0001", "t0002"):
    resolved = session.finalize(tid, labeler="ann")
    print(f"finalized {tid}: {sorted(resolved)} with weight p_c={session.tasks[tid].p_c}")

benchmark = export_benchmark(session)
bench_path = workdir / "benchmark.jsonl"
benchmark.to_jsonl(bench_path)
print(f"exported {len(benchmark.draws)} weighted clusters to {bench_path}")

print("\n== the benchmark drives estimation ==")
table = error_table(benchmark.to_cluster_sample(), prediction)
est = pairwise_precision(table.rows)
print(f"pairwise precision estimate from the labeled sample: {est.point:.4f} (k={est.k})")

print("\n== audit tagging the error cause ==")
tag = session.record_tag("t0001", DIRECTION_OVER, "same name", prediction=prediction,
                         note="two De Jonghes merged")
print(f"tagged cluster {tag.cluster_id}: {tag.direction} / {tag.label}")
print("weighted cause frequencies:", json.dumps(audit_frequencies(session.tags)))

print("\n== the journal is the session ==")
replayed = replay_events(Journal.read_events(journal_path))
identical = json.dumps(replayed.to_state(), sort_keys=True) == json.dumps(session.to_state(), sort_keys=True)
print(f"replaying {journal_path.name} reproduces the live state exactly: {identical}")
