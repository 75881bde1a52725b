"""Human labeling workflow: seed records, cluster edits, QC, and export.

A labeling session starts from sampled seed records. Each task freezes the
seed's predicted cluster as a starting point; the labeler removes wrongly
included records (the removal set) and adds missing ones (the addition
set), and the finalized true cluster is ``(predicted \\ removals) | additions``.

Sessions are event-sourced: every state change is exactly one JSON-lines
journal event, and replaying the journal reconstructs the session state
exactly. Periodic snapshots bound replay cost for long sessions.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .error_metrics import ClusterErrors, cluster_errors
from .model import AttributeTable, Clustering, RecordId
from .sampling import (
    DESIGN_PPS,
    DESIGN_UNIFORM,
    ClusterDraw,
    ClusterSample,
)
from .search import tokenize

TASK_PENDING = "pending"
TASK_IN_PROGRESS = "in_progress"
TASK_FINALIZED = "finalized"

DIRECTION_OVER = "overclustering"
DIRECTION_UNDER = "underclustering"

DEFAULT_LEASE_SECONDS = 15 * 60

DEFAULT_AUDIT_LABELS = (
    "same name",
    "middle name",
    "nickname",
    "last name order",
    "typo in name",
    "invalid character",
    "topic dissimilarity",
    "assignee typo",
    "labeling error",
    "unknown",
)


class LeaseError(RuntimeError):
    """Another labeler holds the task, or the caller's lease expired."""


class QCViolation(ValueError):
    """An edit or finalize attempt breaks a hard labeling constraint."""


@dataclass
class LabelingTask:
    task_id: str
    seed_record: RecordId
    predicted_cluster: frozenset[RecordId]
    a_r: set[RecordId] = field(default_factory=set)
    b_r: set[RecordId] = field(default_factory=set)
    status: str = TASK_PENDING
    labeler: str | None = None
    lease_expires: float | None = None
    p_c: float | None = None
    created_at: float = 0.0
    updated_at: float = 0.0

    def resolved_cluster(self) -> frozenset[RecordId]:
        return (self.predicted_cluster - self.a_r) | self.b_r

    def to_state(self) -> dict:
        return {
            "task_id": self.task_id,
            "seed_record": self.seed_record,
            "predicted_cluster": sorted(self.predicted_cluster),
            "a_r": sorted(self.a_r),
            "b_r": sorted(self.b_r),
            "status": self.status,
            "labeler": self.labeler,
            "lease_expires": self.lease_expires,
            "p_c": self.p_c,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


@dataclass(frozen=True)
class QCFlag:
    task_id: str
    severity: str  # "hard" | "soft"
    kind: str
    record: RecordId | None
    message: str

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "severity": self.severity,
            "kind": self.kind,
            "record": self.record,
            "message": self.message,
        }


@dataclass(frozen=True)
class AuditTag:
    cluster_id: str
    direction: str
    label: str
    note: str
    p_c: float


@dataclass(frozen=True)
class BenchmarkDraw:
    cluster_id: str
    seed_record: RecordId | None
    members: frozenset[RecordId]
    p_c: float
    finalized_at: float
    labeler: str | None


@dataclass(frozen=True)
class BenchmarkSet:
    """Finalized, weighted ground-truth clusters exported from a session.

    Draws keep with-replacement multiplicity; the distinct clusters are
    pairwise disjoint. Serialized as JSON lines, one object per draw.
    """

    draws: tuple[BenchmarkDraw, ...]
    design: str
    rng_seed: int | None
    prediction_snapshot: str | None = None

    def clusters(self) -> dict[str, frozenset[RecordId]]:
        return {d.cluster_id: d.members for d in self.draws}

    def to_cluster_sample(self) -> ClusterSample:
        return ClusterSample(
            draws=tuple(
                ClusterDraw(
                    cluster_id=d.cluster_id,
                    members=d.members,
                    p_c=d.p_c,
                    seed_record=d.seed_record,
                )
                for d in self.draws
            ),
            design=self.design,
            rng_seed=self.rng_seed,
        )

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for d in self.draws:
                fh.write(
                    json.dumps(
                        {
                            "v": 1,
                            "seed_record": d.seed_record,
                            "members": sorted(d.members),
                            "p_c": d.p_c,
                            "design": self.design,
                            "finalized_at": d.finalized_at,
                            "labeler": d.labeler,
                        },
                        sort_keys=True,
                    )
                )
                fh.write("\n")

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "BenchmarkSet":
        draws = []
        design = DESIGN_PPS
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                members = frozenset(obj["members"])
                draws.append(
                    BenchmarkDraw(
                        cluster_id=benchmark_cluster_id(members),
                        seed_record=obj.get("seed_record"),
                        members=members,
                        p_c=float(obj["p_c"]),
                        finalized_at=float(obj.get("finalized_at", 0.0)),
                        labeler=obj.get("labeler"),
                    )
                )
                design = obj.get("design", design)
        if not draws:
            raise ValueError(f"{path}: empty benchmark file")
        return cls(draws=tuple(draws), design=design, rng_seed=None)


def benchmark_cluster_id(members: Iterable[RecordId]) -> str:
    """Stable cluster id derived from the membership itself."""
    return "b-" + min(members)


# -- journal ------------------------------------------------------------------


class Journal:
    """Append-only JSON-lines event log with periodic state snapshots."""

    def __init__(self, path: str | Path, snapshot_every: int = 100) -> None:
        self.path = Path(path)
        self.snapshot_path = self.path.with_suffix(".snapshot.json")
        self.snapshot_every = snapshot_every
        self._lock = threading.Lock()
        self._count = 0
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                self._count = sum(1 for line in fh if line.strip())

    def append(self, event: dict, session: "LabelingSession | None" = None) -> None:
        with self._lock:
            with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(json.dumps(event, sort_keys=True))
                fh.write("\n")
                fh.flush()
            self._count += 1
            if session is not None and self._count % self.snapshot_every == 0:
                self._write_snapshot(session)

    def _write_snapshot(self, session: "LabelingSession") -> None:
        tmp = self.snapshot_path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"v": 1, "events": self._count, "state": session.to_state()}, fh, sort_keys=True)
        tmp.replace(self.snapshot_path)

    @staticmethod
    def read_events(path: str | Path) -> list[dict]:
        events = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        return events


# -- session ------------------------------------------------------------------


class LabelingSession:
    """Mutable state of one labeling pass, event-sourced through a journal.

    All mutations validate, build a single event, apply it to in-memory
    state, and append it to the journal (when one is attached), in that
    order. :meth:`apply_event` is the only place state actually changes, so
    replays and live sessions cannot diverge.
    """

    def __init__(self, journal: Journal | None = None) -> None:
        self.session_id: str = ""
        self.design: str = DESIGN_PPS
        self.rng_seed: int | None = None
        self.universe_size: int = 0
        self.prediction_snapshot: str | None = None
        self.created_at: float = 0.0
        self.tasks: dict[str, LabelingTask] = {}
        self.tags: list[AuditTag] = []
        self.journal = journal

    # -- event plumbing ------------------------------------------------------

    def _emit(self, event: dict) -> None:
        self.apply_event(event)
        if self.journal is not None:
            self.journal.append(event, session=self)

    def apply_event(self, event: dict) -> None:
        kind = event["type"]
        data = event["data"]
        if kind == "session_created":
            self.session_id = data["session_id"]
            self.design = data["design"]
            self.rng_seed = data["rng_seed"]
            self.universe_size = data["universe_size"]
            self.prediction_snapshot = data.get("prediction_snapshot")
            self.created_at = data["ts"]
        elif kind == "task_created":
            task = LabelingTask(
                task_id=data["task_id"],
                seed_record=data["seed_record"],
                predicted_cluster=frozenset(data["predicted_cluster"]),
                p_c=data.get("p_c"),
                created_at=data["ts"],
                updated_at=data["ts"],
            )
            self.tasks[task.task_id] = task
        elif kind == "task_imported":
            task = LabelingTask(
                task_id=data["task_id"],
                seed_record=data["seed_record"],
                predicted_cluster=frozenset(data["predicted_cluster"]),
                a_r=set(data["a_r"]),
                b_r=set(data["b_r"]),
                status=TASK_IN_PROGRESS,
                p_c=data.get("p_c"),
                created_at=data["ts"],
                updated_at=data["ts"],
            )
            self.tasks[task.task_id] = task
        elif kind == "task_claimed":
            task = self.tasks[data["task_id"]]
            task.status = TASK_IN_PROGRESS
            task.labeler = data["labeler"]
            task.lease_expires = data["lease_expires"]
            task.updated_at = data["ts"]
        elif kind == "edit_applied":
            task = self.tasks[data["task_id"]]
            op, record = data["op"], data["record"]
            if op == "remove":
                task.a_r.add(record)
            elif op == "add":
                task.b_r.add(record)
            elif op == "unremove":
                task.a_r.discard(record)
            elif op == "unadd":
                task.b_r.discard(record)
            else:
                raise ValueError(f"unknown edit op {op!r}")
            task.updated_at = data["ts"]
        elif kind == "task_finalized":
            task = self.tasks[data["task_id"]]
            task.status = TASK_FINALIZED
            task.p_c = data["p_c"]
            task.lease_expires = None
            task.updated_at = data["ts"]
        elif kind == "tag_recorded":
            self.tags.append(
                AuditTag(
                    cluster_id=data["cluster_id"],
                    direction=data["direction"],
                    label=data["label"],
                    note=data["note"],
                    p_c=data["p_c"],
                )
            )
        else:
            raise ValueError(f"unknown journal event type {kind!r}")

    def to_state(self) -> dict:
        return {
            "session_id": self.session_id,
            "design": self.design,
            "rng_seed": self.rng_seed,
            "universe_size": self.universe_size,
            "prediction_snapshot": self.prediction_snapshot,
            "created_at": self.created_at,
            "tasks": [self.tasks[tid].to_state() for tid in sorted(self.tasks)],
            "tags": [
                {
                    "cluster_id": t.cluster_id,
                    "direction": t.direction,
                    "label": t.label,
                    "note": t.note,
                    "p_c": t.p_c,
                }
                for t in self.tags
            ],
        }

    # -- task lifecycle -------------------------------------------------------

    def _task(self, task_id: str) -> LabelingTask:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise KeyError(f"unknown task {task_id!r}") from None

    def _check_lease(self, task: LabelingTask, labeler: str, now: float) -> None:
        if task.status == TASK_FINALIZED:
            raise QCViolation(f"task {task.task_id} is already finalized")
        if task.status != TASK_IN_PROGRESS:
            raise LeaseError(f"task {task.task_id} is not claimed; claim it first")
        if task.labeler != labeler:
            if task.lease_expires is not None and now < task.lease_expires:
                raise LeaseError(
                    f"task {task.task_id} is leased to {task.labeler!r} until {task.lease_expires:.0f}"
                )
            raise LeaseError(f"task {task.task_id} lease expired; claim it again")
        if task.lease_expires is not None and now >= task.lease_expires:
            raise LeaseError(f"task {task.task_id} lease expired; claim it again")

    def claim_task(
        self,
        task_id: str,
        labeler: str,
        now: float | None = None,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
    ) -> LabelingTask:
        now = time.time() if now is None else now
        task = self._task(task_id)
        if task.status == TASK_FINALIZED:
            raise QCViolation(f"task {task_id} is already finalized")
        if (
            task.status == TASK_IN_PROGRESS
            and task.labeler not in (None, labeler)
            and task.lease_expires is not None
            and now < task.lease_expires
        ):
            raise LeaseError(
                f"task {task_id} is leased to {task.labeler!r} until {task.lease_expires:.0f}"
            )
        self._emit(
            {
                "v": 1,
                "type": "task_claimed",
                "data": {
                    "task_id": task_id,
                    "labeler": labeler,
                    "lease_expires": now + lease_seconds,
                    "ts": now,
                },
            }
        )
        return task

    def next_task(
        self,
        labeler: str,
        now: float | None = None,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
    ) -> LabelingTask | None:
        """Claim and return the first available pending task, if any."""
        now = time.time() if now is None else now
        for tid in sorted(self.tasks):
            task = self.tasks[tid]
            expired = task.lease_expires is not None and now >= task.lease_expires
            if task.status == TASK_PENDING or (task.status == TASK_IN_PROGRESS and expired):
                return self.claim_task(tid, labeler, now=now, lease_seconds=lease_seconds)
        return None

    def apply_edit(
        self,
        task_id: str,
        add: RecordId | None = None,
        remove: RecordId | None = None,
        labeler: str = "local",
        now: float | None = None,
        revert: bool = False,
    ) -> LabelingTask:
        """Record an addition or a removal on a claimed task.

        Removals stay inside the frozen predicted cluster and never touch
        the seed; additions must come from outside it. Re-applying an edit
        is a journaled no-op; ``revert=True`` withdraws a previous edit.
        """
        now = time.time() if now is None else now
        task = self._task(task_id)
        self._check_lease(task, labeler, now)
        if add is None and remove is None:
            raise ValueError("apply_edit needs add= or remove=")
        events = []
        if remove is not None:
            if remove == task.seed_record:
                raise QCViolation("seed record is immovable")
            if remove not in task.predicted_cluster:
                raise QCViolation(
                    f"record {remove!r} is not in the predicted cluster; only predicted members can be removed"
                )
            events.append(("unremove" if revert else "remove", remove))
        if add is not None:
            if add in task.predicted_cluster:
                raise QCViolation(f"record {add!r} is already inside the predicted cluster")
            events.append(("unadd" if revert else "add", add))
        for op, record in events:
            self._emit(
                {
                    "v": 1,
                    "type": "edit_applied",
                    "data": {"task_id": task_id, "op": op, "record": record, "ts": now},
                }
            )
        return task

    def finalize(
        self,
        task_id: str,
        labeler: str = "local",
        now: float | None = None,
    ) -> frozenset[RecordId]:
        """Freeze the resolved cluster and attach its design weight.

        Requires a clean hard-QC state. Under the record-draw design the
        weight is |resolved|/N, computable only now that the true cluster
        is known; the uniform design froze p_c = 1 at creation.
        """
        now = time.time() if now is None else now
        task = self._task(task_id)
        self._check_lease(task, labeler, now)
        hard = [f for f in qc_task_hard_flags(task) if f.severity == "hard"]
        if hard:
            raise QCViolation(
                f"task {task_id} has hard QC violations: " + "; ".join(f.message for f in hard)
            )
        resolved = task.resolved_cluster()
        if self.design == DESIGN_PPS:
            p_c = len(resolved) / self.universe_size
        elif self.design == DESIGN_UNIFORM:
            p_c = 1.0
        else:
            p_c = task.p_c if task.p_c is not None else 1.0
        self._emit(
            {
                "v": 1,
                "type": "task_finalized",
                "data": {"task_id": task_id, "p_c": p_c, "ts": now},
            }
        )
        return resolved

    def add_imported_task(
        self,
        task_id: str,
        seed_record: RecordId,
        predicted_cluster: Iterable[RecordId],
        a_r: Iterable[RecordId] = (),
        b_r: Iterable[RecordId] = (),
        now: float | None = None,
    ) -> LabelingTask:
        """Load an externally labeled task verbatim (no validation).

        Imported labels are exactly what :func:`qc_check`'s hard flags
        exist for.
        """
        now = time.time() if now is None else now
        self._emit(
            {
                "v": 1,
                "type": "task_imported",
                "data": {
                    "task_id": task_id,
                    "seed_record": seed_record,
                    "predicted_cluster": sorted(predicted_cluster),
                    "a_r": sorted(a_r),
                    "b_r": sorted(b_r),
                    "ts": now,
                },
            }
        )
        return self.tasks[task_id]

    def record_tag(
        self,
        task_id: str,
        direction: str,
        label: str,
        prediction: Clustering,
        note: str = "",
        now: float | None = None,
    ) -> AuditTag:
        """Tag a reviewed cluster with an error-cause label.

        The direction must correspond to a nonzero error of that kind on
        the finalized cluster, measured against the prediction.
        """
        now = time.time() if now is None else now
        task = self._task(task_id)
        if task.status != TASK_FINALIZED:
            raise QCViolation(f"task {task_id} must be finalized before tagging")
        resolved = task.resolved_cluster()
        row = cluster_errors(resolved, prediction, cluster_id=benchmark_cluster_id(resolved), p_c=task.p_c or 1.0)
        tag = record_audit_tag(row, direction, label, note)
        self._emit(
            {
                "v": 1,
                "type": "tag_recorded",
                "data": {
                    "cluster_id": tag.cluster_id,
                    "direction": tag.direction,
                    "label": tag.label,
                    "note": tag.note,
                    "p_c": tag.p_c,
                    "task_id": task_id,
                    "ts": now,
                },
            }
        )
        return tag


# -- session factory / replay --------------------------------------------------


def prediction_snapshot_id(prediction: Clustering) -> str:
    digest = hashlib.sha256()
    for r, c in prediction.membership.items():
        digest.update(r.encode())
        digest.update(b"\x1f")
        digest.update(c.encode())
        digest.update(b"\x1e")
    return digest.hexdigest()[:16]


def create_session(
    prediction: Clustering,
    attrs: AttributeTable | None,
    design: str,
    k: int,
    rng_seed: int,
    journal: Journal | None = None,
    session_id: str | None = None,
    now: float | None = None,
) -> LabelingSession:
    """Create k labeling tasks from sampled seed records.

    ``pps_record`` draws k records uniformly with replacement;
    ``uniform_cluster`` draws k predicted clusters uniformly and seeds each
    task with one member. Each task freezes the seed's current predicted
    cluster as the starting point.
    """
    if k < 1:
        raise ValueError(f"number of tasks must be >= 1, got {k}")
    if design not in (DESIGN_PPS, DESIGN_UNIFORM):
        raise ValueError(f"unknown labeling design {design!r}")
    now = time.time() if now is None else now
    rng = np.random.default_rng(rng_seed)
    session = LabelingSession(journal=journal)
    sid = session_id or f"s{rng_seed:08x}-{int(now)}"
    session._emit(
        {
            "v": 1,
            "type": "session_created",
            "data": {
                "session_id": sid,
                "design": design,
                "rng_seed": rng_seed,
                "universe_size": prediction.universe_size,
                "prediction_snapshot": prediction_snapshot_id(prediction),
                "ts": now,
            },
        }
    )
    if design == DESIGN_PPS:
        records = list(prediction.membership)
        idx = rng.integers(0, len(records), size=k)
        seeds = [records[int(i)] for i in idx]
        weights: list[float | None] = [None] * k  # |true cluster|/N, known at finalize
    else:
        cluster_ids = list(prediction.clusters)
        idx = rng.integers(0, len(cluster_ids), size=k)
        seeds = []
        for i in idx:
            members = sorted(prediction.clusters[cluster_ids[int(i)]])
            seeds.append(members[int(rng.integers(0, len(members)))])
        weights = [1.0] * k
    for t, (seed, p_c) in enumerate(zip(seeds, weights), start=1):
        session._emit(
            {
                "v": 1,
                "type": "task_created",
                "data": {
                    "task_id": f"t{t:04d}",
                    "seed_record": seed,
                    "predicted_cluster": sorted(prediction.clusters[prediction.membership[seed]]),
                    "p_c": p_c,
                    "ts": now,
                },
            }
        )
    return session


def replay_events(events: Iterable[dict]) -> LabelingSession:
    session = LabelingSession(journal=None)
    for event in events:
        session.apply_event(event)
    return session


def load_session(journal_path: str | Path, use_snapshot: bool = True) -> LabelingSession:
    """Rebuild a session from its journal, via the snapshot when present."""
    journal_path = Path(journal_path)
    events = Journal.read_events(journal_path)
    snapshot_path = journal_path.with_suffix(".snapshot.json")
    if use_snapshot and snapshot_path.exists():
        with open(snapshot_path, "r", encoding="utf-8") as fh:
            snap = json.load(fh)
        if snap.get("events", 0) <= len(events):
            session = session_from_state(snap["state"])
            for event in events[snap["events"]:]:
                session.apply_event(event)
            return session
    return replay_events(events)


def session_from_state(state: dict) -> LabelingSession:
    session = LabelingSession(journal=None)
    session.session_id = state["session_id"]
    session.design = state["design"]
    session.rng_seed = state["rng_seed"]
    session.universe_size = state["universe_size"]
    session.prediction_snapshot = state.get("prediction_snapshot")
    session.created_at = state["created_at"]
    for t in state["tasks"]:
        task = LabelingTask(
            task_id=t["task_id"],
            seed_record=t["seed_record"],
            predicted_cluster=frozenset(t["predicted_cluster"]),
            a_r=set(t["a_r"]),
            b_r=set(t["b_r"]),
            status=t["status"],
            labeler=t["labeler"],
            lease_expires=t["lease_expires"],
            p_c=t["p_c"],
            created_at=t["created_at"],
            updated_at=t["updated_at"],
        )
        session.tasks[task.task_id] = task
    for t in state["tags"]:
        session.tags.append(
            AuditTag(
                cluster_id=t["cluster_id"],
                direction=t["direction"],
                label=t["label"],
                note=t["note"],
                p_c=t["p_c"],
            )
        )
    return session


def attach_journal(session: LabelingSession, journal: Journal) -> None:
    session.journal = journal


# -- quality control ------------------------------------------------------------


def qc_task_hard_flags(task: LabelingTask) -> list[QCFlag]:
    flags = []
    stray = task.a_r - task.predicted_cluster
    for r in sorted(stray):
        flags.append(
            QCFlag(
                task_id=task.task_id,
                severity="hard",
                kind="removal-outside-prediction",
                record=r,
                message=f"removal {r!r} is not part of the predicted cluster",
            )
        )
    if task.seed_record in task.a_r:
        flags.append(
            QCFlag(
                task_id=task.task_id,
                severity="hard",
                kind="seed-removed",
                record=task.seed_record,
                message="the seed record was removed; the seed defines the cluster",
            )
        )
    overlap = task.b_r & task.predicted_cluster
    for r in sorted(overlap):
        flags.append(
            QCFlag(
                task_id=task.task_id,
                severity="hard",
                kind="addition-already-inside",
                record=r,
                message=f"addition {r!r} is already in the predicted cluster",
            )
        )
    return flags


def first_token(label: str) -> str:
    """Canonical pluggable blocking key: the first label token."""
    tokens = tokenize(label)
    return tokens[0] if tokens else ""


def qc_check(
    session: LabelingSession,
    attrs: AttributeTable | None = None,
    blocking_key: Callable[[str], str] | None = None,
) -> list[QCFlag]:
    """Hard and soft quality flags over every task of a session.

    Hard flags are invariant violations (impossible through apply_edit,
    present in imported labels). Soft flags mark additions whose label
    shares no token with the seed's label, and, when a blocking key is
    supplied, additions outside the seed's block. Soft flags never block
    anything; they exist to catch typos without overriding the labeler.
    """
    flags: list[QCFlag] = []
    for tid in sorted(session.tasks):
        task = session.tasks[tid]
        flags.extend(qc_task_hard_flags(task))
        if attrs is None:
            continue
        try:
            seed_label = attrs.label_of(task.seed_record)
        except ValueError:
            continue
        seed_tokens = set(tokenize(seed_label))
        for r in sorted(task.b_r):
            if r not in attrs:
                continue
            label = attrs.label_of(r)
            if not (set(tokenize(label)) & seed_tokens):
                flags.append(
                    QCFlag(
                        task_id=tid,
                        severity="soft",
                        kind="no-shared-token",
                        record=r,
                        message=f"addition {r!r} ({label!r}) shares no label token with the seed ({seed_label!r})",
                    )
                )
            if blocking_key is not None and blocking_key(label) != blocking_key(seed_label):
                flags.append(
                    QCFlag(
                        task_id=tid,
                        severity="soft",
                        kind="block-mismatch",
                        record=r,
                        message=f"addition {r!r} ({label!r}) falls outside the seed's block",
                    )
                )
    return flags


# -- export ---------------------------------------------------------------------


def export_benchmark(session: LabelingSession) -> BenchmarkSet:
    """Turn a fully finalized session into a weighted benchmark set.

    Requires every task finalized. Tasks resolving to the identical
    cluster stay as separate draws (with-replacement semantics); clusters
    that overlap without being identical are a labeling conflict and abort
    the export.
    """
    unfinished = [tid for tid in sorted(session.tasks) if session.tasks[tid].status != TASK_FINALIZED]
    if unfinished:
        raise ValueError(f"cannot export: unfinalized tasks: {', '.join(unfinished)}")
    resolved: dict[str, frozenset[RecordId]] = {
        tid: session.tasks[tid].resolved_cluster() for tid in sorted(session.tasks)
    }
    owner: dict[RecordId, str] = {}
    conflicts: list[str] = []
    seen: dict[str, frozenset[RecordId]] = {}
    for tid, members in resolved.items():
        cid = benchmark_cluster_id(members)
        if cid in seen and seen[cid] != members:
            conflicts.append(f"{tid} conflicts with an earlier task on cluster {cid}")
            continue
        for r in sorted(members):
            prev = owner.get(r)
            if prev is not None and resolved[prev] != members:
                conflicts.append(
                    f"record {r!r} belongs to both {prev}'s and {tid}'s resolved clusters, which differ"
                )
        for r in members:
            owner.setdefault(r, tid)
        seen[cid] = members
    if conflicts:
        raise ValueError("benchmark export conflict: " + "; ".join(sorted(set(conflicts))))
    draws = []
    for tid, members in resolved.items():
        task = session.tasks[tid]
        draws.append(
            BenchmarkDraw(
                cluster_id=benchmark_cluster_id(members),
                seed_record=task.seed_record,
                members=members,
                p_c=task.p_c if task.p_c is not None else 1.0,
                finalized_at=task.updated_at,
                labeler=task.labeler,
            )
        )
    return BenchmarkSet(
        draws=tuple(draws),
        design=session.design,
        rng_seed=session.rng_seed,
        prediction_snapshot=session.prediction_snapshot,
    )


# -- audit tags -------------------------------------------------------------------


def record_audit_tag(row: ClusterErrors, direction: str, label: str, note: str = "") -> AuditTag:
    """Validated audit tag for a reviewed cluster's error direction."""
    if direction not in (DIRECTION_OVER, DIRECTION_UNDER):
        raise ValueError(f"direction must be {DIRECTION_OVER!r} or {DIRECTION_UNDER!r}, got {direction!r}")
    if not label:
        raise ValueError("tag label must be non-empty")
    if direction == DIRECTION_OVER and row.oce == 0:
        raise ValueError(
            f"cluster {row.cluster_id!r} has no overclustering error; an {direction} tag does not apply"
        )
    if direction == DIRECTION_UNDER and row.uce == 0:
        raise ValueError(
            f"cluster {row.cluster_id!r} has no underclustering error; an {direction} tag does not apply"
        )
    return AuditTag(cluster_id=row.cluster_id, direction=direction, label=label, note=note, p_c=row.p_c)


def audit_frequencies(tags: Sequence[AuditTag]) -> list[dict]:
    """Inverse-probability-weighted relative label frequencies per direction."""
    weights: dict[str, dict[str, float]] = {}
    for tag in tags:
        weights.setdefault(tag.direction, {})
        weights[tag.direction][tag.label] = weights[tag.direction].get(tag.label, 0.0) + 1.0 / tag.p_c
    out = []
    for direction in sorted(weights):
        total = sum(weights[direction].values())
        for label in sorted(weights[direction]):
            w = weights[direction][label]
            out.append(
                {
                    "direction": direction,
                    "label": label,
                    "weight": w,
                    "frequency": w / total,
                }
            )
    return out


def tags_to_csv(tags: Sequence[AuditTag], path: str | Path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cluster_id", "direction", "label", "note", "p_c"])
        for t in tags:
            writer.writerow([t.cluster_id, t.direction, t.label, t.note, repr(t.p_c)])


def tags_from_csv(path: str | Path) -> list[AuditTag]:
    import csv

    tags = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["cluster_id", "direction", "label", "note", "p_c"]:
            raise ValueError(f"{path}: unexpected tag CSV header {header!r}")
        for row in reader:
            if not row:
                continue
            cid, direction, label, note, p_c = row
            tags.append(AuditTag(cluster_id=cid, direction=direction, label=label, note=note, p_c=float(p_c)))
    return tags
