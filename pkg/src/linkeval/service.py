"""HTTP API over labeling sessions, search, estimates, and summary stats.

A deployment wraps one prediction (plus optional attributes) and a journal
directory. Every mutating endpoint translates to exactly one journal event
through the labeling session, so replaying the journals reproduces service
state; reads are pure. Task leases serialize writers per task, and a static
bearer token (environment variable ``LINKEVAL_TOKEN``) gates access when
set.
"""

from __future__ import annotations

import os
import threading
from pathlib import Path
from typing import Optional

from fastapi import APIRouter, Depends, FastAPI, HTTPException, Query, Request, Response
from pydantic import BaseModel, Field

from .error_metrics import error_table
from .estimators import (
    ALL_METRICS,
    EstimationError,
    build_target,
    ratio_estimate,
)
from .labeling import (
    DEFAULT_LEASE_SECONDS,
    Journal,
    LabelingSession,
    LeaseError,
    QCViolation,
    audit_frequencies,
    create_session,
    export_benchmark,
    load_session,
    qc_check,
)
from .model import AttributeTable, Clustering
from .sampling import DESIGN_PPS
from .search import TokenIndex
from .summary import compute_summary
from . import estimators

TOKEN_ENV_VAR = "LINKEVAL_TOKEN"


class ServiceState:
    """Shared state: the prediction under review plus per-session journals."""

    def __init__(
        self,
        prediction: Clustering,
        attrs: AttributeTable | None,
        journal_dir: str | Path,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
    ) -> None:
        self.prediction = prediction
        self.attrs = attrs
        self.journal_dir = Path(journal_dir)
        self.journal_dir.mkdir(parents=True, exist_ok=True)
        self.lease_seconds = lease_seconds
        self.index = TokenIndex.build(attrs) if attrs is not None else None
        self.lock = threading.Lock()
        self.sessions: dict[str, LabelingSession] = {}
        self._load_existing()

    def _load_existing(self) -> None:
        for path in sorted(self.journal_dir.glob("*.jsonl")):
            session = load_session(path)
            session.journal = Journal(path)
            self.sessions[session.session_id] = session

    def new_session(self, design: str, k: int, seed: int) -> LabelingSession:
        session_id = f"s{len(self.sessions) + 1:04d}-{seed:08x}"
        journal = Journal(self.journal_dir / f"{session_id}.jsonl")
        session = create_session(
            self.prediction,
            self.attrs,
            design=design,
            k=k,
            rng_seed=seed,
            journal=journal,
            session_id=session_id,
        )
        self.sessions[session.session_id] = session
        return session

    def session(self, session_id: str) -> LabelingSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}") from None

    def split_task_handle(self, handle: str) -> tuple[LabelingSession, str]:
        if ":" not in handle:
            raise HTTPException(status_code=404, detail=f"malformed task id {handle!r}; expected <session>:<task>")
        sid, tid = handle.split(":", 1)
        session = self.session(sid)
        if tid not in session.tasks:
            raise HTTPException(status_code=404, detail=f"unknown task {tid!r} in session {sid!r}")
        return session, tid


class SessionCreate(BaseModel):
    design: str = DESIGN_PPS
    k: int = Field(default=10, ge=1)
    seed: Optional[int] = None


class EditBody(BaseModel):
    op: str
    record: str
    labeler: str = "local"


class FinalizeBody(BaseModel):
    labeler: str = "local"


class TagBody(BaseModel):
    direction: str
    label: str
    note: str = ""


def _task_view(state: ServiceState, session: LabelingSession, task_id: str) -> dict:
    task = session.tasks[task_id]
    shown = sorted(task.predicted_cluster | task.b_r)
    records = []
    for rid in shown:
        attrs = state.attrs.attributes_of(rid) if state.attrs is not None and rid in state.attrs else {}
        records.append({"record_id": rid, **attrs})
    return {
        "v": 1,
        "id": f"{session.session_id}:{task.task_id}",
        "session_id": session.session_id,
        "task_id": task.task_id,
        "seed_record": task.seed_record,
        "predicted_cluster": sorted(task.predicted_cluster),
        "a_r": sorted(task.a_r),
        "b_r": sorted(task.b_r),
        "resolved": sorted(task.resolved_cluster()),
        "status": task.status,
        "labeler": task.labeler,
        "lease_expires": task.lease_expires,
        "p_c": task.p_c,
        "records": records,
    }


def _session_view(session: LabelingSession) -> dict:
    n_finalized = sum(1 for t in session.tasks.values() if t.status == "finalized")
    return {
        "v": 1,
        "session_id": session.session_id,
        "design": session.design,
        "rng_seed": session.rng_seed,
        "n_tasks": len(session.tasks),
        "n_finalized": n_finalized,
        "created_at": session.created_at,
        "prediction_snapshot": session.prediction_snapshot,
    }


def create_app(state: ServiceState, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="linkeval service", version="1")
    token = os.environ.get(TOKEN_ENV_VAR)

    def require_auth(request: Request) -> None:
        if not token:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    auth = Depends(require_auth)
    api = APIRouter(dependencies=[auth])

    @api.get("/sessions")
    def list_sessions(limit: int = Query(100, ge=1), offset: int = Query(0, ge=0)) -> dict:
        ids = sorted(state.sessions)
        page = ids[offset : offset + limit]
        return {
            "v": 1,
            "total": len(ids),
            "sessions": [_session_view(state.sessions[sid]) for sid in page],
        }

    @api.post("/sessions")
    def post_session(body: SessionCreate) -> dict:
        seed = body.seed
        if seed is None:
            seed = int.from_bytes(os.urandom(4), "big")
        try:
            with state.lock:
                session = state.new_session(design=body.design, k=body.k, seed=seed)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return _session_view(session)

    @api.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _session_view(state.session(session_id))

    @api.get("/sessions/{session_id}/tasks")
    def list_tasks(
        session_id: str, limit: int = Query(100, ge=1), offset: int = Query(0, ge=0)
    ) -> dict:
        session = state.session(session_id)
        ids = sorted(session.tasks)
        page = ids[offset : offset + limit]
        return {
            "v": 1,
            "total": len(ids),
            "tasks": [_task_view(state, session, tid) for tid in page],
        }

    @api.get("/sessions/{session_id}/tasks/next")
    def next_task(session_id: str, labeler: str = "local") -> dict:
        session = state.session(session_id)
        with state.lock:
            task = session.next_task(labeler, lease_seconds=state.lease_seconds)
        if task is None:
            raise HTTPException(status_code=404, detail="no pending tasks left")
        return _task_view(state, session, task.task_id)

    @api.get("/sessions/{session_id}/qc")
    def session_qc(session_id: str) -> dict:
        session = state.session(session_id)
        flags = qc_check(session, attrs=state.attrs)
        return {"v": 1, "flags": [f.to_dict() for f in flags]}

    @api.get("/sessions/{session_id}/benchmark")
    def session_benchmark(session_id: str) -> dict:
        session = state.session(session_id)
        try:
            benchmark = export_benchmark(session)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {
            "v": 1,
            "design": benchmark.design,
            "draws": [
                {
                    "seed_record": d.seed_record,
                    "members": sorted(d.members),
                    "p_c": d.p_c,
                    "finalized_at": d.finalized_at,
                    "labeler": d.labeler,
                }
                for d in benchmark.draws
            ],
        }

    @api.post("/tasks/{handle}/edits")
    def post_edit(handle: str, body: EditBody) -> dict:
        session, tid = state.split_task_handle(handle)
        revert = body.op in ("unadd", "unremove")
        kwargs = {}
        if body.op in ("add", "unadd"):
            kwargs["add"] = body.record
        elif body.op in ("remove", "unremove"):
            kwargs["remove"] = body.record
        else:
            raise HTTPException(status_code=422, detail=f"unknown edit op {body.op!r}")
        try:
            with state.lock:
                session.apply_edit(tid, labeler=body.labeler, revert=revert, **kwargs)
        except LeaseError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except QCViolation as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return _task_view(state, session, tid)

    @api.post("/tasks/{handle}/claim")
    def post_claim(handle: str, body: FinalizeBody) -> dict:
        session, tid = state.split_task_handle(handle)
        try:
            with state.lock:
                session.claim_task(tid, body.labeler, lease_seconds=state.lease_seconds)
        except LeaseError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except QCViolation as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return _task_view(state, session, tid)

    @api.post("/tasks/{handle}/finalize")
    def post_finalize(handle: str, body: FinalizeBody) -> dict:
        session, tid = state.split_task_handle(handle)
        try:
            with state.lock:
                session.finalize(tid, labeler=body.labeler)
        except LeaseError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except QCViolation as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return _task_view(state, session, tid)

    @api.get("/search")
    def search(q: str, limit: int = Query(20, ge=1)) -> dict:
        if state.index is None or state.attrs is None:
            raise HTTPException(status_code=422, detail="search needs an attribute table; none was loaded")
        try:
            ranked = state.index.search(q, limit=limit)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        results = []
        for rid, score in ranked:
            row = {"record_id": rid, "score": score, **state.attrs.attributes_of(rid)}
            row["predicted_cluster"] = state.prediction.membership.get(rid)
            results.append(row)
        return {"v": 1, "results": results}

    @api.get("/clusters/{handle}/membership-matrix")
    def membership_matrix(handle: str, limit: int = Query(2000, ge=1), offset: int = Query(0, ge=0)) -> dict:
        session, tid = state.split_task_handle(handle)
        task = session.tasks[tid]
        resolved = task.resolved_cluster()
        pred_ids = sorted({state.prediction.membership[r] for r in resolved if r in state.prediction})
        rows = []
        for pid in pred_ids:
            for rid in sorted(state.prediction.clusters[pid]):
                attrs = (
                    state.attrs.attributes_of(rid)
                    if state.attrs is not None and rid in state.attrs
                    else {}
                )
                rows.append(
                    {
                        "record_id": rid,
                        "true_cluster": handle if rid in resolved else "",
                        "predicted_cluster": pid,
                        "attributes": attrs,
                    }
                )
        return {"v": 1, "total": len(rows), "rows": rows[offset : offset + limit]}

    @api.post("/clusters/{handle}/tags")
    def post_tag(handle: str, body: TagBody) -> dict:
        session, tid = state.split_task_handle(handle)
        try:
            with state.lock:
                tag = session.record_tag(
                    tid, body.direction, body.label, prediction=state.prediction, note=body.note
                )
        except QCViolation as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {
            "v": 1,
            "cluster_id": tag.cluster_id,
            "direction": tag.direction,
            "label": tag.label,
            "note": tag.note,
            "p_c": tag.p_c,
        }

    @api.get("/audit-report")
    def audit_report(session: Optional[str] = None) -> dict:
        tags = []
        for sid, sess in sorted(state.sessions.items()):
            if session is not None and sid != session:
                continue
            tags.extend(sess.tags)
        return {"v": 1, "frequencies": audit_frequencies(tags)}

    @api.get("/estimates")
    def estimates(
        session: str,
        metrics: Optional[str] = None,
        beta: float = 1.0,
        clamp: bool = False,
    ) -> Response:
        sess = state.session(session)
        try:
            benchmark = export_benchmark(sess)
            table = error_table(benchmark.to_cluster_sample(), state.prediction)
            names = [m.strip() for m in metrics.split(",")] if metrics else list(ALL_METRICS)
            out = []
            for name in names:
                target = build_target(
                    name,
                    beta=beta,
                    n_records=state.prediction.universe_size,
                    n_pred_clusters=state.prediction.n_clusters,
                )
                est = ratio_estimate(table.rows, target, design=benchmark.design)
                out.append(est.clamped() if clamp else est)
        except (EstimationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        # shared serialization keeps this byte-identical with the CLI output
        return Response(content=estimators.estimates_to_json(out), media_type="application/json")

    @api.get("/summary-stats")
    def summary_stats() -> dict:
        report = compute_summary(state.prediction, attrs=state.attrs)
        return report.to_dict()

    # the same surface under both the documented paths and an /api prefix
    # (the prefix keeps API routes from colliding with static asset names)
    app.include_router(api, prefix="/api")
    app.include_router(api)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
