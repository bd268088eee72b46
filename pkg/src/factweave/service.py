"""HTTP surface: pipeline runs (submit/poll/fetch) and the annotation study
(task delivery, rubric submission, export).

Annotation task payloads are blinded: approach identity lives only in the
server-side study state and is attached to records at export time, never in
anything served to the browser.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from .credibility import Registry
from .evaluation.rubric import Annotation, AnnotationTask, ValidationError, rubric_schema
from .evaluation.store import AnnotationStore, DuplicateAnnotation
from .models import MalformedPost, PipelineConfig, Post
from .pipeline import RunRecord, RunStore, run_key, run_pipeline
from .providers.gateway import ProviderGateway
from .retrieval import TimeGate, gate_from_spec


@dataclass
class StudyState:
    """Server-side annotation study: tasks, response bodies, and the blinded
    approach labels."""

    tasks: list[AnnotationTask] = field(default_factory=list)
    responses: dict[str, dict] = field(default_factory=dict)   # id -> {text, references}
    approaches: dict[str, str] = field(default_factory=dict)   # id -> approach (never served)
    posts: dict[str, dict] = field(default_factory=dict)       # post id -> {text, images}

    @classmethod
    def load(cls, path: Union[str, Path]) -> "StudyState":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            tasks=[AnnotationTask.from_dict(t) for t in data.get("tasks", [])],
            responses=dict(data.get("responses", {})),
            approaches=dict(data.get("approaches", {})),
            posts=dict(data.get("posts", {})),
        )


def response_order(task_id: str, annotator_id: str, response_ids: tuple[str, ...]) -> list[str]:
    """Blinded display order, stable per (task, annotator)."""
    digest = hashlib.sha256(f"{task_id}\x00{annotator_id}".encode("utf-8")).hexdigest()
    rng = random.Random(int(digest[:16], 16))
    order = list(response_ids)
    rng.shuffle(order)
    return order


def create_app(
    gateway: ProviderGateway,
    registry: Registry,
    config: PipelineConfig,
    run_store: RunStore,
    annotation_store: Optional[AnnotationStore] = None,
    study: Optional[StudyState] = None,
    synchronous: bool = False,
    ui_dir: Optional[Union[str, Path]] = None,
) -> FastAPI:
    """Build the service.

    ``synchronous`` executes runs inside the submit request (deterministic
    for tests and replay); otherwise runs execute on a worker pool and
    clients poll.  ``ui_dir`` serves a static asset directory (the annotation
    workbench) at the root path; API routes take precedence.
    """
    app = FastAPI(title="correction pipeline")
    study = study or StudyState()
    status_lock = threading.Lock()
    statuses: dict[str, str] = {}
    executor = ThreadPoolExecutor(max_workers=max(1, config.parallelism))

    def _execute(post: Post, gate: TimeGate, key: str) -> None:
        try:
            record = run_pipeline(gateway, registry, config, post, gate, run_store)
            with status_lock:
                statuses[key] = record.status
        except Exception as exc:  # a run must never wedge in "pending"
            with status_lock:
                statuses[key] = "failed"
            run_store.put(_failed_record(post, gate, config, registry, exc))

    def _failed_record(post, gate, config, registry, exc) -> RunRecord:
        from datetime import datetime, timezone

        return RunRecord(
            post_id=post.id,
            config_hash=config.snapshot_hash(),
            registry_hash=registry.snapshot_hash(),
            cutoff=gate.cutoff,
            created_at=datetime.now(timezone.utc),
            status="failed",
            error=f"{type(exc).__name__}: {exc}",
        )

    # -- pipeline runs ------------------------------------------------------

    @app.post("/runs")
    def submit_run(payload: dict = Body(...)) -> dict:
        try:
            post = Post.from_dict(payload["post"])
        except (KeyError, TypeError, ValueError, MalformedPost) as exc:
            raise HTTPException(status_code=422, detail=f"bad post: {exc}")
        cutoff_raw = payload.get("cutoff", "post-time")
        try:
            gate = gate_from_spec(cutoff_raw, post)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=f"bad cutoff: {exc}")

        key = run_key(post.id, config.snapshot_hash(), gate.cutoff)
        existing = run_store.get(key)
        if existing is not None:
            return {"run_id": key, "status": existing.status, "cached": True}

        with status_lock:
            if statuses.get(key) == "pending":
                return {"run_id": key, "status": "pending", "cached": False}
            statuses[key] = "pending"
        if synchronous:
            _execute(post, gate, key)
            with status_lock:
                return {"run_id": key, "status": statuses[key], "cached": False}
        executor.submit(_execute, post, gate, key)
        return {"run_id": key, "status": "pending", "cached": False}

    @app.get("/runs/{run_id}/status")
    def run_status(run_id: str) -> dict:
        record = run_store.load(run_id)
        if record is not None:
            return {"run_id": run_id, "status": record.status}
        with status_lock:
            status = statuses.get(run_id)
        if status is None:
            raise HTTPException(status_code=404, detail="unknown run id")
        return {"run_id": run_id, "status": status}

    @app.get("/runs/{run_id}")
    def fetch_run(run_id: str) -> dict:
        record = run_store.load(run_id)
        if record is None:
            with status_lock:
                if statuses.get(run_id) == "pending":
                    raise HTTPException(status_code=409, detail="run still pending")
            raise HTTPException(status_code=404, detail="unknown run id")
        return record.to_dict()

    @app.get("/runs")
    def list_runs() -> dict:
        return {"runs": run_store.keys()}

    @app.get("/stats")
    def stats() -> dict:
        return {
            "runs": len(run_store.keys()),
            "cache_hits": run_store.hits,
        }

    # -- annotation study ---------------------------------------------------

    def _store() -> AnnotationStore:
        if annotation_store is None:
            raise HTTPException(status_code=503, detail="annotation study not configured")
        return annotation_store

    def _task_done(task: AnnotationTask, annotator_id: str) -> bool:
        store = _store()
        return all(
            store.has(task.task_id, annotator_id, response_id)
            for response_id in task.response_ids
        )

    @app.get("/annotation/schema")
    def annotation_schema() -> dict:
        return rubric_schema()

    @app.get("/annotation/tasks/next")
    def next_task(annotator: str) -> dict:
        assigned = [t for t in study.tasks if annotator in t.annotators]
        if not assigned:
            raise HTTPException(status_code=404, detail="no tasks assigned to annotator")
        for task in assigned:
            if _task_done(task, annotator):
                continue
            order = response_order(task.task_id, annotator, task.response_ids)
            return {
                "task_id": task.task_id,
                "post": study.posts.get(task.post_id, {"id": task.post_id}),
                "phase": task.phase.value,
                "responses": [
                    {
                        "response_id": response_id,
                        "text": study.responses[response_id]["text"],
                        "references": list(study.responses[response_id].get("references", [])),
                        "submitted": _store().has(task.task_id, annotator, response_id),
                    }
                    for response_id in order
                ],
            }
        raise HTTPException(status_code=404, detail="no tasks remaining")

    @app.get("/annotation/progress")
    def progress(annotator: str) -> dict:
        assigned = [t for t in study.tasks if annotator in t.annotators]
        done = sum(1 for t in assigned if _task_done(t, annotator))
        return {"annotator": annotator, "assigned": len(assigned), "completed": done}

    @app.post("/annotation/submit")
    def submit_annotation(payload: dict = Body(...)) -> dict:
        store = _store()
        task = next(
            (t for t in study.tasks if t.task_id == payload.get("task_id")), None
        )
        if task is None:
            raise HTTPException(status_code=404, detail="unknown task")
        annotator_id = payload.get("annotator_id", "")
        if annotator_id not in task.annotators:
            raise HTTPException(status_code=403, detail="task not assigned to annotator")
        response_id = payload.get("response_id", "")
        if response_id not in task.response_ids:
            raise HTTPException(status_code=404, detail="unknown response for task")
        try:
            annotation = Annotation(
                task_id=task.task_id,
                annotator_id=annotator_id,
                response_id=response_id,
                values=dict(payload.get("values", {})),
                references=tuple(dict(r) for r in payload.get("references", [])),
                explanation=str(payload.get("explanation", "")),
                weight=task.weight,
            )
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            store.append(annotation)
        except DuplicateAnnotation as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            "stored": True,
            "task_id": task.task_id,
            "response_id": response_id,
            "task_complete": _task_done(task, annotator_id),
        }

    @app.get("/annotation/export", response_class=PlainTextResponse)
    def export_annotations() -> str:
        """Operator-side export: annotations as JSON lines with the approach
        label restored into metadata (this is the unblinded view)."""
        store = _store()
        lines = []
        for annotation in store.load_all():
            data = annotation.to_dict()
            approach = study.approaches.get(annotation.response_id)
            if approach is not None:
                data["metadata"] = {**data["metadata"], "approach": approach}
            lines.append(json.dumps(data, ensure_ascii=False))
        return "\n".join(lines) + ("\n" if lines else "")

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # Registered last so every API route wins over the catch-all mount.
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def load_study_or_none(path: Optional[Union[str, Path]]) -> Optional[StudyState]:
    if path is None:
        return None
    return StudyState.load(path)
