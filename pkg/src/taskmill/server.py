"""HTTP surface for interactive sessions.

All bodies are JSON. Sessions are independent; within a session reads may
run concurrently while feedback and pipeline runs are single-writer, a
busy writer answering 409. The feedback endpoint applies the verdict and
returns the re-ranked list in the same response, so one loop iteration
costs one round trip.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .dataset import load_dataset
from .enumeration import OpConfig
from .errors import EngineError
from .petel import SearchParams, parse_duration, parse_petel, render_nl, render_petel
from .pipeline import (
    Session,
    current_ranking,
    give_feedback,
    recommendations_jsonable,
    run_pipeline,
)
from .recommend import UtilityWeights, export_model, import_model
from .schema import Schema


class SessionRequest(BaseModel):
    schema_sidecar: dict
    csv_path: str
    config: dict = {}


class FeedbackRequest(BaseModel):
    task_id: str
    verdict: str


class ParamsRequest(BaseModel):
    window: str | None = None
    lead: str | None = None
    history: str | None = None


class ImportRequest(BaseModel):
    blob: str
    eta_override: float | None = None


class _Registry:
    def __init__(self) -> None:
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}


def _duration_or(current: int, text: str | None) -> int:
    return current if text is None else parse_duration(text)


def _session_config(config: dict) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key in ("m", "k", "seed", "workers"):
        if key in config:
            out[key] = int(config[key])
    if "lambda" in config:
        out["lam"] = float(config["lambda"])
    if "business_weights" in config:
        out["business_weights"] = {str(k): float(v) for k, v in config["business_weights"].items()}
    params = SearchParams(
        window=parse_duration(config.get("window", "1d")),
        lead=parse_duration(config.get("lead", "0d")),
        history=parse_duration(config.get("history", "7d")),
    )
    out["params"] = params
    if "eq_value_limit" in config:
        out["op_config"] = OpConfig(eq_value_limit=int(config["eq_value_limit"]))
    if "utility_weights" in config:
        out["utility_weights"] = UtilityWeights(**config["utility_weights"])
    return out


def create_app(ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="taskmill")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = _Registry()
    app.state.registry = registry

    def session_of(session_id: str) -> Session:
        session = registry.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="NoSession")
        return session

    @app.post("/sessions")
    def create_session(req: SessionRequest) -> dict:
        try:
            schema = Schema.from_sidecar(req.schema_sidecar)
            dataset = load_dataset(req.csv_path, schema)
            session = Session(id=uuid.uuid4().hex[:12], dataset=dataset, **_session_config(req.config))
        except (EngineError, KeyError, ValueError, OSError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        registry.sessions[session.id] = session
        registry.locks[session.id] = threading.Lock()
        return {"session_id": session.id}

    @app.post("/sessions/{session_id}/run")
    def run(session_id: str) -> dict:
        session = session_of(session_id)
        lock = registry.locks[session_id]
        if not lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="SessionBusy")
        try:
            recs = run_pipeline(session)
        except EngineError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        finally:
            lock.release()
        return {"recommendations": recommendations_jsonable(recs), "stale": session.stale}

    @app.get("/sessions/{session_id}/recommendations")
    def recommendations(
        session_id: str,
        k: int | None = None,
        lam: float | None = Query(None, alias="lambda"),
    ) -> dict:
        session = session_of(session_id)
        if k is not None and k < 1:
            raise HTTPException(status_code=400, detail="k must be at least 1")
        if lam is not None and not 0.0 <= lam <= 1.0:
            raise HTTPException(status_code=400, detail="lambda must be in [0, 1]")
        recs = current_ranking(session, k=k, lam=lam)
        return {"recommendations": recommendations_jsonable(recs), "stale": session.stale}

    @app.post("/sessions/{session_id}/feedback")
    def feedback(req: FeedbackRequest, session_id: str) -> dict:
        session = session_of(session_id)
        if req.verdict not in ("useful", "not_useful"):
            raise HTTPException(status_code=400, detail="verdict must be useful or not_useful")
        lock = registry.locks[session_id]
        if not lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="SessionBusy")
        try:
            recs = give_feedback(session, req.task_id, req.verdict)
        except KeyError:
            raise HTTPException(status_code=404, detail="NoSuchTask") from None
        finally:
            lock.release()
        return {"recommendations": recommendations_jsonable(recs), "stale": session.stale}

    @app.get("/sessions/{session_id}/tasks/{task_id}")
    def task_detail(session_id: str, task_id: str) -> dict:
        session = session_of(session_id)
        evaluated = next((ev for ev in session.evaluated if ev.task.id == task_id), None)
        if evaluated is not None:
            return {
                "petel": render_petel(evaluated.task),
                "nl": render_nl(evaluated.task, session.dataset.schema, session.rules),
                "metrics": evaluated.metric_components(session.model),
            }
        record = session.store.view().get(task_id)
        if record is None:
            raise HTTPException(status_code=404, detail="NoSuchTask")
        task = parse_petel(record.petel)
        return {
            "petel": record.petel,
            "nl": render_nl(task, session.dataset.schema, session.rules),
            "metrics": record.metrics,
        }

    @app.post("/sessions/{session_id}/params")
    def set_params(req: ParamsRequest, session_id: str) -> dict:
        session = session_of(session_id)
        try:
            session.params = SearchParams(
                window=_duration_or(session.params.window, req.window),
                lead=_duration_or(session.params.lead, req.lead),
                history=_duration_or(session.params.history, req.history),
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        session.stale = True
        return {"stale": True}

    @app.get("/sessions/{session_id}/model/export")
    def model_export(session_id: str) -> dict:
        session = session_of(session_id)
        return {"blob": export_model(session.model)}

    @app.post("/sessions/{session_id}/model/import")
    def model_import(req: ImportRequest, session_id: str) -> dict:
        session = session_of(session_id)
        try:
            session.model = import_model(req.blob, req.eta_override)
        except EngineError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"feedback_count": len(session.model.feedback)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve_http(host: str = "127.0.0.1", port: int = 8765, ui_dir: str | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(ui_dir=ui_dir), host=host, port=port, log_level="warning")
