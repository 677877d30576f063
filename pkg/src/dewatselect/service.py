"""HTTP facade over the engines with file-backed persistence.

Studies hold the uploaded performance table and the latest report; sessions
hold the elicitation state machine. Every mutation is persisted before the
response is sent. Per-aggregate locks serialize writers; reads go straight
to the last persisted document.

Environment:
  DEWATSELECT_DATA_DIR            storage directory (default ./dewatselect-data)
  DEWATSELECT_LISTEN              host:port for the bundled launcher
  DEWATSELECT_FACILITATOR_TOKEN   shared facilitator secret; unset = open access

Facilitator endpoints (session creation, round control, pipeline runs)
require X-Facilitator-Token when the token is configured. Rating submission
authenticates experts by the per-expert tokens minted at session creation
(X-Expert-Token). Rating values are never attached to expert identities in
any response.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import uuid
from pathlib import Path

from fastapi import FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .delphi import DelphiConfig, DelphiSession, RatingItem, make_item_id, rating_items
from .dataset import parse_performance_table, qualitative_criteria
from .errors import (ConsistencyGateError, DewatError, MissingDataError,
                     SchemaError, SessionStateError)
from .pipeline import (Injections, PipelineOptions, parse_policy,
                       render_report, report_document, run_pipeline)
from .storage import Store

log = logging.getLogger("dewatselect.service")

DEFAULT_DATA_DIR = "./dewatselect-data"
DEFAULT_LISTEN = "127.0.0.1:8000"


def _new_id() -> str:
    return uuid.uuid4().hex[:12]


class SessionItemBody(BaseModel):
    criterion_id: int
    subject: str
    reference: str


class SessionConfigBody(BaseModel):
    consensus_iqr_max: float = 1.0
    max_rounds: int = 5


class CreateSessionBody(BaseModel):
    experts: list[str]
    items: list[SessionItemBody] | None = None
    config: SessionConfigBody | None = None


class RatingBody(BaseModel):
    item_id: str
    value: int
    justification: str | None = None


class RunBody(BaseModel):
    weights: list[float] | None = None
    policy: str = "exclude_renormalize"
    alpha: float = 0.05
    allow_inconsistent: bool = False
    injections: dict | None = None
    sessions: list[str] | None = None


def app_from_env() -> FastAPI:
    """Uvicorn factory: `uvicorn --factory dewatselect.service:app_from_env`."""
    return create_app()


def create_app(data_dir: str | Path | None = None,
               facilitator_token: str | None = None) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("DEWATSELECT_DATA_DIR", DEFAULT_DATA_DIR)
    if facilitator_token is None:
        facilitator_token = os.environ.get("DEWATSELECT_FACILITATOR_TOKEN")

    store = Store(data_dir)
    app = FastAPI(title="dewatselect", docs_url=None, redoc_url=None)
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def lock_for(key: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(key, threading.Lock())

    def require_facilitator(request: Request) -> None:
        if facilitator_token is None:
            return
        given = request.headers.get("X-Facilitator-Token")
        if given != facilitator_token:
            raise _HttpError(401, "facilitator token missing or wrong")

    def get_study(study_id: str) -> dict:
        doc = store.load_study(study_id)
        if doc is None:
            raise _HttpError(404, f"no study {study_id!r}")
        return doc

    def get_session_doc(session_id: str) -> dict:
        doc = store.load_session(session_id)
        if doc is None:
            raise _HttpError(404, f"no session {session_id!r}")
        return doc

    # -- error translation ------------------------------------------------

    class _HttpError(Exception):
        def __init__(self, status: int, detail: str, extra: dict | None = None):
            self.status = status
            self.detail = detail
            self.extra = extra or {}

    @app.exception_handler(_HttpError)
    async def _on_http_error(request: Request, exc: _HttpError):
        return JSONResponse({"detail": exc.detail, **exc.extra}, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError):
        errors = [{"loc": [str(p) for p in e.get("loc", ())], "msg": e.get("msg", "")}
                  for e in exc.errors()]
        return JSONResponse({"detail": "invalid request body", "errors": errors},
                            status_code=400)

    @app.exception_handler(ConsistencyGateError)
    async def _on_gate(request: Request, exc: ConsistencyGateError):
        return JSONResponse(
            {"detail": str(exc), "error_type": "consistency_gate",
             "offending": [{"criterion_id": cid, "cr": cr} for cid, cr in exc.offending]},
            status_code=400)

    @app.exception_handler(SessionStateError)
    async def _on_state(request: Request, exc: SessionStateError):
        return JSONResponse({"detail": str(exc), "error_type": "session_state"},
                            status_code=409)

    @app.exception_handler(MissingDataError)
    async def _on_missing(request: Request, exc: MissingDataError):
        return JSONResponse({"detail": str(exc), "error_type": "missing_data"},
                            status_code=400)

    @app.exception_handler(DewatError)
    async def _on_domain(request: Request, exc: DewatError):
        return JSONResponse({"detail": str(exc), "error_type": "schema"},
                            status_code=400)

    @app.exception_handler(Exception)
    async def _on_crash(request: Request, exc: Exception):
        incident = _new_id()
        log.exception("incident %s on %s %s", incident, request.method, request.url.path)
        return JSONResponse({"detail": "internal error", "incident_id": incident},
                            status_code=500)

    # -- studies -----------------------------------------------------------

    @app.post("/studies", status_code=201)
    async def create_study(request: Request):
        try:
            text = (await request.body()).decode("utf-8")
        except UnicodeDecodeError:
            raise _HttpError(400, "dataset must be UTF-8 text")
        table = parse_performance_table(text)
        now = time.time()
        doc = {
            "id": _new_id(),
            "created": now,
            "updated": now,
            "csv": text,
            "technologies": list(table.technologies),
            "sessions": [],
            "report_text": None,
        }
        store.save_study(doc)
        return {"id": doc["id"], "technologies": doc["technologies"]}

    @app.get("/studies/{study_id}")
    def read_study(study_id: str):
        doc = get_study(study_id)
        return {
            "id": doc["id"],
            "technologies": doc["technologies"],
            "sessions": doc["sessions"],
            "has_report": doc["report_text"] is not None,
            "created": doc["created"],
            "updated": doc["updated"],
        }

    # -- sessions ----------------------------------------------------------

    @app.post("/studies/{study_id}/sessions", status_code=201)
    def create_session(study_id: str, body: CreateSessionBody, request: Request):
        require_facilitator(request)
        with lock_for(f"study:{study_id}"):
            study = get_study(study_id)
            technologies = study["technologies"]
            if body.items is None:
                items = rating_items([c.id for c in qualitative_criteria()],
                                     technologies)
            else:
                items = []
                for it in body.items:
                    for tech in (it.subject, it.reference):
                        if tech not in technologies:
                            raise SchemaError(
                                f"item references unknown technology {tech!r}")
                    items.append(RatingItem(
                        make_item_id(it.criterion_id, it.subject, it.reference),
                        it.criterion_id, it.subject, it.reference))
            config = DelphiConfig() if body.config is None else DelphiConfig(
                consensus_iqr_max=body.config.consensus_iqr_max,
                max_rounds=body.config.max_rounds)
            session = DelphiSession(_new_id(), body.experts, items, config)
            tokens = {uuid.uuid4().hex: expert for expert in session.experts}
            now = time.time()
            session_doc = {
                "id": session.id,
                "study_id": study_id,
                "created": now,
                "updated": now,
                "tokens": tokens,
                "delphi": session.to_dict(),
            }
            store.save_session(session_doc)
            study["sessions"].append(session.id)
            study["updated"] = now
            store.save_study(study)
        return {
            "session_id": session.id,
            "state": session.state.value,
            "round": session.round,
            "items": [{"id": it.id, "criterion_id": it.criterion_id,
                       "subject": it.subject, "reference": it.reference}
                      for it in session.items],
            "expert_tokens": {expert: token for token, expert in tokens.items()},
        }

    def _resolve_expert(doc: dict, token: str | None) -> str:
        if token is None or token not in doc["tokens"]:
            raise _HttpError(401, "expert token missing or wrong")
        return doc["tokens"][token]

    @app.post("/sessions/{session_id}/ratings")
    def submit_rating(session_id: str, body: RatingBody,
                            x_expert_token: str | None = Header(None)):
        with lock_for(f"session:{session_id}"):
            doc = get_session_doc(session_id)
            expert = _resolve_expert(doc, x_expert_token)
            session = DelphiSession.from_dict(doc["delphi"])
            session.submit_rating(expert, body.item_id, body.value, body.justification)
            doc["delphi"] = session.to_dict()
            doc["updated"] = time.time()
            store.save_session(doc)
        return {"session_id": session_id, "round": session.round,
                "item_id": body.item_id, "value": body.value}

    @app.post("/sessions/{session_id}/close-round")
    def close_round(session_id: str, request: Request):
        require_facilitator(request)
        with lock_for(f"session:{session_id}"):
            doc = get_session_doc(session_id)
            session = DelphiSession.from_dict(doc["delphi"])
            summary = session.close_round()
            doc["delphi"] = session.to_dict()
            doc["updated"] = time.time()
            store.save_session(doc)
        return {"session_id": session_id, "state": session.state.value,
                "summary": _summary_json(summary)}

    @app.post("/sessions/{session_id}/advance")
    def advance(session_id: str, request: Request):
        require_facilitator(request)
        with lock_for(f"session:{session_id}"):
            doc = get_session_doc(session_id)
            session = DelphiSession.from_dict(doc["delphi"])
            state = session.advance()
            doc["delphi"] = session.to_dict()
            doc["updated"] = time.time()
            store.save_session(doc)
        return {"session_id": session_id, "state": state.value, "round": session.round}

    @app.get("/sessions/{session_id}/summary")
    def session_summary(session_id: str,
                              x_expert_token: str | None = Header(None)):
        doc = get_session_doc(session_id)
        session = DelphiSession.from_dict(doc["delphi"])
        out = {
            "session_id": session_id,
            "study_id": doc["study_id"],
            "state": session.state.value,
            "round": session.round,
            "expert_count": len(session.experts),
            "config": {"consensus_iqr_max": session.config.consensus_iqr_max,
                       "max_rounds": session.config.max_rounds,
                       "aggregate": session.config.aggregate},
            "items": [{"id": it.id, "criterion_id": it.criterion_id,
                       "subject": it.subject, "reference": it.reference}
                      for it in session.items],
            "history": [_summary_json(s) for s in session.history],
        }
        if x_expert_token is not None:
            expert = _resolve_expert(doc, x_expert_token)
            out["my_ratings"] = session.ratings_of(expert)
        return out

    # -- pipeline ----------------------------------------------------------

    @app.post("/studies/{study_id}/run")
    def run_study(study_id: str, body: RunBody, request: Request):
        require_facilitator(request)
        with lock_for(f"study:{study_id}"):
            study = get_study(study_id)
            table = parse_performance_table(study["csv"])
            session_ids = body.sessions if body.sessions is not None else study["sessions"]
            judgments = []
            for sid in sorted(session_ids):
                sdoc = get_session_doc(sid)
                if sdoc["study_id"] != study_id:
                    raise SchemaError(f"session {sid!r} belongs to another study")
                session = DelphiSession.from_dict(sdoc["delphi"])
                judgments.extend(session.export_consensus())
            injections = None
            injections_text = None
            if body.injections is not None:
                injections = Injections.from_dict(body.injections)
                injections_text = json.dumps(body.injections, sort_keys=True)
            judgments_text = None
            if judgments:
                judgments_text = json.dumps(
                    [{"criterion_id": j.criterion_id, "tech_a": j.tech_a,
                      "tech_b": j.tech_b, "worse": j.worse, "value": j.value,
                      "consensus": j.consensus} for j in judgments],
                    sort_keys=True)
            options = PipelineOptions(
                weights=tuple(body.weights) if body.weights is not None else None,
                policy=parse_policy(body.policy),
                alpha=body.alpha,
                allow_inconsistent=body.allow_inconsistent,
            )
            result = run_pipeline(table, judgments or None, injections, options)
            doc = report_document(result, study["csv"], judgments_text, injections_text)
            study["report_text"] = render_report(doc)
            study["updated"] = time.time()
            store.save_study(study)
        return JSONResponse(doc)

    @app.get("/studies/{study_id}/report")
    def read_report(study_id: str):
        study = get_study(study_id)
        if study["report_text"] is None:
            raise _HttpError(404, f"study {study_id!r} has no report yet")
        return Response(content=study["report_text"], media_type="application/json")

    return app


def _summary_json(summary) -> dict:
    return {
        "round": summary.round,
        "items": {
            item_id: {"median": a.median, "iqr": a.iqr, "mean": a.mean,
                      "count": a.count,
                      "changed_from_previous": a.changed_from_previous}
            for item_id, a in summary.items.items()
        },
    }


def parse_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise SchemaError(f"listen address must be host:port, got {value!r}")
    return host, int(port)
