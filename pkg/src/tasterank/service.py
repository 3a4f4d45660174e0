"""HTTP/JSON service exposing sessions, scoring and catalog browsing.

All numbers in responses are computed by the library; handlers only
project session state. Mutating endpoints are idempotent: session
creation honors an ``Idempotency-Key`` header, and re-submitting the same
feedback payload for the same iteration (or re-finalizing) replays the
stored response instead of re-executing.
"""

from __future__ import annotations

import hashlib
import json
import sys
import threading
import time
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import FileResponse, JSONResponse

from .attributes import AttributeModelBank
from .catalog import Catalog, EngineConfig, UnknownItemError
from .datasets import save_session_events
from .session import (
    ConcurrentSessionError,
    FeedbackError,
    RerankFeedback,
    Session,
    SessionStateError,
    SessionStatus,
    finalize,
    start_session,
    submit_feedback,
)
from .taste import UserAestheticDistribution, build_user_distribution, score_test_items


class ServiceState:
    def __init__(
        self,
        catalog: Catalog,
        bank: AttributeModelBank,
        cfg: EngineConfig,
        data_dir: Optional[Path] = None,
    ):
        self.catalog = catalog
        self.bank = bank
        self.cfg = cfg
        self.data_dir = data_dir
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.creation_cache: dict[str, dict] = {}
        self.feedback_key_cache: dict[tuple[str, str], dict] = {}
        self.last_feedback: dict[str, tuple[str, dict]] = {}
        self.finalize_cache: dict[str, dict] = {}
        self.registry_lock = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self.registry_lock:
            return self.locks.setdefault(session_id, threading.Lock())

    def persist(self, session: Session) -> None:
        if self.data_dir is None:
            return
        path = self.data_dir / "sessions" / f"{session.session_id}.jsonl"
        save_session_events(session, path)


def _ranking_payload(session: Session, top: Optional[int] = None) -> dict:
    ranking = session.current_ranking
    assert ranking is not None
    entries = ranking.entries if top is None else ranking.entries[:top]
    return {
        "generation": ranking.generation,
        "entries": [
            {"id": item_id, "score": score, "media_url": f"/media/{item_id}"}
            for item_id, score in entries
        ],
    }


def _session_payload(session: Session, state: "ServiceState") -> dict:
    payload = {
        "session_id": session.session_id,
        "status": session.status.value,
        "iteration": session.iteration,
        "max_iterations": session.config.max_iterations,
        "k": session.config.k,
        "favorites": list(session.favorite_ids),
        "deleted": sorted(session.deleted_ids),
        "ranking": _ranking_payload(session),
    }
    # the refine screen charts the taste profile as it evolves; the preview
    # is the same aggregation finalize would run on the current ranking
    if session.usad is None and session.current_ranking is not None:
        preview = build_user_distribution(
            session.current_ranking, state.bank, state.catalog
        )
        payload["usad_preview"] = _distribution_payload(preview)
    return payload


def _distribution_payload(usad: UserAestheticDistribution) -> dict:
    return {
        "attributes": list(usad.dist.attributes),
        "probs": [float(v) for v in usad.dist.probs],
        "generation": usad.source_ranking_generation,
        "item_count": usad.source_item_count,
    }


def _usad_payload(session: Session) -> dict:
    assert session.usad is not None
    return _distribution_payload(session.usad)


def _error(status_code: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"error": message})


def create_app(
    catalog: Catalog,
    bank: AttributeModelBank,
    cfg: EngineConfig,
    data_dir: Optional[str | Path] = None,
    log_requests: bool = True,
) -> FastAPI:
    state = ServiceState(
        catalog,
        bank,
        cfg,
        data_dir=Path(data_dir) if data_dir is not None else None,
    )

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        for session in state.sessions.values():  # graceful shutdown: keep logs
            state.persist(session)

    app = FastAPI(title="tasterank", lifespan=lifespan)
    app.state.service = state

    if log_requests:

        @app.middleware("http")
        async def log_middleware(request: Request, call_next):
            started = time.perf_counter()
            response = await call_next(request)
            record = {
                "method": request.method,
                "path": request.url.path,
                "status": response.status_code,
                "duration_ms": round((time.perf_counter() - started) * 1000, 3),
            }
            print(json.dumps(record), file=sys.stderr)
            return response

    @app.get("/config")
    def get_config():
        return {
            "m": cfg.m,
            "k": cfg.k,
            "max_iterations": cfg.max_iterations,
            "distance_metric": cfg.distance_metric,
            "attribute_names": list(bank.attribute_names),
            "catalog_size": len(catalog),
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: dict, request: Request, response: Response):
        key = request.headers.get("Idempotency-Key")
        if key and key in state.creation_cache:
            return state.creation_cache[key]
        favorites = body.get("favorites")
        if not isinstance(favorites, list) or not favorites:
            return _error(422, "body must carry a non-empty 'favorites' list")
        try:
            session = start_session(state.catalog, state.cfg, favorites)
        except UnknownItemError as exc:
            return _error(404, str(exc))
        except ValueError as exc:
            return _error(422, str(exc))
        state.sessions[session.session_id] = session
        state.persist(session)
        payload = _session_payload(session, state)
        if key:
            state.creation_cache[key] = payload
        return payload

    def _get_session(session_id: str) -> Optional[Session]:
        return state.sessions.get(session_id)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = _get_session(session_id)
        if session is None:
            return _error(404, f"no such session: {session_id}")
        payload = _session_payload(session, state)
        if session.status is SessionStatus.FINALIZED:
            payload["usad"] = _usad_payload(session)
        return payload

    @app.get("/sessions/{session_id}/ranking")
    def get_ranking(session_id: str, top: Optional[int] = None):
        session = _get_session(session_id)
        if session is None:
            return _error(404, f"no such session: {session_id}")
        if top is not None and top < 1:
            return _error(422, "top must be >= 1")
        return _ranking_payload(session, top)

    @app.post("/sessions/{session_id}/feedback")
    def post_feedback(session_id: str, body: dict, request: Request):
        session = _get_session(session_id)
        if session is None:
            return _error(404, f"no such session: {session_id}")
        payload_hash = hashlib.sha256(
            json.dumps(body, sort_keys=True).encode()
        ).hexdigest()
        idem_key = request.headers.get("Idempotency-Key")
        with state.lock_for(session_id):
            if idem_key and (session_id, idem_key) in state.feedback_key_cache:
                return state.feedback_key_cache[(session_id, idem_key)]
            last = state.last_feedback.get(session_id)
            if last is not None and last[0] == payload_hash:
                return last[1]  # retry of the feedback just applied: no-op
            try:
                feedback = RerankFeedback(
                    ordered_prefix=tuple(body.get("ordered_prefix", ())),
                    deletions=frozenset(body.get("deletions", ())),
                    satisfied=bool(body.get("satisfied", False)),
                )
                submit_feedback(session, feedback)
            except FeedbackError as exc:
                return _error(422, str(exc))
            except (SessionStateError, ConcurrentSessionError) as exc:
                return _error(409, str(exc))
            state.persist(session)
            result = _session_payload(session, state)
            state.last_feedback[session_id] = (payload_hash, result)
            if idem_key:
                state.feedback_key_cache[(session_id, idem_key)] = result
            return result

    @app.post("/sessions/{session_id}/finalize")
    def post_finalize(session_id: str):
        session = _get_session(session_id)
        if session is None:
            return _error(404, f"no such session: {session_id}")
        with state.lock_for(session_id):
            if session_id in state.finalize_cache:
                return state.finalize_cache[session_id]
            try:
                finalize(session, state.bank, state.catalog)
            except (SessionStateError, ConcurrentSessionError) as exc:
                return _error(409, str(exc))
            state.persist(session)
            result = _session_payload(session, state)
            result["usad"] = _usad_payload(session)
            state.finalize_cache[session_id] = result
            return result

    @app.get("/sessions/{session_id}/usad")
    def get_usad(session_id: str):
        session = _get_session(session_id)
        if session is None:
            return _error(404, f"no such session: {session_id}")
        if session.status is not SessionStatus.FINALIZED:
            return _error(
                409, f"session is {session.status.value!r}; finalize it first"
            )
        return _usad_payload(session)

    @app.post("/score")
    def post_score(body: dict):
        session_id = body.get("session_id")
        ids = body.get("ids")
        if not session_id or not isinstance(ids, list) or not ids:
            return _error(422, "body must carry 'session_id' and a non-empty 'ids' list")
        session = _get_session(session_id)
        if session is None:
            return _error(404, f"no such session: {session_id}")
        if session.usad is None:
            return _error(409, "session has no taste distribution; finalize it first")
        try:
            scored = score_test_items(session.usad, state.bank, state.catalog, ids)
        except UnknownItemError as exc:
            return _error(404, str(exc))
        ordered = sorted(scored, key=lambda s: (-s.score, s.id))
        return {
            "items": [
                {
                    "id": s.id,
                    "score": s.score,
                    "undefined_correlation": s.undefined_correlation,
                    "media_url": f"/media/{s.id}",
                }
                for s in ordered
            ]
        }

    @app.get("/catalog/items")
    def catalog_items(page: int = 0, page_size: int = 50):
        if page < 0 or page_size < 1:
            return _error(422, "page must be >= 0 and page_size >= 1")
        start = page * page_size
        chunk = state.catalog.items[start : start + page_size]
        return {
            "total": len(state.catalog),
            "page": page,
            "page_size": page_size,
            "items": [
                {
                    "id": item.id,
                    "media_url": f"/media/{item.id}",
                    "has_media": item.media_path is not None,
                    "labels": sorted(item.attribute_labels or ()),
                }
                for item in chunk
            ],
        }

    @app.get("/catalog/sample")
    def catalog_sample(n: int = 20, seed: int = 0):
        if n < 1:
            return _error(422, "n must be >= 1")
        rng = np.random.default_rng(seed)
        count = min(n, len(state.catalog))
        picks = rng.choice(len(state.catalog), size=count, replace=False)
        return {
            "seed": seed,
            "items": [
                {
                    "id": state.catalog.items[i].id,
                    "media_url": f"/media/{state.catalog.items[i].id}",
                    "has_media": state.catalog.items[i].media_path is not None,
                }
                for i in sorted(picks)
            ],
        }

    @app.get("/media/{item_id}")
    def media(item_id: str):
        try:
            item = state.catalog.get(item_id)
        except UnknownItemError as exc:
            return _error(404, str(exc))
        if not item.media_path or not Path(item.media_path).exists():
            return _error(404, f"item {item_id!r} has no media file")
        return FileResponse(item.media_path)

    return app
