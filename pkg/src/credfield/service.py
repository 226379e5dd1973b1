"""HTTP facade over the auth server.

Endpoints map 1:1 onto server operations with the JSON wire mapping:

    GET  /challenge?origin=...   fresh single-use challenge
    POST /enrol                  enrolment message
    POST /login                  verification message
    POST /change                 password-change message (two credentials)
    GET  /events                 policy event log
    GET  /                       demo page assets, when configured

Decision mapping: Accept is 200, StepUpRequired is 428, rejects are 401
(409 for UserExists) with a machine-readable ``code``; malformed bodies
are 400. The declared ``origin`` query parameter stands in for the page
origin a real deployment would take from the TLS/Host context — the
simulation must be able to claim arbitrary origins to model phishing
pages, so binding is by declaration here (documented deployment delta).

The store is persisted after every state-changing request when a store
path is configured.
"""

from __future__ import annotations

import logging
import os
import time
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import wire
from .core import canonical_origin
from .errors import (
    CredFieldError,
    MalformedUrl,
    RejectReason,
    UnsupportedScheme,
    WireError,
)
from .server import AuthDecision, AuthServer, DecisionKind

logger = logging.getLogger(__name__)

_REJECT_STATUS = {
    RejectReason.USER_EXISTS: 409,
}


def decision_response(decision: AuthDecision) -> JSONResponse:
    if decision.kind is DecisionKind.ACCEPT:
        return JSONResponse(
            {"decision": "Accept", "browser_known": bool(decision.browser_known)},
            status_code=200,
        )
    if decision.kind is DecisionKind.STEP_UP_REQUIRED:
        return JSONResponse(
            {"decision": "StepUpRequired", "code": "StepUpRequired"}, status_code=428
        )
    status = _REJECT_STATUS.get(decision.reason, 401)
    return JSONResponse(
        {"decision": "Reject", "code": decision.reason.value}, status_code=status
    )


def create_app(
    server: AuthServer,
    store_path: Optional[str] = None,
    assets_dir: Optional[str] = None,
    clock: Callable[[], float] = time.time,
) -> FastAPI:
    app = FastAPI(title="credfield", docs_url=None, redoc_url=None)

    def now() -> int:
        return int(clock())

    def persist() -> None:
        if store_path:
            server.persist(store_path)

    @app.exception_handler(Exception)
    async def on_error(request: Request, exc: Exception):
        logger.exception("internal error handling %s", request.url.path)
        return JSONResponse({"code": "Internal"}, status_code=500)

    @app.get("/challenge")
    async def challenge(origin: str = ""):
        try:
            parsed = canonical_origin(origin)
        except (MalformedUrl, UnsupportedScheme) as exc:
            return JSONResponse(
                {"code": "Malformed", "detail": str(exc)}, status_code=400
            )
        grant = server.issue_challenge(parsed, now())
        return JSONResponse(wire.challenge_grant_to_json(grant))

    async def read_message(request: Request, expected_type: int):
        try:
            body = await request.json()
        except Exception:
            return None, JSONResponse(
                {"code": "Malformed", "detail": "body is not valid JSON"},
                status_code=400,
            )
        try:
            msg = wire.auth_message_from_json(body)
        except (WireError, CredFieldError, ValueError) as exc:
            return None, JSONResponse(
                {"code": "Malformed", "detail": str(exc)}, status_code=400
            )
        if msg.msg_type != expected_type:
            return None, JSONResponse(
                {"code": "Malformed", "detail": "message type does not match endpoint"},
                status_code=400,
            )
        return msg, None

    @app.post("/enrol")
    async def enrol(request: Request):
        msg, error = await read_message(request, wire.MSG_ENROL)
        if error is not None:
            return error
        decision = server.enrol(msg, now())
        persist()
        return decision_response(decision)

    @app.post("/login")
    async def login(request: Request):
        msg, error = await read_message(request, wire.MSG_VERIFY)
        if error is not None:
            return error
        decision = server.verify(msg, now())
        persist()
        return decision_response(decision)

    @app.post("/change")
    async def change(request: Request):
        msg, error = await read_message(request, wire.MSG_CHANGE)
        if error is not None:
            return error
        decision = server.change_password(msg, now())
        persist()
        return decision_response(decision)

    @app.get("/events")
    async def events():
        return JSONResponse([event.to_json() for event in server.store.events])

    if assets_dir and os.path.isdir(assets_dir):
        app.mount("/", StaticFiles(directory=assets_dir, html=True), name="demo")

    return app


def serve(
    server: AuthServer,
    host: str = "127.0.0.1",
    port: int = 8437,
    store_path: Optional[str] = None,
    assets_dir: Optional[str] = None,
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(server, store_path=store_path, assets_dir=assets_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
