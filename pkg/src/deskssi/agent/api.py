"""HTTP surface of an agent: consent queue, connections, inbox.

Serves both machine peers (POST /inbox envelope delivery) and the
wallet's own user interfaces (the CLI and the web wallet), which drive
the consent queue. Secret material never appears in any response.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from deskssi.agent.core import (
    Agent,
    AgentError,
    NoMatchingCredentialError,
    OfferConsumedError,
    PendingNotFoundError,
    UnknownSenderError,
)
from deskssi.agent.network import TransportError
from deskssi.credentials import PresentationError
from deskssi.identity import AuthcryptError


async def _json_body(request: Request) -> dict:
    if not await request.body():
        return {}
    try:
        data = await request.json()
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise HTTPException(status_code=400, detail="body must be a JSON object")
    return data


def build_agent_app(agent: Agent, *, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title=f"agent:{agent.label}", docs_url=None, redoc_url=None)

    @app.exception_handler(AgentError)
    async def _agent_error(_request, exc: AgentError):
        status = 400
        if isinstance(exc, PendingNotFoundError):
            status = 404
        elif isinstance(exc, OfferConsumedError):
            status = 409
        elif isinstance(exc, UnknownSenderError):
            status = 400
        elif isinstance(exc, NoMatchingCredentialError):
            status = 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.exception_handler(AuthcryptError)
    async def _authcrypt_error(_request, exc: AuthcryptError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(PresentationError)
    async def _presentation_error(_request, exc: PresentationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(TransportError)
    async def _transport_error(_request, exc: TransportError):
        return JSONResponse(status_code=502, content={"detail": str(exc)})

    @app.post("/connections/offer")
    async def create_offer(request: Request):
        body = await _json_body(request)
        offer = agent.create_connection_offer(label=body.get("label"))
        return offer.to_dict()

    @app.post("/connections/accept")
    async def accept_offer(request: Request):
        body = await _json_body(request)
        offer = body.get("offer", body)
        connection = agent.accept_connection_offer(offer)
        return connection.to_dict()

    @app.post("/inbox")
    async def inbox(request: Request):
        body = await _json_body(request)
        return agent.receive_envelope(body)

    @app.get("/pending")
    async def pending():
        return {"pending": agent.pending_list()}

    @app.post("/pending/{pending_id}/approve")
    async def approve(pending_id: str, request: Request):
        body = await _json_body(request)
        disclosed = body.get("disclosed")
        return agent.approve_pending(
            pending_id,
            disclosed=disclosed,
            credential_id=body.get("credential_id"),
        )

    @app.post("/pending/{pending_id}/deny")
    async def deny(pending_id: str, request: Request):
        body = await _json_body(request)
        return agent.deny_pending(
            pending_id, reason=body.get("reason", "consent denied")
        )

    @app.get("/credentials")
    async def credentials():
        return {"credentials": agent.credentials()}

    @app.get("/connections")
    async def connections():
        return {
            "connections": [c.to_dict() for c in agent.connections()]
        }

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "label": agent.label}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
