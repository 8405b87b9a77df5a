"""HTTP surface of the OIDC provider.

Endpoints return JSON by default so programmatic clients (and the
in-process network used by tests) can drive the whole flow; passing
format=html to /authorize serves a small login page that displays the
connection offer, polls the session, and follows the final redirect —
that page is what a human sees in the browser demo.
"""

from __future__ import annotations

import html
import json

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse, RedirectResponse

from ..agent.api import build_agent_app
from .provider import COOKIE_NAME, OidcProvider, OidcRequestError

_LOGIN_PAGE = """<!doctype html>
<html>
<head><meta charset="utf-8"><title>Sign in with your wallet</title></head>
<body>
<h1>Sign in with your wallet</h1>
{offer_section}
<p>Status: <span id="status">starting</span></p>
<script>
async function poll() {{
  let response;
  try {{
    response = await fetch("{poll_path}");
  }} catch (err) {{
    document.getElementById("status").textContent = "provider unreachable";
    setTimeout(poll, 1500);
    return;
  }}
  if (!response.ok) {{
    document.getElementById("status").textContent = "session error " + response.status;
    return;
  }}
  const body = await response.json();
  document.getElementById("status").textContent = body.status;
  if (body.location) {{
    window.location.replace(body.location);
    return;
  }}
  setTimeout(poll, 1500);
}}
poll();
</script>
</body>
</html>
"""

_OFFER_SECTION = """<p>Paste this connection offer into your wallet to connect:</p>
<pre id="offer">{offer_json}</pre>
"""

_KNOWN_SECTION = "<p>Wallet connection recognized — approve the proof request in your wallet.</p>"


def build_provider_app(provider: OidcProvider) -> FastAPI:
    app = FastAPI(title="desk-ssi oidc provider")

    @app.exception_handler(OidcRequestError)
    async def _oidc_error(_request, exc: OidcRequestError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": exc.error, "error_description": exc.description},
        )

    @app.get("/.well-known/openid-configuration")
    def discovery():
        return provider.discovery()

    @app.get("/jwks")
    def jwks():
        return provider.jwks()

    @app.get("/authorize")
    def authorize(
        request: Request,
        client_id: str = "",
        redirect_uri: str = "",
        response_type: str = "",
        scope: str = "",
        state: str | None = None,
        nonce: str = "",
        claims: str | None = None,
        connection_token: str | None = None,
        format: str | None = None,
    ):
        token = connection_token or request.cookies.get(COOKIE_NAME)
        result = provider.authorize(
            client_id=client_id,
            redirect_uri=redirect_uri,
            response_type=response_type,
            scope=scope,
            state=state,
            nonce=nonce,
            claims=claims,
            connection_token=token,
        )
        wants_html = format == "html"
        if result.kind == "redirect":
            if wants_html:
                return RedirectResponse(result.location, status_code=302)
            return {"kind": "redirect", "location": result.location}
        if wants_html:
            offer = result.payload.get("offer")
            if offer is not None:
                offer_section = _OFFER_SECTION.format(
                    offer_json=html.escape(json.dumps(offer, indent=2))
                )
            else:
                offer_section = _KNOWN_SECTION
            page = _LOGIN_PAGE.format(
                offer_section=offer_section,
                poll_path=f"/session/{result.session_id}",
            )
            return HTMLResponse(page)
        return {"kind": "page", **result.payload}

    @app.get("/session/{session_id}")
    def poll_session(session_id: str):
        body = provider.poll_session(session_id)
        response = JSONResponse(content=body)
        token = body.get("connection_token")
        if token:
            response.set_cookie(
                COOKIE_NAME, token, httponly=True, samesite="lax", path="/"
            )
        return response

    @app.post("/token")
    async def token(request: Request):
        content_type = request.headers.get("content-type", "")
        if "application/json" in content_type:
            data = await request.json()
        else:
            form = await request.form()
            data = dict(form)
        if data.get("grant_type") != "authorization_code":
            raise OidcRequestError("unsupported_grant_type", "use authorization_code")
        return provider.handle_token(
            data.get("client_id", ""),
            data.get("client_secret"),
            data.get("code", ""),
        )

    @app.get("/userinfo")
    def userinfo(request: Request):
        header = request.headers.get("authorization", "")
        session_id = header[7:] if header.lower().startswith("bearer ") else None
        return provider.userinfo(session_id)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    app.mount("/agent", build_agent_app(provider.agent))
    return app
