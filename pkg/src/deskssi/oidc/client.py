"""Relying-party side: a client harness plus a minimal demo website.

The harness drives a full login programmatically: build the authorize
URL, read the login-page payload (which carries the wallet connection
offer), poll the session, then validate the redirect — fragment id_token
for the implicit flow, code exchange at the token endpoint for the code
flow. Every accepted token goes through full client-side validation
(signature against the provider's JWKS, iss/aud/nonce echo, expiry).

The demo website exposes the same flow to a real browser: /login
redirects to the provider's HTML login page and /cb receives the
redirect, completing the login server-side (code) or via a tiny
fragment-forwarding script (implicit).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from urllib.parse import parse_qs, urlencode, urlsplit

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse, RedirectResponse

from ..canonical import b64url_encode
from ..runtime import SYSTEM, Runtime
from .tokens import TokenValidationError, client_validate_id_token


class ClientHarnessError(Exception):
    pass


@dataclass
class LoginAttempt:
    state: str
    nonce: str
    flow: str
    scopes: tuple[str, ...]
    predicates: tuple[str, ...]
    session_id: str | None = None
    poll_url: str | None = None
    offer: dict | None = None


@dataclass
class LoginResult:
    ok: bool
    error: str | None = None
    claims: dict | None = None
    id_token: str | None = None

    @property
    def sub(self) -> str | None:
        return self.claims.get("sub") if self.claims else None


class RelyingParty:
    def __init__(
        self,
        *,
        client_id: str,
        redirect_uri: str,
        provider_url: str,
        network,
        client_secret: str | None = None,
        runtime: Runtime = SYSTEM,
    ):
        self.client_id = client_id
        self.client_secret = client_secret
        self.redirect_uri = redirect_uri
        self.provider_url = provider_url.rstrip("/")
        self.network = network
        self.runtime = runtime
        self._discovery: dict | None = None
        self._jwks: dict | None = None
        self._attempts: dict[str, LoginAttempt] = {}
        self.last_result: LoginResult | None = None

    # ------------------------------------------------------------------
    # provider metadata

    def discovery(self) -> dict:
        if self._discovery is None:
            self._discovery = self.network.get_json(
                self.provider_url + "/.well-known/openid-configuration"
            )
        return self._discovery

    def jwks(self) -> dict:
        if self._jwks is None:
            self._jwks = self.network.get_json(self.discovery()["jwks_uri"])
        return self._jwks

    # ------------------------------------------------------------------
    # login steps

    def new_attempt(
        self,
        flow: str = "implicit",
        scopes=("openid", "email"),
        predicates=("over_18",),
    ) -> LoginAttempt:
        attempt = LoginAttempt(
            state=b64url_encode(self.runtime.rand(9)),
            nonce=b64url_encode(self.runtime.rand(9)),
            flow=flow,
            scopes=tuple(scopes),
            predicates=tuple(predicates),
        )
        self._attempts[attempt.state] = attempt
        return attempt

    def authorize_url(
        self,
        attempt: LoginAttempt,
        *,
        connection_token: str | None = None,
        html: bool = False,
    ) -> str:
        params = {
            "client_id": self.client_id,
            "redirect_uri": self.redirect_uri,
            "response_type": "id_token" if attempt.flow == "implicit" else "code",
            "scope": " ".join(attempt.scopes),
            "state": attempt.state,
            "nonce": attempt.nonce,
        }
        if attempt.predicates:
            params["claims"] = " ".join(attempt.predicates)
        if connection_token:
            params["connection_token"] = connection_token
        if html:
            params["format"] = "html"
        return self.discovery()["authorization_endpoint"] + "?" + urlencode(params)

    def begin_login(
        self,
        flow: str = "implicit",
        scopes=("openid", "email"),
        predicates=("over_18",),
        connection_token: str | None = None,
    ) -> LoginAttempt:
        attempt = self.new_attempt(flow, scopes, predicates)
        url = self.authorize_url(attempt, connection_token=connection_token)
        page = self.network.get_json(url)
        if page.get("kind") == "redirect":
            # authorize refused up front; record the error outcome
            self.last_result = self.complete(attempt, page["location"])
            raise ClientHarnessError(
                f"authorization refused: {self.last_result.error}"
            )
        attempt.session_id = page["session_id"]
        attempt.poll_url = page["poll_url"]
        attempt.offer = page.get("offer")
        return attempt

    def poll(self, attempt: LoginAttempt) -> dict:
        if attempt.poll_url is None:
            raise ClientHarnessError("attempt has no session yet")
        return self.network.get_json(attempt.poll_url)

    def await_outcome(
        self, attempt: LoginAttempt, *, tries: int = 50, delay: float = 0.0
    ) -> LoginResult:
        for _ in range(tries):
            status = self.poll(attempt)
            if status.get("location"):
                return self.complete(attempt, status["location"])
            if delay:
                time.sleep(delay)
        raise ClientHarnessError(
            f"login did not settle after {tries} polls (last status "
            f"{status.get('status')!r})"
        )

    # ------------------------------------------------------------------
    # redirect handling and token validation

    def complete(self, attempt: LoginAttempt, location: str) -> LoginResult:
        split = urlsplit(location)
        base = location.split("#", 1)[0].split("?", 1)[0]
        if base != self.redirect_uri.split("?", 1)[0]:
            result = LoginResult(ok=False, error="redirect_uri_mismatch")
            self.last_result = result
            return result
        raw = split.fragment if attempt.flow == "implicit" else split.query
        params = {k: v[0] for k, v in parse_qs(raw, keep_blank_values=True).items()}
        return self.complete_from_params(attempt, params)

    def complete_from_params(self, attempt: LoginAttempt, params: dict) -> LoginResult:
        result = self._complete_inner(attempt, params)
        self.last_result = result
        return result

    def _complete_inner(self, attempt: LoginAttempt, params: dict) -> LoginResult:
        if params.get("state") != attempt.state:
            return LoginResult(ok=False, error="state_mismatch")
        if "error" in params:
            return LoginResult(ok=False, error=params["error"])
        if attempt.flow == "implicit":
            token = params.get("id_token")
            if not token:
                return LoginResult(ok=False, error="missing_id_token")
        else:
            code = params.get("code")
            if not code:
                return LoginResult(ok=False, error="missing_code")
            try:
                body = self.network.post_json(
                    self.discovery()["token_endpoint"],
                    {
                        "grant_type": "authorization_code",
                        "code": code,
                        "client_id": self.client_id,
                        "client_secret": self.client_secret,
                    },
                )
            except Exception as exc:  # transport or OIDC error body
                return LoginResult(ok=False, error=f"token_endpoint: {exc}")
            token = body.get("id_token")
            if not token:
                return LoginResult(ok=False, error="token_endpoint_no_id_token")
        try:
            claims = client_validate_id_token(
                token,
                issuer=self.discovery()["issuer"],
                client_id=self.client_id,
                nonce=attempt.nonce,
                jwks=self.jwks(),
                clock=self.runtime.now,
            )
        except TokenValidationError as exc:
            return LoginResult(ok=False, error=type(exc).__name__, id_token=token)
        return LoginResult(ok=True, claims=claims, id_token=token)

    def attempt_for_state(self, state: str) -> LoginAttempt | None:
        return self._attempts.get(state)


_INDEX_PAGE = """<!doctype html>
<html>
<head><meta charset="utf-8"><title>Wine Shop</title></head>
<body>
<h1>Wine Shop</h1>
<p>Age-restricted storefront. Prove you are over 18 with your wallet.</p>
<p><a href="/login?flow=implicit">Login with SSI (implicit)</a></p>
<p><a href="/login?flow=code">Login with SSI (code)</a></p>
</body>
</html>
"""

_CALLBACK_PAGE = """<!doctype html>
<html>
<head><meta charset="utf-8"><title>Completing login…</title></head>
<body>
<h1 id="headline">Completing login…</h1>
<p id="detail"></p>
<script>
async function finish() {
  const raw = window.location.hash
    ? window.location.hash.substring(1)
    : window.location.search.substring(1);
  const params = {};
  for (const [key, value] of new URLSearchParams(raw)) params[key] = value;
  const response = await fetch("/cb/complete", {
    method: "POST",
    headers: {"content-type": "application/json"},
    body: JSON.stringify({params: params}),
  });
  const body = await response.json();
  if (body.ok) {
    document.getElementById("headline").textContent = "Login successful";
    document.getElementById("detail").textContent =
      "Welcome " + (body.claims.email || body.claims.sub) +
      (body.claims.over_18 ? " (age verified)" : "");
  } else {
    document.getElementById("headline").textContent = "Login failed";
    document.getElementById("detail").textContent = body.error || "unknown error";
  }
}
finish();
</script>
</body>
</html>
"""


def build_rp_app(rp: RelyingParty) -> FastAPI:
    app = FastAPI(title="desk-ssi relying party")

    @app.get("/")
    def index():
        return HTMLResponse(_INDEX_PAGE)

    @app.get("/login")
    def login(flow: str = "implicit"):
        attempt = rp.new_attempt(flow)
        return RedirectResponse(
            rp.authorize_url(attempt, html=True), status_code=303
        )

    @app.get("/cb")
    def callback():
        return HTMLResponse(_CALLBACK_PAGE)

    @app.post("/cb/complete")
    async def callback_complete(request: Request):
        body = await request.json()
        params = body.get("params", {})
        attempt = rp.attempt_for_state(params.get("state", ""))
        if attempt is None:
            return JSONResponse({"ok": False, "error": "unknown_state"})
        result = rp.complete_from_params(attempt, params)
        return {"ok": result.ok, "error": result.error, "claims": result.claims}

    @app.get("/result.json")
    def result():
        if rp.last_result is None:
            return {"ok": None}
        return {
            "ok": rp.last_result.ok,
            "error": rp.last_result.error,
            "claims": rp.last_result.claims,
        }

    return app
