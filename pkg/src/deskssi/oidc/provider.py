"""SSI OpenID Connect provider: login sessions backed by proof exchanges.

The provider owns a verifier agent. An authorization request opens an
AuthSession; the holder connects (or is recognized by a returning-browser
token bound to an existing connection), receives a proof request derived
from the requested scopes, and consents in their wallet. A verified
presentation completes the session and the provider mints an EdDSA-signed
ID token whose subject is the holder's pairwise DID for this connection.

The provider keeps no user table: everything it knows about a holder
lives in the verified presentation of the current session, so wiping all
session state never breaks future logins.

Locking: the session lock is never held across a network send, and agent
proof-result callbacks only mutate session state — they never post. All
outbound proof requests are dispatched from HTTP request contexts
(authorize or session poll), which keeps the agent mesh cycle-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from threading import RLock
from urllib.parse import urlencode

from ..agent import Agent, TransportError
from ..canonical import b64url_encode
from ..claims import (
    OIDC_CLAIMS,
    PREDICATE_CLAIMS,
    SCOPE_CLAIMS,
    UnknownScopeError,
    claims_for_scopes,
)
from ..identity import generate_keypair
from ..registry import Registry
from ..runtime import SYSTEM, Runtime
from .tokens import TOKEN_LIFETIME_SECONDS, jwk_for_verkey, jwks_document, jws_sign

SESSION_TTL_SECONDS = 300
CODE_TTL_SECONDS = 60

PENDING_CONNECTION = "PENDING_CONNECTION"
PENDING_PROOF = "PENDING_PROOF"
PROVED = "PROVED"
DENIED = "DENIED"
CONSUMED = "CONSUMED"

_LEGAL_TRANSITIONS = {
    (PENDING_CONNECTION, PENDING_PROOF),
    (PENDING_PROOF, PROVED),
    (PENDING_PROOF, DENIED),
    (PROVED, CONSUMED),
}

# token claims the provider itself asserts; never sourced from a credential
REGISTERED_TOKEN_CLAIMS = frozenset({"iss", "sub", "aud", "iat", "exp", "nonce"})

COOKIE_NAME = "desk_connection"
_COOKIE_ANNOTATION = "cookie_token"


class OidcError(Exception):
    """Base class for provider-side protocol failures."""


class OidcRequestError(OidcError):
    """A request that must be answered with an OIDC error body (no redirect)."""

    def __init__(self, error: str, description: str, http_status: int = 400):
        super().__init__(f"{error}: {description}")
        self.error = error
        self.description = description
        self.http_status = http_status


class OidcStateError(OidcError):
    """An illegal session-status transition was attempted."""


@dataclass
class ClientRegistration:
    client_id: str
    client_secret: str | None
    redirect_uris: tuple[str, ...]
    allowed_flows: frozenset[str]

    def __post_init__(self):
        self.redirect_uris = tuple(self.redirect_uris)
        self.allowed_flows = frozenset(self.allowed_flows)
        if not self.allowed_flows <= {"implicit", "code"}:
            raise ValueError(f"unknown flows {self.allowed_flows}")
        if "code" in self.allowed_flows and not self.client_secret:
            raise ValueError("code flow requires a client_secret")


@dataclass
class AuthSession:
    session_id: str
    client_id: str
    flow: str
    redirect_uri: str
    state: str | None
    nonce: str
    scopes: tuple[str, ...]
    attributes: tuple[str, ...]
    predicates: tuple[str, ...]
    status: str
    connection_ref: str
    created_at: float
    expires_at: float
    proof_dispatched: bool = False
    thread_id: str | None = None
    verified_claims: dict | None = None
    sub: str | None = None
    code: str | None = None
    id_token: str | None = None
    location: str | None = None
    cookie_token: str | None = None
    last_error: str | None = None


@dataclass
class AuthorizeResult:
    """Either a login-page payload or a ready redirect."""

    kind: str  # "page" | "redirect"
    session_id: str | None = None
    payload: dict | None = None
    location: str | None = None


def _normalize_scopes(scope) -> tuple[str, ...]:
    if isinstance(scope, str):
        parts = scope.replace(",", " ").split()
    else:
        parts = list(scope)
    seen: list[str] = []
    for part in parts:
        if part not in seen:
            seen.append(part)
    return tuple(seen)


def _normalize_claims_param(claims) -> tuple[str, ...]:
    if claims is None:
        return ()
    if isinstance(claims, str):
        parts = claims.replace(",", " ").split()
    else:
        parts = list(claims)
    seen: list[str] = []
    for part in parts:
        if part not in seen:
            seen.append(part)
    return tuple(seen)


class OidcProvider:
    def __init__(
        self,
        issuer_url: str,
        registry: Registry,
        network,
        *,
        runtime: Runtime = SYSTEM,
        trusted_issuers=None,
        label: str | None = None,
    ):
        self.issuer_url = issuer_url.rstrip("/")
        self.runtime = runtime
        self.registry = registry
        self.agent = Agent(
            label or self.issuer_url,
            self.issuer_url + "/agent",
            registry,
            network,
            runtime=runtime,
            trusted_issuers=trusted_issuers,
        )
        self.agent.on_proof_result(self._on_proof_result)
        self.signing_keypair = generate_keypair(runtime=runtime)
        self.kid = "sig-" + b64url_encode(runtime.rand(6))
        self.clients: dict[str, ClientRegistration] = {}
        self._sessions: dict[str, AuthSession] = {}
        self._codes: dict[str, tuple[str, float]] = {}
        self._threads: dict[str, str] = {}
        self._lock = RLock()

    # ------------------------------------------------------------------
    # configuration

    def register_client(
        self,
        client_id: str,
        redirect_uris,
        allowed_flows=("implicit", "code"),
        client_secret: str | None = None,
    ) -> ClientRegistration:
        flows = frozenset(allowed_flows)
        if "code" in flows and client_secret is None:
            client_secret = b64url_encode(self.runtime.rand(18))
        registration = ClientRegistration(
            client_id=client_id,
            client_secret=client_secret,
            redirect_uris=tuple(redirect_uris),
            allowed_flows=flows,
        )
        with self._lock:
            self.clients[client_id] = registration
        return registration

    def wipe_user_state(self) -> None:
        """Drop every per-login artifact; clients and connections survive.

        There is deliberately nothing else to drop: the provider stores no
        holder accounts or claim values outside ephemeral sessions.
        """
        with self._lock:
            self._sessions.clear()
            self._codes.clear()
            self._threads.clear()

    # ------------------------------------------------------------------
    # key material

    def jwks(self) -> dict:
        return jwks_document([jwk_for_verkey(self.signing_keypair.verkey, self.kid)])

    def discovery(self) -> dict:
        return {
            "issuer": self.issuer_url,
            "authorization_endpoint": self.issuer_url + "/authorize",
            "token_endpoint": self.issuer_url + "/token",
            "jwks_uri": self.issuer_url + "/jwks",
            "userinfo_endpoint": self.issuer_url + "/userinfo",
            "response_types_supported": ["id_token", "code"],
            "grant_types_supported": ["implicit", "authorization_code"],
            "id_token_signing_alg_values_supported": ["EdDSA"],
            "scopes_supported": sorted(SCOPE_CLAIMS),
            "subject_types_supported": ["pairwise"],
            "claims_supported": list(OIDC_CLAIMS) + list(PREDICATE_CLAIMS),
        }

    # ------------------------------------------------------------------
    # authorization endpoint

    def authorize(
        self,
        *,
        client_id: str,
        redirect_uri: str,
        response_type: str,
        scope,
        nonce: str,
        state: str | None = None,
        claims=None,
        connection_token: str | None = None,
    ) -> AuthorizeResult:
        client = self.clients.get(client_id)
        if client is None:
            raise OidcRequestError("invalid_request", f"unknown client_id {client_id!r}")
        if redirect_uri not in client.redirect_uris:
            # never redirect to an unregistered target
            raise OidcRequestError(
                "invalid_request", "redirect_uri is not registered for this client"
            )

        flow = {"id_token": "implicit", "code": "code"}.get(response_type)
        if flow is None:
            return AuthorizeResult(
                kind="redirect",
                location=self._error_location(
                    redirect_uri, "code", "invalid_request", state
                ),
            )
        if flow not in client.allowed_flows:
            return AuthorizeResult(
                kind="redirect",
                location=self._error_location(redirect_uri, flow, "invalid_request", state),
            )

        scopes = _normalize_scopes(scope)
        if "openid" not in scopes:
            return AuthorizeResult(
                kind="redirect",
                location=self._error_location(redirect_uri, flow, "invalid_request", state),
            )
        try:
            attributes = tuple(claims_for_scopes(scopes))
        except UnknownScopeError:
            return AuthorizeResult(
                kind="redirect",
                location=self._error_location(redirect_uri, flow, "invalid_scope", state),
            )
        predicates = _normalize_claims_param(claims)
        if not set(predicates) <= set(PREDICATE_CLAIMS):
            return AuthorizeResult(
                kind="redirect",
                location=self._error_location(redirect_uri, flow, "invalid_request", state),
            )
        if not nonce:
            return AuthorizeResult(
                kind="redirect",
                location=self._error_location(redirect_uri, flow, "invalid_request", state),
            )

        known_connection = None
        if connection_token:
            found = self.agent.find_connection_by_annotation(
                _COOKIE_ANNOTATION, connection_token
            )
            if found is not None and found.state == "ESTABLISHED":
                known_connection = found

        now = self.runtime.now()
        session_id = b64url_encode(self.runtime.rand(16))
        offer = None
        if known_connection is None:
            offer = self.agent.create_connection_offer()
            connection_ref = offer.sender_did
            status = PENDING_CONNECTION
        else:
            connection_ref = known_connection.my_did
            status = PENDING_PROOF

        session = AuthSession(
            session_id=session_id,
            client_id=client_id,
            flow=flow,
            redirect_uri=redirect_uri,
            state=state,
            nonce=nonce,
            scopes=scopes,
            attributes=attributes,
            predicates=predicates,
            status=status,
            connection_ref=connection_ref,
            created_at=now,
            expires_at=now + SESSION_TTL_SECONDS,
        )
        with self._lock:
            self._sessions[session_id] = session

        if status == PENDING_PROOF:
            # single-step variant: the proof request goes out right away
            self._maybe_dispatch(session_id)

        return AuthorizeResult(
            kind="page",
            session_id=session_id,
            payload={
                "session_id": session_id,
                "poll_url": f"{self.issuer_url}/session/{session_id}",
                "offer": offer.to_dict() if offer is not None else None,
                "requested": {
                    "attributes": list(attributes),
                    "predicates": list(predicates),
                },
            },
        )

    # ------------------------------------------------------------------
    # session lifecycle

    def _get_session(self, session_id: str) -> AuthSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise OidcRequestError("invalid_request", "unknown session", 404)
        if self.runtime.now() > session.expires_at:
            raise OidcRequestError("session_expired", "session expired", 410)
        return session

    def _transition(self, session: AuthSession, to: str) -> None:
        if (session.status, to) not in _LEGAL_TRANSITIONS:
            raise OidcStateError(f"illegal transition {session.status} -> {to}")
        session.status = to

    def poll_session(self, session_id: str) -> dict:
        with self._lock:
            session = self._get_session(session_id)
            if session.status == PENDING_CONNECTION:
                connection = self.agent.try_connection(session.connection_ref)
                if connection is not None and connection.state == "ESTABLISHED":
                    self._transition(session, PENDING_PROOF)
        self._maybe_dispatch(session_id)
        with self._lock:
            session = self._get_session(session_id)
            response = {"session_id": session_id, "status": session.status}
            if session.last_error:
                response["last_error"] = session.last_error
            if session.status in (PROVED, DENIED, CONSUMED):
                response["location"] = session.location
            if session.status in (PROVED, CONSUMED) and session.cookie_token:
                response["connection_token"] = session.cookie_token
            return response

    def _maybe_dispatch(self, session_id: str) -> None:
        """Send the session's proof request if one is due.

        The flag is flipped before the network call and rolled back on
        transport failure, so concurrent polls dispatch at most once and
        an unreachable wallet can be retried.
        """
        with self._lock:
            session = self._sessions.get(session_id)
            if (
                session is None
                or session.status != PENDING_PROOF
                or session.proof_dispatched
            ):
                return
            session.proof_dispatched = True
            thread_id = b64url_encode(self.runtime.rand(12))
            self._threads[thread_id] = session_id
            session.thread_id = thread_id
            connection_ref = session.connection_ref
            attributes = session.attributes
            predicates = session.predicates
            name = f"oidc-login:{session.client_id}"
        try:
            self.agent.send_proof_request(
                connection_ref,
                name,
                attributes,
                predicates,
                thread_id=thread_id,
            )
        except TransportError:
            with self._lock:
                self._threads.pop(thread_id, None)
                if session.thread_id == thread_id:
                    session.proof_dispatched = False
                    session.thread_id = None
            raise

    def _on_proof_result(self, thread_id: str, result: dict) -> None:
        annotate: tuple[str, str] | None = None
        with self._lock:
            session_id = self._threads.pop(thread_id, None)
            if session_id is None:
                return
            session = self._sessions.get(session_id)
            if session is None or session.status != PENDING_PROOF:
                return
            if result["status"] == "verified":
                requested = set(session.attributes) | set(session.predicates)
                session.verified_claims = {
                    name: value
                    for name, value in result["claims"].items()
                    if name in requested
                }
                session.sub = result["subject_did"]
                self._transition(session, PROVED)
                session.cookie_token = b64url_encode(self.runtime.rand(16))
                if session.flow == "implicit":
                    session.id_token = self._mint_id_token(session)
                    session.location = self._success_location(session)
                else:
                    session.code = b64url_encode(self.runtime.rand(16))
                    self._codes[session.code] = (
                        session.session_id,
                        self.runtime.now() + CODE_TTL_SECONDS,
                    )
                    session.location = self._success_location(session)
                annotate = (session.connection_ref, session.cookie_token)
            elif result["status"] == "denied":
                self._transition(session, DENIED)
                session.last_error = result.get("reason")
                session.location = self._error_location(
                    session.redirect_uri, session.flow, "access_denied", session.state
                )
            else:
                # verification failure: stay in PENDING_PROOF; the next
                # poll dispatches a fresh proof request (fresh nonce)
                session.proof_dispatched = False
                session.thread_id = None
                session.last_error = result.get("reason")
        if annotate is not None:
            self.agent.annotate_connection(
                annotate[0], _COOKIE_ANNOTATION, annotate[1]
            )

    # ------------------------------------------------------------------
    # token endpoint / userinfo

    def handle_token(
        self, client_id: str, client_secret: str | None, code: str
    ) -> dict:
        client = self.clients.get(client_id)
        if (
            client is None
            or client.client_secret is None
            or client.client_secret != client_secret
        ):
            raise OidcRequestError("invalid_client", "client authentication failed", 401)
        with self._lock:
            entry = self._codes.pop(code, None)  # single use, atomic
            if entry is None:
                raise OidcRequestError("invalid_grant", "unknown or consumed code")
            session_id, expires_at = entry
            if self.runtime.now() > expires_at:
                raise OidcRequestError("invalid_grant", "code expired")
            session = self._sessions.get(session_id)
            if session is None or session.client_id != client_id:
                raise OidcRequestError("invalid_grant", "code does not match client")
            if session.status != PROVED:
                raise OidcRequestError("invalid_grant", "session not in PROVED state")
            self._transition(session, CONSUMED)
            session.id_token = self._mint_id_token(session)
            return {"id_token": session.id_token, "token_type": "Bearer"}

    def userinfo(self, session_id: str | None) -> dict:
        with self._lock:
            session = self._sessions.get(session_id) if session_id else None
            if session is None or session.status not in (PROVED, CONSUMED):
                raise OidcRequestError(
                    "invalid_token", "no proved session for this credential", 401
                )
            if self.runtime.now() > session.expires_at:
                raise OidcRequestError("invalid_token", "session expired", 401)
            return {"sub": session.sub, **(session.verified_claims or {})}

    # ------------------------------------------------------------------
    # token minting / redirect construction

    def _mint_id_token(self, session: AuthSession) -> str:
        now = int(self.runtime.now())
        claims = {
            "iss": self.issuer_url,
            "sub": session.sub,
            "aud": session.client_id,
            "iat": now,
            "exp": now + TOKEN_LIFETIME_SECONDS,
            "nonce": session.nonce,
        }
        for name, value in (session.verified_claims or {}).items():
            if name not in REGISTERED_TOKEN_CLAIMS:
                claims[name] = value
        return jws_sign(claims, self.signing_keypair, self.kid)

    def _success_location(self, session: AuthSession) -> str:
        if session.flow == "implicit":
            params = {"id_token": session.id_token}
            if session.state is not None:
                params["state"] = session.state
            return session.redirect_uri + "#" + urlencode(params)
        params = {"code": session.code}
        if session.state is not None:
            params["state"] = session.state
        separator = "&" if "?" in session.redirect_uri else "?"
        return session.redirect_uri + separator + urlencode(params)

    def _error_location(
        self, redirect_uri: str, flow: str, error: str, state: str | None
    ) -> str:
        params = {"error": error}
        if state is not None:
            params["state"] = state
        if flow == "implicit":
            return redirect_uri + "#" + urlencode(params)
        separator = "&" if "?" in redirect_uri else "?"
        return redirect_uri + separator + urlencode(params)
