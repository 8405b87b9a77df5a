"""OIDC provider and relying-party client: full login flows over presentations.

Oracle notes:
  [DERIVED] token signatures re-verified with the cryptography library
            directly (independent of the package's verify helper);
            token claim values compared against the issued credential.
  [TRIVIAL] protocol errors (reused code, wrong secret, bad redirect_uri)
            asserted by distinct error type/code.
"""

import json

import pytest
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PublicKey

from deskssi.agent import Agent, InMemoryNetwork, RecordingNetwork, build_agent_app
from deskssi.canonical import b64url_decode
from deskssi.claims import claims_for_scopes
from deskssi.credentials import register_claim_def, register_schema
from deskssi.oidc import (
    AudienceMismatchError,
    ClientHarnessError,
    IssuerMismatchError,
    OidcProvider,
    OidcRequestError,
    RelyingParty,
    TokenExpiredError,
    TokenFormatError,
    TokenNonceError,
    TokenSignatureError,
    TokenValidationError,
    UnknownKeyError,
    build_provider_app,
    build_rp_app,
    client_validate_id_token,
    decode_token_unverified,
    jwk_for_verkey,
    jwks_document,
    jws_sign,
)
from deskssi.identity import generate_keypair
from deskssi.registry import NymPayload, Role, TxnType
from deskssi.runtime import Runtime

from support import (
    CLOCK_2020,
    JANE_INPUT,
    build_registry_world,
    make_identity,
    ticking_runtime,
)

PROVIDER_URL = "http://provider.example"
RP_CALLBACK = "http://wineshop.example/cb"


# ---------------------------------------------------------------------------
# token layer


class TestTokens:
    def setup_method(self):
        self.runtime = Runtime.seeded("tokens", fixed_clock=CLOCK_2020)
        self.keypair = generate_keypair(runtime=self.runtime)
        self.jwks = jwks_document([jwk_for_verkey(self.keypair.verkey, "kid-1")])
        self.claims = {
            "iss": "http://op.example",
            "sub": "did:desk:abc",
            "aud": "shop",
            "iat": CLOCK_2020,
            "exp": CLOCK_2020 + 300,
            "nonce": "n-1",
            "email": "jane.doe@example.com",
        }
        self.token = jws_sign(self.claims, self.keypair, "kid-1")

    def _validate(self, token=None, **overrides):
        kwargs = dict(
            issuer="http://op.example",
            client_id="shop",
            nonce="n-1",
            jwks=self.jwks,
            clock=lambda: CLOCK_2020,
        )
        kwargs.update(overrides)
        return client_validate_id_token(token or self.token, **kwargs)

    def test_roundtrip(self):
        assert self._validate() == self.claims

    def test_three_parts_and_header(self):
        header, payload, _sig, _input = decode_token_unverified(self.token)
        assert self.token.count(".") == 2
        assert header == {"alg": "EdDSA", "kid": "kid-1", "typ": "JWT"}
        assert payload == self.claims

    def test_signature_against_library_oracle(self):
        # re-verify with the cryptography primitive, bypassing package code
        head, body, sig = self.token.split(".")
        public = Ed25519PublicKey.from_public_bytes(self.keypair.verkey)
        public.verify(b64url_decode(sig), f"{head}.{body}".encode("ascii"))

    def test_garbage_token_format_error(self):
        with pytest.raises(TokenFormatError):
            self._validate(token="not-a-token")
        with pytest.raises(TokenFormatError):
            self._validate(token="a.b")

    def test_unknown_kid(self):
        other = jwks_document([jwk_for_verkey(self.keypair.verkey, "other-kid")])
        with pytest.raises(UnknownKeyError):
            self._validate(jwks=other)

    def test_tampered_signature(self):
        head, body, sig = self.token.split(".")
        raw = bytearray(b64url_decode(sig))
        raw[0] ^= 0x01
        from deskssi.canonical import b64url_encode

        with pytest.raises(TokenSignatureError):
            self._validate(token=f"{head}.{body}." + b64url_encode(bytes(raw)))

    def test_tampered_payload(self):
        from deskssi.canonical import b64url_encode, canonical_bytes

        head, _body, sig = self.token.split(".")
        forged = dict(self.claims, email="mallory@example.com")
        body = b64url_encode(canonical_bytes(forged))
        with pytest.raises(TokenSignatureError):
            self._validate(token=f"{head}.{body}.{sig}")

    def test_wrong_issuer(self):
        with pytest.raises(IssuerMismatchError):
            self._validate(issuer="http://evil.example")

    def test_wrong_audience(self):
        with pytest.raises(AudienceMismatchError):
            self._validate(client_id="other-shop")

    def test_wrong_nonce(self):
        with pytest.raises(TokenNonceError):
            self._validate(nonce="different")

    def test_expired(self):
        with pytest.raises(TokenExpiredError):
            self._validate(clock=lambda: CLOCK_2020 + 301)

    def test_error_types_distinct(self):
        kinds = [
            TokenFormatError,
            UnknownKeyError,
            TokenSignatureError,
            IssuerMismatchError,
            AudienceMismatchError,
            TokenNonceError,
            TokenExpiredError,
        ]
        for a in kinds:
            assert issubclass(a, TokenValidationError)
            for b in kinds:
                if a is not b:
                    assert not issubclass(a, b)


# ---------------------------------------------------------------------------
# full login world


class LoginWorld:
    def __init__(self, runtime, provider_url=PROVIDER_URL):
        self.runtime = runtime
        self.network = RecordingNetwork(InMemoryNetwork())
        (
            self.registry,
            self.trustee,
            self.issuer_identity,
            self.schema_seq,
            self.claim_def_seq,
        ) = build_registry_world(runtime)
        self.issuer = Agent(
            "municipal-office",
            "http://issuer.agent",
            self.registry,
            self.network,
            runtime=runtime,
            anchored_identity=self.issuer_identity,
        )
        self.holder = Agent(
            "jane",
            "http://holder.agent",
            self.registry,
            self.network,
            runtime=runtime,
        )
        self.network.inner.register(self.issuer.endpoint, build_agent_app(self.issuer))
        self.network.inner.register(self.holder.endpoint, build_agent_app(self.holder))
        self.provider = self.add_provider(provider_url)
        registration = self.provider.register_client(
            "wine-shop", [RP_CALLBACK], ("implicit", "code")
        )
        self.rp = RelyingParty(
            client_id="wine-shop",
            client_secret=registration.client_secret,
            redirect_uri=RP_CALLBACK,
            provider_url=provider_url,
            network=self.network,
            runtime=runtime,
        )
        self.issue_credential()

    def add_provider(self, url, label=None) -> OidcProvider:
        provider = OidcProvider(
            url,
            self.registry,
            self.network,
            runtime=self.runtime,
            trusted_issuers={self.issuer_identity.did},
            label=label or url,
        )
        self.network.inner.register(url, build_provider_app(provider))
        return provider

    def issue_credential(self):
        offer = self.issuer.create_connection_offer()
        self.holder.accept_connection_offer(offer)
        self.issuer.offer_credential(offer.sender_did, self.claim_def_seq, JANE_INPUT)
        entry = self.holder.pending_list()[-1]
        assert entry["kind"] == "credential_offer"
        self.holder.approve_pending(entry["id"])

    def holder_consent(self, deny=False, credential_id=None):
        entry = self.holder.pending_list()[-1]
        assert entry["kind"] == "proof_request"
        if deny:
            return self.holder.deny_pending(entry["id"])
        return self.holder.approve_pending(entry["id"], credential_id=credential_id)

    def run_login(self, flow="implicit", deny=False, connection_token=None, rp=None):
        rp = rp or self.rp
        attempt = rp.begin_login(flow=flow, connection_token=connection_token)
        if attempt.offer is not None:
            self.holder.accept_connection_offer(attempt.offer)
            rp.poll(attempt)  # provider notices the connection, sends the proof
        self.holder_consent(deny=deny)
        status = rp.poll(attempt)
        assert status.get("location"), f"no outcome yet: {status}"
        result = rp.complete(attempt, status["location"])
        return attempt, result, status


@pytest.fixture()
def runtime():
    return Runtime.seeded("oidc-tests", fixed_clock=CLOCK_2020)


@pytest.fixture()
def world(runtime):
    return LoginWorld(runtime)


class TestImplicitFlow:
    def test_happy_path(self, world):
        attempt, result, status = world.run_login(flow="implicit")
        assert result.ok, result.error
        assert result.claims["email"] == JANE_INPUT["email"]
        assert result.claims["email_verified"] is True
        assert result.claims["over_18"] is True
        assert result.claims["nonce"] == attempt.nonce
        assert result.claims["aud"] == "wine-shop"
        assert "#id_token=" in status["location"] or "id_token=" in status["location"]

    def test_sub_is_holder_pairwise_did(self, world):
        _attempt, result, _status = world.run_login()
        provider_conns = {c.their_did for c in world.provider.agent.connections()}
        assert result.sub in provider_conns
        holder_dids = {c.my_did for c in world.holder.connections()}
        assert result.sub in holder_dids

    def test_status_progression(self, world):
        attempt = world.rp.begin_login()
        assert world.rp.poll(attempt)["status"] == "PENDING_CONNECTION"
        world.holder.accept_connection_offer(attempt.offer)
        assert world.rp.poll(attempt)["status"] == "PENDING_PROOF"
        world.holder_consent()
        status = world.rp.poll(attempt)
        assert status["status"] == "PROVED"
        assert status["connection_token"]

    def test_token_claims_equal_verified_presentation_claims(self, world):
        attempt, result, _status = world.run_login()
        requested = set(claims_for_scopes(attempt.scopes)) | set(attempt.predicates)
        registered = {"iss", "sub", "aud", "iat", "exp", "nonce"}
        token_claims = {
            k: v for k, v in result.claims.items() if k not in registered
        }
        assert set(token_claims) == requested
        credential = world.holder.credentials()[0]
        for name, value in token_claims.items():
            assert value == credential["attributes"][name]["value"]

    def test_userinfo_matches_token(self, world):
        attempt, result, _status = world.run_login()
        info = world.provider.userinfo(attempt.session_id)
        assert info["sub"] == result.sub
        assert info["email"] == result.claims["email"]
        assert info["over_18"] is True

    def test_userinfo_without_proved_session_is_401(self, world):
        with pytest.raises(OidcRequestError) as excinfo:
            world.provider.userinfo("nonsense")
        assert excinfo.value.http_status == 401

    def test_discovery_document(self, world):
        doc = world.rp.discovery()
        assert doc["issuer"] == PROVIDER_URL
        assert doc["authorization_endpoint"] == PROVIDER_URL + "/authorize"
        assert doc["jwks_uri"] == PROVIDER_URL + "/jwks"
        assert "EdDSA" in doc["id_token_signing_alg_values_supported"]
        assert doc["subject_types_supported"] == ["pairwise"]

    def test_scope_mapping_drives_proof_request(self, world):
        attempt = world.rp.begin_login(
            scopes=("openid", "email", "phone"), predicates=()
        )
        world.holder.accept_connection_offer(attempt.offer)
        world.rp.poll(attempt)
        entry = world.holder.pending_list()[-1]
        assert entry["requested_attributes"] == [
            "email",
            "email_verified",
            "phone_number",
            "phone_number_verified",
        ]
        assert entry["requested_predicates"] == []


class TestCodeFlow:
    def test_happy_path(self, world):
        attempt, result, status = world.run_login(flow="code")
        assert result.ok, result.error
        assert "code=" in status["location"]
        assert "#" not in status["location"].split("cb")[1][:1]
        assert result.claims["aud"] == "wine-shop"
        assert result.claims["email"] == JANE_INPUT["email"]

    def test_code_single_use(self, world):
        attempt, result, status = world.run_login(flow="code")
        assert result.ok
        from urllib.parse import parse_qs, urlsplit

        code = parse_qs(urlsplit(status["location"]).query)["code"][0]
        with pytest.raises(OidcRequestError) as excinfo:
            world.provider.handle_token(
                "wine-shop", world.rp.client_secret, code
            )
        assert excinfo.value.error == "invalid_grant"

    def test_wrong_client_secret(self, world):
        attempt = world.rp.begin_login(flow="code")
        world.holder.accept_connection_offer(attempt.offer)
        world.rp.poll(attempt)
        world.holder_consent()
        status = world.rp.poll(attempt)
        from urllib.parse import parse_qs, urlsplit

        code = parse_qs(urlsplit(status["location"]).query)["code"][0]
        with pytest.raises(OidcRequestError) as excinfo:
            world.provider.handle_token("wine-shop", "wrong-secret", code)
        assert excinfo.value.error == "invalid_client"
        assert excinfo.value.http_status == 401

    def test_code_expiry(self):
        runtime, ticker = ticking_runtime("code-expiry")
        world = LoginWorld(runtime)
        attempt = world.rp.begin_login(flow="code")
        world.holder.accept_connection_offer(attempt.offer)
        world.rp.poll(attempt)
        world.holder_consent()
        status = world.rp.poll(attempt)
        from urllib.parse import parse_qs, urlsplit

        code = parse_qs(urlsplit(status["location"]).query)["code"][0]
        ticker.advance(61)
        with pytest.raises(OidcRequestError) as excinfo:
            world.provider.handle_token("wine-shop", world.rp.client_secret, code)
        assert excinfo.value.error == "invalid_grant"


class TestDenial:
    def test_deny_yields_access_denied(self, world):
        _attempt, result, status = world.run_login(deny=True)
        assert not result.ok
        assert result.error == "access_denied"
        assert "error=access_denied" in status["location"]


class TestSubStability:
    def test_same_provider_same_connection_stable_sub(self, world):
        _a1, result1, status1 = world.run_login()
        token = status1["connection_token"]
        attempt2 = world.rp.begin_login(connection_token=token)
        assert attempt2.offer is None  # single-step: no new QR
        world.holder_consent()
        status2 = world.rp.poll(attempt2)
        result2 = world.rp.complete(attempt2, status2["location"])
        assert result2.ok
        assert result2.sub == result1.sub

    def test_two_providers_different_sub(self, world):
        _a1, result1, _s1 = world.run_login()
        other_provider = world.add_provider("http://other-provider.example")
        other_provider.register_client("wine-shop", [RP_CALLBACK], ("implicit",))
        other_rp = RelyingParty(
            client_id="wine-shop",
            redirect_uri=RP_CALLBACK,
            provider_url="http://other-provider.example",
            network=world.network,
            runtime=world.runtime,
        )
        _a2, result2, _s2 = world.run_login(rp=other_rp)
        assert result2.ok, result2.error
        assert result1.sub != result2.sub


class TestAccountFreeLogin:
    def test_no_user_table_and_login_survives_wipe(self, world):
        _a1, result1, status1 = world.run_login()
        token = status1["connection_token"]
        # the only per-user state the provider holds is ephemeral sessions,
        # codes, and thread routing — wipe them all
        world.provider.wipe_user_state()
        assert world.provider._sessions == {}
        assert world.provider._codes == {}
        assert world.provider._threads == {}
        per_user_stores = {
            name
            for name, value in vars(world.provider).items()
            if isinstance(value, dict) and name not in ("clients",)
        }
        assert per_user_stores == {"_sessions", "_codes", "_threads"}
        attempt2 = world.rp.begin_login(connection_token=token)
        assert attempt2.offer is None
        world.holder_consent()
        status2 = world.rp.poll(attempt2)
        result2 = world.rp.complete(attempt2, status2["location"])
        assert result2.ok
        assert result2.sub == result1.sub


class TestVerificationFailureRetry:
    def test_untrusted_credential_then_retry_with_good_one(self, world):
        # a second issuer, anchored but NOT trusted by the provider
        rogue_identity = make_identity(world.runtime)
        world.registry.append_signed(
            world.trustee,
            TxnType.NYM,
            NymPayload(
                dest=rogue_identity.did,
                verkey=rogue_identity.verkey_b58,
                alias="rogue-office",
                role=Role.ENDORSER,
            ),
        )
        rogue_schema = register_schema(
            world.registry,
            rogue_identity,
            "oidc-passport-rogue",
            "1.0",
            tuple(JANE_INPUT) + ("over_18",),
        )
        rogue_def = register_claim_def(world.registry, rogue_identity, rogue_schema)
        rogue_agent = Agent(
            "rogue-office",
            "http://rogue.agent",
            world.registry,
            world.network,
            runtime=world.runtime,
            anchored_identity=rogue_identity,
        )
        world.network.inner.register(rogue_agent.endpoint, build_agent_app(rogue_agent))
        offer = rogue_agent.create_connection_offer()
        world.holder.accept_connection_offer(offer)
        rogue_agent.offer_credential(offer.sender_did, rogue_def, JANE_INPUT)
        entry = world.holder.pending_list()[-1]
        world.holder.approve_pending(entry["id"])
        rogue_cred_id = next(
            c["id"]
            for c in world.holder.credentials()
            if c["issuer_did"] == rogue_identity.did
        )
        good_cred_id = next(
            c["id"]
            for c in world.holder.credentials()
            if c["issuer_did"] == world.issuer_identity.did
        )

        attempt = world.rp.begin_login()
        world.holder.accept_connection_offer(attempt.offer)
        world.rp.poll(attempt)
        world.holder_consent(credential_id=rogue_cred_id)
        status = world.rp.poll(attempt)
        assert status["status"] == "PENDING_PROOF"  # failure is not fatal
        assert "Untrusted" in status["last_error"]
        # that poll dispatched a fresh proof request
        world.holder_consent(credential_id=good_cred_id)
        status = world.rp.poll(attempt)
        assert status["status"] == "PROVED"
        result = world.rp.complete(attempt, status["location"])
        assert result.ok


class TestAuthorizeErrors:
    def _authorize(self, world, **overrides):
        kwargs = dict(
            client_id="wine-shop",
            redirect_uri=RP_CALLBACK,
            response_type="id_token",
            scope="openid email",
            state="s-1",
            nonce="n-1",
        )
        kwargs.update(overrides)
        return world.provider.authorize(**kwargs)

    def test_unknown_client(self, world):
        before = len(world.provider._sessions)
        with pytest.raises(OidcRequestError) as excinfo:
            self._authorize(world, client_id="nobody")
        assert excinfo.value.error == "invalid_request"
        assert len(world.provider._sessions) == before

    def test_unregistered_redirect_uri_no_session(self, world):
        before = len(world.provider._sessions)
        with pytest.raises(OidcRequestError):
            self._authorize(world, redirect_uri="http://evil.example/cb")
        assert len(world.provider._sessions) == before

    def test_disallowed_flow_error_redirect(self, world):
        world.provider.register_client(
            "implicit-only", [RP_CALLBACK], ("implicit",)
        )
        result = self._authorize(
            world, client_id="implicit-only", response_type="code"
        )
        assert result.kind == "redirect"
        assert result.location.startswith(RP_CALLBACK)
        assert "error=invalid_request" in result.location
        assert "state=s-1" in result.location

    def test_unknown_scope(self, world):
        result = self._authorize(world, scope="openid sudo")
        assert result.kind == "redirect"
        assert "error=invalid_scope" in result.location

    def test_missing_openid_scope(self, world):
        result = self._authorize(world, scope="email")
        assert "error=invalid_request" in result.location

    def test_missing_nonce(self, world):
        result = self._authorize(world, nonce="")
        assert "error=invalid_request" in result.location

    def test_unknown_predicate_claim(self, world):
        result = self._authorize(world, claims="password")
        assert "error=invalid_request" in result.location

    def test_harness_surfaces_refusal(self, world):
        world.provider.register_client("implicit-only2", [RP_CALLBACK], ("implicit",))
        bad_rp = RelyingParty(
            client_id="implicit-only2",
            redirect_uri=RP_CALLBACK,
            provider_url=PROVIDER_URL,
            network=world.network,
            runtime=world.runtime,
        )
        with pytest.raises(ClientHarnessError):
            bad_rp.begin_login(flow="code")
        assert bad_rp.last_result.error == "invalid_request"


class TestSessionExpiry:
    def test_expired_session_unusable(self):
        runtime, ticker = ticking_runtime("session-expiry")
        world = LoginWorld(runtime)
        attempt = world.rp.begin_login()
        ticker.advance(301)
        with pytest.raises(OidcRequestError) as excinfo:
            world.provider.poll_session(attempt.session_id)
        assert excinfo.value.http_status == 410


class TestHtmlSurfaces:
    def test_login_page_shows_offer(self, world):
        from starlette.testclient import TestClient

        app = build_provider_app(world.provider)
        client = TestClient(app, base_url=PROVIDER_URL)
        response = client.get(
            PROVIDER_URL + "/authorize",
            params={
                "client_id": "wine-shop",
                "redirect_uri": RP_CALLBACK,
                "response_type": "id_token",
                "scope": "openid email",
                "state": "s",
                "nonce": "n",
                "format": "html",
            },
        )
        assert response.status_code == 200
        assert "text/html" in response.headers["content-type"]
        assert "offer_id" in response.text  # the QR payload is on the page
        assert "/session/" in response.text

    def test_rp_site_pages(self, world):
        from starlette.testclient import TestClient

        app = build_rp_app(world.rp)
        client = TestClient(app, base_url="http://wineshop.example")
        index = client.get("http://wineshop.example/")
        assert index.status_code == 200
        assert "Login with SSI" in index.text
        login = client.get(
            "http://wineshop.example/login", follow_redirects=False
        )
        assert login.status_code == 303
        assert login.headers["location"].startswith(PROVIDER_URL + "/authorize?")
        callback = client.get("http://wineshop.example/cb")
        assert callback.status_code == 200
        assert "/cb/complete" in callback.text

    def test_rp_callback_complete_roundtrip(self, world):
        from urllib.parse import parse_qs, urlsplit

        from starlette.testclient import TestClient

        attempt, _result, status = world.run_login(flow="implicit")
        fragment = urlsplit(status["location"]).fragment
        params = {k: v[0] for k, v in parse_qs(fragment).items()}
        app = build_rp_app(world.rp)
        client = TestClient(app, base_url="http://wineshop.example")
        response = client.post(
            "http://wineshop.example/cb/complete", json={"params": params}
        )
        body = response.json()
        assert body["ok"] is True
        assert body["claims"]["email"] == JANE_INPUT["email"]
        result_page = client.get("http://wineshop.example/result.json").json()
        assert result_page["ok"] is True


class TestWireOpacity:
    def test_no_plaintext_claims_between_agents(self, world):
        world.run_login()
        for url, payload in world.network.posts:
            if url.endswith("/inbox"):
                blob = json.dumps(payload).encode("utf-8")
                assert b"jane.doe@example.com" not in blob
                assert b"1990-01-01" not in blob
