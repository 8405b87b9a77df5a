"""End-to-end demo scenarios: wiring, transcripts, and service hosting.

A scenario builds a complete world — trustee-rooted registry, issuing
agency, holder wallet agent, OIDC provider, relying-party site — and
walks a narrative through it, printing one "STEP <name> OK/FAIL" line
per protocol milestone so integration tests can assert the transcript.
Under a seeded runtime and fixed clock the transcript is byte-identical
across runs.

By default everything runs in-process over the in-memory network; with
http=True each app is served by uvicorn on localhost ports so browsers
(and the wallet UI) can join.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .agent import Agent, HttpNetwork, InMemoryNetwork, build_agent_app
from .claims import CREDENTIAL_CLAIMS
from .credentials import register_claim_def, register_schema
from .identity import SigningIdentity, generate_did, generate_keypair
from .oidc import OidcProvider, RelyingParty, build_provider_app, build_rp_app
from .pki import (
    ensure_x509_schema,
    issue_certificate_vc,
    make_certificate_attrs,
    register_ca,
    register_domain,
    revoke_domain_key,
    verify_certificate_chain,
)
from .registry import (
    NymPayload,
    Registry,
    Role,
    TxnType,
    genesis_transactions,
)
from .runtime import SYSTEM, Runtime

DEMO_PROFILE = {
    "name": "Jane Doe",
    "given_name": "Jane",
    "family_name": "Doe",
    "middle_name": "Marie",
    "nickname": "Janie",
    "profile": "https://janedoe.example/profile",
    "picture": "https://janedoe.example/photo.jpg",
    "website": "https://janedoe.example",
    "email": "jane.doe@example.com",
    "email_verified": True,
    "gender": "female",
    "birthdate": "1990-01-01",
    "zoneinfo": "Europe/Budapest",
    "locale": "hu-HU",
    "phone_number": "+36-1-555-0100",
    "phone_number_verified": True,
    "address": {
        "street_address": "1 Fő utca",
        "locality": "Budapest",
        "postal_code": "1011",
        "country": "HU",
    },
    "updated_at": 1262304000,
}

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ACCESS_DENIED = 3

DAY = 86400


class StepFailure(Exception):
    """A transcript step failed; the failing step has already been printed."""


class Transcript:
    def __init__(self, out=print):
        self.out = out
        self.steps: list[tuple[str, bool]] = []

    def step(self, name: str, fn, detail: str | None = None):
        try:
            value = fn()
        except Exception as exc:
            self.steps.append((name, False))
            self.out(f"STEP {name} FAIL ({type(exc).__name__}: {exc})")
            raise StepFailure(name) from exc
        self.steps.append((name, True))
        suffix = f" ({detail})" if detail else ""
        self.out(f"STEP {name} OK{suffix}")
        return value


def default_ui_dir() -> str | None:
    """The built wallet UI, when the repository checkout carries one."""
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


@dataclass
class ScenarioConfig:
    seed: int | str | None = None
    fixed_clock: float | None = None
    ledger_path: str | None = None
    http: bool = False
    host: str = "127.0.0.1"
    issuer_port: int = 8100
    holder_port: int = 8101
    provider_port: int = 8102
    rp_port: int = 8103
    client_id: str = "wine-shop"
    ui_dir: str | None = None

    def __post_init__(self):
        ports = [self.issuer_port, self.holder_port, self.provider_port, self.rp_port]
        if len(set(ports)) != len(ports):
            raise ValueError(f"service ports must be distinct, got {ports}")

    def runtime(self) -> Runtime:
        if self.seed is not None:
            return Runtime.seeded(self.seed, fixed_clock=self.fixed_clock)
        if self.fixed_clock is not None:
            return Runtime(clock=lambda: self.fixed_clock, rand=SYSTEM.rand)
        return SYSTEM

    @property
    def issuer_url(self) -> str:
        return f"http://{self.host}:{self.issuer_port}"

    @property
    def holder_url(self) -> str:
        return f"http://{self.host}:{self.holder_port}"

    @property
    def provider_url(self) -> str:
        return f"http://{self.host}:{self.provider_port}"

    @property
    def rp_url(self) -> str:
        return f"http://{self.host}:{self.rp_port}"


class _UvicornService:
    def __init__(self, app, host: str, port: int):
        import uvicorn

        self.server = uvicorn.Server(
            uvicorn.Config(app, host=host, port=port, log_level="error")
        )
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def start(self, timeout: float = 10.0) -> None:
        self.thread.start()
        deadline = time.monotonic() + timeout
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("service failed to start")
            if not self.thread.is_alive():
                raise RuntimeError("service thread died during startup")
            time.sleep(0.02)

    def stop(self, timeout: float = 5.0) -> None:
        self.server.should_exit = True
        self.thread.join(timeout)


class ScenarioWorld:
    """Registry + agents + provider + relying party, ready to run flows."""

    def __init__(self, config: ScenarioConfig, *, network=None):
        self.config = config
        self.runtime = config.runtime()
        if network is not None:
            self.network = network
        else:
            self.network = HttpNetwork() if config.http else InMemoryNetwork()
        self._services: list[_UvicornService] = []

        did, keypair = generate_did(runtime=self.runtime)
        self.trustee = SigningIdentity(did=did.render(), keypair=keypair)
        self.registry = Registry.from_transactions(
            genesis_transactions([(self.trustee, "trustee-0")], runtime=self.runtime),
            genesis_height=1,
            path=config.ledger_path,
            clock=self.runtime.now,
        )
        if config.ledger_path:
            self.registry.save()

        did, keypair = generate_did(runtime=self.runtime)
        self.issuer_identity = SigningIdentity(did=did.render(), keypair=keypair)
        self.registry.append_signed(
            self.trustee,
            TxnType.NYM,
            NymPayload(
                dest=self.issuer_identity.did,
                verkey=self.issuer_identity.verkey_b58,
                alias="municipal-office",
                role=Role.ENDORSER,
            ),
        )
        self.schema_seq = register_schema(
            self.registry, self.issuer_identity, "oidc-passport", "1.0", CREDENTIAL_CLAIMS
        )
        self.claim_def_seq = register_claim_def(
            self.registry, self.issuer_identity, self.schema_seq
        )

        self.issuer = Agent(
            "municipal-office",
            self.config.issuer_url,
            self.registry,
            self.network,
            runtime=self.runtime,
            anchored_identity=self.issuer_identity,
        )
        self.holder = Agent(
            "jane",
            self.config.holder_url,
            self.registry,
            self.network,
            runtime=self.runtime,
        )
        self.provider = OidcProvider(
            self.config.provider_url,
            self.registry,
            self.network,
            runtime=self.runtime,
            trusted_issuers={self.issuer_identity.did},
            label="ssi-login",
        )
        registration = self.provider.register_client(
            self.config.client_id,
            [self.config.rp_url + "/cb"],
            ("implicit", "code"),
        )
        self.rp = RelyingParty(
            client_id=self.config.client_id,
            client_secret=registration.client_secret,
            redirect_uri=self.config.rp_url + "/cb",
            provider_url=self.config.provider_url,
            network=self.network,
            runtime=self.runtime,
        )

        ui_dir = self.config.ui_dir or default_ui_dir()
        self.apps = {
            self.config.issuer_url: (
                build_agent_app(self.issuer),
                self.config.issuer_port,
            ),
            self.config.holder_url: (
                build_agent_app(self.holder, static_dir=ui_dir),
                self.config.holder_port,
            ),
            self.config.provider_url: (
                build_provider_app(self.provider),
                self.config.provider_port,
            ),
            self.config.rp_url: (build_rp_app(self.rp), self.config.rp_port),
        }
        if not config.http:
            for url, (app, _port) in self.apps.items():
                self.network.register(url, app)

    # ------------------------------------------------------------------
    # service hosting

    def start(self) -> None:
        if not self.config.http:
            return
        for _url, (app, port) in self.apps.items():
            service = _UvicornService(app, self.config.host, port)
            service.start()
            self._services.append(service)

    def stop(self) -> None:
        for service in self._services:
            service.stop()
        self._services.clear()
        if isinstance(self.network, HttpNetwork):
            self.network.close()

    # ------------------------------------------------------------------
    # shared flow pieces

    def establish_issuer_connection(self):
        offer = self.issuer.create_connection_offer()
        connection = self.holder.accept_connection_offer(offer)
        if connection.state != "ESTABLISHED":
            raise RuntimeError(f"connection state {connection.state}")
        return offer, connection

    def issue_demo_credential(self, issuer_connection_did: str) -> dict:
        self.issuer.offer_credential(
            issuer_connection_did, self.claim_def_seq, dict(DEMO_PROFILE)
        )
        entry = self.holder.pending_list()[-1]
        if entry["kind"] != "credential_offer":
            raise RuntimeError(f"unexpected pending kind {entry['kind']}")
        outcome = self.holder.approve_pending(entry["id"])
        if outcome["status"] != "credential_stored":
            raise RuntimeError(f"issuance outcome {outcome}")
        return self.holder.credentials()[-1]


def run_login_scenario(
    config: ScenarioConfig,
    *,
    flow: str = "implicit",
    deny: bool = False,
    hold: bool = False,
    out=print,
) -> int:
    """The issuance + wine-shop login narrative; returns an exit code."""
    transcript = Transcript(out)
    world = None
    try:
        world = transcript.step("services", lambda: _built_and_started(config))
        offer, _connection = transcript.step(
            "issuer-connection", world.establish_issuer_connection
        )
        credential = transcript.step(
            "credential-issued",
            lambda: world.issue_demo_credential(offer.sender_did),
            detail=f"{len(CREDENTIAL_CLAIMS)} attributes",
        )
        if hold:
            out(f"HOLD relying party    {config.rp_url}/")
            out(f"HOLD provider         {config.provider_url}/")
            out(f"HOLD wallet agent API {config.holder_url}/")
            ui_dir = config.ui_dir or default_ui_dir()
            if ui_dir:
                out(f"HOLD wallet UI        {config.holder_url}/ui/")
            else:
                out("HOLD wallet UI        (not built; frontend/dist missing)")
            out("HOLD press Ctrl-C to stop")
            try:
                while True:
                    time.sleep(0.5)
            except KeyboardInterrupt:
                pass
            return EXIT_OK

        attempt = transcript.step(
            "login-started",
            lambda: world.rp.begin_login(flow=flow),
            detail=f"flow {flow}",
        )
        transcript.step(
            "login-connection",
            lambda: _connect_for_login(world, attempt),
        )
        transcript.step(
            "proof-request",
            lambda: _await_proof_request(world, attempt),
            detail="email, email_verified + over_18",
        )
        if deny:
            transcript.step(
                "consent-denied",
                lambda: world.holder.deny_pending(
                    world.holder.pending_list()[-1]["id"]
                ),
            )
            status = transcript.step(
                "redirect-denied",
                lambda: _await_location(world, attempt, expect_error="access_denied"),
            )
            result = world.rp.complete(attempt, status["location"])
            out(f"RESULT access_denied (holder declined; error={result.error})")
            return EXIT_ACCESS_DENIED

        transcript.step(
            "consent-approved",
            lambda: world.holder.approve_pending(
                world.holder.pending_list()[-1]["id"]
            ),
        )
        status = transcript.step(
            "redirect", lambda: _await_location(world, attempt)
        )
        if flow == "code":
            result = transcript.step(
                "token-endpoint",
                lambda: world.rp.complete(attempt, status["location"]),
                detail="authorization code exchanged",
            )
        else:
            result = transcript.step(
                "token-received",
                lambda: world.rp.complete(attempt, status["location"]),
                detail="id_token in fragment",
            )
        transcript.step(
            "token-validated",
            lambda: _check_token_claims(result, credential),
            detail="signature, iss, aud, nonce, expiry; email and over_18 match",
        )
        transcript.step(
            "userinfo",
            lambda: _check_userinfo(world, attempt, result),
        )
        out(f"RESULT login_ok sub={result.sub}")
        return EXIT_OK
    except StepFailure:
        return EXIT_FAIL
    finally:
        if world is not None:
            world.stop()


def _built_and_started(config: ScenarioConfig) -> ScenarioWorld:
    world = ScenarioWorld(config)
    world.start()
    return world


def _connect_for_login(world: ScenarioWorld, attempt) -> None:
    if attempt.offer is None:
        return  # recognized returning session: nothing to connect
    world.holder.accept_connection_offer(attempt.offer)
    status = world.rp.poll(attempt)
    if status["status"] != "PENDING_PROOF":
        raise RuntimeError(f"session stuck in {status['status']}")


def _await_proof_request(world: ScenarioWorld, attempt) -> dict:
    for _ in range(50):
        pending = world.holder.pending_list()
        if pending and pending[-1]["kind"] == "proof_request":
            return pending[-1]
        world.rp.poll(attempt)
        time.sleep(0.02 if world.config.http else 0)
    raise RuntimeError("proof request never reached the wallet")


def _await_location(world: ScenarioWorld, attempt, expect_error: str | None = None):
    for _ in range(50):
        status = world.rp.poll(attempt)
        if status.get("location"):
            if expect_error and f"error={expect_error}" not in status["location"]:
                raise RuntimeError(f"unexpected redirect {status['location']}")
            return status
        time.sleep(0.02 if world.config.http else 0)
    raise RuntimeError(f"no redirect after consent (status {status['status']})")


def _check_token_claims(result, credential: dict) -> None:
    if not result.ok:
        raise RuntimeError(f"token rejected: {result.error}")
    for name in ("email", "over_18"):
        expected = credential["attributes"][name]["value"]
        if result.claims.get(name) != expected:
            raise RuntimeError(
                f"token claim {name}={result.claims.get(name)!r} != issued {expected!r}"
            )


def _check_userinfo(world: ScenarioWorld, attempt, result) -> None:
    info = world.provider.userinfo(attempt.session_id)
    if info["sub"] != result.sub or info.get("email") != result.claims["email"]:
        raise RuntimeError(f"userinfo mismatch: {info}")


def run_pki_scenario(config: ScenarioConfig, *, out=print) -> int:
    """CA + domain lifecycle: issue, verify, revoke, re-issue."""
    transcript = Transcript(out)
    runtime = config.runtime()
    now = runtime.now()
    try:
        did, keypair = generate_did(runtime=runtime)
        trustee = SigningIdentity(did=did.render(), keypair=keypair)
        registry = Registry.from_transactions(
            genesis_transactions([(trustee, "trustee-0")], runtime=runtime),
            genesis_height=1,
            path=config.ledger_path,
            clock=runtime.now,
        )
        if config.ledger_path:
            registry.save()
        transcript.step("genesis", registry.verify_chain, detail="height 1")

        ca_did, ca_keypair = generate_did(runtime=runtime)
        ca = SigningIdentity(did=ca_did.render(), keypair=ca_keypair)
        transcript.step(
            "ca-registered",
            lambda: register_ca(registry, trustee, ca.did, ca.verkey_b58, "DeskCA"),
            detail="DeskCA as STEWARD",
        )
        domain_keypair = generate_keypair(runtime=runtime)
        domain_did, _seq = transcript.step(
            "domain-registered",
            lambda: register_domain(
                registry, ca, "example.org", domain_keypair.verkey_b58
            ),
            detail="example.org",
        )
        _schema_seq, claim_def_seq = ensure_x509_schema(registry, ca)

        def issue(serial: str):
            attrs = make_certificate_attrs(
                registry,
                "DeskCA",
                domain_did,
                not_before=int(now),
                not_after=int(now) + 90 * DAY,
                serial_number=serial,
            )
            return issue_certificate_vc(
                registry, ca, claim_def_seq, domain_did, attrs, runtime=runtime
            )

        certificate = transcript.step(
            "certificate-issued", lambda: issue("01"), detail="90-day validity"
        )

        def check(cert, expect_ok: bool, expect_diagnostic: str | None = None):
            verdict = verify_certificate_chain(
                "example.org", cert, registry, now + DAY
            )
            if verdict.ok != expect_ok:
                raise RuntimeError(
                    f"verify={verdict.ok} diagnostic={verdict.diagnostic!r}, "
                    f"expected verify={expect_ok}"
                )
            if expect_diagnostic is not None and verdict.diagnostic != expect_diagnostic:
                raise RuntimeError(
                    f"diagnostic {verdict.diagnostic!r} != {expect_diagnostic!r}"
                )
            return verdict

        transcript.step(
            "verify-initial",
            lambda: check(certificate, True),
            detail="verify=true",
        )
        transcript.step(
            "revoke",
            lambda: revoke_domain_key(registry, ca, domain_did, runtime=runtime),
            detail="NYM update with fresh key",
        )
        transcript.step(
            "verify-revoked",
            lambda: check(certificate, False, "alias key mismatch"),
            detail='verify=false, diagnostic="alias key mismatch"',
        )
        reissued = transcript.step(
            "certificate-reissued", lambda: issue("02"), detail="against rotated key"
        )
        transcript.step(
            "verify-reissued",
            lambda: check(reissued, True),
            detail="verify=true",
        )
        chain = transcript.step("chain-audit", registry.verify_chain)
        if not chain:
            return EXIT_FAIL
        out("RESULT pki_ok")
        return EXIT_OK
    except StepFailure:
        return EXIT_FAIL


def run_bench(config: ScenarioConfig, n: int, *, out=print) -> int:
    """Append n NYM transactions and time the sustained local rate."""
    from .identity import did_for_verkey

    runtime = config.runtime()
    did, keypair = generate_did(runtime=runtime)
    trustee = SigningIdentity(did=did.render(), keypair=keypair)
    registry = Registry.from_transactions(
        genesis_transactions([(trustee, "trustee-0")], runtime=runtime),
        genesis_height=1,
        clock=runtime.now,
    )
    started = time.perf_counter()
    for _ in range(n):
        fresh = generate_keypair(runtime=runtime)
        registry.append_signed(
            trustee,
            TxnType.NYM,
            NymPayload(
                dest=did_for_verkey(fresh.verkey).render(),
                verkey=fresh.verkey_b58,
                alias=None,
                role=Role.NONE,
            ),
        )
    elapsed = time.perf_counter() - started
    rate = n / elapsed if elapsed > 0 else float("inf")
    out(f"BENCH appended {n} txns in {elapsed:.2f}s ({rate:.0f} tps)")
    verify_started = time.perf_counter()
    verdict = registry.verify_chain()
    verify_elapsed = time.perf_counter() - verify_started
    out(
        f"BENCH verify_chain {'ok' if verdict else 'FAILED'} in {verify_elapsed:.2f}s"
    )
    return EXIT_OK if verdict else EXIT_FAIL
