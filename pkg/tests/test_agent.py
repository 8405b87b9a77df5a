"""Edge agents: connections, consent, credential and proof exchange.

The mesh runs fully in-process: each agent's HTTP app is registered on an
in-memory network under its endpoint URL, and a recording wrapper lets
tests observe every byte that crosses the wire.

Oracle notes:
  [TRIVIAL] consent-gate and opacity assertions check for absence of
            events/plaintext rather than computed values.
  [DERIVED] end-to-end claims are compared against the issued values.
"""

import json
import os
import threading

import pytest

from deskssi.agent import (
    Agent,
    AgentError,
    ConnectionOffer,
    InMemoryNetwork,
    NoMatchingCredentialError,
    OfferConsumedError,
    PendingNotFoundError,
    RecordingNetwork,
    UnknownSenderError,
    Wallet,
    WalletError,
    build_agent_app,
)
from deskssi.agent.messages import AgentMessage, MessageType
from deskssi.identity import auth_encrypt, generate_keypair, resolve_did_document
from deskssi.runtime import Runtime

from support import CLOCK_2020, JANE_INPUT, build_registry_world

SENTINELS = [b"jane.doe@example.com", b"1990-01-01", b"Budapest", b"Jane Doe"]


class Mesh:
    def __init__(self, runtime, holder_wallet_path=None):
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
            wallet_path=holder_wallet_path,
        )
        self.verifier = Agent(
            "wine-shop",
            "http://verifier.agent",
            self.registry,
            self.network,
            runtime=runtime,
            trusted_issuers={self.issuer_identity.did},
        )
        for agent in (self.issuer, self.holder, self.verifier):
            self.network.inner.register(agent.endpoint, build_agent_app(agent))

    def connect(self, offerer: Agent, acceptor: Agent):
        offer = offerer.create_connection_offer()
        connection = acceptor.accept_connection_offer(offer)
        return offer, connection

    def issue_to_holder(self) -> str:
        _offer, connection = self.connect(self.issuer, self.holder)
        issuer_conn = self.issuer.connections()[-1].my_did
        self.issuer.offer_credential(issuer_conn, self.claim_def_seq, JANE_INPUT)
        entry = self.holder.pending_list()[-1]
        assert entry["kind"] == "credential_offer"
        outcome = self.holder.approve_pending(entry["id"])
        assert outcome["status"] == "credential_stored"
        return connection.my_did


@pytest.fixture()
def runtime():
    return Runtime.seeded("agent-tests", fixed_clock=CLOCK_2020)


@pytest.fixture()
def mesh(runtime):
    return Mesh(runtime)


class TestConnections:
    def test_offer_fields_and_roundtrip(self, mesh):
        offer = mesh.verifier.create_connection_offer()
        assert offer.endpoint == "http://verifier.agent"
        assert offer.label == "wine-shop"
        restored = ConnectionOffer.from_dict(json.loads(json.dumps(offer.to_dict())))
        assert restored == offer

    def test_two_offers_distinct(self, mesh):
        a = mesh.verifier.create_connection_offer()
        b = mesh.verifier.create_connection_offer()
        assert a.offer_id != b.offer_id
        assert a.sender_did != b.sender_did

    def test_establishment_both_sides(self, mesh):
        offer, connection = mesh.connect(mesh.verifier, mesh.holder)
        assert connection.state == "ESTABLISHED"
        assert connection.their_did == offer.sender_did
        verifier_side = mesh.verifier.connection(offer.sender_did)
        assert verifier_side.state == "ESTABLISHED"
        assert verifier_side.their_did == connection.my_did
        assert verifier_side.their_endpoint == "http://holder.agent"

    def test_offer_reuse_rejected(self, mesh):
        offer, _connection = mesh.connect(mesh.verifier, mesh.holder)
        with pytest.raises(OfferConsumedError):
            mesh.holder.accept_connection_offer(offer)

    def test_pairwise_dids_distinct_over_100_connections(self, mesh):
        my_dids = set()
        peer_dids = set()
        for _ in range(100):
            offer, connection = mesh.connect(mesh.verifier, mesh.holder)
            my_dids.add(connection.my_did)
            peer_dids.add(offer.sender_did)
        assert len(my_dids) == 100
        assert len(peer_dids) == 100
        assert not (my_dids & peer_dids)

    def test_holder_vs_two_verifiers_distinct_dids(self, mesh):
        _o1, c1 = mesh.connect(mesh.verifier, mesh.holder)
        _o2, c2 = mesh.connect(mesh.issuer, mesh.holder)
        assert c1.my_did != c2.my_did

    def test_pairwise_did_document_resolution(self, mesh):
        _offer, connection = mesh.connect(mesh.verifier, mesh.holder)
        doc = resolve_did_document(
            connection.their_did, registry=mesh.registry, pairwise_store=mesh.holder.wallet
        )
        assert doc.verkeys == [connection.their_verkey]
        assert doc.service_endpoint == "http://verifier.agent"


class TestCredentialExchange:
    def test_full_issuance_flow(self, mesh):
        holder_conn_did = mesh.issue_to_holder()
        stored = mesh.holder.credentials()
        assert len(stored) == 1
        credential = stored[0]
        assert credential["subject_did"] == holder_conn_did
        assert credential["attributes"]["email"]["value"] == "jane.doe@example.com"
        assert credential["attributes"]["over_18"]["value"] is True
        assert len(credential["commitments"]) == 19

    def test_denying_offer_stores_nothing(self, mesh):
        mesh.connect(mesh.issuer, mesh.holder)
        issuer_conn = mesh.issuer.connections()[-1].my_did
        mesh.issuer.offer_credential(issuer_conn, mesh.claim_def_seq, JANE_INPUT)
        entry = mesh.holder.pending_list()[-1]
        outcome = mesh.holder.deny_pending(entry["id"])
        assert outcome["status"] == "denied"
        assert mesh.holder.credentials() == []
        assert mesh.holder.pending_list() == []

    def test_offer_requires_owned_claim_def(self, mesh):
        mesh.connect(mesh.verifier, mesh.holder)
        verifier_conn = mesh.verifier.connections()[-1].my_did
        with pytest.raises(AgentError):
            mesh.verifier.offer_credential(verifier_conn, mesh.claim_def_seq, JANE_INPUT)


class TestProofExchange:
    def _request_login_proof(self, mesh) -> tuple[str, str]:
        mesh.issue_to_holder()
        _offer, connection = mesh.connect(mesh.verifier, mesh.holder)
        verifier_conn = mesh.verifier.connection(connection.their_did).my_did
        thread_id = mesh.verifier.send_proof_request(
            verifier_conn, "login", ["email"], ["over_18"]
        )
        return thread_id, verifier_conn

    def test_proof_request_lands_in_pending(self, mesh):
        self._request_login_proof(mesh)
        entry = mesh.holder.pending_list()[-1]
        assert entry["kind"] == "proof_request"
        assert entry["requested_attributes"] == ["email"]
        assert entry["requested_predicates"] == ["over_18"]
        assert entry["connection_label"] == "wine-shop"

    def test_approve_produces_verified_claims(self, mesh):
        thread_id, _ = self._request_login_proof(mesh)
        entry = mesh.holder.pending_list()[-1]
        outcome = mesh.holder.approve_pending(entry["id"])
        assert outcome["status"] == "presented"
        result = mesh.verifier.proof_result(thread_id)
        assert result["status"] == "verified"
        assert result["claims"] == {"email": "jane.doe@example.com", "over_18": True}
        assert mesh.holder.pending_list() == []

    def test_deny_reports_problem(self, mesh):
        thread_id, _ = self._request_login_proof(mesh)
        entry = mesh.holder.pending_list()[-1]
        mesh.holder.deny_pending(entry["id"])
        result = mesh.verifier.proof_result(thread_id)
        assert result["status"] == "denied"
        assert "consent denied" in result["reason"]

    def test_no_matching_credential_keeps_pending(self, mesh):
        # holder has no credential at all
        _offer, connection = mesh.connect(mesh.verifier, mesh.holder)
        verifier_conn = mesh.verifier.connection(connection.their_did).my_did
        mesh.verifier.send_proof_request(verifier_conn, "login", ["email"], ["over_18"])
        entry = mesh.holder.pending_list()[-1]
        sent_before = list(mesh.holder.sent_log)
        with pytest.raises(NoMatchingCredentialError):
            mesh.holder.approve_pending(entry["id"])
        assert mesh.holder.pending_list() != []
        assert mesh.holder.sent_log == sent_before

    def test_consent_gate(self, mesh):
        self._request_login_proof(mesh)
        presented = [
            t for _c, t in mesh.holder.sent_log if t == MessageType.PROOF_PRESENTATION.value
        ]
        assert presented == []
        entry = mesh.holder.pending_list()[-1]
        mesh.holder.approve_pending(entry["id"])
        presented = [
            t for _c, t in mesh.holder.sent_log if t == MessageType.PROOF_PRESENTATION.value
        ]
        assert presented == [MessageType.PROOF_PRESENTATION.value]

    def test_proof_result_callback_fires(self, mesh):
        events = []
        mesh.verifier.on_proof_result(lambda thread, result: events.append((thread, result)))
        thread_id, _ = self._request_login_proof(mesh)
        entry = mesh.holder.pending_list()[-1]
        mesh.holder.approve_pending(entry["id"])
        assert len(events) == 1
        assert events[0][0] == thread_id
        assert events[0][1]["status"] == "verified"

    def test_approve_race_is_atomic(self, mesh):
        self._request_login_proof(mesh)
        entry = mesh.holder.pending_list()[-1]
        outcomes = []

        def worker():
            try:
                outcomes.append(mesh.holder.approve_pending(entry["id"]))
            except PendingNotFoundError:
                outcomes.append(None)

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sum(1 for o in outcomes if o is not None) == 1


class TestEnvelopeRejection:
    def test_stranger_envelope_rejected(self, mesh):
        _offer, connection = mesh.connect(mesh.verifier, mesh.holder)
        stranger = generate_keypair(runtime=mesh.runtime)
        message = AgentMessage(
            type=MessageType.PROOF_REQUEST, body={}, thread_id="x"
        )
        # addressed correctly, but from a key no connection knows
        holder_verkey = mesh.holder.wallet.keypairs[connection.my_did].verkey_b58
        envelope = auth_encrypt(
            stranger, holder_verkey, message.to_bytes(), runtime=mesh.runtime
        )
        with pytest.raises(UnknownSenderError):
            mesh.holder.receive_envelope(envelope.to_dict())

    def test_envelope_for_unknown_key_rejected(self, mesh):
        stranger = generate_keypair(runtime=mesh.runtime)
        other = generate_keypair(runtime=mesh.runtime)
        message = AgentMessage(type=MessageType.PROOF_REQUEST, body={}, thread_id="x")
        envelope = auth_encrypt(
            stranger, other.verkey, message.to_bytes(), runtime=mesh.runtime
        )
        with pytest.raises(UnknownSenderError):
            mesh.holder.receive_envelope(envelope.to_dict())


class TestTransportOpacity:
    ENVELOPE_KEYS = {
        "sender_verkey",
        "recipient_verkey",
        "nonce",
        "ciphertext",
        "sender_signature",
    }

    def test_wire_carries_only_envelopes_and_no_plaintext(self, mesh):
        mesh.issue_to_holder()
        _offer, connection = mesh.connect(mesh.verifier, mesh.holder)
        verifier_conn = mesh.verifier.connection(connection.their_did).my_did
        mesh.verifier.send_proof_request(verifier_conn, "login", ["email"], ["over_18"])
        entry = mesh.holder.pending_list()[-1]
        mesh.holder.approve_pending(entry["id"])

        assert mesh.network.posts, "nothing crossed the wire"
        for url, payload in mesh.network.posts:
            blob = json.dumps(payload).encode("utf-8")
            for sentinel in SENTINELS:
                assert sentinel not in blob, f"plaintext {sentinel!r} on the wire to {url}"
            if url.endswith("/inbox"):
                assert set(payload) == self.ENVELOPE_KEYS


class TestWalletPersistence:
    def test_full_state_roundtrip(self, runtime, tmp_path):
        wallet_path = tmp_path / "jane.wallet"
        mesh = Mesh(runtime, holder_wallet_path=wallet_path)
        mesh.issue_to_holder()
        mesh.connect(mesh.verifier, mesh.holder)

        reloaded = Wallet.load(wallet_path)
        assert reloaded.to_dict() == mesh.holder.wallet.to_dict()
        assert len(reloaded.credentials) == 1
        assert len(reloaded.connections) == 2

    def test_file_permissions(self, runtime, tmp_path):
        wallet_path = tmp_path / "jane.wallet"
        mesh = Mesh(runtime, holder_wallet_path=wallet_path)
        mesh.connect(mesh.verifier, mesh.holder)
        mode = os.stat(wallet_path).st_mode & 0o777
        assert mode == 0o600

    def test_truncated_file_detected(self, runtime, tmp_path):
        wallet_path = tmp_path / "jane.wallet"
        mesh = Mesh(runtime, holder_wallet_path=wallet_path)
        mesh.connect(mesh.verifier, mesh.holder)
        raw = wallet_path.read_text()
        wallet_path.write_text(raw[: len(raw) // 2])
        with pytest.raises(WalletError):
            Wallet.load(wallet_path)

    def test_missing_path_gives_fresh_wallet(self, tmp_path):
        wallet = Wallet.load(tmp_path / "absent.wallet")
        assert wallet.connections == {}
        assert wallet.credentials == {}

    def test_agent_reload_can_continue(self, runtime, tmp_path):
        # a reloaded holder agent still answers proof requests
        wallet_path = tmp_path / "jane.wallet"
        mesh = Mesh(runtime, holder_wallet_path=wallet_path)
        mesh.issue_to_holder()
        _offer, connection = mesh.connect(mesh.verifier, mesh.holder)
        verifier_conn = mesh.verifier.connection(connection.their_did).my_did

        reborn = Agent(
            "jane",
            "http://holder.agent",
            mesh.registry,
            mesh.network,
            runtime=runtime,
            wallet_path=wallet_path,
        )
        mesh.network.inner.register(reborn.endpoint, build_agent_app(reborn))
        thread_id = mesh.verifier.send_proof_request(
            verifier_conn, "login", ["email"], ["over_18"]
        )
        entry = reborn.pending_list()[-1]
        reborn.approve_pending(entry["id"])
        assert mesh.verifier.proof_result(thread_id)["status"] == "verified"


class TestAgentHttpApi:
    def test_full_flow_over_http(self, mesh):
        mesh.issue_to_holder()
        offer = mesh.network.inner.post_json(
            "http://verifier.agent/connections/offer", {}
        )
        accepted = mesh.network.inner.post_json(
            "http://holder.agent/connections/accept", {"offer": offer}
        )
        assert accepted["state"] == "ESTABLISHED"
        verifier_conn = offer["sender_did"]
        thread_id = mesh.verifier.send_proof_request(
            verifier_conn, "login", ["email"], ["over_18"]
        )
        pending = mesh.network.inner.get_json("http://holder.agent/pending")["pending"]
        assert len(pending) == 1
        outcome = mesh.network.inner.post_json(
            f"http://holder.agent/pending/{pending[0]['id']}/approve", {}
        )
        assert outcome["status"] == "presented"
        assert mesh.verifier.proof_result(thread_id)["status"] == "verified"

    def test_deny_over_http(self, mesh):
        mesh.issue_to_holder()
        offer = mesh.network.inner.post_json(
            "http://verifier.agent/connections/offer", {}
        )
        mesh.network.inner.post_json(
            "http://holder.agent/connections/accept", {"offer": offer}
        )
        verifier_conn = offer["sender_did"]
        thread_id = mesh.verifier.send_proof_request(
            verifier_conn, "login", ["email"], ["over_18"]
        )
        pending = mesh.network.inner.get_json("http://holder.agent/pending")["pending"]
        mesh.network.inner.post_json(
            f"http://holder.agent/pending/{pending[0]['id']}/deny",
            {"reason": "consent denied"},
        )
        assert mesh.verifier.proof_result(thread_id)["status"] == "denied"

    def test_api_surfaces_no_secrets(self, mesh):
        mesh.issue_to_holder()
        for path in ("/pending", "/credentials", "/connections"):
            body = mesh.network.inner.get_json(f"http://holder.agent{path}")
            blob = json.dumps(body)
            assert '"seed"' not in blob
            assert "signing_key" not in blob

    def test_unknown_pending_is_404(self, mesh):
        from deskssi.agent.network import TransportError

        with pytest.raises(TransportError) as excinfo:
            mesh.network.inner.post_json(
                "http://holder.agent/pending/nope/approve", {}
            )
        assert excinfo.value.status == 404

    def test_reused_offer_is_409_over_http(self, mesh):
        offer = mesh.network.inner.post_json(
            "http://verifier.agent/connections/offer", {}
        )
        mesh.network.inner.post_json(
            "http://holder.agent/connections/accept", {"offer": offer}
        )
        with pytest.raises(OfferConsumedError):
            mesh.holder.accept_connection_offer(offer)
