"""The edge agent: connections, credential exchange, proofs, consent.

One Agent instance serves one participant (issuer, holder, or verifier —
the roles are capabilities, not separate classes). All state lives in the
wallet; if the agent was given a wallet path, every mutation is written
through.

Message exchange is strict request/response over POST {endpoint}/inbox:
an inbound envelope may be answered with a response envelope in the same
HTTP response (connection handshake, credential issuance), so no handler
ever has to call back into a peer while serving a request — which keeps
the synchronous in-process transport deadlock-free.

Deliberate consent: PROOF_REQUEST and CREDENTIAL_OFFER are never answered
automatically. They sit in the wallet's pending queue until approve_pending
or deny_pending is called (by the CLI or the wallet UI).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from deskssi.canonical import b64url_decode, b64url_encode, sha256_hex
from deskssi.credentials import (
    Credential,
    NonceStore,
    Presentation,
    PresentationError,
    ProofRequest,
    RequestedAttribute,
    create_presentation,
    issue_credential,
    verify_presentation,
)
from deskssi.identity import (
    AuthcryptEnvelope,
    AuthcryptError,
    SigningIdentity,
    auth_decrypt,
    auth_encrypt,
    generate_did,
)
from deskssi.agent.messages import AgentMessage, MessageError, MessageType
from deskssi.agent.network import Network, TransportError
from deskssi.agent.wallet import Wallet
from deskssi.registry import Registry
from deskssi.runtime import SYSTEM, Runtime


class AgentError(Exception):
    pass


class OfferConsumedError(AgentError):
    pass


class UnknownSenderError(AgentError):
    pass


class PendingNotFoundError(AgentError):
    pass


class NoMatchingCredentialError(AgentError):
    pass


@dataclass(frozen=True)
class ConnectionOffer:
    """The QR-code payload: everything needed to connect back to an agent."""

    offer_id: str
    endpoint: str
    sender_did: str
    sender_verkey: str
    label: str

    def to_dict(self) -> dict:
        return {
            "offer_id": self.offer_id,
            "endpoint": self.endpoint,
            "sender_did": self.sender_did,
            "sender_verkey": self.sender_verkey,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConnectionOffer":
        try:
            return cls(
                offer_id=str(data["offer_id"]),
                endpoint=str(data["endpoint"]),
                sender_did=str(data["sender_did"]),
                sender_verkey=str(data["sender_verkey"]),
                label=str(data["label"]),
            )
        except KeyError as exc:
            raise AgentError(f"malformed connection offer: missing {exc}") from exc


@dataclass(frozen=True)
class PairwiseConnection:
    my_did: str
    their_did: str
    their_verkey: str
    their_endpoint: str | None
    label: str
    state: str

    @classmethod
    def from_record(cls, record: dict) -> "PairwiseConnection":
        return cls(
            my_did=record["my_did"],
            their_did=record.get("their_did", ""),
            their_verkey=record.get("their_verkey", ""),
            their_endpoint=record.get("their_endpoint"),
            label=record.get("label", ""),
            state=record["state"],
        )

    def to_dict(self) -> dict:
        return {
            "my_did": self.my_did,
            "their_did": self.their_did,
            "their_verkey": self.their_verkey,
            "their_endpoint": self.their_endpoint,
            "label": self.label,
            "state": self.state,
        }


def _credential_id(credential_dict: dict) -> str:
    return "cred-" + sha256_hex(
        credential_dict["issuer_signature"].encode("ascii")
    )[:16]


class Agent:
    def __init__(
        self,
        label: str,
        endpoint: str,
        registry: Registry,
        network: Network,
        *,
        runtime: Runtime = SYSTEM,
        wallet_path: str | Path | None = None,
        anchored_identity: SigningIdentity | None = None,
        trusted_issuers: Iterable[str] | None = None,
    ):
        self.label = label
        self.endpoint = endpoint.rstrip("/")
        self.registry = registry
        self.network = network
        self.runtime = runtime
        self.wallet_path = Path(wallet_path) if wallet_path is not None else None
        self.wallet = Wallet.load(self.wallet_path) if self.wallet_path else Wallet()
        self.anchored_identity = anchored_identity
        self.trusted_issuers = (
            set(trusted_issuers) if trusted_issuers is not None else None
        )
        self._lock = threading.RLock()
        self.nonce_store = NonceStore()
        for encoded in self.wallet.consumed_nonces:
            self.nonce_store.consume(b64url_decode(encoded))
        self._proof_callbacks: list[Callable[[str, dict], None]] = []
        # audit trail of every outbound message: (connection my_did, type)
        self.sent_log: list[tuple[str, str]] = []

    # ------------------------------------------------------------------
    # plumbing

    def _persist(self) -> None:
        if self.wallet_path is not None:
            self.wallet.save(self.wallet_path)

    def _meta(self, key: str) -> dict:
        return self.wallet.metadata.setdefault(key, {})

    def _fresh_id(self) -> str:
        return self.runtime.rand(8).hex()

    def on_proof_result(self, callback: Callable[[str, dict], None]) -> None:
        self._proof_callbacks.append(callback)

    def _fire_proof_result(self, thread_id: str, result: dict) -> None:
        for callback in list(self._proof_callbacks):
            callback(thread_id, result)

    # ------------------------------------------------------------------
    # views

    def connections(self) -> list[PairwiseConnection]:
        with self._lock:
            return [
                PairwiseConnection.from_record(record)
                for record in self.wallet.connections.values()
            ]

    def connection(self, my_did: str) -> PairwiseConnection:
        with self._lock:
            record = self.wallet.connections.get(my_did)
            if record is None:
                raise AgentError(f"no connection {my_did}")
            return PairwiseConnection.from_record(record)

    def try_connection(self, my_did: str) -> PairwiseConnection | None:
        with self._lock:
            record = self.wallet.connections.get(my_did)
            if record is None:
                return None
            return PairwiseConnection.from_record(record)

    def annotate_connection(self, my_did: str, key: str, value) -> None:
        """Attach a persisted key/value note to one of our connections."""
        with self._lock:
            record = self.wallet.connections.get(my_did)
            if record is None:
                raise AgentError(f"no connection {my_did}")
            record.setdefault("annotations", {})[key] = value
            self._persist()

    def find_connection_by_annotation(
        self, key: str, value
    ) -> PairwiseConnection | None:
        with self._lock:
            for record in self.wallet.connections.values():
                if record.get("annotations", {}).get(key) == value:
                    return PairwiseConnection.from_record(record)
            return None

    def credentials(self) -> list[dict]:
        with self._lock:
            return [
                {"id": cred_id, **data}
                for cred_id, data in self.wallet.credentials.items()
            ]

    def pending_list(self) -> list[dict]:
        with self._lock:
            return sorted(
                self.wallet.pending.values(), key=lambda e: e["received_at"]
            )

    def proof_result(self, thread_id: str) -> dict | None:
        with self._lock:
            result = self._meta("proof_results").get(thread_id)
            return dict(result) if result is not None else None

    # ------------------------------------------------------------------
    # connection establishment

    def create_connection_offer(self, label: str | None = None) -> ConnectionOffer:
        with self._lock:
            did, keypair = generate_did(runtime=self.runtime)
            my_did = did.render()
            offer_id = b64url_encode(self.runtime.rand(16))
            self.wallet.keypairs[my_did] = keypair
            self.wallet.connections[my_did] = {
                "my_did": my_did,
                "state": "OFFERED",
                "label": "",
                "offer_id": offer_id,
            }
            self._meta("offers")[offer_id] = my_did
            self._persist()
            return ConnectionOffer(
                offer_id=offer_id,
                endpoint=self.endpoint,
                sender_did=my_did,
                sender_verkey=keypair.verkey_b58,
                label=label if label is not None else self.label,
            )

    def accept_connection_offer(
        self, offer: ConnectionOffer | dict
    ) -> PairwiseConnection:
        if isinstance(offer, dict):
            offer = ConnectionOffer.from_dict(offer)
        with self._lock:
            did, keypair = generate_did(runtime=self.runtime)
            my_did = did.render()
            self.wallet.keypairs[my_did] = keypair
            self.wallet.connections[my_did] = {
                "my_did": my_did,
                "their_did": offer.sender_did,
                "their_verkey": offer.sender_verkey,
                "their_endpoint": offer.endpoint,
                "label": offer.label,
                "state": "OFFERED",
            }
            self._persist()
        request = AgentMessage(
            type=MessageType.CONNECTION_REQUEST,
            body={
                "offer_id": offer.offer_id,
                "did": my_did,
                "verkey": keypair.verkey_b58,
                "endpoint": self.endpoint,
                "label": self.label,
            },
            thread_id=offer.offer_id,
        )
        envelope = auth_encrypt(
            keypair, offer.sender_verkey, request.to_bytes(), runtime=self.runtime
        )
        self.sent_log.append((my_did, request.type.value))
        try:
            reply = self.network.post_json(
                offer.endpoint + "/inbox", envelope.to_dict()
            )
        except TransportError as exc:
            if exc.detail and "offer consumed" in str(exc.detail):
                raise OfferConsumedError("offer consumed") from exc
            raise
        response_envelope = reply.get("response_envelope")
        if not response_envelope:
            raise AgentError("peer sent no connection response")
        message, sender_vk, envelope_did = self._open_envelope(response_envelope)
        if message.type is not MessageType.CONNECTION_RESPONSE:
            raise AgentError(f"expected CONNECTION_RESPONSE, got {message.type.value}")
        if (
            sender_vk != offer.sender_verkey
            or message.thread_id != offer.offer_id
            or envelope_did != my_did
        ):
            raise AgentError("connection response does not match the offer")
        with self._lock:
            record = self.wallet.connections[my_did]
            record["their_did"] = message.body["did"]
            record["their_verkey"] = message.body["verkey"]
            record["their_endpoint"] = message.body.get("endpoint", offer.endpoint)
            record["label"] = message.body.get("label", offer.label)
            record["state"] = "ESTABLISHED"
            self._persist()
            return PairwiseConnection.from_record(record)

    # ------------------------------------------------------------------
    # envelope handling

    def _open_envelope(self, data: dict) -> tuple[AgentMessage, str, str]:
        """Decrypt an inbound envelope; returns (message, sender_vk, my_did)."""
        envelope = AuthcryptEnvelope.from_dict(data)
        with self._lock:
            hit = self.wallet.keypair_for_verkey(envelope.recipient_verkey)
        if hit is None:
            raise UnknownSenderError("envelope is not addressed to this agent")
        my_did, keypair = hit
        plaintext, sender_vk = auth_decrypt(keypair, envelope)
        try:
            message = AgentMessage.from_dict(json.loads(plaintext.decode("utf-8")))
        except (ValueError, MessageError) as exc:
            raise AgentError(f"malformed message body: {exc}") from exc
        return message, sender_vk, my_did

    def receive_envelope(self, data: dict) -> dict:
        """Handle POST /inbox. Returns {"ack": ..., "response_envelope": ...}."""
        try:
            message, sender_vk, my_did = self._open_envelope(data)
        except AuthcryptError as exc:
            raise AgentError(f"cannot open envelope: {exc}") from exc

        if message.type is MessageType.CONNECTION_REQUEST:
            return self._handle_connection_request(my_did, sender_vk, message)

        with self._lock:
            record = self.wallet.connections.get(my_did)
            if (
                record is None
                or record["state"] != "ESTABLISHED"
                or record.get("their_verkey") != sender_vk
            ):
                raise UnknownSenderError(
                    "envelope sender verkey does not match any connection"
                )
            handler = {
                MessageType.CREDENTIAL_OFFER: self._handle_credential_offer,
                MessageType.CREDENTIAL_REQUEST: self._handle_credential_request,
                MessageType.CREDENTIAL_ISSUE: self._handle_unexpected,
                MessageType.CONNECTION_RESPONSE: self._handle_unexpected,
                MessageType.PROOF_REQUEST: self._handle_proof_request,
                MessageType.PROOF_PRESENTATION: self._handle_proof_presentation,
                MessageType.PROBLEM_REPORT: self._handle_problem_report,
            }[message.type]
            response = handler(my_did, message)
        # fire result callbacks outside the lock
        pending_fire = response.pop("_fire", None)
        if pending_fire is not None:
            self._fire_proof_result(*pending_fire)
        return response

    def _respond(self, my_did: str, message: AgentMessage) -> dict:
        record = self.wallet.connections[my_did]
        keypair = self.wallet.keypairs[my_did]
        envelope = auth_encrypt(
            keypair, record["their_verkey"], message.to_bytes(), runtime=self.runtime
        )
        self.sent_log.append((my_did, message.type.value))
        return {"ack": True, "response_envelope": envelope.to_dict()}

    def _handle_unexpected(self, my_did: str, message: AgentMessage) -> dict:
        raise AgentError(f"unexpected {message.type.value} outside a request flow")

    # --- connection handshake (responder side) ------------------------

    def _handle_connection_request(
        self, my_did: str, sender_vk: str, message: AgentMessage
    ) -> dict:
        with self._lock:
            record = self.wallet.connections.get(my_did)
            if record is None or "offer_id" not in record:
                raise AgentError("connection request against a non-offer key")
            if record["state"] == "ESTABLISHED":
                raise OfferConsumedError("offer consumed")
            body = message.body
            if body.get("offer_id") != record["offer_id"]:
                raise AgentError("offer id mismatch")
            if body.get("verkey") != sender_vk:
                raise AgentError("connection request key does not match envelope sender")
            record["their_did"] = str(body["did"])
            record["their_verkey"] = str(body["verkey"])
            record["their_endpoint"] = body.get("endpoint")
            record["label"] = str(body.get("label", ""))
            record["state"] = "ESTABLISHED"
            self._persist()
            response = AgentMessage(
                type=MessageType.CONNECTION_RESPONSE,
                body={
                    "did": my_did,
                    "verkey": self.wallet.keypairs[my_did].verkey_b58,
                    "endpoint": self.endpoint,
                    "label": self.label,
                },
                thread_id=message.thread_id,
            )
            return self._respond(my_did, response)

    # ------------------------------------------------------------------
    # outbound messaging

    def send_message(self, my_did: str, message: AgentMessage) -> dict:
        with self._lock:
            record = self.wallet.connections.get(my_did)
            if record is None or record["state"] != "ESTABLISHED":
                raise AgentError(f"no established connection {my_did}")
            keypair = self.wallet.keypairs[my_did]
            their_verkey = record["their_verkey"]
            their_endpoint = record["their_endpoint"]
        if not their_endpoint:
            raise AgentError(f"connection {my_did} has no peer endpoint")
        envelope = auth_encrypt(
            keypair, their_verkey, message.to_bytes(), runtime=self.runtime
        )
        self.sent_log.append((my_did, message.type.value))
        return self.network.post_json(their_endpoint + "/inbox", envelope.to_dict())

    # ------------------------------------------------------------------
    # credential exchange

    def offer_credential(
        self, my_did: str, claim_def_seq_no: int, values: dict
    ) -> str:
        """Issuer: offer a credential over a connection; returns thread id."""
        if self.anchored_identity is None:
            raise AgentError("agent has no anchored issuer identity")
        claim_def = self.registry.get_claim_def(claim_def_seq_no)
        if claim_def.issuer_did != self.anchored_identity.did:
            raise AgentError("claim def does not belong to this agent's identity")
        thread_id = self._fresh_id()
        with self._lock:
            self._meta("issuance_plans")[thread_id] = {
                "claim_def_seq_no": claim_def_seq_no,
                "values": values,
                "connection": my_did,
            }
            self._persist()
        offer = AgentMessage(
            type=MessageType.CREDENTIAL_OFFER,
            body={
                "claim_def_seq_no": claim_def_seq_no,
                "schema_seq_no": claim_def.schema_seq_no,
                "issuer_did": claim_def.issuer_did,
                "preview": values,
            },
            thread_id=thread_id,
        )
        self.send_message(my_did, offer)
        return thread_id

    def _handle_credential_offer(self, my_did: str, message: AgentMessage) -> dict:
        entry_id = self._fresh_id()
        record = self.wallet.connections[my_did]
        self.wallet.pending[entry_id] = {
            "id": entry_id,
            "kind": "credential_offer",
            "connection_id": my_did,
            "connection_label": record.get("label", ""),
            "thread_id": message.thread_id,
            "received_at": self.runtime.now(),
            "body": message.body,
        }
        self._persist()
        return {"ack": True, "response_envelope": None}

    def _handle_credential_request(self, my_did: str, message: AgentMessage) -> dict:
        if self.anchored_identity is None:
            raise AgentError("agent cannot issue: no anchored identity")
        plans = self._meta("issuance_plans")
        plan = plans.get(message.thread_id)
        if plan is None or plan["connection"] != my_did:
            raise AgentError("credential request does not match an open offer")
        record = self.wallet.connections[my_did]
        subject_did = message.body.get("subject_did")
        if subject_did != record["their_did"]:
            raise AgentError("credential subject must be the connection peer DID")
        if message.body.get("claim_def_seq_no") != plan["claim_def_seq_no"]:
            raise AgentError("claim def mismatch against the open offer")
        credential = issue_credential(
            self.registry,
            self.anchored_identity,
            plan["claim_def_seq_no"],
            subject_did,
            plan["values"],
            runtime=self.runtime,
        )
        del plans[message.thread_id]
        self._persist()
        issue = AgentMessage(
            type=MessageType.CREDENTIAL_ISSUE,
            body={"credential": credential.to_dict()},
            thread_id=message.thread_id,
        )
        return self._respond(my_did, issue)

    def _store_issued_credential(
        self, my_did: str, message: AgentMessage
    ) -> str:
        with self._lock:
            accepted = self._meta("accepted_offers")
            if accepted.pop(message.thread_id, None) is None:
                raise AgentError("credential issue outside an accepted offer")
            credential_dict = message.body["credential"]
            credential = Credential.from_dict(credential_dict)
            if credential.subject_did != my_did:
                raise AgentError("issued credential is bound to a different DID")
            cred_id = _credential_id(credential_dict)
            self.wallet.credentials[cred_id] = credential_dict
            self._persist()
            return cred_id

    # ------------------------------------------------------------------
    # proof exchange

    def send_proof_request(
        self,
        my_did: str,
        name: str,
        attributes: Iterable[RequestedAttribute | str],
        predicates: Iterable[str] = (),
        *,
        thread_id: str | None = None,
    ) -> str:
        """Verifier: send a proof request over a connection; returns thread id.

        Callers may supply a pre-generated thread id so they can index the
        outcome before the request ever leaves this agent.
        """
        request = ProofRequest.create(
            name, attributes, predicates, runtime=self.runtime
        )
        if thread_id is None:
            thread_id = self._fresh_id()
        with self._lock:
            self._meta("outstanding_proofs")[thread_id] = {
                "request": request.to_dict(),
                "connection": my_did,
            }
            self._persist()
        self.send_message(
            my_did,
            AgentMessage(
                type=MessageType.PROOF_REQUEST,
                body=request.to_dict(),
                thread_id=thread_id,
            ),
        )
        return thread_id

    def _handle_proof_request(self, my_did: str, message: AgentMessage) -> dict:
        request = ProofRequest.from_dict(message.body)  # validate early
        entry_id = self._fresh_id()
        record = self.wallet.connections[my_did]
        self.wallet.pending[entry_id] = {
            "id": entry_id,
            "kind": "proof_request",
            "connection_id": my_did,
            "connection_label": record.get("label", ""),
            "thread_id": message.thread_id,
            "received_at": self.runtime.now(),
            "body": message.body,
            "requested_attributes": [a.name for a in request.requested_attributes],
            "requested_predicates": list(request.requested_predicates),
        }
        self._persist()
        return {"ack": True, "response_envelope": None}

    def _handle_proof_presentation(self, my_did: str, message: AgentMessage) -> dict:
        outstanding = self._meta("outstanding_proofs")
        context = outstanding.get(message.thread_id)
        if context is None:
            raise AgentError("presentation does not answer an outstanding request")
        if context["connection"] != my_did:
            raise AgentError("presentation arrived on the wrong connection")
        del outstanding[message.thread_id]
        request = ProofRequest.from_dict(context["request"])
        record = self.wallet.connections[my_did]
        try:
            presentation = Presentation.from_dict(message.body["presentation"])
            claims = verify_presentation(
                presentation,
                request,
                self.registry,
                trusted_issuers=self.trusted_issuers,
                nonce_store=self.nonce_store,
            )
            result = {
                "status": "verified",
                "claims": claims,
                "connection_id": my_did,
                "subject_did": record["their_did"],
                "reason": None,
            }
        except (KeyError, PresentationError) as exc:
            result = {
                "status": "failed",
                "claims": None,
                "connection_id": my_did,
                "subject_did": record["their_did"],
                "reason": f"{type(exc).__name__}: {exc}",
            }
        self.wallet.consumed_nonces = [
            b64url_encode(n) for n in self.nonce_store.snapshot()
        ]
        self._meta("proof_results")[message.thread_id] = result
        self._persist()
        return {
            "ack": True,
            "response_envelope": None,
            "_fire": (message.thread_id, result),
        }

    def _handle_problem_report(self, my_did: str, message: AgentMessage) -> dict:
        outstanding = self._meta("outstanding_proofs")
        context = outstanding.pop(message.thread_id, None)
        if context is None:
            return {"ack": True, "response_envelope": None}
        record = self.wallet.connections[my_did]
        result = {
            "status": "denied",
            "claims": None,
            "connection_id": my_did,
            "subject_did": record["their_did"],
            "reason": str(message.body.get("reason", "problem report")),
        }
        self._meta("proof_results")[message.thread_id] = result
        self._persist()
        return {
            "ack": True,
            "response_envelope": None,
            "_fire": (message.thread_id, result),
        }

    # ------------------------------------------------------------------
    # consent

    def _select_credential(
        self, request: ProofRequest, disclosed: set[str], credential_id: str | None
    ) -> tuple[str, Credential]:
        candidates = (
            [(credential_id, self.wallet.credentials.get(credential_id))]
            if credential_id is not None
            else list(self.wallet.credentials.items())
        )
        for cred_id, data in candidates:
            if data is None:
                continue
            credential = Credential.from_dict(data)
            names = set(credential.attribute_names())
            if not set(request.required_names()) <= names:
                continue
            if not disclosed <= names:
                continue
            restrictions_ok = all(
                (r.issuer_did is None or r.issuer_did == credential.issuer_did)
                and (
                    r.schema_seq_no is None
                    or r.schema_seq_no == credential.schema_seq_no
                )
                for r in request.requested_attributes
            )
            if not restrictions_ok:
                continue
            if credential.subject_did not in self.wallet.keypairs:
                continue
            return cred_id, credential
        raise NoMatchingCredentialError(
            "no wallet credential satisfies the proof request"
        )

    def approve_pending(
        self,
        pending_id: str,
        *,
        disclosed: Iterable[str] | None = None,
        credential_id: str | None = None,
    ) -> dict:
        with self._lock:
            entry = self.wallet.pending.get(pending_id)
            if entry is None:
                raise PendingNotFoundError(f"no pending entry {pending_id}")
            if entry["kind"] == "proof_request":
                return self._approve_proof_request(entry, disclosed, credential_id)
            if entry["kind"] == "credential_offer":
                return self._approve_credential_offer(entry)
            raise AgentError(f"unknown pending kind {entry['kind']}")

    def _approve_proof_request(
        self,
        entry: dict,
        disclosed: Iterable[str] | None,
        credential_id: str | None,
    ) -> dict:
        request = ProofRequest.from_dict(entry["body"])
        required = set(request.required_names())
        disclosed_set = set(disclosed) if disclosed is not None else set(required)
        # validate before consuming the entry: failures leave it pending
        cred_id, credential = self._select_credential(
            request, disclosed_set, credential_id
        )
        holder_keypair = self.wallet.keypairs[credential.subject_did]
        presentation = create_presentation(
            holder_keypair, credential, request, disclosed_set
        )
        del self.wallet.pending[entry["id"]]
        self._persist()
        self.send_message(
            entry["connection_id"],
            AgentMessage(
                type=MessageType.PROOF_PRESENTATION,
                body={"presentation": presentation.to_dict()},
                thread_id=entry["thread_id"],
            ),
        )
        return {
            "status": "presented",
            "credential_id": cred_id,
            "disclosed": sorted(disclosed_set),
            "thread_id": entry["thread_id"],
        }

    def _approve_credential_offer(self, entry: dict) -> dict:
        my_did = entry["connection_id"]
        self._meta("accepted_offers")[entry["thread_id"]] = {"connection": my_did}
        del self.wallet.pending[entry["id"]]
        self._persist()
        request = AgentMessage(
            type=MessageType.CREDENTIAL_REQUEST,
            body={
                "claim_def_seq_no": entry["body"]["claim_def_seq_no"],
                "subject_did": my_did,
            },
            thread_id=entry["thread_id"],
        )
        reply = self.send_message(my_did, request)
        response_envelope = reply.get("response_envelope")
        if not response_envelope:
            raise AgentError("issuer sent no credential")
        message, sender_vk, envelope_did = self._open_envelope(response_envelope)
        record = self.wallet.connections[my_did]
        if (
            message.type is not MessageType.CREDENTIAL_ISSUE
            or sender_vk != record["their_verkey"]
            or envelope_did != my_did
        ):
            raise AgentError("unexpected issuance response")
        cred_id = self._store_issued_credential(my_did, message)
        return {
            "status": "credential_stored",
            "credential_id": cred_id,
            "thread_id": entry["thread_id"],
        }

    def deny_pending(self, pending_id: str, reason: str = "consent denied") -> dict:
        with self._lock:
            entry = self.wallet.pending.get(pending_id)
            if entry is None:
                raise PendingNotFoundError(f"no pending entry {pending_id}")
            del self.wallet.pending[pending_id]
            self._persist()
        self.send_message(
            entry["connection_id"],
            AgentMessage(
                type=MessageType.PROBLEM_REPORT,
                body={"reason": reason},
                thread_id=entry["thread_id"],
            ),
        )
        return {"status": "denied", "thread_id": entry["thread_id"]}
