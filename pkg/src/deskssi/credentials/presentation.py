"""Proof requests, presentations, and five-check verification.

A presentation opens a chosen subset of a credential's commitments and is
bound to a verifier-issued nonce by the holder's signature. Undisclosed
attributes never leave the wallet: the presentation carries only their
commitments, not their values or salts.

The subject of a credential is usually a pairwise DID that no ledger
knows. To let any verifier check holder binding, the presentation carries
the subject verkey, and the DID itself commits to that key (its
identifier is the base58 of the verkey's first 16 bytes). When the
subject DID *is* ledger-anchored, the ledger's current verkey wins — so
rotating an anchored subject key revokes old presentations.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from deskssi.canonical import b64url_decode, b64url_encode, canonical_bytes, hex_decode
from deskssi.credentials.credential import (
    SALT_LEN,
    Credential,
    commitment_hex,
    credential_signing_input,
)
from deskssi.identity import KeyPair, did_for_verkey, parse_did, sign, verify
from deskssi.identity.keys import base58_decode
from deskssi.registry import Registry
from deskssi.runtime import SYSTEM, Runtime

NONCE_LEN = 16


class PresentationError(Exception):
    pass


class RestrictionError(PresentationError):
    """Credential does not satisfy the request's issuer/schema restrictions."""


class MissingAttributeError(PresentationError):
    """Disclosure does not cover an attribute the request requires."""


class IssuerSignatureError(PresentationError):
    """Check 1: issuer signature invalid under the ledger's issuer verkey."""


class CommitmentError(PresentationError):
    """Check 2: a revealed attribute does not re-hash to its commitment."""


class HolderSignatureError(PresentationError):
    """Check 3: holder binding failed (key, DID commitment, or signature)."""


class NonceError(PresentationError):
    """Check 4: request nonce mismatch or replay."""


class NonceMismatchError(NonceError):
    pass


class ReplayError(NonceError):
    pass


class UntrustedIssuerError(PresentationError):
    """Check 5: issuer is not in the verifier's trusted set."""


@dataclass(frozen=True)
class RequestedAttribute:
    name: str
    issuer_did: str | None = None
    schema_seq_no: int | None = None

    def to_dict(self) -> dict:
        data: dict = {"name": self.name}
        if self.issuer_did is not None:
            data["issuer_did"] = self.issuer_did
        if self.schema_seq_no is not None:
            data["schema_seq_no"] = self.schema_seq_no
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RequestedAttribute":
        return cls(
            name=data["name"],
            issuer_did=data.get("issuer_did"),
            schema_seq_no=data.get("schema_seq_no"),
        )


@dataclass(frozen=True)
class ProofRequest:
    name: str
    nonce: bytes
    requested_attributes: tuple[RequestedAttribute, ...]
    requested_predicates: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.nonce) != NONCE_LEN:
            raise PresentationError(f"nonce must be {NONCE_LEN} bytes")
        names = [a.name for a in self.requested_attributes]
        if any(not n for n in names):
            raise PresentationError("requested attribute names must be non-empty")
        if len(set(names)) != len(names):
            raise PresentationError("duplicate requested attribute")

    @classmethod
    def create(
        cls,
        name: str,
        attributes: Iterable[RequestedAttribute | str],
        predicates: Iterable[str] = (),
        *,
        runtime: Runtime = SYSTEM,
    ) -> "ProofRequest":
        normalized = tuple(
            a if isinstance(a, RequestedAttribute) else RequestedAttribute(name=a)
            for a in attributes
        )
        return cls(
            name=name,
            nonce=runtime.rand(NONCE_LEN),
            requested_attributes=normalized,
            requested_predicates=tuple(predicates),
        )

    def required_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.requested_attributes) + tuple(
            self.requested_predicates
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "nonce": b64url_encode(self.nonce),
            "requested_attributes": [a.to_dict() for a in self.requested_attributes],
            "requested_predicates": list(self.requested_predicates),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProofRequest":
        try:
            return cls(
                name=data["name"],
                nonce=b64url_decode(data["nonce"], length=NONCE_LEN),
                requested_attributes=tuple(
                    RequestedAttribute.from_dict(a)
                    for a in data["requested_attributes"]
                ),
                requested_predicates=tuple(data["requested_predicates"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise PresentationError(f"malformed proof request: {exc}") from exc


@dataclass(frozen=True)
class CredentialRef:
    """The commitment skeleton of a credential, with no attribute values."""

    schema_seq_no: int
    claim_def_seq_no: int
    issuer_did: str
    subject_did: str
    commitments: tuple[str, ...]
    issuer_signature: bytes

    def to_dict(self) -> dict:
        return {
            "schema_seq_no": self.schema_seq_no,
            "claim_def_seq_no": self.claim_def_seq_no,
            "issuer_did": self.issuer_did,
            "subject_did": self.subject_did,
            "commitments": list(self.commitments),
            "issuer_signature": b64url_encode(self.issuer_signature),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CredentialRef":
        commitments = []
        for digest in data["commitments"]:
            hex_decode(digest, length=32)  # canonical lowercase hex only
            commitments.append(digest)
        return cls(
            schema_seq_no=int(data["schema_seq_no"]),
            claim_def_seq_no=int(data["claim_def_seq_no"]),
            issuer_did=data["issuer_did"],
            subject_did=data["subject_did"],
            commitments=tuple(commitments),
            issuer_signature=b64url_decode(data["issuer_signature"], length=64),
        )

    @classmethod
    def of(cls, credential: Credential) -> "CredentialRef":
        return cls(
            schema_seq_no=credential.schema_seq_no,
            claim_def_seq_no=credential.claim_def_seq_no,
            issuer_did=credential.issuer_did,
            subject_did=credential.subject_did,
            commitments=credential.commitments,
            issuer_signature=credential.issuer_signature,
        )


def _holder_signing_input(
    nonce: bytes, credential_ref: CredentialRef, revealed: Mapping[str, tuple]
) -> bytes:
    return canonical_bytes(
        {
            "credential_ref": credential_ref.to_dict(),
            "nonce": b64url_encode(nonce),
            "revealed": {
                name: {"salt": b64url_encode(salt), "value": value}
                for name, (value, salt) in revealed.items()
            },
        }
    )


@dataclass(frozen=True)
class Presentation:
    proof_request_nonce: bytes
    credential_ref: CredentialRef
    # attr name -> (value, salt) for disclosed attributes only
    revealed: Mapping[str, tuple[object, bytes]]
    subject_verkey: str
    holder_signature: bytes

    def __post_init__(self):
        object.__setattr__(self, "revealed", MappingProxyType(dict(self.revealed)))

    def to_dict(self) -> dict:
        return {
            "proof_request_nonce": b64url_encode(self.proof_request_nonce),
            "credential_ref": self.credential_ref.to_dict(),
            "revealed": {
                name: {"salt": b64url_encode(salt), "value": value}
                for name, (value, salt) in self.revealed.items()
            },
            "subject_verkey": self.subject_verkey,
            "holder_signature": b64url_encode(self.holder_signature),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Presentation":
        try:
            revealed = {
                name: (entry["value"], b64url_decode(entry["salt"], length=SALT_LEN))
                for name, entry in data["revealed"].items()
            }
            return cls(
                proof_request_nonce=b64url_decode(
                    data["proof_request_nonce"], length=NONCE_LEN
                ),
                credential_ref=CredentialRef.from_dict(data["credential_ref"]),
                revealed=revealed,
                subject_verkey=data["subject_verkey"],
                holder_signature=b64url_decode(data["holder_signature"], length=64),
            )
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise PresentationError(f"malformed presentation: {exc}") from exc


def create_presentation(
    holder: KeyPair,
    credential: Credential,
    proof_request: ProofRequest,
    disclosed: Iterable[str],
) -> Presentation:
    """Open the disclosed attributes of a credential against a request."""
    disclosed = set(disclosed)
    available = set(credential.attribute_names())
    unknown = disclosed - available
    if unknown:
        raise MissingAttributeError(
            f"credential has no attribute {sorted(unknown)}"
        )
    for requested in proof_request.requested_attributes:
        if (
            requested.issuer_did is not None
            and requested.issuer_did != credential.issuer_did
        ):
            raise RestrictionError(
                f"request requires issuer {requested.issuer_did}, "
                f"credential is from {credential.issuer_did}"
            )
        if (
            requested.schema_seq_no is not None
            and requested.schema_seq_no != credential.schema_seq_no
        ):
            raise RestrictionError(
                f"request requires schema {requested.schema_seq_no}, "
                f"credential uses {credential.schema_seq_no}"
            )
    required = set(proof_request.required_names())
    short = required - disclosed
    if short:
        raise MissingAttributeError(
            f"request requires undisclosed attributes {sorted(short)}"
        )
    missing_from_credential = required - available
    if missing_from_credential:
        raise MissingAttributeError(
            f"credential lacks required attributes {sorted(missing_from_credential)}"
        )
    ref = CredentialRef.of(credential)
    revealed = {name: credential.attributes[name] for name in sorted(disclosed)}
    signature = sign(
        holder, _holder_signing_input(proof_request.nonce, ref, revealed)
    )
    return Presentation(
        proof_request_nonce=proof_request.nonce,
        credential_ref=ref,
        revealed=revealed,
        subject_verkey=holder.verkey_b58,
        holder_signature=signature,
    )


@dataclass
class NonceStore:
    """Serialized consume-once bookkeeping for verifier nonces."""

    _consumed: set = field(default_factory=set)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def consume(self, nonce: bytes) -> bool:
        """True the first time a nonce is consumed, False on any replay."""
        with self._lock:
            if nonce in self._consumed:
                return False
            self._consumed.add(nonce)
            return True

    def snapshot(self) -> list[bytes]:
        with self._lock:
            return sorted(self._consumed)


def verify_presentation(
    presentation: Presentation,
    proof_request: ProofRequest,
    registry: Registry,
    *,
    trusted_issuers: Iterable[str] | None = None,
    nonce_store: NonceStore | None = None,
) -> dict:
    """Run the five verification checks; returns the revealed claim map.

    1. issuer signature, under the issuer verkey currently on the ledger;
    2. every revealed (name, value, salt) re-hashes to the commitment at
       that attribute's schema position;
    3. holder signature under the subject DID's key, covering the nonce;
    4. the nonce matches the outstanding request and is fresh;
    5. the issuer is trusted, when a trusted set is given.
    Each check fails with its own exception type.
    """
    ref = presentation.credential_ref

    # (1) issuer signature against the ledger's current verkey
    issuer = registry.try_resolve_nym(ref.issuer_did)
    if issuer is None:
        raise IssuerSignatureError(f"issuer {ref.issuer_did} not on the ledger")
    signing_input = credential_signing_input(
        ref.schema_seq_no, ref.claim_def_seq_no, ref.subject_did, ref.commitments
    )
    try:
        issuer_ok = verify(issuer.verkey, signing_input, ref.issuer_signature)
    except ValueError as exc:
        raise IssuerSignatureError(f"issuer verkey malformed: {exc}") from exc
    if not issuer_ok:
        raise IssuerSignatureError("issuer signature does not verify")

    # (2) commitment openings
    try:
        schema = registry.get_schema(ref.schema_seq_no)
    except Exception as exc:
        raise CommitmentError(f"schema {ref.schema_seq_no} unavailable: {exc}") from exc
    if len(ref.commitments) != len(schema.attr_names):
        raise CommitmentError(
            f"commitment count {len(ref.commitments)} != schema attribute "
            f"count {len(schema.attr_names)}"
        )
    for name, (value, salt) in presentation.revealed.items():
        if name not in schema.attr_names:
            raise CommitmentError(f"{name!r} is not a schema attribute")
        position = schema.attr_names.index(name)
        if commitment_hex(salt, name, value) != ref.commitments[position]:
            raise CommitmentError(f"commitment mismatch for {name!r}")

    # (3) holder binding
    anchored = registry.try_resolve_nym(ref.subject_did)
    if anchored is not None:
        holder_verkey = anchored.verkey
    else:
        holder_verkey = presentation.subject_verkey
        try:
            raw = base58_decode(holder_verkey)
            subject = parse_did(ref.subject_did)
        except ValueError as exc:
            raise HolderSignatureError(f"subject verkey malformed: {exc}") from exc
        if len(raw) != 32:
            raise HolderSignatureError("subject verkey must be 32 bytes")
        if did_for_verkey(raw).identifier != subject.identifier:
            raise HolderSignatureError(
                "subject verkey does not match the subject DID"
            )
    holder_input = _holder_signing_input(
        presentation.proof_request_nonce, ref, presentation.revealed
    )
    try:
        holder_ok = verify(holder_verkey, holder_input, presentation.holder_signature)
    except ValueError as exc:
        raise HolderSignatureError(f"holder verkey malformed: {exc}") from exc
    if not holder_ok:
        raise HolderSignatureError("holder signature does not verify")

    # (4) nonce freshness
    if presentation.proof_request_nonce != proof_request.nonce:
        raise NonceMismatchError("presentation answers a different request nonce")
    if nonce_store is not None and not nonce_store.consume(proof_request.nonce):
        raise ReplayError("request nonce already consumed")

    # (5) issuer trust policy
    if trusted_issuers is not None and ref.issuer_did not in set(trusted_issuers):
        raise UntrustedIssuerError(f"issuer {ref.issuer_did} is not trusted")

    return {name: value for name, (value, _salt) in presentation.revealed.items()}
