"""Credential issuance: schemas, claim definitions, salted commitments.

A credential binds an ordered list of attribute commitments to a subject
DID under the issuer's ledger key. Each commitment is
SHA-256(salt || name || canonical(value)) with a fresh 16-byte salt, so
individual attributes can later be opened selectively: revealing
(name, value, salt) proves membership, withholding them reveals nothing
but the opaque digest.

The issuer signs (schema_seq_no, claim_def_seq_no, subject_did,
commitments) — the full ordered commitment list — which makes every
attribute tamper-evident whether or not it is ever disclosed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from deskssi.canonical import (
    b64url_decode,
    b64url_encode,
    canonical_bytes,
    hex_decode,
)
from deskssi.claims import (
    OIDC_CLAIMS,
    PREDICATE_CLAIMS,
    over_18_from_birthdate,
    validate_claim_value,
)
from deskssi.identity import SigningIdentity, sign
from deskssi.registry import ClaimDefPayload, Registry, SchemaPayload, TxnType
from deskssi.runtime import SYSTEM, Runtime

SALT_LEN = 16

_TYPED_CLAIMS = frozenset(OIDC_CLAIMS) | frozenset(PREDICATE_CLAIMS)


class CredentialError(Exception):
    pass


class AttributeSetError(CredentialError):
    """Values offered for issuance do not match the schema attribute set."""


def commitment_hex(salt: bytes, name: str, value) -> str:
    """SHA-256(salt || name || canonical(value)) as lowercase hex."""
    if len(salt) != SALT_LEN:
        raise CredentialError(f"salt must be {SALT_LEN} bytes")
    return hashlib.sha256(
        salt + name.encode("utf-8") + canonical_bytes(value)
    ).hexdigest()


def credential_signing_input(
    schema_seq_no: int,
    claim_def_seq_no: int,
    subject_did: str,
    commitments: tuple[str, ...],
) -> bytes:
    return canonical_bytes(
        {
            "claim_def_seq_no": claim_def_seq_no,
            "commitments": list(commitments),
            "schema_seq_no": schema_seq_no,
            "subject_did": subject_did,
        }
    )


@dataclass(frozen=True)
class Credential:
    schema_seq_no: int
    claim_def_seq_no: int
    issuer_did: str
    subject_did: str
    # attr name -> (value, salt); insertion order follows the schema
    attributes: Mapping[str, tuple[object, bytes]]
    commitments: tuple[str, ...]
    issuer_signature: bytes
    issued_at: int

    def __post_init__(self):
        object.__setattr__(
            self, "attributes", MappingProxyType(dict(self.attributes))
        )

    def value(self, name: str):
        return self.attributes[name][0]

    def salt(self, name: str) -> bytes:
        return self.attributes[name][1]

    def attribute_names(self) -> tuple[str, ...]:
        return tuple(self.attributes)

    def to_dict(self) -> dict:
        return {
            "schema_seq_no": self.schema_seq_no,
            "claim_def_seq_no": self.claim_def_seq_no,
            "issuer_did": self.issuer_did,
            "subject_did": self.subject_did,
            "attributes": {
                name: {"value": value, "salt": b64url_encode(salt)}
                for name, (value, salt) in self.attributes.items()
            },
            "commitments": list(self.commitments),
            "issuer_signature": b64url_encode(self.issuer_signature),
            "issued_at": self.issued_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Credential":
        try:
            attributes = {
                name: (entry["value"], b64url_decode(entry["salt"], length=SALT_LEN))
                for name, entry in data["attributes"].items()
            }
            commitments = []
            for digest in data["commitments"]:
                hex_decode(digest, length=32)  # canonical lowercase hex only
                commitments.append(digest)
            return cls(
                schema_seq_no=int(data["schema_seq_no"]),
                claim_def_seq_no=int(data["claim_def_seq_no"]),
                issuer_did=data["issuer_did"],
                subject_did=data["subject_did"],
                attributes=attributes,
                commitments=tuple(commitments),
                issuer_signature=b64url_decode(data["issuer_signature"], length=64),
                issued_at=int(data["issued_at"]),
            )
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise CredentialError(f"malformed credential: {exc}") from exc


def register_schema(
    registry: Registry,
    issuer: SigningIdentity,
    name: str,
    version: str,
    attr_names,
) -> int:
    """Append a SCHEMA transaction; returns its sequence number."""
    payload = SchemaPayload(name=name, version=version, attr_names=tuple(attr_names))
    return registry.append_signed(issuer, TxnType.SCHEMA, payload)


def register_claim_def(
    registry: Registry,
    issuer: SigningIdentity,
    schema_seq_no: int,
    tag: str = "default",
) -> int:
    """Append a CLAIM_DEF transaction binding the issuer key to a schema."""
    payload = ClaimDefPayload(
        schema_seq_no=schema_seq_no,
        issuer_did=issuer.did,
        issuer_verkey=issuer.verkey_b58,
        tag=tag,
    )
    return registry.append_signed(issuer, TxnType.CLAIM_DEF, payload)


def issue_credential(
    registry: Registry,
    issuer: SigningIdentity,
    claim_def_seq_no: int,
    subject_did: str,
    values: Mapping[str, object],
    *,
    runtime: Runtime = SYSTEM,
) -> Credential:
    """Issue a credential for exactly the schema's attribute set.

    Derived predicate attributes the schema asks for but the caller did
    not supply are computed here, before signing: over_18 comes from
    birthdate measured against the issuer's clock.
    """
    claim_def = registry.get_claim_def(claim_def_seq_no)
    if claim_def.issuer_did != issuer.did:
        raise CredentialError(
            f"claim def {claim_def_seq_no} belongs to {claim_def.issuer_did}"
        )
    schema = registry.get_schema(claim_def.schema_seq_no)
    values = dict(values)

    if (
        "over_18" in schema.attr_names
        and "over_18" not in values
        and isinstance(values.get("birthdate"), str)
    ):
        values["over_18"] = over_18_from_birthdate(values["birthdate"], runtime.now())

    offered = set(values)
    expected = set(schema.attr_names)
    if offered != expected:
        missing = sorted(expected - offered)
        extra = sorted(offered - expected)
        raise AttributeSetError(
            f"attribute set mismatch: missing {missing}, unexpected {extra}"
        )
    for name, value in values.items():
        if name in _TYPED_CLAIMS:
            validate_claim_value(name, value)

    attributes: dict[str, tuple[object, bytes]] = {}
    commitments: list[str] = []
    for name in schema.attr_names:
        salt = runtime.rand(SALT_LEN)
        attributes[name] = (values[name], salt)
        commitments.append(commitment_hex(salt, name, values[name]))

    signature = sign(
        issuer.keypair,
        credential_signing_input(
            claim_def.schema_seq_no, claim_def_seq_no, subject_did, tuple(commitments)
        ),
    )
    return Credential(
        schema_seq_no=claim_def.schema_seq_no,
        claim_def_seq_no=claim_def_seq_no,
        issuer_did=issuer.did,
        subject_did=subject_did,
        attributes=attributes,
        commitments=tuple(commitments),
        issuer_signature=signature,
        issued_at=runtime.now(),
    )
