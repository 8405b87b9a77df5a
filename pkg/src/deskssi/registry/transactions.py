"""Ledger transaction types and their canonical serialization.

A transaction's hash covers every field except the hash itself, computed
over the canonical JSON of the remaining fields. The signature covers the
canonical JSON of the payload alone and is produced by the submitter.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from deskssi.canonical import (
    ZERO_DIGEST,
    b64url_decode,
    b64url_encode,
    canonical_bytes,
    hex_decode,
    sha256_hex,
)


class TxnType(str, Enum):
    NYM = "NYM"
    SCHEMA = "SCHEMA"
    CLAIM_DEF = "CLAIM_DEF"


class Role(str, Enum):
    TRUSTEE = "TRUSTEE"
    STEWARD = "STEWARD"
    ENDORSER = "ENDORSER"
    NONE = "NONE"

    @property
    def rank(self) -> int:
        return _ROLE_RANK[self]


_ROLE_RANK = {Role.TRUSTEE: 3, Role.STEWARD: 2, Role.ENDORSER: 1, Role.NONE: 0}

#: Roles allowed to write anything at all.
WRITER_ROLES = (Role.TRUSTEE, Role.STEWARD, Role.ENDORSER)

MAX_ALIAS_LEN = 256


class PayloadError(ValueError):
    pass


@dataclass(frozen=True)
class NymPayload:
    dest: str
    verkey: str
    alias: str | None = None
    role: Role = Role.NONE

    def __post_init__(self):
        if self.alias is not None and len(self.alias) > MAX_ALIAS_LEN:
            raise PayloadError("alias longer than 256 characters")

    def to_dict(self) -> dict:
        data = {"dest": self.dest, "verkey": self.verkey, "role": self.role.value}
        if self.alias is not None:
            data["alias"] = self.alias
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "NymPayload":
        return cls(
            dest=data["dest"],
            verkey=data["verkey"],
            alias=data.get("alias"),
            role=Role(data["role"]),
        )


@dataclass(frozen=True)
class SchemaPayload:
    name: str
    version: str
    attr_names: tuple[str, ...]

    def __post_init__(self):
        if not self.attr_names:
            raise PayloadError("schema needs at least one attribute")
        if len(set(self.attr_names)) != len(self.attr_names):
            raise PayloadError("schema attribute names must be unique")
        object.__setattr__(self, "attr_names", tuple(self.attr_names))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "attr_names": list(self.attr_names),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SchemaPayload":
        return cls(
            name=data["name"],
            version=data["version"],
            attr_names=tuple(data["attr_names"]),
        )


@dataclass(frozen=True)
class ClaimDefPayload:
    schema_seq_no: int
    issuer_did: str
    issuer_verkey: str
    tag: str

    def to_dict(self) -> dict:
        return {
            "schema_seq_no": self.schema_seq_no,
            "issuer_did": self.issuer_did,
            "issuer_verkey": self.issuer_verkey,
            "tag": self.tag,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClaimDefPayload":
        return cls(
            schema_seq_no=data["schema_seq_no"],
            issuer_did=data["issuer_did"],
            issuer_verkey=data["issuer_verkey"],
            tag=data["tag"],
        )


Payload = NymPayload | SchemaPayload | ClaimDefPayload

_PAYLOAD_CLASSES = {
    TxnType.NYM: NymPayload,
    TxnType.SCHEMA: SchemaPayload,
    TxnType.CLAIM_DEF: ClaimDefPayload,
}


def payload_signing_bytes(payload: Payload) -> bytes:
    """The bytes a submitter signs: canonical JSON of the payload."""
    return canonical_bytes(payload.to_dict())


@dataclass(frozen=True)
class LedgerTransaction:
    seq_no: int
    txn_type: TxnType
    payload: Payload
    submitter_did: str
    signature: bytes
    timestamp: int
    prev_hash: str
    txn_hash: str

    @staticmethod
    def compute_hash(
        seq_no: int,
        txn_type: TxnType,
        payload: Payload,
        submitter_did: str,
        signature: bytes,
        timestamp: int,
        prev_hash: str,
    ) -> str:
        return sha256_hex(
            canonical_bytes(
                {
                    "seq_no": seq_no,
                    "txn_type": txn_type.value,
                    "payload": payload.to_dict(),
                    "submitter_did": submitter_did,
                    "signature": b64url_encode(signature),
                    "timestamp": timestamp,
                    "prev_hash": prev_hash,
                }
            )
        )

    @classmethod
    def build(
        cls,
        seq_no: int,
        txn_type: TxnType,
        payload: Payload,
        submitter_did: str,
        signature: bytes,
        timestamp: int,
        prev_hash: str,
    ) -> "LedgerTransaction":
        txn_hash = cls.compute_hash(
            seq_no, txn_type, payload, submitter_did, signature, timestamp, prev_hash
        )
        return cls(
            seq_no=seq_no,
            txn_type=txn_type,
            payload=payload,
            submitter_did=submitter_did,
            signature=signature,
            timestamp=timestamp,
            prev_hash=prev_hash,
            txn_hash=txn_hash,
        )

    def recomputed_hash(self) -> str:
        return self.compute_hash(
            self.seq_no,
            self.txn_type,
            self.payload,
            self.submitter_did,
            self.signature,
            self.timestamp,
            self.prev_hash,
        )

    def to_dict(self) -> dict:
        return {
            "seq_no": self.seq_no,
            "txn_type": self.txn_type.value,
            "payload": self.payload.to_dict(),
            "submitter_did": self.submitter_did,
            "signature": b64url_encode(self.signature),
            "timestamp": self.timestamp,
            "prev_hash": self.prev_hash,
            "txn_hash": self.txn_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LedgerTransaction":
        txn_type = TxnType(data["txn_type"])
        payload = _PAYLOAD_CLASSES[txn_type].from_dict(data["payload"])
        seq_no = data["seq_no"]
        timestamp = data["timestamp"]
        if not isinstance(seq_no, int) or isinstance(seq_no, bool) or seq_no < 1:
            raise PayloadError("seq_no must be a positive integer")
        if not isinstance(timestamp, int) or isinstance(timestamp, bool):
            raise PayloadError("timestamp must be an integer")
        hex_decode(data["prev_hash"], length=32)
        hex_decode(data["txn_hash"], length=32)
        return cls(
            seq_no=seq_no,
            txn_type=txn_type,
            payload=payload,
            submitter_did=data["submitter_did"],
            signature=b64url_decode(data["signature"], length=64),
            timestamp=timestamp,
            prev_hash=data["prev_hash"],
            txn_hash=data["txn_hash"],
        )


GENESIS_PREV_HASH = ZERO_DIGEST
