"""Wallet state and its single-file persistence.

The wallet is one JSON document followed by a SHA-256 checksum trailer
line; loading verifies the trailer so truncation or corruption is caught
before any state is trusted. The file carries key seeds, so it is written
owner-read/write only.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from deskssi.canonical import (
    b64url_decode,
    b64url_encode,
    canonical_bytes,
    canonical_json,
    sha256_hex,
)
from deskssi.identity import KeyPair


class WalletError(Exception):
    pass


@dataclass
class Wallet:
    # did -> controlling keypair (connection DIDs, offer DIDs)
    keypairs: dict[str, KeyPair] = field(default_factory=dict)
    # my_did -> connection record (their_did, their_verkey, endpoint, state...)
    connections: dict[str, dict] = field(default_factory=dict)
    # credential id -> credential dict
    credentials: dict[str, dict] = field(default_factory=dict)
    # pending consent entries awaiting approve/deny
    pending: dict[str, dict] = field(default_factory=dict)
    # proof-request nonces this wallet's verifier side has consumed
    consumed_nonces: list[str] = field(default_factory=list)
    # free-form agent state (session bindings, issuance plans, ...)
    metadata: dict = field(default_factory=dict)

    # ------------------------------------------------------------------
    def keypair_for_verkey(self, verkey_b58: str) -> tuple[str, KeyPair] | None:
        for did, keypair in self.keypairs.items():
            if keypair.verkey_b58 == verkey_b58:
                return did, keypair
        return None

    def connection_by_their_did(self, their_did: str) -> dict | None:
        for connection in self.connections.values():
            if connection["their_did"] == their_did:
                return connection
        return None

    def lookup_pairwise(self, did: str) -> tuple[str, str | None] | None:
        """Pairwise-store protocol for DID document resolution (peers only)."""
        connection = self.connection_by_their_did(did)
        if connection is None:
            return None
        return connection["their_verkey"], connection.get("their_endpoint")

    # ------------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "keypairs": {
                did: {
                    "seed": b64url_encode(keypair.signing_key),
                    "verkey": keypair.verkey_b58,
                }
                for did, keypair in self.keypairs.items()
            },
            "connections": self.connections,
            "credentials": self.credentials,
            "pending": self.pending,
            "consumed_nonces": list(self.consumed_nonces),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Wallet":
        try:
            keypairs = {
                did: KeyPair.from_seed(b64url_decode(entry["seed"], length=32))
                for did, entry in data["keypairs"].items()
            }
            return cls(
                keypairs=keypairs,
                connections=dict(data["connections"]),
                credentials=dict(data["credentials"]),
                pending=dict(data["pending"]),
                consumed_nonces=list(data["consumed_nonces"]),
                metadata=dict(data["metadata"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise WalletError(f"malformed wallet data: {exc}") from exc

    # ------------------------------------------------------------------
    def save(self, path: str | Path) -> Path:
        path = Path(path)
        data = self.to_dict()
        body = canonical_json(data)
        checksum = sha256_hex(canonical_bytes(data))
        path.parent.mkdir(parents=True, exist_ok=True)
        temp = path.with_name(path.name + ".tmp")
        temp.write_text(body + "\n" + checksum + "\n", encoding="utf-8")
        os.chmod(temp, 0o600)
        os.replace(temp, path)
        return path

    @classmethod
    def load(cls, path: str | Path) -> "Wallet":
        path = Path(path)
        if not path.exists():
            return cls()
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        if len(lines) < 2:
            raise WalletError("wallet file has no checksum trailer")
        body, trailer = lines[0], lines[1]
        if sha256_hex(body.encode("utf-8")) != trailer:
            raise WalletError("wallet checksum mismatch")
        try:
            data = json.loads(body)
        except ValueError as exc:
            raise WalletError(f"wallet body unparseable: {exc}") from exc
        return cls.from_dict(data)
