"""Ed25519 keypairs, signing, and base58 encoding.

Verkeys are 32-byte Ed25519 public keys, rendered in base58 (Bitcoin
alphabet) wherever they appear in JSON. Signing keys are the 32-byte
Ed25519 seed.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from deskssi.runtime import SYSTEM, Runtime

_B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(_B58_ALPHABET)}


class KeyError_(ValueError):
    """Malformed key or signature material."""


def base58_encode(raw: bytes) -> str:
    n = int.from_bytes(raw, "big")
    chars = []
    while n:
        n, rem = divmod(n, 58)
        chars.append(_B58_ALPHABET[rem])
    # leading zero bytes map to leading '1's
    pad = len(raw) - len(raw.lstrip(b"\x00"))
    return "1" * pad + "".join(reversed(chars))


def base58_decode(text: str) -> bytes:
    n = 0
    for ch in text:
        if ch not in _B58_INDEX:
            raise ValueError(f"invalid base58 character {ch!r}")
        n = n * 58 + _B58_INDEX[ch]
    raw = n.to_bytes((n.bit_length() + 7) // 8, "big")
    pad = len(text) - len(text.lstrip("1"))
    return b"\x00" * pad + raw


@dataclass(frozen=True)
class KeyPair:
    """Ed25519 keypair: 32-byte secret seed plus derived 32-byte verkey."""

    signing_key: bytes
    verkey: bytes

    @property
    def verkey_b58(self) -> str:
        return base58_encode(self.verkey)

    @classmethod
    def from_seed(cls, seed: bytes) -> "KeyPair":
        if len(seed) != 32:
            raise KeyError_(f"seed must be 32 bytes, got {len(seed)}")
        private = Ed25519PrivateKey.from_private_bytes(seed)
        verkey = private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return cls(signing_key=seed, verkey=verkey)


@dataclass(frozen=True)
class SigningIdentity:
    """A DID together with the keypair that controls it."""

    did: str
    keypair: KeyPair

    @property
    def verkey_b58(self) -> str:
        return self.keypair.verkey_b58


def generate_keypair(seed: bytes | None = None, *, runtime: Runtime = SYSTEM) -> KeyPair:
    if seed is None:
        seed = runtime.rand(32)
    return KeyPair.from_seed(seed)


def sign(signing_key: bytes | KeyPair, message: bytes) -> bytes:
    """EdDSA signature (64 bytes) over the raw message."""
    seed = signing_key.signing_key if isinstance(signing_key, KeyPair) else signing_key
    if len(seed) != 32:
        raise KeyError_(f"signing key must be 32 bytes, got {len(seed)}")
    return Ed25519PrivateKey.from_private_bytes(seed).sign(message)


def verify(verkey: bytes | str, message: bytes, signature: bytes) -> bool:
    """True iff the signature verifies. Raises only on malformed lengths."""
    raw = base58_decode(verkey) if isinstance(verkey, str) else verkey
    if len(raw) != 32:
        raise KeyError_(f"verkey must be 32 bytes, got {len(raw)}")
    if len(signature) != 64:
        raise KeyError_(f"signature must be 64 bytes, got {len(signature)}")
    try:
        Ed25519PublicKey.from_public_bytes(raw).verify(signature, message)
        return True
    except InvalidSignature:
        return False
    except ValueError:
        # e.g. bytes that are not a valid curve point
        return False
