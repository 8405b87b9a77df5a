"""Authenticated public-key encryption between two Ed25519 identities.

The envelope carries a ciphertext only the recipient can open plus an
EdDSA signature by the sender over (recipient verkey, nonce, ciphertext),
so the recipient both decrypts and authenticates who sent it.

Mechanism: both Ed25519 keys are mapped to their Montgomery (X25519)
form, a Diffie-Hellman shared secret is computed, and an AEAD key and
nonce are derived from it with HKDF bound to the envelope nonce and both
verkeys. The cipher is ChaCha20-Poly1305.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.hashes import SHA256
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from deskssi.canonical import b64url_decode, b64url_encode
from deskssi.identity.keys import KeyPair, base58_decode, base58_encode, sign, verify
from deskssi.runtime import SYSTEM, Runtime

_P = 2**255 - 19
_HKDF_INFO = b"authcrypt-v1"

NONCE_LEN = 24


class AuthcryptError(ValueError):
    """Envelope cannot be opened or fails authentication."""


def ed25519_pk_to_x25519(verkey: bytes) -> bytes:
    """Montgomery u-coordinate of an Ed25519 public key: u = (1+y)/(1-y)."""
    if len(verkey) != 32:
        raise AuthcryptError("verkey must be 32 bytes")
    y = int.from_bytes(verkey, "little") & ((1 << 255) - 1)
    denominator = (1 - y) % _P
    if denominator == 0:
        raise AuthcryptError("verkey has no Montgomery form")
    u = (1 + y) * pow(denominator, _P - 2, _P) % _P
    return u.to_bytes(32, "little")


def ed25519_seed_to_x25519(seed: bytes) -> bytes:
    """X25519 secret scalar for an Ed25519 seed (clamping happens in X25519)."""
    return hashlib.sha512(seed).digest()[:32]


@dataclass(frozen=True)
class AuthcryptEnvelope:
    sender_verkey: str
    recipient_verkey: str
    nonce: bytes
    ciphertext: bytes
    sender_signature: bytes

    def to_dict(self) -> dict:
        return {
            "sender_verkey": self.sender_verkey,
            "recipient_verkey": self.recipient_verkey,
            "nonce": b64url_encode(self.nonce),
            "ciphertext": b64url_encode(self.ciphertext),
            "sender_signature": b64url_encode(self.sender_signature),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuthcryptEnvelope":
        try:
            return cls(
                sender_verkey=data["sender_verkey"],
                recipient_verkey=data["recipient_verkey"],
                nonce=b64url_decode(data["nonce"], length=NONCE_LEN),
                ciphertext=b64url_decode(data["ciphertext"]),
                sender_signature=b64url_decode(data["sender_signature"], length=64),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise AuthcryptError(f"malformed envelope: {exc}") from exc


def _signed_portion(recipient_verkey: bytes, nonce: bytes, ciphertext: bytes) -> bytes:
    # fixed-length fields first, so the concatenation is unambiguous
    return recipient_verkey + nonce + ciphertext


def _derive_aead(
    shared_secret: bytes, nonce: bytes, sender_vk: bytes, recipient_vk: bytes
) -> tuple[bytes, bytes]:
    material = HKDF(
        algorithm=SHA256(),
        length=44,
        salt=nonce,
        info=_HKDF_INFO + sender_vk + recipient_vk,
    ).derive(shared_secret)
    return material[:32], material[32:]


def auth_encrypt(
    sender: KeyPair,
    recipient_verkey: str | bytes,
    plaintext: bytes,
    *,
    runtime: Runtime = SYSTEM,
) -> AuthcryptEnvelope:
    recipient_vk = (
        base58_decode(recipient_verkey)
        if isinstance(recipient_verkey, str)
        else recipient_verkey
    )
    nonce = runtime.rand(NONCE_LEN)
    secret = X25519PrivateKey.from_private_bytes(
        ed25519_seed_to_x25519(sender.signing_key)
    )
    peer = X25519PublicKey.from_public_bytes(ed25519_pk_to_x25519(recipient_vk))
    key, aead_nonce = _derive_aead(
        secret.exchange(peer), nonce, sender.verkey, recipient_vk
    )
    ciphertext = ChaCha20Poly1305(key).encrypt(aead_nonce, plaintext, None)
    signature = sign(sender, _signed_portion(recipient_vk, nonce, ciphertext))
    return AuthcryptEnvelope(
        sender_verkey=sender.verkey_b58,
        recipient_verkey=base58_encode(recipient_vk),
        nonce=nonce,
        ciphertext=ciphertext,
        sender_signature=signature,
    )


def auth_decrypt(
    recipient: KeyPair, envelope: AuthcryptEnvelope
) -> tuple[bytes, str]:
    """Open an envelope; returns (plaintext, sender verkey).

    The sender signature is checked before any decryption result is
    returned, so the caller always learns an authenticated sender.
    """
    if envelope.recipient_verkey != recipient.verkey_b58:
        raise AuthcryptError("envelope is not addressed to this key")
    sender_vk = base58_decode(envelope.sender_verkey)
    if not verify(
        sender_vk,
        _signed_portion(recipient.verkey, envelope.nonce, envelope.ciphertext),
        envelope.sender_signature,
    ):
        raise AuthcryptError("sender signature invalid")
    secret = X25519PrivateKey.from_private_bytes(
        ed25519_seed_to_x25519(recipient.signing_key)
    )
    peer = X25519PublicKey.from_public_bytes(ed25519_pk_to_x25519(sender_vk))
    key, aead_nonce = _derive_aead(
        secret.exchange(peer), envelope.nonce, sender_vk, recipient.verkey
    )
    try:
        plaintext = ChaCha20Poly1305(key).decrypt(
            aead_nonce, envelope.ciphertext, None
        )
    except InvalidTag as exc:
        raise AuthcryptError("ciphertext authentication failed") from exc
    return plaintext, envelope.sender_verkey
