"""Compact EdDSA-signed ID tokens and the key-set documents that verify them.

Tokens use the three-part base64url serialization (header.payload.signature)
with an Ed25519 signature over the ASCII signing input. Verification keys
are published as OKP/Ed25519 JWK entries. Validation on the client side
raises a distinct error per failed check so tests (and relying parties)
can tell exactly why a token was refused.
"""

from __future__ import annotations

import json
import time

from ..canonical import EncodingError, b64url_decode, b64url_encode, canonical_bytes
from ..identity import KeyPair, sign, verify

TOKEN_LIFETIME_SECONDS = 300


class TokenValidationError(ValueError):
    """Base class: the presented token must not be accepted."""


class TokenFormatError(TokenValidationError):
    """Not a three-part token, or a part fails to decode."""


class UnknownKeyError(TokenValidationError):
    """The token's kid does not appear in the published key set."""


class TokenSignatureError(TokenValidationError):
    """The signature does not verify under the published key."""


class IssuerMismatchError(TokenValidationError):
    """iss differs from the expected provider URL."""


class AudienceMismatchError(TokenValidationError):
    """aud differs from the relying party's client_id."""


class TokenNonceError(TokenValidationError):
    """nonce does not echo the value the client sent."""


class TokenExpiredError(TokenValidationError):
    """exp is not in the future."""


def jws_sign(claims: dict, keypair: KeyPair, kid: str) -> str:
    """Serialize and sign a claims map as a compact EdDSA token."""
    header = {"alg": "EdDSA", "kid": kid, "typ": "JWT"}
    signing_input = (
        b64url_encode(canonical_bytes(header))
        + "."
        + b64url_encode(canonical_bytes(claims))
    )
    signature = sign(keypair, signing_input.encode("ascii"))
    return signing_input + "." + b64url_encode(signature)


def jwk_for_verkey(verkey: bytes, kid: str) -> dict:
    return {
        "kty": "OKP",
        "crv": "Ed25519",
        "x": b64url_encode(verkey),
        "kid": kid,
        "alg": "EdDSA",
        "use": "sig",
    }


def jwks_document(keys: list[dict]) -> dict:
    return {"keys": list(keys)}


def decode_token_unverified(token: str) -> tuple[dict, dict, bytes, str]:
    """Split a compact token; returns (header, payload, signature, signing_input)."""
    parts = token.split(".")
    if len(parts) != 3:
        raise TokenFormatError("token is not three dot-separated parts")
    try:
        header = json.loads(b64url_decode(parts[0]).decode("utf-8"))
        payload = json.loads(b64url_decode(parts[1]).decode("utf-8"))
        signature = b64url_decode(parts[2], length=64)
    except (EncodingError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TokenFormatError(f"undecodable token part: {exc}") from exc
    if not isinstance(header, dict) or not isinstance(payload, dict):
        raise TokenFormatError("header and payload must be JSON objects")
    return header, payload, signature, parts[0] + "." + parts[1]


def client_validate_id_token(
    token: str,
    *,
    issuer: str,
    client_id: str,
    nonce: str,
    jwks: dict,
    clock=None,
) -> dict:
    """Full relying-party validation; returns the claims map when accepted.

    Checks, in order, each with its own error type: token format, key
    lookup by kid, EdDSA signature, iss, aud, nonce echo, expiry.
    """
    header, payload, signature, signing_input = decode_token_unverified(token)
    if header.get("alg") != "EdDSA":
        raise TokenFormatError(f"unsupported alg {header.get('alg')!r}")
    kid = header.get("kid")
    key_entry = next(
        (k for k in jwks.get("keys", []) if k.get("kid") == kid), None
    )
    if key_entry is None:
        raise UnknownKeyError(f"kid {kid!r} not in key set")
    if key_entry.get("kty") != "OKP" or key_entry.get("crv") != "Ed25519":
        raise UnknownKeyError("key entry is not an Ed25519 OKP key")
    try:
        verkey = b64url_decode(key_entry["x"], length=32)
    except (KeyError, EncodingError) as exc:
        raise UnknownKeyError(f"bad key entry: {exc}") from exc
    if not verify(verkey, signing_input.encode("ascii"), signature):
        raise TokenSignatureError("signature does not verify")
    if payload.get("iss") != issuer:
        raise IssuerMismatchError(
            f"iss {payload.get('iss')!r} != expected {issuer!r}"
        )
    if payload.get("aud") != client_id:
        raise AudienceMismatchError(
            f"aud {payload.get('aud')!r} != expected {client_id!r}"
        )
    if payload.get("nonce") != nonce:
        raise TokenNonceError("nonce does not match the value sent")
    now = clock() if clock is not None else time.time()
    exp = payload.get("exp")
    if not isinstance(exp, (int, float)) or exp <= now:
        raise TokenExpiredError(f"token expired at {exp!r}, now {now}")
    return payload
