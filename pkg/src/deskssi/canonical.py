"""Canonical serialization and digest helpers shared across the stack.

Every signed or hashed structure in the system is serialized the same way:
JSON with lexicographically sorted keys, no insignificant whitespace,
UTF-8 encoded. Digests are SHA-256, rendered as lowercase hex. Binary
fields travel as unpadded base64url.

Decoders are strict: a base64url or hex string must be the canonical
encoding of its bytes (re-encoding must reproduce the input). This makes
every single-byte mutation of a serialized structure detectable — there
are no alternative spellings that decode to the same value.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
import string

ZERO_DIGEST = "0" * 64

_B64URL_ALPHABET = frozenset(string.ascii_letters + string.digits + "-_")
_HEX_LOWER = frozenset("0123456789abcdef")


class EncodingError(ValueError):
    """A binary field is not in its canonical textual encoding."""


def canonical_json(obj) -> str:
    """Render an object as canonical JSON text."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(obj) -> bytes:
    """Canonical JSON, UTF-8 encoded. This is the signing/hashing input form."""
    return canonical_json(obj).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_bytes(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def b64url_encode(raw: bytes) -> str:
    """Unpadded base64url."""
    return base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii")


def b64url_decode(text: str, *, length: int | None = None) -> bytes:
    """Strict unpadded base64url decode.

    Rejects padding, characters outside the base64url alphabet, and
    non-canonical encodings (trailing bits that do not round-trip).
    """
    if not isinstance(text, str):
        raise EncodingError("base64url field must be a string")
    if text and not set(text) <= _B64URL_ALPHABET:
        raise EncodingError("invalid base64url character")
    pad = -len(text) % 4
    if pad == 3:
        raise EncodingError("invalid base64url length")
    try:
        raw = base64.urlsafe_b64decode(text + "=" * pad)
    except (ValueError, binascii.Error) as exc:  # pragma: no cover - length check above
        raise EncodingError(f"invalid base64url: {exc}") from exc
    if b64url_encode(raw) != text:
        raise EncodingError("non-canonical base64url encoding")
    if length is not None and len(raw) != length:
        raise EncodingError(f"expected {length} bytes, got {len(raw)}")
    return raw


def hex_decode(text: str, *, length: int | None = None) -> bytes:
    """Strict lowercase hex decode."""
    if not isinstance(text, str):
        raise EncodingError("hex field must be a string")
    if len(text) % 2 != 0 or not set(text) <= _HEX_LOWER:
        raise EncodingError("invalid lowercase hex")
    raw = bytes.fromhex(text)
    if length is not None and len(raw) != length:
        raise EncodingError(f"expected {length} bytes, got {len(raw)}")
    return raw
