"""DID parsing, rendering, and generation.

Locally anchored DIDs use the method name "desk". The method-specific
identifier of a locally generated DID is the base58 encoding of the first
16 bytes of the initial verkey, so the DID commits to the key it was
created with. The parser accepts other methods (sov, web, ...) opaquely.
"""

from __future__ import annotations

from dataclasses import dataclass

from deskssi.identity.keys import KeyPair, base58_encode, generate_keypair
from deskssi.runtime import SYSTEM, Runtime

LOCAL_METHOD = "desk"


class DidParseError(ValueError):
    pass


@dataclass(frozen=True)
class Did:
    method: str
    identifier: str

    def render(self) -> str:
        return f"did:{self.method}:{self.identifier}"

    def __str__(self) -> str:
        return self.render()


def parse_did(text: str) -> Did:
    if not isinstance(text, str) or not text.startswith("did:"):
        raise DidParseError(f"not a DID: {text!r}")
    rest = text[len("did:"):]
    method, sep, identifier = rest.partition(":")
    if not sep or not method or not identifier:
        raise DidParseError(f"not a DID: {text!r}")
    return Did(method=method, identifier=identifier)


def did_for_verkey(verkey: bytes, method: str = LOCAL_METHOD) -> Did:
    """Derive the DID for a verkey: base58 of its first 16 bytes."""
    return Did(method=method, identifier=base58_encode(verkey[:16]))


def generate_did(
    seed: bytes | None = None, *, runtime: Runtime = SYSTEM
) -> tuple[Did, KeyPair]:
    """Fresh DID plus controlling keypair; seed makes it deterministic."""
    keypair = generate_keypair(seed, runtime=runtime)
    return did_for_verkey(keypair.verkey), keypair
