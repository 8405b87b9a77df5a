"""Keys, DIDs, DID documents, signatures, and authcrypt envelopes."""

from deskssi.identity.authcrypt import (
    NONCE_LEN,
    AuthcryptEnvelope,
    AuthcryptError,
    auth_decrypt,
    auth_encrypt,
    ed25519_pk_to_x25519,
    ed25519_seed_to_x25519,
)
from deskssi.identity.did import (
    LOCAL_METHOD,
    Did,
    DidParseError,
    did_for_verkey,
    generate_did,
    parse_did,
)
from deskssi.identity.diddoc import (
    DidDocument,
    DidResolutionError,
    resolve_did_document,
)
from deskssi.identity.keys import (
    KeyPair,
    SigningIdentity,
    base58_decode,
    base58_encode,
    generate_keypair,
    sign,
    verify,
)

__all__ = [
    "LOCAL_METHOD",
    "NONCE_LEN",
    "AuthcryptEnvelope",
    "AuthcryptError",
    "Did",
    "DidDocument",
    "DidParseError",
    "DidResolutionError",
    "KeyPair",
    "SigningIdentity",
    "auth_decrypt",
    "auth_encrypt",
    "base58_decode",
    "base58_encode",
    "did_for_verkey",
    "ed25519_pk_to_x25519",
    "ed25519_seed_to_x25519",
    "generate_did",
    "generate_keypair",
    "parse_did",
    "resolve_did_document",
    "sign",
    "verify",
]
