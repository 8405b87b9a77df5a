"""OpenID Connect on top of verifiable presentations.

The provider (verifier role) maps requested scopes to a proof request,
completes login sessions from verified presentations, and mints
EdDSA-signed ID tokens whose subject is the holder's pairwise DID. The
relying-party harness performs the client side, including full token
validation against the provider's published keys.
"""

from .provider import (
    CODE_TTL_SECONDS,
    CONSUMED,
    COOKIE_NAME,
    DENIED,
    PENDING_CONNECTION,
    PENDING_PROOF,
    PROVED,
    REGISTERED_TOKEN_CLAIMS,
    SESSION_TTL_SECONDS,
    AuthorizeResult,
    AuthSession,
    ClientRegistration,
    OidcError,
    OidcProvider,
    OidcRequestError,
    OidcStateError,
)
from .tokens import (
    TOKEN_LIFETIME_SECONDS,
    AudienceMismatchError,
    IssuerMismatchError,
    TokenExpiredError,
    TokenFormatError,
    TokenNonceError,
    TokenSignatureError,
    TokenValidationError,
    UnknownKeyError,
    client_validate_id_token,
    decode_token_unverified,
    jwk_for_verkey,
    jwks_document,
    jws_sign,
)
from .api import build_provider_app
from .client import (
    ClientHarnessError,
    LoginAttempt,
    LoginResult,
    RelyingParty,
    build_rp_app,
)

__all__ = [
    "AudienceMismatchError",
    "AuthorizeResult",
    "AuthSession",
    "ClientHarnessError",
    "ClientRegistration",
    "CODE_TTL_SECONDS",
    "CONSUMED",
    "COOKIE_NAME",
    "client_validate_id_token",
    "decode_token_unverified",
    "DENIED",
    "IssuerMismatchError",
    "jwk_for_verkey",
    "jwks_document",
    "jws_sign",
    "LoginAttempt",
    "LoginResult",
    "OidcError",
    "OidcProvider",
    "OidcRequestError",
    "OidcStateError",
    "PENDING_CONNECTION",
    "PENDING_PROOF",
    "PROVED",
    "REGISTERED_TOKEN_CLAIMS",
    "RelyingParty",
    "SESSION_TTL_SECONDS",
    "TOKEN_LIFETIME_SECONDS",
    "TokenExpiredError",
    "TokenFormatError",
    "TokenNonceError",
    "TokenSignatureError",
    "TokenValidationError",
    "UnknownKeyError",
    "build_provider_app",
    "build_rp_app",
]
