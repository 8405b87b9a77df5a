"""Verifiable credentials with hash-commitment selective disclosure."""

from deskssi.credentials.credential import (
    SALT_LEN,
    AttributeSetError,
    Credential,
    CredentialError,
    commitment_hex,
    credential_signing_input,
    issue_credential,
    register_claim_def,
    register_schema,
)
from deskssi.credentials.presentation import (
    NONCE_LEN,
    CommitmentError,
    HolderSignatureError,
    IssuerSignatureError,
    MissingAttributeError,
    NonceError,
    NonceMismatchError,
    NonceStore,
    Presentation,
    PresentationError,
    ProofRequest,
    ReplayError,
    RequestedAttribute,
    RestrictionError,
    UntrustedIssuerError,
    create_presentation,
    verify_presentation,
)

__all__ = [
    "NONCE_LEN",
    "SALT_LEN",
    "AttributeSetError",
    "CommitmentError",
    "Credential",
    "CredentialError",
    "HolderSignatureError",
    "IssuerSignatureError",
    "MissingAttributeError",
    "NonceError",
    "NonceMismatchError",
    "NonceStore",
    "Presentation",
    "PresentationError",
    "ProofRequest",
    "ReplayError",
    "RequestedAttribute",
    "RestrictionError",
    "UntrustedIssuerError",
    "commitment_hex",
    "credential_signing_input",
    "create_presentation",
    "issue_credential",
    "register_claim_def",
    "register_schema",
    "verify_presentation",
]
