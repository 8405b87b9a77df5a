"""Append-only, hash-chained, permissioned transaction log."""

from deskssi.registry.ledger import (
    AclError,
    ChainVerdict,
    DuplicateAliasError,
    DuplicateClaimDefError,
    DuplicateSchemaError,
    GenesisError,
    LedgerError,
    NotFoundError,
    NymRecord,
    Registry,
    SignatureError,
    TypeMismatchError,
    UnknownSubmitterError,
    genesis_transactions,
    load_genesis,
    verify_file,
)
from deskssi.registry.transactions import (
    ClaimDefPayload,
    PayloadError,
    LedgerTransaction,
    NymPayload,
    Role,
    SchemaPayload,
    TxnType,
    payload_signing_bytes,
)

__all__ = [
    "AclError",
    "ChainVerdict",
    "ClaimDefPayload",
    "DuplicateAliasError",
    "DuplicateClaimDefError",
    "DuplicateSchemaError",
    "GenesisError",
    "LedgerError",
    "LedgerTransaction",
    "NotFoundError",
    "NymPayload",
    "NymRecord",
    "PayloadError",
    "Registry",
    "Role",
    "SchemaPayload",
    "SignatureError",
    "TxnType",
    "TypeMismatchError",
    "UnknownSubmitterError",
    "genesis_transactions",
    "load_genesis",
    "payload_signing_bytes",
    "verify_file",
]
