"""Ledger-rooted PKI: certificates as verifiable credentials.

A certificate here is a Credential over a fixed schema mirroring X.509
fields. Certificate authorities are NYMs with role STEWARD or above;
domains are NYMs binding a human-readable name (the NYM alias) to a
verkey. Chain verification walks NYM submitter links back to a genesis
trustee instead of trusting distinguished names, and revocation is a
plain NYM update installing a fresh domain key — after which old
certificates fail the alias-to-key binding check.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..credentials import (
    Credential,
    commitment_hex,
    credential_signing_input,
    issue_credential,
    register_claim_def,
    register_schema,
)
from ..identity import (
    SigningIdentity,
    base58_decode,
    did_for_verkey,
    generate_keypair,
    verify,
)
from ..registry import (
    LedgerError,
    NotFoundError,
    NymPayload,
    Registry,
    Role,
    TxnType,
)
from ..runtime import SYSTEM, Runtime

X509_SCHEMA_NAME = "x509-certificate"
X509_SCHEMA_VERSION = "1.0"
X509_ATTRIBUTES = (
    "version",
    "serial_number",
    "issuer_dn",
    "subject_dn",
    "not_before",
    "not_after",
    "subject_public_key",
    "signature_algorithm",
    "subject_alt_names",
    "is_ca",
)


class PkiError(Exception):
    pass


class CertificateIssuanceError(PkiError):
    pass


@dataclass(frozen=True)
class CertificateVerdict:
    ok: bool
    diagnostic: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def ensure_x509_schema(
    registry: Registry, ca: SigningIdentity
) -> tuple[int, int]:
    """Idempotently install the certificate schema and this CA's claim def."""
    schema_seq = registry.find_schema(X509_SCHEMA_NAME, X509_SCHEMA_VERSION)
    if schema_seq is None:
        schema_seq = register_schema(
            registry, ca, X509_SCHEMA_NAME, X509_SCHEMA_VERSION, X509_ATTRIBUTES
        )
    claim_def_seq = registry.find_claim_def(schema_seq, ca.did, "default")
    if claim_def_seq is None:
        claim_def_seq = register_claim_def(registry, ca, schema_seq)
    return schema_seq, claim_def_seq


def register_ca(
    registry: Registry,
    trustee: SigningIdentity,
    ca_did: str,
    ca_verkey_b58: str,
    alias: str,
) -> int:
    """Trustee grants a certificate authority write access (role STEWARD)."""
    return registry.append_signed(
        trustee,
        TxnType.NYM,
        NymPayload(dest=ca_did, verkey=ca_verkey_b58, alias=alias, role=Role.STEWARD),
    )


def register_domain(
    registry: Registry,
    ca: SigningIdentity,
    domain_name: str,
    domain_verkey_b58: str,
) -> tuple[str, int]:
    """Bind a domain name (NYM alias) to a verkey; returns (domain_did, seq_no)."""
    domain_did = did_for_verkey(base58_decode(domain_verkey_b58)).render()
    seq_no = registry.append_signed(
        ca,
        TxnType.NYM,
        NymPayload(
            dest=domain_did,
            verkey=domain_verkey_b58,
            alias=domain_name,
            role=Role.NONE,
        ),
    )
    return domain_did, seq_no


def make_certificate_attrs(
    registry: Registry,
    ca_alias: str,
    domain_did: str,
    *,
    not_before: int,
    not_after: int,
    serial_number: str,
    is_ca: bool = False,
) -> dict:
    """Default attribute set for a domain certificate, keyed off the ledger."""
    record = registry.resolve_nym(domain_did)
    return {
        "version": "3",
        "serial_number": serial_number,
        "issuer_dn": f"CN={ca_alias}",
        "subject_dn": f"CN={record.alias}",
        "not_before": not_before,
        "not_after": not_after,
        "subject_public_key": record.verkey,
        "signature_algorithm": "Ed25519",
        "subject_alt_names": [record.alias],
        "is_ca": is_ca,
    }


def issue_certificate_vc(
    registry: Registry,
    ca: SigningIdentity,
    claim_def_seq_no: int,
    domain_did: str,
    attrs: dict,
    *,
    runtime: Runtime = SYSTEM,
) -> Credential:
    """Issue a certificate credential for a domain DID.

    Refuses certificates whose embedded key does not match the domain's
    current ledger key, whose validity window is inverted, or whose
    subject_alt_names omit the ledger alias.
    """
    try:
        record = registry.resolve_nym(domain_did)
    except NotFoundError as exc:
        raise CertificateIssuanceError(f"unknown domain DID {domain_did}") from exc
    if attrs.get("not_before") > attrs.get("not_after"):
        raise CertificateIssuanceError("not_before is after not_after")
    if attrs.get("subject_public_key") != record.verkey:
        raise CertificateIssuanceError(
            "subject_public_key differs from the domain's ledger key"
        )
    alt_names = attrs.get("subject_alt_names") or []
    if record.alias not in alt_names:
        raise CertificateIssuanceError(
            f"subject_alt_names must include the ledger alias {record.alias!r}"
        )
    return issue_credential(
        registry, ca, claim_def_seq_no, domain_did, attrs, runtime=runtime
    )


def _roots_in_genesis(registry: Registry, did: str) -> bool:
    """Walk NYM submitter links from `did` back to a genesis trustee."""
    visited: set[str] = set()
    current = did
    while current not in visited:
        visited.add(current)
        txn = registry.first_nym_txn(current)
        if txn is None:
            return False
        if txn.submitter_did == current:
            # self-granted: acceptable only inside the genesis block,
            # where it must be a trustee grant
            return (
                txn.seq_no <= registry.genesis_height
                and txn.payload.role is Role.TRUSTEE
            )
        current = txn.submitter_did
    return False  # cycle without reaching genesis


def verify_certificate_chain(
    domain_name: str,
    certificate: Credential,
    registry: Registry,
    at_time: float,
) -> CertificateVerdict:
    """Five ordered checks; returns ok or the first failing diagnostic."""
    # 1. the issuing CA's authority chains back to a genesis trustee
    if not _roots_in_genesis(registry, certificate.issuer_did):
        return CertificateVerdict(False, "issuer not rooted in genesis")

    # 2. the issuer currently holds CA rank
    ca_record = registry.try_resolve_nym(certificate.issuer_did)
    if ca_record is None or ca_record.role.rank < Role.STEWARD.rank:
        return CertificateVerdict(False, "issuer role below steward")

    # 3. the credential verifies under the CA's current ledger key:
    #    commitments recompute from the carried values and the signature
    #    covers them
    for index, name in enumerate(certificate.attribute_names()):
        value, salt = certificate.attributes[name]
        if commitment_hex(salt, name, value) != certificate.commitments[index]:
            return CertificateVerdict(False, "attribute commitment mismatch")
    signing_input = credential_signing_input(
        certificate.schema_seq_no,
        certificate.claim_def_seq_no,
        certificate.subject_did,
        certificate.commitments,
    )
    if not verify(
        base58_decode(ca_record.verkey), signing_input, certificate.issuer_signature
    ):
        return CertificateVerdict(False, "issuer signature invalid")

    # 4. the domain name still binds to the certified key
    try:
        domain_record = registry.lookup_alias(domain_name)
    except NotFoundError:
        return CertificateVerdict(False, "unknown domain alias")
    if domain_record.verkey != certificate.value("subject_public_key"):
        return CertificateVerdict(False, "alias key mismatch")
    if domain_record.did != certificate.subject_did:
        return CertificateVerdict(False, "alias bound to a different DID")

    # 5. validity window
    if at_time < certificate.value("not_before"):
        return CertificateVerdict(False, "not yet valid")
    if at_time > certificate.value("not_after"):
        return CertificateVerdict(False, "expired")

    return CertificateVerdict(True)


def revoke_domain_key(
    registry: Registry,
    ca: SigningIdentity,
    domain_did: str,
    *,
    runtime: Runtime = SYSTEM,
) -> tuple[int, str]:
    """Rotate the domain's NYM to a fresh key, invalidating issued certs.

    Returns (seq_no, new_verkey). The old key's certificates now fail
    chain verification at the alias binding check.
    """
    try:
        record = registry.resolve_nym(domain_did)
    except NotFoundError as exc:
        raise PkiError(f"unknown domain DID {domain_did}") from exc
    fresh = generate_keypair(runtime=runtime)
    try:
        seq_no = registry.append_signed(
            ca,
            TxnType.NYM,
            NymPayload(
                dest=domain_did,
                verkey=fresh.verkey_b58,
                alias=record.alias,
                role=record.role,
            ),
        )
    except LedgerError as exc:
        raise PkiError(f"revocation rejected: {exc}") from exc
    return seq_no, fresh.verkey_b58
