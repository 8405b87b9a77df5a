"""Ledger-rooted PKI: certificate credentials, chain verification, capacity."""

from .capacity import (
    OFTEN_CITED_TPS_ESTIMATE,
    SECONDS_PER_DAY,
    CapacityError,
    CapacityModel,
    avg_renewal_tps,
    capacity_report,
    format_capacity_table,
    time_to_record,
)
from .certs import (
    X509_ATTRIBUTES,
    X509_SCHEMA_NAME,
    X509_SCHEMA_VERSION,
    CertificateIssuanceError,
    CertificateVerdict,
    PkiError,
    ensure_x509_schema,
    issue_certificate_vc,
    make_certificate_attrs,
    register_ca,
    register_domain,
    revoke_domain_key,
    verify_certificate_chain,
)

__all__ = [
    "avg_renewal_tps",
    "CapacityError",
    "CapacityModel",
    "capacity_report",
    "CertificateIssuanceError",
    "CertificateVerdict",
    "ensure_x509_schema",
    "format_capacity_table",
    "issue_certificate_vc",
    "make_certificate_attrs",
    "OFTEN_CITED_TPS_ESTIMATE",
    "PkiError",
    "register_ca",
    "register_domain",
    "revoke_domain_key",
    "SECONDS_PER_DAY",
    "time_to_record",
    "verify_certificate_chain",
    "X509_ATTRIBUTES",
    "X509_SCHEMA_NAME",
    "X509_SCHEMA_VERSION",
]
