"""Desk-scale self-sovereign identity stack.

A self-contained implementation of SSI authentication: a hash-chained
permissioned transaction log acting as the verifiable data registry,
DID and verifiable-credential machinery with selective disclosure,
edge agents with pairwise connections and a consent queue, an OpenID
Connect provider that sources ID-token claims from verified credential
presentations, and a ledger-backed PKI for domain certificates.
"""

__version__ = "0.1.0"
