"""DID documents and resolution.

A DID resolves either against the ledger (anchored DIDs, via their NYM
record) or against a local pairwise store (connection DIDs, which are
never written to the ledger). The pairwise store side is any object with
a ``lookup_pairwise(did) -> (verkey_b58, endpoint) | None`` method; agent
wallets provide it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from deskssi.identity.did import Did, parse_did


class DidResolutionError(LookupError):
    pass


@dataclass(frozen=True)
class DidDocument:
    id: Did
    verkeys: list[str] = field(default_factory=list)
    service_endpoint: str | None = None

    def to_dict(self) -> dict:
        doc = {"id": self.id.render(), "verkeys": list(self.verkeys)}
        if self.service_endpoint is not None:
            doc["service_endpoint"] = self.service_endpoint
        return doc


def resolve_did_document(
    did: Did | str, registry=None, pairwise_store=None
) -> DidDocument:
    """Resolve a DID to its document; ledger first, then the pairwise store."""
    parsed = parse_did(did) if isinstance(did, str) else did
    rendered = parsed.render()
    if registry is not None:
        record = registry.try_resolve_nym(rendered)
        if record is not None:
            return DidDocument(id=parsed, verkeys=[record.verkey])
    if pairwise_store is not None:
        hit = pairwise_store.lookup_pairwise(rendered)
        if hit is not None:
            verkey, endpoint = hit
            return DidDocument(id=parsed, verkeys=[verkey], service_endpoint=endpoint)
    raise DidResolutionError(f"cannot resolve {rendered}")
