"""The verifiable data registry: an append-only, hash-chained, role-gated log.

Single-node by design: writes are serialized through one lock, reads see a
consistent prefix. Persistence is JSON lines, one canonical transaction per
line; the genesis file is the same format and forms the first lines of the
ledger.

Write ACL, on the role order TRUSTEE > STEWARD > ENDORSER:
  * a NYM granting role R needs a submitter with role >= R,
  * any write at all needs a writer role (TRUSTEE, STEWARD or ENDORSER),
  * SCHEMA and CLAIM_DEF need a writer role.
Timestamps come from the registry clock at append time, never from the
submitter.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from deskssi.canonical import canonical_json
from deskssi.identity.did import parse_did
from deskssi.identity.keys import SigningIdentity, base58_decode, base58_encode, sign, verify
from deskssi.registry.transactions import (
    GENESIS_PREV_HASH,
    ClaimDefPayload,
    LedgerTransaction,
    NymPayload,
    Payload,
    PayloadError,
    Role,
    SchemaPayload,
    TxnType,
    WRITER_ROLES,
    payload_signing_bytes,
)
from deskssi.runtime import SYSTEM, Runtime


class LedgerError(Exception):
    pass


class UnknownSubmitterError(LedgerError):
    pass


class SignatureError(LedgerError):
    pass


class AclError(LedgerError):
    pass


class DuplicateAliasError(LedgerError):
    pass


class DuplicateSchemaError(LedgerError):
    pass


class DuplicateClaimDefError(LedgerError):
    pass


class NotFoundError(LedgerError):
    pass


class TypeMismatchError(LedgerError):
    pass


class GenesisError(LedgerError):
    pass


@dataclass(frozen=True)
class NymRecord:
    did: str
    verkey: str
    alias: str | None
    role: Role
    seq_no: int


@dataclass(frozen=True)
class ChainVerdict:
    ok: bool
    seq_no: int | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _resolve_prefix_verkey(
    txns: list[LedgerTransaction], upto: int, did: str
) -> str | None:
    """Submitter verkey as recorded in txns[0:upto], latest NYM wins."""
    for txn in reversed(txns[:upto]):
        if txn.txn_type is TxnType.NYM and txn.payload.dest == did:
            return txn.payload.verkey
    return None


def _check_txn(
    txns: list[LedgerTransaction],
    index: int,
    verkey_map: dict[str, str] | None = None,
) -> str | None:
    """One transaction's chain and signature invariants; None means sound.

    Sequential walkers pass a dict tracking each DID's latest verkey so the
    submitter lookup is O(1); it holds exactly what a backward prefix scan
    would find. Without it the prefix is scanned directly.
    """
    txn = txns[index]
    expected_seq = index + 1
    if txn.seq_no != expected_seq:
        return f"seq_no {txn.seq_no} != {expected_seq}"
    expected_prev = GENESIS_PREV_HASH if index == 0 else txns[index - 1].txn_hash
    if txn.prev_hash != expected_prev:
        return "prev_hash does not match previous transaction"
    if txn.txn_hash != txn.recomputed_hash():
        return "txn_hash mismatch"
    if verkey_map is not None:
        verkey = verkey_map.get(txn.submitter_did)
    else:
        verkey = _resolve_prefix_verkey(txns, index, txn.submitter_did)
    if verkey is None:
        # self-signed bootstrap: only possible for a NYM creating its own DID
        if txn.txn_type is TxnType.NYM and txn.payload.dest == txn.submitter_did:
            verkey = txn.payload.verkey
        else:
            return f"unknown submitter {txn.submitter_did}"
    try:
        ok = verify(verkey, payload_signing_bytes(txn.payload), txn.signature)
    except ValueError:
        return "malformed submitter verkey"
    if not ok:
        return "signature invalid"
    if verkey_map is not None and txn.txn_type is TxnType.NYM:
        verkey_map[txn.payload.dest] = txn.payload.verkey
    return None


class Registry:
    """In-memory ledger with optional write-through JSON-lines persistence."""

    def __init__(
        self,
        *,
        path: str | Path | None = None,
        clock: Callable[[], int] | None = None,
    ):
        self._txns: list[LedgerTransaction] = []
        self._lock = threading.RLock()
        self._path = Path(path) if path is not None else None
        self._clock = clock if clock is not None else SYSTEM.now
        self.genesis_height = 0
        # dest -> index of latest / first NYM txn
        self._latest_nym: dict[str, int] = {}
        self._first_nym: dict[str, int] = {}
        # alias -> dest currently holding it
        self._alias_owner: dict[str, str] = {}
        self._schemas: dict[tuple[str, str], int] = {}
        self._claim_defs: dict[tuple[int, str, str], int] = {}

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def from_transactions(
        cls,
        txns: Iterable[LedgerTransaction],
        *,
        genesis_height: int | None = None,
        path: str | Path | None = None,
        clock: Callable[[], int] | None = None,
    ) -> "Registry":
        reg = cls(path=path, clock=clock)
        for txn in txns:
            reg._admit(txn)
        if genesis_height is None:
            genesis_height = reg._inferred_genesis_height()
        reg.genesis_height = genesis_height
        return reg

    @classmethod
    def load(
        cls,
        path: str | Path,
        *,
        verify_chain: bool = True,
        clock: Callable[[], int] | None = None,
    ) -> "Registry":
        """Load a ledger file. With verify_chain, a broken chain raises."""
        txns = [
            LedgerTransaction.from_dict(json.loads(line))
            for line in Path(path).read_text("utf-8").splitlines()
            if line.strip()
        ]
        reg = cls.from_transactions(txns, path=path, clock=clock)
        if verify_chain:
            verdict = reg.verify_chain()
            if not verdict:
                raise LedgerError(
                    f"chain verification failed at seq {verdict.seq_no}: {verdict.reason}"
                )
        return reg

    def _inferred_genesis_height(self) -> int:
        height = 0
        for txn in self._txns:
            if (
                txn.txn_type is TxnType.NYM
                and txn.payload.role is Role.TRUSTEE
                and txn.submitter_did == txn.payload.dest
            ):
                height += 1
            else:
                break
        return height

    # ------------------------------------------------------------------
    # reads

    @property
    def height(self) -> int:
        with self._lock:
            return len(self._txns)

    def get_txn(self, seq_no: int) -> LedgerTransaction:
        with self._lock:
            if not 1 <= seq_no <= len(self._txns):
                raise NotFoundError(f"seq_no {seq_no} out of range")
            return self._txns[seq_no - 1]

    def transactions(self) -> list[LedgerTransaction]:
        with self._lock:
            return list(self._txns)

    def _record_at(self, index: int) -> NymRecord:
        txn = self._txns[index]
        return NymRecord(
            did=txn.payload.dest,
            verkey=txn.payload.verkey,
            alias=txn.payload.alias,
            role=txn.payload.role,
            seq_no=txn.seq_no,
        )

    def resolve_nym(self, did) -> NymRecord:
        rendered = did if isinstance(did, str) else did.render()
        with self._lock:
            index = self._latest_nym.get(rendered)
            if index is None:
                raise NotFoundError(f"no NYM for {rendered}")
            return self._record_at(index)

    def try_resolve_nym(self, did) -> NymRecord | None:
        try:
            return self.resolve_nym(did)
        except NotFoundError:
            return None

    def first_nym_txn(self, did: str) -> LedgerTransaction | None:
        with self._lock:
            index = self._first_nym.get(did)
            return self._txns[index] if index is not None else None

    def lookup_alias(self, alias: str) -> NymRecord:
        with self._lock:
            owner = self._alias_owner.get(alias)
            if owner is None:
                raise NotFoundError(f"no NYM with alias {alias!r}")
            return self._record_at(self._latest_nym[owner])

    def get_schema(self, seq_no: int) -> SchemaPayload:
        txn = self.get_txn(seq_no)
        if txn.txn_type is not TxnType.SCHEMA:
            raise TypeMismatchError(f"txn {seq_no} is {txn.txn_type.value}, not SCHEMA")
        return txn.payload

    def get_claim_def(self, seq_no: int) -> ClaimDefPayload:
        txn = self.get_txn(seq_no)
        if txn.txn_type is not TxnType.CLAIM_DEF:
            raise TypeMismatchError(
                f"txn {seq_no} is {txn.txn_type.value}, not CLAIM_DEF"
            )
        return txn.payload

    def find_schema(self, name: str, version: str) -> int | None:
        with self._lock:
            return self._schemas.get((name, version))

    def find_claim_def(
        self, schema_seq_no: int, issuer_did: str, tag: str
    ) -> int | None:
        with self._lock:
            return self._claim_defs.get((schema_seq_no, issuer_did, tag))

    # ------------------------------------------------------------------
    # writes

    def append_transaction(
        self,
        txn_type: TxnType,
        payload: Payload,
        submitter_did: str,
        signature: bytes,
    ) -> int:
        with self._lock:
            submitter = self.try_resolve_nym(submitter_did)
            if submitter is None:
                raise UnknownSubmitterError(f"unknown submitter {submitter_did}")
            if not verify(submitter.verkey, payload_signing_bytes(payload), signature):
                raise SignatureError("submitter signature invalid")
            self._check_acl(txn_type, payload, submitter)
            self._check_payload(txn_type, payload)
            seq_no = len(self._txns) + 1
            prev_hash = self._txns[-1].txn_hash if self._txns else GENESIS_PREV_HASH
            txn = LedgerTransaction.build(
                seq_no=seq_no,
                txn_type=txn_type,
                payload=payload,
                submitter_did=submitter_did,
                signature=signature,
                timestamp=int(self._clock()),
                prev_hash=prev_hash,
            )
            self._admit(txn)
            if self._path is not None:
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(canonical_json(txn.to_dict()) + "\n")
            return seq_no

    def append_signed(
        self, submitter: SigningIdentity, txn_type: TxnType, payload: Payload
    ) -> int:
        """Convenience: sign the payload with the submitter's key and append."""
        signature = sign(submitter.keypair, payload_signing_bytes(payload))
        return self.append_transaction(txn_type, payload, submitter.did, signature)

    def _check_acl(self, txn_type: TxnType, payload: Payload, submitter: NymRecord):
        if submitter.role not in WRITER_ROLES:
            raise AclError(
                f"role {submitter.role.value} has no write permission"
            )
        if txn_type is TxnType.NYM and submitter.role.rank < payload.role.rank:
            raise AclError(
                f"insufficient role: {submitter.role.value} cannot grant "
                f"{payload.role.value}"
            )

    def _check_payload(self, txn_type: TxnType, payload: Payload):
        if txn_type is TxnType.NYM:
            existing = self._latest_nym.get(payload.dest)
            if existing is None:
                self._check_identifier_rule(payload)
            if payload.alias is not None:
                owner = self._alias_owner.get(payload.alias)
                if owner is not None and owner != payload.dest:
                    raise DuplicateAliasError(
                        f"alias {payload.alias!r} already held by {owner}"
                    )
        elif txn_type is TxnType.SCHEMA:
            key = (payload.name, payload.version)
            if key in self._schemas:
                raise DuplicateSchemaError(f"schema {key} already registered")
        elif txn_type is TxnType.CLAIM_DEF:
            schema_txn_index = payload.schema_seq_no
            if not 1 <= schema_txn_index <= len(self._txns):
                raise NotFoundError(
                    f"claim def references missing schema txn {schema_txn_index}"
                )
            if self._txns[schema_txn_index - 1].txn_type is not TxnType.SCHEMA:
                raise TypeMismatchError(
                    f"claim def schema_seq_no {schema_txn_index} is not a SCHEMA"
                )
            key = (payload.schema_seq_no, payload.issuer_did, payload.tag)
            if key in self._claim_defs:
                raise DuplicateClaimDefError(f"claim def {key} already registered")

    @staticmethod
    def _check_identifier_rule(payload: NymPayload):
        """At creation a DID's identifier is base58 of the verkey's first 16 bytes."""
        try:
            did = parse_did(payload.dest)
            verkey_raw = base58_decode(payload.verkey)
        except ValueError as exc:
            raise PayloadError(f"malformed NYM payload: {exc}") from exc
        if base58_encode(verkey_raw[:16]) != did.identifier:
            raise PayloadError(
                "DID identifier does not match first 16 bytes of verkey"
            )

    def _admit(self, txn: LedgerTransaction):
        """Add a transaction and update the derived indexes (no validation)."""
        self._txns.append(txn)
        index = len(self._txns) - 1
        if txn.txn_type is TxnType.NYM:
            dest = txn.payload.dest
            prior = self._latest_nym.get(dest)
            if prior is not None:
                prior_alias = self._txns[prior].payload.alias
                if prior_alias is not None and self._alias_owner.get(prior_alias) == dest:
                    del self._alias_owner[prior_alias]
            else:
                self._first_nym[dest] = index
            self._latest_nym[dest] = index
            if txn.payload.alias is not None:
                self._alias_owner[txn.payload.alias] = dest
        elif txn.txn_type is TxnType.SCHEMA:
            self._schemas[(txn.payload.name, txn.payload.version)] = txn.seq_no
        elif txn.txn_type is TxnType.CLAIM_DEF:
            key = (txn.payload.schema_seq_no, txn.payload.issuer_did, txn.payload.tag)
            self._claim_defs[key] = txn.seq_no

    # ------------------------------------------------------------------
    # verification and persistence

    def verify_chain(self) -> ChainVerdict:
        """Check hash-chain and signature invariants for the full log."""
        with self._lock:
            txns = list(self._txns)
        verkey_map: dict[str, str] = {}
        for index in range(len(txns)):
            reason = _check_txn(txns, index, verkey_map)
            if reason is not None:
                return ChainVerdict(False, seq_no=index + 1, reason=reason)
        return ChainVerdict(True)

    def save(self, path: str | Path | None = None) -> Path:
        target = Path(path) if path is not None else self._path
        if target is None:
            raise LedgerError("no path to save to")
        with self._lock:
            lines = [canonical_json(t.to_dict()) for t in self._txns]
        target.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return target

    def save_genesis(self, path: str | Path) -> Path:
        """Write just the genesis block (leading trustee transactions)."""
        with self._lock:
            lines = [
                canonical_json(t.to_dict())
                for t in self._txns[: self.genesis_height]
            ]
        target = Path(path)
        target.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return target


def genesis_transactions(
    trustees: Iterable[tuple[SigningIdentity, str | None]],
    *,
    runtime: Runtime = SYSTEM,
) -> list[LedgerTransaction]:
    """Self-signed TRUSTEE NYMs forming a genesis chain."""
    txns: list[LedgerTransaction] = []
    prev_hash = GENESIS_PREV_HASH
    for seq_no, (trustee, alias) in enumerate(trustees, start=1):
        payload = NymPayload(
            dest=trustee.did,
            verkey=trustee.verkey_b58,
            alias=alias,
            role=Role.TRUSTEE,
        )
        signature = sign(trustee.keypair, payload_signing_bytes(payload))
        txn = LedgerTransaction.build(
            seq_no=seq_no,
            txn_type=TxnType.NYM,
            payload=payload,
            submitter_did=trustee.did,
            signature=signature,
            timestamp=runtime.now(),
            prev_hash=prev_hash,
        )
        txns.append(txn)
        prev_hash = txn.txn_hash
    return txns


def load_genesis(
    path: str | Path, *, clock: Callable[[], int] | None = None
) -> Registry:
    """Load and validate a genesis file: only self-signed TRUSTEE NYMs."""
    try:
        lines = Path(path).read_text("utf-8").splitlines()
    except OSError as exc:
        raise GenesisError(f"cannot read genesis file: {exc}") from exc
    txns: list[LedgerTransaction] = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            txns.append(LedgerTransaction.from_dict(json.loads(line)))
        except (ValueError, KeyError) as exc:
            raise GenesisError(f"genesis line {number} unparseable: {exc}") from exc
    if not txns:
        raise GenesisError("genesis file is empty")
    for txn in txns:
        if txn.txn_type is not TxnType.NYM or txn.payload.role is not Role.TRUSTEE:
            raise GenesisError(f"non-trustee in genesis at seq {txn.seq_no}")
        if txn.submitter_did != txn.payload.dest:
            raise GenesisError(f"genesis NYM at seq {txn.seq_no} is not self-signed")
    reg = Registry.from_transactions(
        txns, genesis_height=len(txns), path=path, clock=clock
    )
    verdict = reg.verify_chain()
    if not verdict:
        raise GenesisError(
            f"genesis chain broken at seq {verdict.seq_no}: {verdict.reason}"
        )
    return reg


def verify_file(path: str | Path) -> ChainVerdict:
    """Audit a persisted ledger byte-for-byte.

    Each line must be the exact canonical serialization of a sound
    transaction; the first offending line is reported by its sequence
    number. Tolerates arbitrary corruption (reports, never raises).
    """
    raw = Path(path).read_bytes()
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    txns: list[LedgerTransaction] = []
    verkey_map: dict[str, str] = {}
    for index, line in enumerate(lines):
        seq_no = index + 1
        try:
            text = line.decode("utf-8")
            data = json.loads(text)
            txn = LedgerTransaction.from_dict(data)
        except (ValueError, KeyError, TypeError) as exc:
            return ChainVerdict(False, seq_no=seq_no, reason=f"unparseable: {exc}")
        if canonical_json(txn.to_dict()) != text:
            return ChainVerdict(
                False, seq_no=seq_no, reason="not in canonical serialized form"
            )
        txns.append(txn)
        reason = _check_txn(txns, index, verkey_map)
        if reason is not None:
            return ChainVerdict(False, seq_no=seq_no, reason=reason)
    return ChainVerdict(True)
