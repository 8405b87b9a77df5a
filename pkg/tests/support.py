"""Shared fixtures for integration-level tests: demo profile and world building."""

from deskssi.claims import CREDENTIAL_CLAIMS
from deskssi.credentials import register_claim_def, register_schema
from deskssi.identity import SigningIdentity, generate_did
from deskssi.registry import NymPayload, Registry, Role, TxnType, genesis_transactions
from deskssi.runtime import Runtime

CLOCK_2020 = 1577836800

JANE_INPUT = {
    "name": "Jane Doe",
    "given_name": "Jane",
    "family_name": "Doe",
    "middle_name": "Marie",
    "nickname": "Janie",
    "profile": "https://janedoe.example/profile",
    "picture": "https://janedoe.example/photo.jpg",
    "website": "https://janedoe.example",
    "email": "jane.doe@example.com",
    "email_verified": True,
    "gender": "female",
    "birthdate": "1990-01-01",
    "zoneinfo": "Europe/Budapest",
    "locale": "hu-HU",
    "phone_number": "+36-1-555-0100",
    "phone_number_verified": True,
    "address": {
        "street_address": "1 Fő utca",
        "locality": "Budapest",
        "postal_code": "1011",
        "country": "HU",
    },
    "updated_at": 1262304000,
}


def make_identity(runtime) -> SigningIdentity:
    did, keypair = generate_did(runtime=runtime)
    return SigningIdentity(did=did.render(), keypair=keypair)


def build_registry_world(runtime):
    """Trustee-rooted registry with an anchored issuer, schema, claim def."""
    trustee = make_identity(runtime)
    registry = Registry.from_transactions(
        genesis_transactions([(trustee, "trustee-0")], runtime=runtime),
        genesis_height=1,
        clock=runtime.now,
    )
    issuer_identity = make_identity(runtime)
    registry.append_signed(
        trustee,
        TxnType.NYM,
        NymPayload(
            dest=issuer_identity.did,
            verkey=issuer_identity.verkey_b58,
            alias="municipal-office",
            role=Role.ENDORSER,
        ),
    )
    schema_seq = register_schema(
        registry, issuer_identity, "oidc-passport", "1.0", CREDENTIAL_CLAIMS
    )
    claim_def_seq = register_claim_def(registry, issuer_identity, schema_seq)
    return registry, trustee, issuer_identity, schema_seq, claim_def_seq


class Ticker:
    """A controllable clock for expiry tests."""

    def __init__(self, start: float):
        self.now = float(start)

    def advance(self, seconds: float) -> None:
        self.now += seconds

    def __call__(self) -> float:
        return self.now


def ticking_runtime(seed, start=CLOCK_2020):
    base = Runtime.seeded(seed)
    ticker = Ticker(start)
    return Runtime(clock=ticker, rand=base.rand), ticker
