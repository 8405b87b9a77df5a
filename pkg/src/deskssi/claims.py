"""The standard OIDC claim catalog used across credentials and login.

Nineteen standard claims are supported. All are strings except the
*_verified pair (booleans), updated_at (a number) and address (a JSON
object). A twentieth name, over_18, is a derived boolean predicate
attribute: issuers compute it from birthdate at issuance so verifiers can
learn "is an adult" without learning the birthdate.

Scopes map onto claim subsets the way OIDC defines them; the sub claim is
never requested from a credential — providers derive it from the
connection the holder authenticates over.
"""

from __future__ import annotations

import datetime
from typing import Iterable

OIDC_CLAIMS = (
    "sub",
    "name",
    "given_name",
    "family_name",
    "middle_name",
    "nickname",
    "profile",
    "picture",
    "website",
    "email",
    "email_verified",
    "gender",
    "birthdate",
    "zoneinfo",
    "locale",
    "phone_number",
    "phone_number_verified",
    "address",
    "updated_at",
)

PREDICATE_CLAIMS = ("over_18",)

# the attribute set of the standard demo credential: every claim except
# sub (derived, never attested) plus the over_18 predicate — 19 in total
CREDENTIAL_CLAIMS = tuple(c for c in OIDC_CLAIMS if c != "sub") + PREDICATE_CLAIMS

_BOOLEAN = frozenset({"email_verified", "phone_number_verified", "over_18"})
_NUMBER = frozenset({"updated_at"})
_OBJECT = frozenset({"address"})

SCOPE_CLAIMS: dict[str, tuple[str, ...]] = {
    "openid": (),  # sub is always derived, never requested
    "profile": (
        "name",
        "given_name",
        "family_name",
        "middle_name",
        "nickname",
        "profile",
        "picture",
        "website",
        "gender",
        "birthdate",
        "zoneinfo",
        "locale",
        "updated_at",
    ),
    "email": ("email", "email_verified"),
    "phone": ("phone_number", "phone_number_verified"),
    "address": ("address",),
}


class ClaimTypeError(TypeError):
    """A claim value does not match the claim's declared type."""


class UnknownScopeError(ValueError):
    pass


class UnknownClaimError(ValueError):
    pass


def claim_type(name: str) -> str:
    """One of "string", "boolean", "number", "object"."""
    if name not in OIDC_CLAIMS and name not in PREDICATE_CLAIMS:
        raise UnknownClaimError(f"unknown claim {name!r}")
    if name in _BOOLEAN:
        return "boolean"
    if name in _NUMBER:
        return "number"
    if name in _OBJECT:
        return "object"
    return "string"


def validate_claim_value(name: str, value) -> None:
    """Raise ClaimTypeError unless the value fits the claim's type."""
    expected = claim_type(name)
    if expected == "boolean":
        ok = isinstance(value, bool)
    elif expected == "number":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif expected == "object":
        ok = isinstance(value, dict)
    else:
        ok = isinstance(value, str)
    if not ok:
        raise ClaimTypeError(
            f"claim {name!r} must be a {expected}, got {type(value).__name__}"
        )


def claims_for_scopes(scopes: Iterable[str]) -> list[str]:
    """Attribute names to request for a set of scopes, in catalog order."""
    requested: set[str] = set()
    for scope in scopes:
        if scope not in SCOPE_CLAIMS:
            raise UnknownScopeError(f"unknown scope {scope!r}")
        requested.update(SCOPE_CLAIMS[scope])
    return [name for name in OIDC_CLAIMS if name in requested]


def over_18_from_birthdate(birthdate: str, now_epoch: int) -> bool:
    """Whether a person born on an ISO date is at least 18 at the given instant."""
    born = datetime.date.fromisoformat(birthdate)
    today = datetime.datetime.fromtimestamp(
        now_epoch, tz=datetime.timezone.utc
    ).date()
    age = today.year - born.year - ((today.month, today.day) < (born.month, born.day))
    return age >= 18
