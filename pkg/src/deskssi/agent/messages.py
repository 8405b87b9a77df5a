"""Typed inter-agent messages.

Every message travels inside an authcrypt envelope; the type plus a
thread id lets the receiving agent correlate multi-step exchanges
(offer -> request -> issue; proof request -> presentation).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from deskssi.canonical import canonical_bytes


class MessageType(str, enum.Enum):
    CONNECTION_REQUEST = "CONNECTION_REQUEST"
    CONNECTION_RESPONSE = "CONNECTION_RESPONSE"
    CREDENTIAL_OFFER = "CREDENTIAL_OFFER"
    CREDENTIAL_REQUEST = "CREDENTIAL_REQUEST"
    CREDENTIAL_ISSUE = "CREDENTIAL_ISSUE"
    PROOF_REQUEST = "PROOF_REQUEST"
    PROOF_PRESENTATION = "PROOF_PRESENTATION"
    PROBLEM_REPORT = "PROBLEM_REPORT"


class MessageError(ValueError):
    pass


@dataclass(frozen=True)
class AgentMessage:
    type: MessageType
    body: dict
    thread_id: str

    def to_dict(self) -> dict:
        return {
            "type": self.type.value,
            "body": self.body,
            "thread_id": self.thread_id,
        }

    def to_bytes(self) -> bytes:
        return canonical_bytes(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "AgentMessage":
        try:
            return cls(
                type=MessageType(data["type"]),
                body=dict(data["body"]),
                thread_id=str(data["thread_id"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MessageError(f"malformed agent message: {exc}") from exc
