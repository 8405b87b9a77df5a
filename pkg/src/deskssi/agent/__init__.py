"""Edge agents: pairwise connections, authcrypted delivery, consent queue."""

from deskssi.agent.api import build_agent_app
from deskssi.agent.core import (
    Agent,
    AgentError,
    ConnectionOffer,
    NoMatchingCredentialError,
    OfferConsumedError,
    PairwiseConnection,
    PendingNotFoundError,
    UnknownSenderError,
)
from deskssi.agent.messages import AgentMessage, MessageType
from deskssi.agent.network import (
    HttpNetwork,
    InMemoryNetwork,
    Network,
    RecordingNetwork,
    TransportError,
)
from deskssi.agent.wallet import Wallet, WalletError

__all__ = [
    "Agent",
    "AgentError",
    "AgentMessage",
    "ConnectionOffer",
    "HttpNetwork",
    "InMemoryNetwork",
    "MessageType",
    "Network",
    "NoMatchingCredentialError",
    "OfferConsumedError",
    "PairwiseConnection",
    "PendingNotFoundError",
    "RecordingNetwork",
    "TransportError",
    "UnknownSenderError",
    "Wallet",
    "WalletError",
    "build_agent_app",
]
