"""Client/server roles and the wire format for shipping global states."""

from .client import ClientConfig, ClientTranscript, client_run, prepare_global_states
from .server import ProtocolServer, ServerConfig, server_run, train_on_globals
from .wire import (
    MessageType,
    ModelResult,
    TrainRequest,
    deserialize_global_state,
    serialize_global_state,
)

__all__ = [
    "ClientConfig",
    "ClientTranscript",
    "MessageType",
    "ModelResult",
    "ProtocolServer",
    "ServerConfig",
    "TrainRequest",
    "client_run",
    "deserialize_global_state",
    "prepare_global_states",
    "serialize_global_state",
    "server_run",
    "train_on_globals",
]
