"""Data-holding client: encode, batch, mix, ship global states.

Individual records never leave this module; the only payloads written to a
socket or file are serialized global-state frames.
"""

from __future__ import annotations

import logging
import socket
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..batching import GlobalState, global_states
from ..datagen import LabeledDataset
from ..errors import ProtocolError, TransportError
from .wire import (
    PROTOCOL_VERSION,
    MessageType,
    ModelResult,
    TrainRequest,
    deserialize_global_state,
    json_body,
    parse_json_body,
    recv_message,
    send_message,
    serialize_global_state,
)

log = logging.getLogger(__name__)


@dataclass
class ClientConfig:
    client_id: str
    n_batches: int
    batching: str = "random"
    seed: int = 0
    host: str = "127.0.0.1"
    port: int = 0
    retries: int = 3
    backoff: float = 0.1
    timeout: float = 60.0
    offline_dir: str | None = None
    request: TrainRequest | None = None
    protocol_version: int = PROTOCOL_VERSION


@dataclass
class ClientTranscript:
    client_id: str
    sent: Counter = field(default_factory=Counter)
    bytes_sent: int = 0
    files: list = field(default_factory=list)
    result: ModelResult | None = None

    def to_dict(self) -> dict:
        return {
            "client_id": self.client_id,
            "sent": {k: v for k, v in sorted(self.sent.items())},
            "bytes_sent": self.bytes_sent,
            "files": list(self.files),
            "result": None if self.result is None else vars(self.result),
        }


def prepare_global_states(ds: LabeledDataset, n_batches: int, strategy: str, seed) -> list[GlobalState]:
    """Amplitude-encode (for genotypes), batch each class present, mix."""
    _, globs = global_states(ds.quantum_states(), ds.labels, n_batches, strategy, seed, allow_missing_class=True)
    return globs


def connect_with_retries(host: str, port: int, retries: int, backoff: float, timeout: float) -> socket.socket:
    """One attempt plus ``retries`` more, sleeping ``backoff * 2**k`` in between."""
    for attempt in range(retries + 1):
        try:
            return socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            if attempt == retries:
                raise TransportError(f"cannot reach {host}:{port} after {retries + 1} attempts: {exc}") from exc
            delay = backoff * 2**attempt
            log.info("connection to %s:%d failed (%s), retrying in %.2fs", host, port, exc, delay)
            time.sleep(delay)
    raise AssertionError("unreachable")


def client_run(cfg: ClientConfig, ds: LabeledDataset) -> ClientTranscript:
    frames = [serialize_global_state(g) for g in prepare_global_states(ds, cfg.n_batches, cfg.batching, cfg.seed)]
    transcript = ClientTranscript(cfg.client_id)
    if cfg.offline_dir is not None:
        out = Path(cfg.offline_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, frame in enumerate(frames):
            path = out / f"{cfg.client_id}_{i:04d}.qgs"
            path.write_bytes(frame)
            transcript.files.append(str(path))
            transcript.sent[MessageType.GLOBAL_STATE.name] += 1
            transcript.bytes_sent += len(frame)
        return transcript

    sock = connect_with_retries(cfg.host, cfg.port, cfg.retries, cfg.backoff, cfg.timeout)
    with sock:

        def send(kind: MessageType, body: bytes = b"") -> None:
            send_message(sock, kind, body)
            transcript.sent[kind.name] += 1
            transcript.bytes_sent += len(body) + 5

        send(MessageType.HELLO, json_body({"client_id": cfg.client_id, "protocol_version": cfg.protocol_version}))
        kind, body = recv_message(sock)
        if kind is MessageType.ERROR:
            raise ProtocolError(f"handshake rejected: {parse_json_body(body).get('error')}")
        if kind is not MessageType.HELLO:
            raise ProtocolError(f"expected HELLO acknowledgement, got {kind.name}")
        if cfg.request is not None:
            send(MessageType.TRAIN_REQUEST, cfg.request.to_json())
        for frame in frames:
            send(MessageType.GLOBAL_STATE, frame)
        send(MessageType.DONE)
        kind, body = recv_message(sock)
        if kind is MessageType.ERROR:
            raise ProtocolError(f"server reported: {parse_json_body(body).get('error')}")
        if kind is not MessageType.MODEL_RESULT:
            raise ProtocolError(f"expected MODEL_RESULT, got {kind.name}")
        transcript.result = ModelResult.from_json(body)
    return transcript


def read_qgs_dir(path) -> list[GlobalState]:
    """Load every ``.qgs`` frame in a directory, sorted by file name."""
    return [deserialize_global_state(p.read_bytes()) for p in sorted(Path(path).glob("*.qgs"))]
