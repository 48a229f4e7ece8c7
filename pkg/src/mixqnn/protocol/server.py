"""Aggregating training server.

Each client session is HELLO, optionally TRAIN_REQUEST, any number of
GLOBAL_STATE frames, then DONE. Once every expected session has ended the
server sorts the accepted states by (client id, arrival index), trains once
and pushes the same MODEL_RESULT to every accepted client. The server never
learns whether a frame holds one individual or a mixture of many.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from dataclasses import dataclass, field

from ..batching import GlobalState
from ..errors import FrameError, MixQNNError, ParamError, ProtocolError, TransportError
from ..experiments import fit_global
from ..qcore import n_qubits_for
from .wire import (
    PROTOCOL_VERSION,
    MessageType,
    ModelResult,
    TrainRequest,
    deserialize_global_state,
    error_body,
    json_body,
    parse_json_body,
    recv_message,
    send_message,
)

log = logging.getLogger(__name__)

ABORT = "abort"
PROCEED = "proceed"


def train_on_globals(globals_, request: TrainRequest) -> ModelResult:
    """Train on global states exactly as received, in the given order."""
    globals_ = list(globals_)
    if not globals_:
        raise ProtocolError("no global states to train on")
    n_qubits = n_qubits_for(globals_[0].state.shape[0])
    if n_qubits != request.n_qubits:
        raise ProtocolError(f"request asks for {request.n_qubits} qubits, states have {n_qubits}")
    model = fit_global(globals_, request.config(), n_qubits)
    return ModelResult(
        params=model.params.tolist(),
        loss=model.loss,
        eval_count=model.eval_count,
        epochs=model.epochs,
        history=list(model.history),
        n_states=len(globals_),
    )


@dataclass
class ServerConfig:
    expected_clients: int
    host: str = "127.0.0.1"
    port: int = 0
    timeout: float = 60.0
    on_timeout: str = ABORT
    request: TrainRequest | None = None

    def validate(self) -> None:
        if self.expected_clients < 1:
            raise ParamError("expected_clients must be at least 1")
        if self.on_timeout not in (ABORT, PROCEED):
            raise ParamError(f"on_timeout must be {ABORT!r} or {PROCEED!r}")
        if self.timeout <= 0:
            raise ParamError("timeout must be positive")


@dataclass
class _Session:
    client_id: str
    sock: socket.socket
    states: list[GlobalState] = field(default_factory=list)
    request: TrainRequest | None = None
    status: str = "open"


class ProtocolServer:
    def __init__(self, cfg: ServerConfig):
        cfg.validate()
        self.cfg = cfg
        self._lock = threading.Lock()
        self._ended = 0
        self._sessions: dict[str, _Session] = {}
        self.transcript: dict[str, dict] = {}
        self._listener: socket.socket | None = None
        self._threads: list[threading.Thread] = []

    @property
    def address(self) -> tuple[str, int]:
        if self._listener is None:
            raise ProtocolError("server is not bound")
        return self._listener.getsockname()[:2]

    def bind(self) -> tuple[str, int]:
        self._listener = socket.create_server((self.cfg.host, self.cfg.port))
        self._listener.settimeout(0.05)
        return self.address

    def serve(self) -> ModelResult:
        if self._listener is None:
            self.bind()
        deadline = time.monotonic() + self.cfg.timeout
        try:
            while self._ended_count() < self.cfg.expected_clients and time.monotonic() < deadline:
                try:
                    conn, _ = self._listener.accept()
                except socket.timeout:
                    continue
                t = threading.Thread(target=self._session, args=(conn, deadline), daemon=True)
                t.start()
                self._threads.append(t)
        finally:
            self._listener.close()
        accepted = self._accepted()
        if self._ended_count() < self.cfg.expected_clients:
            missing = self.cfg.expected_clients - self._ended_count()
            log.warning("timed out waiting for %d client(s)", missing)
            if self.cfg.on_timeout == ABORT:
                self._fail_all(accepted, f"timed out waiting for {missing} client(s)")
                raise ProtocolError(f"timed out waiting for {missing} client(s)")
        try:
            request = self._resolve_request(accepted)
            ordered = [g for s in accepted for g in s.states]
            result = train_on_globals(ordered, request)
        except MixQNNError as exc:
            self._fail_all(accepted, str(exc))
            raise
        for s in accepted:
            try:
                send_message(s.sock, MessageType.MODEL_RESULT, result.to_json())
            except TransportError as exc:
                log.warning("could not deliver result to %s: %s", s.client_id, exc)
            finally:
                s.sock.close()
        return result

    def _ended_count(self) -> int:
        with self._lock:
            return self._ended

    def _accepted(self) -> list[_Session]:
        with self._lock:
            done = [s for s in self._sessions.values() if s.status == "done"]
        return sorted(done, key=lambda s: s.client_id)

    def _resolve_request(self, sessions) -> TrainRequest:
        if self.cfg.request is not None:
            return self.cfg.request
        requests = {s.request for s in sessions if s.request is not None}
        if not requests:
            raise ProtocolError("no train request configured or received")
        if len(requests) > 1:
            raise ProtocolError("clients sent conflicting train requests")
        return requests.pop()

    def _fail_all(self, sessions, message: str) -> None:
        for s in sessions:
            try:
                send_message(s.sock, MessageType.ERROR, error_body(message))
            except TransportError:
                pass
            s.sock.close()

    def _end(self, session: _Session | None, status: str, client_id: str | None = None) -> None:
        with self._lock:
            self._ended += 1
            cid = client_id or (session.client_id if session else f"<anonymous-{self._ended}>")
            if session is not None:
                session.status = status
            self.transcript[cid] = {
                "status": status,
                "states": len(session.states) if session else 0,
            }

    def _reject(self, conn, session, message: str, client_id=None) -> None:
        try:
            send_message(conn, MessageType.ERROR, error_body(message))
        except TransportError:
            pass
        conn.close()
        self._end(session, f"rejected: {message}", client_id)

    def _session(self, conn: socket.socket, deadline: float) -> None:
        conn.settimeout(max(0.1, deadline - time.monotonic()))
        session = None
        try:
            kind, body = recv_message(conn)
            if kind is not MessageType.HELLO:
                return self._reject(conn, None, "expected HELLO")
            hello = parse_json_body(body)
            cid = str(hello.get("client_id", ""))
            if not cid:
                return self._reject(conn, None, "HELLO without client_id")
            if hello.get("protocol_version") != PROTOCOL_VERSION:
                return self._reject(
                    conn, None,
                    f"protocol version {hello.get('protocol_version')} unsupported, server speaks {PROTOCOL_VERSION}",
                    cid,
                )
            with self._lock:
                duplicate = cid in self._sessions
                if not duplicate:
                    session = self._sessions[cid] = _Session(cid, conn)
            if duplicate:
                return self._reject(conn, None, f"duplicate client id {cid!r}", cid + "#dup")
            send_message(conn, MessageType.HELLO, json_body({"protocol_version": PROTOCOL_VERSION}))
            while True:
                kind, body = recv_message(conn)
                if kind is MessageType.GLOBAL_STATE:
                    session.states.append(deserialize_global_state(body))
                elif kind is MessageType.TRAIN_REQUEST:
                    session.request = TrainRequest.from_json(body)
                elif kind is MessageType.DONE:
                    self._end(session, "done")
                    return
                else:
                    return self._reject(conn, session, f"unexpected {kind.name}")
        except FrameError as exc:
            # the whole session is discarded, including states already received
            self._reject(conn, session, f"{type(exc).__name__}: {exc}")
        except (ProtocolError, TransportError) as exc:
            self._reject(conn, session, str(exc))


def server_run(cfg: ServerConfig) -> ModelResult:
    server = ProtocolServer(cfg)
    server.bind()
    return server.serve()
