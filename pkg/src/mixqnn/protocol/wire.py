"""Binary encodings: global-state frames, message envelopes, JSON bodies.

Global-state frame (all little-endian)::

    magic "QGS1" | version u16 | n_qubits u8 | reserved u8 | label u8 | pad 3
    | batch_size u32 | weight f64 | dim*dim x (re f64, im f64), row-major
    | CRC32 u32 of everything before it

Envelope on a stream: ``u32`` big-endian length of the rest, one type byte,
then the body. Only the message types in ``MessageType`` exist; none of them
carries an individual record.
"""

from __future__ import annotations

import enum
import json
import socket
import struct
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from ..batching import GlobalState
from ..classifier import LossKind, LossSpec, TrainConfig
from ..errors import (
    BadMagic,
    ChecksumMismatch,
    FramingError,
    ProtocolError,
    StateInvariantViolation,
    TransportError,
    UnsupportedVersion,
)

MAGIC = b"QGS1"
VERSION = 1
PROTOCOL_VERSION = 1
HEADER = struct.Struct("<4sHBBB3xId")
CRC = struct.Struct("<I")
ENVELOPE = struct.Struct(">IB")
MAX_MESSAGE = 64 * 1024 * 1024
MAX_QUBITS = 12
TRANSPORT_TOL = 1e-8


class MessageType(enum.IntEnum):
    HELLO = 1
    GLOBAL_STATE = 2
    DONE = 3
    TRAIN_REQUEST = 4
    MODEL_RESULT = 5
    ERROR = 6


# --- complex array encoding -------------------------------------------------


def encode_complex(arr) -> bytes:
    """Interleaved (re, im) float64 little-endian, C order."""
    a = np.ascontiguousarray(arr, dtype=np.complex128)
    return a.astype("<c16", copy=False).tobytes()


def decode_complex(data: bytes, shape) -> np.ndarray:
    count = int(np.prod(shape))
    if len(data) != 16 * count:
        raise FramingError(f"expected {16 * count} payload bytes, got {len(data)}")
    return np.frombuffer(data, dtype="<c16").astype(np.complex128).reshape(shape)


# --- global-state frames ----------------------------------------------------


def frame_size(n_qubits: int) -> int:
    dim = 2**n_qubits
    return HEADER.size + 16 * dim * dim + CRC.size


def serialize_global_state(g: GlobalState) -> bytes:
    rho = np.asarray(g.state)
    dim = rho.shape[0]
    n_qubits = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 2**n_qubits != dim:
        raise FramingError(f"state of shape {rho.shape} is not a qubit density matrix")
    head = HEADER.pack(MAGIC, VERSION, n_qubits, 0, int(g.label), int(g.size), float(g.weight))
    body = head + encode_complex(rho)
    return body + CRC.pack(zlib.crc32(body))


def deserialize_global_state(data: bytes) -> GlobalState:
    """Parse and validate one frame; never returns a partially checked state."""
    data = bytes(data)
    if len(data) < HEADER.size + CRC.size:
        raise FramingError(f"frame of {len(data)} bytes is shorter than the header")
    magic, version, n_qubits, _reserved, label, batch_size, weight = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"frame version {version}, supported {VERSION}")
    if n_qubits > MAX_QUBITS:
        raise FramingError(f"{n_qubits} qubits exceed the limit of {MAX_QUBITS}")
    if len(data) != frame_size(n_qubits):
        raise FramingError(f"frame of {len(data)} bytes, expected {frame_size(n_qubits)}")
    (crc,) = CRC.unpack_from(data, len(data) - CRC.size)
    if zlib.crc32(data[: -CRC.size]) != crc:
        raise ChecksumMismatch("CRC32 does not match")
    dim = 2**n_qubits
    rho = decode_complex(data[HEADER.size : -CRC.size], (dim, dim))
    _check_transported(rho, label, batch_size, weight)
    return GlobalState(rho, int(label), int(batch_size), float(weight))


def _check_transported(rho, label, batch_size, weight) -> None:
    if label not in (0, 1):
        raise StateInvariantViolation(f"label {label} is not binary")
    if batch_size < 1:
        raise StateInvariantViolation("batch size must be positive")
    if not (np.isfinite(weight) and weight > 0):
        raise StateInvariantViolation(f"weight {weight} is not positive")
    if not np.all(np.isfinite(rho)):
        raise StateInvariantViolation("non-finite matrix entry")
    if np.max(np.abs(rho - rho.conj().T)) > TRANSPORT_TOL:
        raise StateInvariantViolation("matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRANSPORT_TOL:
        raise StateInvariantViolation(f"trace {tr.real:.12g} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -TRANSPORT_TOL:
        raise StateInvariantViolation("matrix has a negative eigenvalue")


# --- JSON bodies ------------------------------------------------------------


@dataclass(frozen=True)
class TrainRequest:
    n_qubits: int
    reps: int = 1
    loss: str = LossKind.L1_RESCALED.value
    sigmoid_k: float = 10.0
    maxiter_per_epoch: int = 200
    max_epochs: int = 50
    patience: int = 10
    seed: int = 1
    observable_qubit: int | None = None
    parity: bool = False
    optimizer: str = "cobyla"

    def config(self) -> TrainConfig:
        return TrainConfig(
            reps=self.reps,
            maxiter_per_epoch=self.maxiter_per_epoch,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
            loss=LossSpec(self.loss, self.sigmoid_k),
            observable_qubit=self.observable_qubit,
            parity=self.parity,
            optimizer=self.optimizer,
        )

    def to_json(self) -> bytes:
        return json.dumps(asdict(self), sort_keys=True).encode()

    @classmethod
    def from_json(cls, data: bytes) -> "TrainRequest":
        try:
            return cls(**json.loads(data))
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed train request: {exc}") from exc


@dataclass
class ModelResult:
    params: list
    loss: float
    eval_count: int
    epochs: int = 0
    history: list = field(default_factory=list)
    n_states: int = 0

    def to_json(self) -> bytes:
        return json.dumps(asdict(self)).encode()

    @classmethod
    def from_json(cls, data: bytes) -> "ModelResult":
        try:
            return cls(**json.loads(data))
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed model result: {exc}") from exc

    def params_array(self) -> np.ndarray:
        return np.asarray(self.params, dtype=np.float64)


def json_body(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True).encode()


def parse_json_body(data: bytes) -> dict:
    try:
        obj = json.loads(data)
    except ValueError as exc:
        raise ProtocolError(f"malformed JSON body: {exc}") from exc
    if not isinstance(obj, dict):
        raise ProtocolError("JSON body must be an object")
    return obj


# --- envelopes --------------------------------------------------------------


def pack_message(kind: MessageType, body: bytes = b"") -> bytes:
    if len(body) + 1 > MAX_MESSAGE:
        raise FramingError("message too large")
    return ENVELOPE.pack(len(body) + 1, int(kind)) + body


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        try:
            chunk = sock.recv(n - len(buf))
        except OSError as exc:
            raise TransportError(f"receive failed: {exc}") from exc
        if not chunk:
            raise TransportError(f"connection closed after {len(buf)} of {n} bytes")
        buf += chunk
    return bytes(buf)


def send_message(sock: socket.socket, kind: MessageType, body: bytes = b"") -> None:
    try:
        sock.sendall(pack_message(kind, body))
    except OSError as exc:
        raise TransportError(f"send failed: {exc}") from exc


def recv_message(sock: socket.socket) -> tuple[MessageType, bytes]:
    length, kind = ENVELOPE.unpack(_recv_exact(sock, ENVELOPE.size))
    if length < 1 or length > MAX_MESSAGE:
        raise FramingError(f"invalid message length {length}")
    try:
        mtype = MessageType(kind)
    except ValueError:
        raise ProtocolError(f"unknown message type {kind}") from None
    return mtype, _recv_exact(sock, length - 1)


def error_body(message: str) -> bytes:
    return json_body({"error": message})
