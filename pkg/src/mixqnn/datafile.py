"""Dataset container files.

Layout: magic ``QDS1``, header length ``u32`` little-endian, UTF-8 JSON
header, then the payload. Quantum payloads use the wire module's complex
encoding (interleaved float64 re/im, little-endian, row-major); genotypes
are raw ``uint8``. Labels follow as ``uint8``. Basis index ``b`` is the
bitstring ``q0 q1 ... q(n-1)`` with ``q0`` most significant.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .datagen import GENOTYPE, LabeledDataset
from .errors import FramingError
from .protocol.wire import decode_complex, encode_complex

MAGIC = b"QDS1"
FORMAT_VERSION = 1
_LEN = struct.Struct("<I")


def dumps_dataset(ds: LabeledDataset) -> bytes:
    payloads = np.asarray(ds.payloads)
    if ds.kind == GENOTYPE:
        body = np.ascontiguousarray(payloads, dtype=np.uint8).tobytes()
    else:
        body = encode_complex(payloads)
    header = {
        "format_version": FORMAT_VERSION,
        "kind": ds.kind,
        "shape": list(payloads.shape),
        "n": len(ds),
        "counts": {str(k): v for k, v in ds.counts().items()},
        "qubit_order": "q0 is the most significant bit",
        "meta": ds.meta,
    }
    hbytes = json.dumps(header, sort_keys=True).encode()
    labels = ds.labels.astype(np.uint8).tobytes()
    return MAGIC + _LEN.pack(len(hbytes)) + hbytes + body + labels


def loads_dataset(data: bytes) -> LabeledDataset:
    if data[:4] != MAGIC:
        raise FramingError("not a dataset container")
    if len(data) < 8:
        raise FramingError("truncated container")
    (hlen,) = _LEN.unpack_from(data, 4)
    try:
        header = json.loads(data[8 : 8 + hlen])
    except ValueError as exc:
        raise FramingError(f"bad container header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise FramingError(f"unsupported container version {header.get('format_version')}")
    shape = tuple(header["shape"])
    n = int(header["n"])
    start = 8 + hlen
    item = 1 if header["kind"] == GENOTYPE else 16
    size = int(np.prod(shape)) * item
    if len(data) != start + size + n:
        raise FramingError("container length does not match its header")
    raw = data[start : start + size]
    if header["kind"] == GENOTYPE:
        payloads = np.frombuffer(raw, dtype=np.uint8).reshape(shape).copy()
    else:
        payloads = decode_complex(raw, shape)
    labels = np.frombuffer(data[start + size :], dtype=np.uint8).astype(np.int64)
    return LabeledDataset(header["kind"], payloads, labels, header.get("meta", {}))


def save_dataset(path, ds: LabeledDataset) -> None:
    Path(path).write_bytes(dumps_dataset(ds))


def load_dataset(path) -> LabeledDataset:
    return loads_dataset(Path(path).read_bytes())


def export_genotypes_csv(path, ds: LabeledDataset) -> None:
    if ds.kind != GENOTYPE:
        raise FramingError("only genotype datasets export to CSV")
    cols = ds.meta.get("selected_snps") or list(range(ds.payloads.shape[1]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", *[f"snp{c}" for c in cols]])
        for y, row in zip(ds.labels, ds.payloads):
            w.writerow([int(y), *row.tolist()])
