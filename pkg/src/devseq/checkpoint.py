"""Self-describing binary checkpoint container.

Byte layout (all integers little-endian)::

    offset  size  content
    0       8     magic b"DSEQCKPT"
    8       4     uint32 format version (currently 1)
    12      8     uint64 header length H
    20      H     UTF-8 JSON header, keys sorted, no whitespace
    20+H    ...   tensor payload: float64 little-endian, row-major

The header is ``{"config": {...}, "meta": {...}, "tensors": [...]}`` where
each tensor entry is ``{"name", "shape", "offset", "count"}``; ``offset``
and ``count`` are in float64 elements relative to the payload start.
Identical inputs always serialize to identical bytes.
"""

from __future__ import annotations

import io
import json
import struct
from typing import Any, BinaryIO, Mapping

import numpy as np

__all__ = ["MAGIC", "VERSION", "CheckpointError", "dumps", "loads", "save", "load"]

MAGIC = b"DSEQCKPT"
VERSION = 1
_PREFIX = struct.Struct("<8sIQ")


class CheckpointError(ValueError):
    pass


def dumps(
    tensors: Mapping[str, np.ndarray], config: Mapping[str, Any], meta: Mapping[str, Any] | None = None
) -> bytes:
    entries = []
    offset = 0
    payload = io.BytesIO()
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype="<f8")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset, "count": arr.size})
        payload.write(arr.tobytes(order="C"))
        offset += arr.size
    header = json.dumps(
        {"config": dict(config), "meta": dict(meta or {}), "tensors": entries},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    ).encode("utf-8")
    return _PREFIX.pack(MAGIC, VERSION, len(header)) + header + payload.getvalue()


def loads(data: bytes) -> tuple[dict[str, np.ndarray], dict[str, Any], dict[str, Any]]:
    if len(data) < _PREFIX.size:
        raise CheckpointError("checkpoint truncated")
    magic, version, hlen = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError("not a devseq checkpoint (bad magic)")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    start = _PREFIX.size
    header = json.loads(data[start : start + hlen].decode("utf-8"))
    payload = np.frombuffer(data, dtype="<f8", offset=start + hlen)
    tensors = {}
    for e in header["tensors"]:
        chunk = payload[e["offset"] : e["offset"] + e["count"]]
        if chunk.size != e["count"]:
            raise CheckpointError(f"tensor {e['name']!r} truncated")
        tensors[e["name"]] = chunk.astype(np.float64).reshape(e["shape"])
    return tensors, header["config"], header["meta"]


def save(path_or_file: str | BinaryIO, tensors, config, meta=None) -> None:
    data = dumps(tensors, config, meta)
    if hasattr(path_or_file, "write"):
        path_or_file.write(data)
    else:
        with open(path_or_file, "wb") as fh:
            fh.write(data)


def load(path_or_file: str | BinaryIO):
    if hasattr(path_or_file, "read"):
        return loads(path_or_file.read())
    with open(path_or_file, "rb") as fh:
        return loads(fh.read())
