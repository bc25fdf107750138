"""Binary tensor container: magic "MHTT", version byte, JSON manifest, blob.

Layout:

    bytes 0..3    magic b"MHTT"
    byte  4       format version (currently 1)
    bytes 5..8    little-endian uint32 manifest length N
    bytes 9..9+N  UTF-8 JSON manifest: {"kind", "meta", "tensors": [
                      {"name", "dtype", "shape", "offset", "nbytes"}, ...]}
    remainder     tensor blob; offsets are relative to its start

Tensors are stored little-endian float32 in name order. Writes go through a
temp file and os.replace, so concurrent readers never observe a partial file.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from ttslab.errors import CheckpointCorruptError, CheckpointFormatError

MAGIC = b"MHTT"
VERSION = 1
_DTYPE = "<f4"


def write_container(path, tensors: dict, kind: str, meta: dict) -> None:
    """Serialize named arrays (stored as little-endian float32) plus metadata."""
    entries = []
    blobs = []
    offset = 0
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype=_DTYPE)
        nbytes = arr.nbytes
        entries.append({"name": name, "dtype": _DTYPE,
                        "shape": list(arr.shape), "offset": offset,
                        "nbytes": nbytes})
        blobs.append(arr.tobytes())
        offset += nbytes
    manifest = json.dumps({"kind": kind, "meta": meta, "tensors": entries},
                          sort_keys=True, separators=(",", ":")).encode("utf-8")
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes([VERSION]))
        fh.write(struct.pack("<I", len(manifest)))
        fh.write(manifest)
        for blob in blobs:
            fh.write(blob)
    os.replace(tmp, path)


def read_container(path):
    """Load a container; returns (tensors dict of float32 arrays, kind, meta).

    Raises CheckpointFormatError for foreign files and CheckpointCorruptError
    for recognizable but inconsistent ones; never returns a partial result.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 9 or raw[:4] != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic bytes, not a {MAGIC.decode()} container")
    if raw[4] != VERSION:
        raise CheckpointFormatError(f"{path}: unsupported container version {raw[4]}")
    (manifest_len,) = struct.unpack("<I", raw[5:9])
    blob_start = 9 + manifest_len
    if len(raw) < blob_start:
        raise CheckpointCorruptError(f"{path}: truncated manifest "
                                     f"({len(raw) - 9} of {manifest_len} bytes)")
    try:
        manifest = json.loads(raw[9:blob_start].decode("utf-8"))
        entries = manifest["tensors"]
        kind = manifest["kind"]
        meta = manifest["meta"]
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise CheckpointCorruptError(f"{path}: unreadable manifest ({exc})") from exc
    blob = raw[blob_start:]
    expected = sum(e["nbytes"] for e in entries)
    if len(blob) != expected:
        raise CheckpointCorruptError(f"{path}: blob length {len(blob)} does not match "
                                     f"manifest total {expected}")
    tensors = {}
    for e in entries:
        start, nbytes = e["offset"], e["nbytes"]
        if start < 0 or start + nbytes > len(blob):
            raise CheckpointCorruptError(f"{path}: tensor {e['name']!r} offsets "
                                         "outside blob")
        arr = np.frombuffer(blob[start:start + nbytes], dtype=e["dtype"])
        shape = tuple(e["shape"])
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise CheckpointCorruptError(f"{path}: tensor {e['name']!r} size/shape mismatch")
        tensors[e["name"]] = arr.reshape(shape).copy()
    return tensors, kind, meta
