"""Versioned binary checkpoints: grid metadata + raw field values + checksum."""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from .field import Field
from .grid import Grid

__all__ = ["CheckpointError", "checkpoint_save", "checkpoint_load"]

MAGIC = b"LLBRCKP1"
VERSION = 1


class CheckpointError(OSError):
    """Corrupt, truncated, or incompatible checkpoint file."""


def checkpoint_save(u: Field, path, meta: dict | None = None) -> None:
    """Write a lossless binary snapshot; load(save(u)) is bit-identical."""
    header = {
        "version": VERSION,
        "grid": u.grid.metadata(),
        "dtype": "float64",
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(u.values, dtype=np.float64).tobytes()
    crc = zlib.crc32(header_bytes + payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(struct.pack("<I", crc))


def checkpoint_load(path, grid: Grid | None = None):
    """Read a checkpoint; returns (Field, meta).

    If ``grid`` is given, the stored grid metadata must match exactly.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 12 or blob[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    off = len(MAGIC)
    version, header_len = struct.unpack_from("<II", blob, off)
    off += 8
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    if len(blob) < off + header_len + 4:
        raise CheckpointError(f"{path}: truncated checkpoint")
    header_bytes = blob[off : off + header_len]
    off += header_len
    payload = blob[off:-4]
    (crc_stored,) = struct.unpack_from("<I", blob, len(blob) - 4)
    crc = zlib.crc32(header_bytes + payload) & 0xFFFFFFFF
    if crc != crc_stored:
        raise CheckpointError(f"{path}: checksum mismatch (corrupt or truncated file)")
    header = json.loads(header_bytes.decode("utf-8"))
    stored_grid = Grid.from_metadata(header["grid"])
    if grid is not None and grid.metadata() != stored_grid.metadata():
        raise CheckpointError(
            f"{path}: grid mismatch, file has {stored_grid.metadata()}, expected {grid.metadata()}"
        )
    target = grid if grid is not None else stored_grid
    expected = int(np.prod(target.field_shape)) * 8
    if len(payload) != expected:
        raise CheckpointError(f"{path}: payload size {len(payload)} != expected {expected}")
    values = np.frombuffer(payload, dtype=np.float64).reshape(target.field_shape).copy()
    return Field.from_values(target, values), header.get("meta", {})
