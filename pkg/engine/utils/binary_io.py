"""Versioned binary container for float64 arrays.

Layout::

    magic (4 bytes) | format version (uint32 LE) | header length (uint32 LE)
    header (UTF-8 canonical JSON)
    array payloads, float64 little-endian, in header declaration order

The header always lists ``arrays`` as ``[{"name": ..., "shape": [...]}, ...]``.
Writing is deterministic: identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np

from engine.errors import ValidationError
from engine.utils.hashing import canonical_json

MAGIC = b"ICUF"
FORMAT_VERSION = 1


def write_container(path: Path, header: Dict[str, Any], arrays: List[Tuple[str, np.ndarray]]) -> Path:
    """Write ``arrays`` with ``header`` to ``path``."""
    full_header = dict(header)
    full_header["arrays"] = [{"name": name, "shape": list(np.shape(arr))} for name, arr in arrays]
    header_bytes = canonical_json(full_header).encode("utf-8")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", FORMAT_VERSION, len(header_bytes)))
        handle.write(header_bytes)
        for _, arr in arrays:
            handle.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return path


def read_container(path: Path) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Read a container written by :func:`write_container`.

    Returns:
        (header, arrays by name, in declaration order)
    """
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValidationError(f"{path}: not an ICUForge binary container")
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported container version {version}")

    header = json.loads(raw[12:12 + header_len].decode("utf-8"))
    offset = 12 + header_len
    arrays: Dict[str, np.ndarray] = {}
    for spec in header["arrays"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        chunk = raw[offset:offset + nbytes]
        if len(chunk) != nbytes:
            raise ValidationError(f"{path}: truncated payload for array '{spec['name']}'")
        arrays[spec["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(shape).astype(np.float64)
        offset += nbytes
    return header, arrays
