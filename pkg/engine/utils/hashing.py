"""Stable content hashes used to tie artifacts together across stages."""

from __future__ import annotations

import hashlib
import json
from typing import Any, Iterable, Mapping


def canonical_json(payload: Any) -> str:
    """Serialize ``payload`` with sorted keys and no insignificant whitespace."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def sha256_hex(text: str, length: int = 16) -> str:
    """Return the first ``length`` hex characters of the SHA-256 of ``text``."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:length]


def config_hash(config: Mapping[str, Any]) -> str:
    """Hash a configuration mapping independent of key order."""
    return sha256_hex(canonical_json(dict(config)))


def names_hash(names: Iterable[str], prefix: str = "") -> str:
    """Hash an ordered sequence of names (schema columns, vocabulary terms)."""
    return sha256_hex(prefix + "\n" + "\n".join(names))


def counts_hash(counts: Mapping[str, int]) -> str:
    """Order-free hash of a token-count map."""
    return sha256_hex(canonical_json(sorted(counts.items())))


def derive_seed(*parts: Any) -> int:
    """Derive a 63-bit seed from arbitrary hashable parts.

    Used for per-document, per-patient and per-feature generators so that
    parallel or reordered work stays reproducible.
    """
    digest = hashlib.sha256(canonical_json(list(parts)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1
