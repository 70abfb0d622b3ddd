"""CSV artifacts carrying the producing run's config hash.

Every CSV written by the pipeline starts with a ``# config_hash=<hash>``
comment line followed by a pandas-written table.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import pandas as pd

HASH_PREFIX = "# config_hash="


def write_csv(frame: pd.DataFrame, path: Path, config_hash: str = "") -> Path:
    """Write ``frame`` to ``path`` with a leading config-hash comment."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = frame.to_csv(index=False, lineterminator="\n", float_format="%.10g")
    path.write_text(f"{HASH_PREFIX}{config_hash}\n{body}", encoding="utf-8")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    """Read a CSV artifact, skipping the config-hash comment."""
    return pd.read_csv(path, comment="#")


def read_config_hash(path: Path) -> Optional[str]:
    """Return the config hash embedded in a CSV artifact, if any."""
    with Path(path).open("r", encoding="utf-8") as handle:
        first = handle.readline().strip()
    if first.startswith(HASH_PREFIX):
        return first[len(HASH_PREFIX):]
    return None
