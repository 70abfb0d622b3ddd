"""Example shards: binary containers plus a manifest CSV of class counts."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from engine.errors import SchemaMismatchError, ValidationError
from engine.core.variables import InterventionKind
from engine.utils.binary_io import read_container, write_container
from engine.utils.csv_io import read_csv, write_csv
from engine.utils.file_utils import scan_directory
from engine.windowing.labels import class_counts
from engine.windowing.windows import ExampleSet

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.csv"
SHARD_SIZE = 4096


def write_shards(
    examples: ExampleSet,
    directory: Path,
    shard_size: int = SHARD_SIZE,
    config_hash: str = "",
    split_name: str = "all",
) -> List[Path]:
    """Write ``examples`` as ``<split>_<n>.icuf`` shards and update the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    rows = []
    n_shards = max(1, -(-len(examples) // shard_size))
    for s in range(n_shards):
        part = examples.subset(np.arange(s * shard_size, min((s + 1) * shard_size, len(examples))))
        name = f"{split_name}_{s:04d}.icuf"
        header = {
            "kind": "examples",
            "intervention": part.kind.value,
            "schema_hash": part.schema_hash,
            "config_hash": config_hash,
            "stay_ids": list(part.stay_ids),
            "starts": part.starts.tolist(),
        }
        paths.append(write_container(
            directory / name,
            header,
            [("labels", part.labels.astype(np.float64)), ("features", part.features)],
        ))
        rows.append({"shard": name, "split": split_name, "n_examples": len(part),
                     **{f"n_{c}": n for c, n in class_counts(part.labels, part.scheme).items()}})

    manifest_path = directory / MANIFEST_FILE
    frame = pd.DataFrame(rows)
    if manifest_path.exists():
        previous = read_csv(manifest_path)
        frame = pd.concat([previous[previous["split"] != split_name], frame], ignore_index=True)
    write_csv(frame.sort_values("shard", kind="stable"), manifest_path, config_hash)
    logger.info("Wrote %d %s examples into %d shard(s)", len(examples), split_name, n_shards)
    return paths


def read_shards(
    directory: Path,
    split_name: str = "all",
    expected_hash: Optional[str] = None,
) -> ExampleSet:
    """Concatenate every shard of ``split_name`` in shard order."""
    paths = scan_directory(directory, f"{split_name}_*.icuf")
    if not paths:
        raise ValidationError(f"No '{split_name}' shards in {directory}")
    features, labels, stay_ids, starts = [], [], [], []
    kind = schema_hash = None
    for path in paths:
        header, arrays = read_container(path)
        if schema_hash is None:
            schema_hash, kind = header["schema_hash"], InterventionKind.parse(header["intervention"])
        elif header["schema_hash"] != schema_hash:
            raise SchemaMismatchError(schema_hash, header["schema_hash"], where=str(path))
        features.append(arrays["features"])
        labels.append(arrays["labels"].astype(np.int64))
        stay_ids.extend(header["stay_ids"])
        starts.extend(header["starts"])
    if expected_hash is not None and schema_hash != expected_hash:
        raise SchemaMismatchError(expected_hash, schema_hash, where=str(directory))
    return ExampleSet(
        features=np.concatenate(features, axis=0),
        labels=np.concatenate(labels),
        stay_ids=tuple(stay_ids),
        starts=np.asarray(starts, dtype=np.int64),
        kind=kind,
        schema_hash=schema_hash,
    )
