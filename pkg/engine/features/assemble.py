"""Assemble FeatureMatrix objects and read/write them."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional

import numpy as np
import pandas as pd

from engine.config import FOLD_IN_SWEEPS
from engine.errors import SchemaMismatchError, ShapeError, ValidationError
from engine.core.stay import PatientStay
from engine.core.variables import InterventionKind
from engine.features.encoding import (
    aggregate_topics,
    encode_statics,
    encode_words,
    normalize_impute,
    time_of_day,
)
from engine.features.schema import FeatureMode, FeatureSchema, build_schema
from engine.features.stats import NormalizationStats
from engine.topics.lda import TopicModel
from engine.utils.binary_io import read_container, write_container
from engine.utils.csv_io import HASH_PREFIX
from engine.utils.hashing import names_hash

logger = logging.getLogger(__name__)

SCHEMA_PREFIX = "# schema_hash="


@dataclass(frozen=True)
class FeatureMatrix:
    schema: FeatureSchema
    values: np.ndarray
    stay_id: str = ""

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != self.schema.width:
            raise ShapeError(f"FeatureMatrix needs shape (hours, {self.schema.width}); got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_hours(self) -> int:
        return int(self.values.shape[0])

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.schema.index(name)]


def assemble(
    stay: PatientStay,
    mode: "FeatureMode | str",
    stats: NormalizationStats,
    topic_model: TopicModel,
    kind: "InterventionKind | str",
    fold_in_iterations: int = FOLD_IN_SWEEPS,
    seed: int = 0,
    schema: Optional[FeatureSchema] = None,
) -> FeatureMatrix:
    """Build one stay's hourly feature matrix.

    Raises:
        SchemaMismatchError: ``schema`` disagrees with mode or topic count
    """
    mode = FeatureMode.parse(mode)
    kind = InterventionKind.parse(kind)
    expected = build_schema(mode, topic_model.n_topics)
    if schema is not None and schema.hash != expected.hash:
        raise SchemaMismatchError(schema.hash, expected.hash, where=f"stay {stay.stay_id}")
    schema = expected

    n = stay.n_hours
    if mode is FeatureMode.WORDS:
        measurements = encode_words(stay.grid, stats)
    else:
        measurements = normalize_impute(stay.grid, stats)
    topics = aggregate_topics(stay.notes, topic_model, n, fold_in_iterations, seed)
    statics = np.tile(encode_statics(stay.statics, stats), (n, 1))
    state = stay.track(kind).astype(np.float64)[:, None]
    clock = time_of_day(stay.admit_hour, n)[:, None]

    values = np.hstack([measurements, topics, statics, state, clock])
    return FeatureMatrix(schema=schema, values=values, stay_id=stay.stay_id)


def _schema_from_names(mode: FeatureMode, names) -> FeatureSchema:
    n_topics = sum(1 for name in names if name.startswith("topic_"))
    schema = build_schema(mode, n_topics)
    if list(names) != schema.names:
        raise SchemaMismatchError(schema.hash, names_hash(names, prefix=mode.value), where="column names")
    return schema


def write_matrix(matrix: FeatureMatrix, path: Path, config_hash: str = "") -> Path:
    """CSV variant: hash comments, a header of schema names, one row per hour."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(matrix.values, columns=matrix.schema.names)
    body = frame.to_csv(index=False, lineterminator="\n", float_format="%.17g")
    header = (
        f"{HASH_PREFIX}{config_hash}\n"
        f"{SCHEMA_PREFIX}{matrix.schema.hash},mode={matrix.schema.mode.value},stay_id={matrix.stay_id}\n"
    )
    path.write_text(header + body, encoding="utf-8")
    return path


def read_matrix(path: Path, expected_hash: Optional[str] = None) -> FeatureMatrix:
    path = Path(path)
    meta: Dict[str, str] = {}
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            if line.startswith(SCHEMA_PREFIX):
                first, *rest = line[len(SCHEMA_PREFIX):].strip().split(",")
                meta["schema_hash"] = first
                meta.update(part.split("=", 1) for part in rest)
    if "schema_hash" not in meta:
        raise ValidationError(f"{path}: missing schema hash line")

    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    schema = _schema_from_names(FeatureMode.parse(meta["mode"]), list(frame.columns))
    if schema.hash != meta["schema_hash"]:
        raise SchemaMismatchError(meta["schema_hash"], schema.hash, where=str(path))
    if expected_hash is not None and schema.hash != expected_hash:
        raise SchemaMismatchError(expected_hash, schema.hash, where=str(path))
    return FeatureMatrix(schema=schema, values=frame.to_numpy(dtype=np.float64), stay_id=meta.get("stay_id", ""))


def write_matrices(
    matrices: Mapping[str, FeatureMatrix],
    path: Path,
    config_hash: str = "",
) -> Path:
    """Binary variant: every stay's matrix in one container, keyed by stay id."""
    schemas = {m.schema.hash for m in matrices.values()}
    if len(schemas) > 1:
        raise SchemaMismatchError(sorted(schemas)[0], sorted(schemas)[1], where="feature bundle")
    first = next(iter(matrices.values()), None)
    header = {
        "kind": "feature_matrices",
        "config_hash": config_hash,
        "schema_hash": first.schema.hash if first else "",
        "mode": first.schema.mode.value if first else "",
        "n_topics": first.schema.n_topics if first else 0,
        "stay_ids": list(matrices),
    }
    return write_container(path, header, [(sid, m.values) for sid, m in matrices.items()])


def read_matrices(path: Path, expected_hash: Optional[str] = None) -> Dict[str, FeatureMatrix]:
    header, arrays = read_container(path)
    if header.get("kind") != "feature_matrices":
        raise ValidationError(f"{path}: not a feature matrix bundle")
    if not header["stay_ids"]:
        return {}
    schema = build_schema(header["mode"], header["n_topics"])
    if schema.hash != header["schema_hash"]:
        raise SchemaMismatchError(header["schema_hash"], schema.hash, where=str(path))
    if expected_hash is not None and schema.hash != expected_hash:
        raise SchemaMismatchError(expected_hash, schema.hash, where=str(path))
    return {sid: FeatureMatrix(schema=schema, values=arrays[sid], stay_id=sid) for sid in header["stay_ids"]}
