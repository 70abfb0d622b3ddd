"""Model checkpoints in the versioned binary container."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from engine.errors import SchemaMismatchError, ValidationError
from engine.models.base import ModelGraph
from engine.models.config import ModelConfig
from engine.models.factory import build_model
from engine.utils.binary_io import read_container, write_container

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "icuforge-model"
CHECKPOINT_VERSION = 1


def save_checkpoint(model: ModelGraph, path: Path, config_hash: str = "", extra: Optional[dict] = None) -> Path:
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model_kind": model.config.kind.value,
        "schema_hash": model.schema_hash,
        "config": model.config.to_dict(),
        "seed": model.config.seed,
        "config_hash": config_hash,
        "extra": extra or {},
    }
    path = write_container(path, header, list(model.params.items()))
    logger.info("Saved %s checkpoint to %s", model.config.kind.value, path)
    return path


def load_checkpoint(path: Path, expected_schema_hash: Optional[str] = None) -> ModelGraph:
    """Rebuild the model and restore its parameters.

    Raises:
        SchemaMismatchError: checkpoint schema differs from ``expected_schema_hash``
    """
    header, arrays = read_container(path)
    if header.get("format") != CHECKPOINT_FORMAT:
        raise ValidationError(f"{path}: not a model checkpoint")
    if header.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(f"{path}: unsupported checkpoint version {header.get('version')}")
    if expected_schema_hash is not None and header["schema_hash"] != expected_schema_hash:
        raise SchemaMismatchError(expected_schema_hash, header["schema_hash"], where=str(path))

    model = build_model(ModelConfig.from_dict(header["config"]), header["schema_hash"])
    if list(arrays) != list(model.params):
        raise ValidationError(f"{path}: parameter list does not match a {header['model_kind']} model")
    model.set_state(arrays)
    return model


def read_checkpoint_header(path: Path) -> dict:
    return read_container(path)[0]
