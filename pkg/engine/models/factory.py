"""Build a ModelGraph from its configuration."""

from __future__ import annotations

import logging

from engine.errors import ValidationError
from engine.models.base import ModelGraph
from engine.models.cnn import CNNModel
from engine.models.config import ModelConfig, ModelKind
from engine.models.lr import LogisticModel
from engine.models.lstm import LSTMModel

logger = logging.getLogger(__name__)

_BUILDERS = {
    ModelKind.LSTM: LSTMModel,
    ModelKind.CNN: CNNModel,
    ModelKind.LR: LogisticModel,
}


def build_model(config: ModelConfig, schema_hash: str = "") -> ModelGraph:
    model = _BUILDERS[config.kind](config, schema_hash)
    logger.info("Built %s model with %d parameters", config.kind.value, model.n_parameters)
    return model


def build_lstm(config: ModelConfig, schema_hash: str = "") -> LSTMModel:
    return _checked(config, ModelKind.LSTM, schema_hash)


def build_cnn(config: ModelConfig, schema_hash: str = "") -> CNNModel:
    return _checked(config, ModelKind.CNN, schema_hash)


def build_lr(config: ModelConfig, schema_hash: str = "") -> LogisticModel:
    return _checked(config, ModelKind.LR, schema_hash)


def _checked(config: ModelConfig, kind: ModelKind, schema_hash: str) -> ModelGraph:
    if config.kind is not kind:
        raise ValidationError(f"Expected a {kind.value} config, got {config.kind.value}")
    return build_model(config, schema_hash)
