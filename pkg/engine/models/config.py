"""Model configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Tuple

from engine.config import (
    CNN_FC_HIDDEN,
    CNN_FILTERS,
    CNN_KEEP,
    CNN_POOL,
    CNN_WIDTHS,
    L2_LAMBDA,
    LOOKBACK_HOURS,
    LSTM_HIDDEN,
    LSTM_KEEP,
)
from engine.errors import ValidationError


class ModelKind(Enum):
    LSTM = "lstm"
    CNN = "cnn"
    LR = "lr"

    @classmethod
    def parse(cls, value: "str | ModelKind") -> "ModelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"Unknown model kind '{value}'; expected lstm, cnn or lr") from None


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters.

    ``hidden`` is the width of both stacked LSTM layers.
    """

    kind: ModelKind
    n_features: int
    n_classes: int
    lookback: int = LOOKBACK_HOURS
    hidden: int = LSTM_HIDDEN
    lstm_keep: float = LSTM_KEEP
    cnn_filters: int = CNN_FILTERS
    cnn_widths: Tuple[int, ...] = CNN_WIDTHS
    cnn_pool: int = CNN_POOL
    fc_hidden: int = CNN_FC_HIDDEN
    cnn_keep: float = CNN_KEEP
    l2: float = L2_LAMBDA
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        object.__setattr__(self, "cnn_widths", tuple(int(w) for w in self.cnn_widths))
        for name in ("n_features", "n_classes", "lookback", "hidden", "cnn_filters", "cnn_pool", "fc_hidden"):
            if int(getattr(self, name)) <= 0:
                raise ValidationError(f"ModelConfig.{name} must be positive")
        if self.n_classes < 2:
            raise ValidationError("ModelConfig.n_classes must be at least 2")
        if not self.cnn_widths or any(w <= 0 for w in self.cnn_widths):
            raise ValidationError("ModelConfig.cnn_widths must be positive")
        for name in ("lstm_keep", "cnn_keep"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValidationError(f"ModelConfig.{name} must be in (0, 1]")
        if self.l2 < 0:
            raise ValidationError("ModelConfig.l2 must be non-negative")
        if self.kind is ModelKind.CNN and self.lookback < self.cnn_pool:
            raise ValidationError("CNN lookback must be at least the pool size")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["kind"] = self.kind.value
        data["cnn_widths"] = list(self.cnn_widths)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        data = dict(data)
        data["cnn_widths"] = tuple(data.get("cnn_widths", CNN_WIDTHS))
        return cls(**data)
