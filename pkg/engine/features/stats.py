"""Training-split normalization statistics."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from engine.errors import DegenerateVariableError, ValidationError
from engine.core.stay import PatientStay
from engine.core.variables import MEASUREMENT_VARIABLES, N_MEASUREMENTS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormalizationStats:
    """Per-variable population moments and extrema over observed cells.

    ``age_min``/``age_max`` scale the static age column.
    """

    mean: np.ndarray
    std: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    age_min: float
    age_max: float

    def __post_init__(self) -> None:
        for name in ("mean", "std", "minimum", "maximum"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.shape != (N_MEASUREMENTS,):
                raise ValidationError(f"NormalizationStats.{name} must have {N_MEASUREMENTS} entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.std <= 0):
            bad = [MEASUREMENT_VARIABLES[j] for j in np.flatnonzero(self.std <= 0)]
            raise DegenerateVariableError(bad)

    def to_dict(self) -> dict:
        return {
            "variables": list(MEASUREMENT_VARIABLES),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "min": self.minimum.tolist(),
            "max": self.maximum.tolist(),
            "age_min": self.age_min,
            "age_max": self.age_max,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationStats":
        if list(data.get("variables", [])) != list(MEASUREMENT_VARIABLES):
            raise ValidationError("Normalization stats were computed for a different variable set")
        return cls(
            mean=np.asarray(data["mean"]),
            std=np.asarray(data["std"]),
            minimum=np.asarray(data["min"]),
            maximum=np.asarray(data["max"]),
            age_min=float(data["age_min"]),
            age_max=float(data["age_max"]),
        )


def compute_stats(train_stays: Sequence[PatientStay]) -> NormalizationStats:
    """Compute statistics over observed cells of the training stays.

    Raises:
        DegenerateVariableError: a variable has fewer than 2 observations or zero variance
    """
    if not train_stays:
        raise ValidationError("Cannot compute normalization statistics without training stays")

    values = np.concatenate([s.grid.values for s in train_stays], axis=0)
    observed = np.concatenate([s.grid.observed for s in train_stays], axis=0)

    mean = np.zeros(N_MEASUREMENTS)
    std = np.zeros(N_MEASUREMENTS)
    minimum = np.zeros(N_MEASUREMENTS)
    maximum = np.zeros(N_MEASUREMENTS)
    degenerate = []
    for j, name in enumerate(MEASUREMENT_VARIABLES):
        column = values[observed[:, j], j]
        if column.size < 2:
            degenerate.append(name)
            continue
        mean[j] = column.mean()
        std[j] = column.std()
        minimum[j] = column.min()
        maximum[j] = column.max()
        if std[j] <= 0:
            degenerate.append(name)
    if degenerate:
        raise DegenerateVariableError(degenerate)

    ages = [s.statics.age for s in train_stays]
    logger.info("Normalization statistics from %d training stays", len(train_stays))
    return NormalizationStats(
        mean=mean, std=std, minimum=minimum, maximum=maximum,
        age_min=float(min(ages)), age_max=float(max(ages)),
    )


def save_stats(stats: NormalizationStats, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path


def load_stats(path: Path) -> NormalizationStats:
    return NormalizationStats.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
