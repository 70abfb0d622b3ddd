"""Sliding-window example generation.

For a window starting at hour ``s``::

    lookback  [s, s + lookback)                 -> features
    gap       [s + lookback, s + lookback + gap)
    horizon   [p, p + horizon), p = s + lookback + gap  -> label

The entry state for labeling is the track value at ``p - 1``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from engine.config import GAP_HOURS, HORIZON_HOURS, LOOKBACK_HOURS, STRIDE_HOURS
from engine.errors import ShapeError, ValidationError
from engine.core.stay import PatientStay
from engine.core.variables import InterventionKind
from engine.features.assemble import FeatureMatrix
from engine.windowing.labels import LabelScheme, label_window

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowConfig:
    lookback: int = LOOKBACK_HOURS
    gap: int = GAP_HOURS
    horizon: int = HORIZON_HOURS
    stride: int = STRIDE_HOURS

    def __post_init__(self) -> None:
        for name in ("lookback", "gap", "horizon", "stride"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValidationError(f"WindowConfig.{name} must be a positive integer, got {value!r}")

    @property
    def span(self) -> int:
        return self.lookback + self.gap + self.horizon

    def n_windows(self, n_hours: int) -> int:
        if n_hours < self.span:
            return 0
        return (n_hours - self.span) // self.stride + 1


@dataclass(frozen=True)
class Example:
    features: np.ndarray
    label: int
    kind: InterventionKind
    stay_id: str
    start: int


@dataclass(frozen=True)
class ExampleSet:
    """Stacked examples sharing one schema and label scheme.

    Attributes:
        features: N x lookback x V
        labels: N class ids
        stay_ids: Provenance per example
        starts: Window start hour per example
    """

    features: np.ndarray
    labels: np.ndarray
    stay_ids: Tuple[str, ...]
    starts: np.ndarray
    kind: InterventionKind
    schema_hash: str

    def __post_init__(self) -> None:
        if self.features.ndim != 3 or self.features.shape[0] != self.labels.shape[0]:
            raise ShapeError(
                f"ExampleSet features {self.features.shape} do not match {self.labels.shape[0]} labels"
            )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def scheme(self) -> LabelScheme:
        return LabelScheme(self.kind)

    def subset(self, index: np.ndarray) -> "ExampleSet":
        index = np.asarray(index, dtype=np.int64)
        return ExampleSet(
            features=self.features[index],
            labels=self.labels[index],
            stay_ids=tuple(self.stay_ids[i] for i in index),
            starts=self.starts[index],
            kind=self.kind,
            schema_hash=self.schema_hash,
        )


def slide(
    matrix: FeatureMatrix,
    track: np.ndarray,
    config: WindowConfig,
    kind: "InterventionKind | str",
) -> List[Example]:
    """All windows of one stay; a stay shorter than the span yields none."""
    kind = InterventionKind.parse(kind)
    scheme = LabelScheme(kind)
    track = np.asarray(track)
    if track.shape[0] != matrix.n_hours:
        raise ShapeError(f"Track of {track.shape[0]} hours does not match a {matrix.n_hours}-hour matrix")

    examples = []
    for w in range(config.n_windows(matrix.n_hours)):
        start = w * config.stride
        pred_start = start + config.lookback + config.gap
        features = matrix.values[start:start + config.lookback]
        if not np.isfinite(features).all():
            raise ValidationError(f"Non-finite features in stay {matrix.stay_id} window at hour {start}")
        label = label_window(
            track[pred_start:pred_start + config.horizon],
            scheme,
            entry_state=int(track[pred_start - 1]),
        )
        examples.append(Example(features, label, kind, matrix.stay_id, start))
    return examples


def windows_for_cohort(
    matrices: Mapping[str, FeatureMatrix],
    stays: Sequence[PatientStay],
    kind: "InterventionKind | str",
    config: Optional[WindowConfig] = None,
) -> List[Example]:
    """Examples for every stay, in stay order then window start."""
    config = config or WindowConfig()
    kind = InterventionKind.parse(kind)
    examples: List[Example] = []
    for stay in stays:
        if stay.stay_id not in matrices:
            raise ValidationError(f"No feature matrix for stay {stay.stay_id}")
        examples.extend(slide(matrices[stay.stay_id], stay.track(kind), config, kind))
    logger.info("%d %s examples from %d stays", len(examples), kind.value, len(stays))
    return examples


def stack_examples(
    examples: Sequence[Example],
    schema_hash: str,
    kind: "InterventionKind | str",
    n_features: int,
    lookback: int = LOOKBACK_HOURS,
) -> ExampleSet:
    kind = InterventionKind.parse(kind)
    if examples:
        features = np.stack([e.features for e in examples]).astype(np.float64)
    else:
        features = np.zeros((0, lookback, n_features))
    return ExampleSet(
        features=features,
        labels=np.array([e.label for e in examples], dtype=np.int64),
        stay_ids=tuple(e.stay_id for e in examples),
        starts=np.array([e.start for e in examples], dtype=np.int64),
        kind=kind,
        schema_hash=schema_hash,
    )
