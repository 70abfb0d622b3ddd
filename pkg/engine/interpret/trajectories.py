"""Mean and spread of the inputs the model scores highest and lowest for a class."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from engine.config import TRAJECTORY_K
from engine.errors import ValidationError
from engine.models.base import ModelGraph, predict_proba
from engine.utils.csv_io import write_csv
from engine.windowing.windows import ExampleSet


@dataclass(frozen=True)
class TrajectoryBundle:
    """Per-feature per-hour statistics over the selected examples.

    Attributes:
        polarity: "top" or "bottom"
        k: Number of examples actually used
        mean / std: lookback x V arrays (population std)
        probabilities: Selected examples' class probabilities, in selection order
        indices: Positions of the selected examples in the source set
    """

    polarity: str
    k: int
    feature_names: Tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    probabilities: np.ndarray
    indices: np.ndarray


def _bundle(polarity: str, examples: ExampleSet, idx: np.ndarray, probs: np.ndarray, names) -> TrajectoryBundle:
    chosen = examples.features[idx]
    return TrajectoryBundle(
        polarity=polarity,
        k=int(idx.size),
        feature_names=tuple(names),
        mean=chosen.mean(axis=0),
        std=chosen.std(axis=0),
        probabilities=probs[idx],
        indices=idx,
    )


def extreme_examples(
    model: ModelGraph,
    examples: ExampleSet,
    class_index: int,
    feature_names: Sequence[str],
    k: int = TRAJECTORY_K,
) -> Tuple[TrajectoryBundle, TrajectoryBundle]:
    """(top-k, bottom-k) bundles by predicted probability of ``class_index``.

    k is clamped to the set size; ties keep example order.
    """
    if len(examples) == 0:
        raise ValidationError("Cannot select extreme examples from an empty set")
    probs = predict_proba(model, examples)[:, class_index]
    k = min(k, len(examples))
    top = np.argsort(-probs, kind="stable")[:k]
    bottom = np.argsort(probs, kind="stable")[:k]
    return (
        _bundle("top", examples, top, probs, feature_names),
        _bundle("bottom", examples, bottom, probs, feature_names),
    )


def most_differentiated_features(top: TrajectoryBundle, bottom: TrajectoryBundle, n: int = 4) -> List[str]:
    """Features whose mean trajectories differ most (mean absolute gap over hours)."""
    gap = np.abs(top.mean - bottom.mean).mean(axis=0)
    order = np.argsort(-gap, kind="stable")[:n]
    return [top.feature_names[i] for i in order]


def write_trajectories_csv(
    bundles: Sequence[TrajectoryBundle],
    path: Path,
    config_hash: str = "",
) -> Path:
    """Rows (feature, hour, mean, std, polarity)."""
    frames = []
    for bundle in bundles:
        hours, n_features = bundle.mean.shape
        frames.append(pd.DataFrame({
            "feature": np.tile(np.asarray(bundle.feature_names, dtype=object), hours),
            "hour": np.repeat(np.arange(hours), n_features),
            "mean": bundle.mean.reshape(-1),
            "std": bundle.std.reshape(-1),
            "polarity": bundle.polarity,
        }))
    return write_csv(pd.concat(frames, ignore_index=True), path, config_hash)
