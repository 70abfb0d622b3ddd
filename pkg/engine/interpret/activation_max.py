"""Input-space activation maximization ("hallucinations").

Gradient ascent on one class's pre-softmax logit from a uniform-random start,
with the input clipped to [0, 1] after every step. A step that would lower
the objective is halved until it does not; if the step shrinks below
``min_step`` the input is kept, so the objective trace never decreases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np
import pandas as pd

from engine.config import HALLUCINATION_STEP_SIZE, HALLUCINATION_STEPS
from engine.errors import NumericDivergenceError, ValidationError
from engine.models.base import ModelGraph
from engine.utils.csv_io import write_csv

logger = logging.getLogger(__name__)

MIN_STEP = 1e-8


@dataclass(frozen=True)
class Hallucination:
    class_index: int
    inputs: np.ndarray
    trace: List[float]

    @property
    def objective(self) -> float:
        return self.trace[-1]


def activation_maximize(
    model: ModelGraph,
    class_index: int,
    steps: int = HALLUCINATION_STEPS,
    step_size: float = HALLUCINATION_STEP_SIZE,
    seed: int = 0,
    min_step: float = MIN_STEP,
) -> Hallucination:
    """Synthesize a lookback x V input that maximizes the class logit.

    Raises:
        NumericDivergenceError: non-finite input gradient
    """
    if not model.supports_input_gradient:
        raise ValidationError(f"{model.config.kind.value} model does not expose input gradients")
    if not 0 <= class_index < model.config.n_classes:
        raise ValidationError(f"Class index {class_index} out of range")

    rng = np.random.default_rng(seed)
    x = rng.random((1, model.config.lookback, model.config.n_features))
    objective = float(model.logits(x)[0, class_index])
    trace = [objective]
    for step in range(steps):
        grad = model.input_gradient(x, class_index)
        if not np.isfinite(grad).all():
            raise NumericDivergenceError(
                "Activation maximization produced a non-finite input gradient",
                {"step": step, "objective": objective},
            )
        size = step_size
        while size >= min_step:
            candidate = np.clip(x + size * grad, 0.0, 1.0)
            value = float(model.logits(candidate)[0, class_index])
            if value >= objective:
                x, objective = candidate, value
                break
            size /= 2.0
        trace.append(objective)
    logger.info("Activation maximization for class %d: logit %.4f -> %.4f", class_index, trace[0], trace[-1])
    return Hallucination(class_index=class_index, inputs=x[0], trace=trace)


def write_hallucination_csv(
    result: Hallucination,
    feature_names: Sequence[str],
    path: Path,
    config_hash: str = "",
) -> Path:
    """Rows (feature, hour, value)."""
    hours, n_features = result.inputs.shape
    frame = pd.DataFrame({
        "feature": np.tile(np.asarray(feature_names, dtype=object), hours),
        "hour": np.repeat(np.arange(hours), n_features),
        "value": result.inputs.reshape(-1),
    })
    return write_csv(frame, path, config_hash)
