"""Mini-batch training with class-weighted loss and validation early stopping."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from engine.config import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    BATCH_SIZE,
    L2_LAMBDA,
    LEARNING_RATE,
    MAX_EPOCHS,
    PATIENCE,
)
from engine.errors import MissingClassError, NumericDivergenceError, ValidationError
from engine.models.base import ModelGraph
from engine.nn.optim import AdamState, adam_step
from engine.training.metrics import evaluate
from engine.utils.csv_io import write_csv
from engine.windowing.labels import LabelScheme
from engine.windowing.windows import ExampleSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = BATCH_SIZE
    learning_rate: float = LEARNING_RATE
    l2: float = L2_LAMBDA
    patience: int = PATIENCE
    max_epochs: int = MAX_EPOCHS
    eval_every: int = 1
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON
    weighted: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValidationError("TrainConfig.batch_size must be >= 1")
        if self.patience < 1:
            raise ValidationError("TrainConfig.patience must be >= 1")
        if self.max_epochs < 1 or self.eval_every < 1:
            raise ValidationError("TrainConfig.max_epochs and eval_every must be >= 1")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    val_macro_auc: Optional[float]


@dataclass
class TrainHistory:
    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_macro_auc: Optional[float] = None
    stopped_early: bool = False

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.epoch, r.loss, r.val_macro_auc) for r in self.epochs],
            columns=["epoch", "loss", "val_macro_auc"],
        )


def class_weights(labels: np.ndarray, scheme: LabelScheme) -> np.ndarray:
    """Inverse-frequency weights N / (K * n_k), rescaled to mean 1.

    Raises:
        MissingClassError: some class has no examples
    """
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=scheme.n_classes)
    for k, name in enumerate(scheme.classes):
        if counts[k] == 0:
            raise MissingClassError(name)
    raw = counts.sum() / (scheme.n_classes * counts.astype(np.float64))
    return raw / raw.mean()


def train(
    model: ModelGraph,
    train_set: ExampleSet,
    val_set: ExampleSet,
    config: Optional[TrainConfig] = None,
    weights: Optional[np.ndarray] = None,
) -> TrainHistory:
    """Train ``model`` in place and restore the best-validation parameters.

    Each epoch is one pass over ``train_set`` in a seeded shuffled order; the
    final partial batch is kept. Training stops once ``patience`` epochs pass
    without a strictly better validation macro AUC.

    Raises:
        NumericDivergenceError: non-finite loss or gradient
    """
    config = config or TrainConfig()
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValidationError("Training and validation sets must be non-empty")
    if weights is None and config.weighted:
        weights = class_weights(train_set.labels, train_set.scheme)

    rng = np.random.default_rng(config.seed)
    state = AdamState(config.learning_rate, config.beta1, config.beta2, config.epsilon)
    history = TrainHistory()
    best_state = model.get_state()
    best_auc = -math.inf
    regularized = model.regularized
    n = len(train_set)

    logger.info(
        "Training %s on %d examples (validation %d), batch %d, patience %d",
        model.config.kind.value, n, len(val_set), config.batch_size, config.patience,
    )
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            x = train_set.features[batch]
            y = train_set.labels[batch]
            masks = model.sample_masks(len(batch), rng)
            loss, grads = model.loss_and_grads(x, y, weights, masks)
            if not math.isfinite(loss) or not all(np.isfinite(g).all() for g in grads.values()):
                raise NumericDivergenceError(
                    "Training diverged: non-finite loss or gradient",
                    {"epoch": epoch, "batch_start": start, "loss": loss,
                     "max_abs_param": max(float(np.abs(p).max()) for p in model.params.values())},
                )
            adam_step(model.params, grads, state, config.l2, regularized)
            total += loss * len(batch)
        epoch_loss = total / n

        val_auc: Optional[float] = None
        if epoch % config.eval_every == 0:
            val_auc = evaluate(model, val_set).macro
            if val_auc is None:
                logger.warning("Epoch %d: validation macro AUC undefined", epoch)
            elif val_auc > best_auc:
                best_auc = val_auc
                history.best_epoch = epoch
                history.best_val_macro_auc = val_auc
                best_state = model.get_state()
        history.epochs.append(EpochRecord(epoch, epoch_loss, val_auc))
        logger.info("Epoch %d: loss %.6f, val macro AUC %s", epoch, epoch_loss,
                    "-" if val_auc is None else f"{val_auc:.4f}")

        if epoch - history.best_epoch >= config.patience:
            history.stopped_early = True
            logger.info("Early stop at epoch %d (best epoch %d)", epoch, history.best_epoch)
            break

    model.set_state(best_state)
    return history


def write_history_csv(history: TrainHistory, path: Path, config_hash: str = "") -> Path:
    return write_csv(history.to_frame(), path, config_hash)
