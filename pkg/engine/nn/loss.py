"""Class-weighted categorical cross-entropy."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from engine.config import LOG_CLAMP
from engine.errors import ShapeError, ValidationError


def _weights_for(targets: np.ndarray, class_weights: Optional[np.ndarray], n_classes: int) -> np.ndarray:
    if class_weights is None:
        return np.ones(targets.shape[0])
    class_weights = np.asarray(class_weights, dtype=np.float64)
    if class_weights.shape != (n_classes,) or np.any(class_weights <= 0):
        raise ValidationError(f"Class weights must be {n_classes} positive numbers, got {class_weights}")
    return class_weights[targets]


def weighted_cross_entropy(
    probs: np.ndarray,
    targets: np.ndarray,
    class_weights: Optional[np.ndarray] = None,
) -> float:
    """-(1/N) * sum_i w[y_i] * log(max(p[i, y_i], 1e-12))."""
    targets = np.asarray(targets, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] != targets.shape[0]:
        raise ShapeError(f"Loss: probabilities {probs.shape} do not match {targets.shape[0]} targets")
    w = _weights_for(targets, class_weights, probs.shape[1])
    picked = probs[np.arange(targets.shape[0]), targets]
    return float(-(w * np.log(np.maximum(picked, LOG_CLAMP))).sum() / targets.shape[0])


def softmax_cross_entropy_backward(
    probs: np.ndarray,
    targets: np.ndarray,
    class_weights: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Gradient of the weighted loss with respect to the pre-softmax logits."""
    targets = np.asarray(targets, dtype=np.int64)
    n = targets.shape[0]
    w = _weights_for(targets, class_weights, probs.shape[1])
    grad = probs.copy()
    grad[np.arange(n), targets] -= 1.0
    return grad * (w / n)[:, None]


def loss_and_logit_grad(
    probs: np.ndarray,
    targets: np.ndarray,
    class_weights: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray]:
    return (
        weighted_cross_entropy(probs, targets, class_weights),
        softmax_cross_entropy_backward(probs, targets, class_weights),
    )
