"""Adam with bias correction and optional L2 penalty."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Collection, Dict, MutableMapping, Optional

import numpy as np

from engine.config import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON, LEARNING_RATE
from engine.errors import ShapeError


@dataclass
class AdamState:
    learning_rate: float = LEARNING_RATE
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: MutableMapping[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: AdamState,
    l2: float = 0.0,
    regularized: Optional[Collection[str]] = None,
) -> MutableMapping[str, np.ndarray]:
    """Update ``params`` in place and advance ``state``.

    ``l2 * theta`` is added to the gradient of every name in ``regularized``
    (all parameters when None) before the moment updates.
    """
    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeError(f"Gradient for '{name}' has shape {g.shape}, parameter has {theta.shape}")
        if l2 > 0 and (regularized is None or name in regularized):
            g = g + l2 * theta
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(theta)
            v = np.zeros_like(theta)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        state.m[name], state.v[name] = m, v
        theta -= state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)
    return params
