"""Central finite-difference verification of analytic gradients.

Relative error per parameter tensor is ``|a - n| / max(|a| + |n|, floor)``
with vector norms, so entries whose true gradient is zero (inactive ReLU
units, non-maximal pool positions) do not divide by rounding noise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Protocol

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
ERROR_FLOOR = 1e-12


class Differentiable(Protocol):
    params: Dict[str, np.ndarray]

    def loss_and_grads(self, x, y, class_weights=None, masks=None): ...


@dataclass
class GradCheckReport:
    max_relative_error: float
    per_parameter: Dict[str, float] = field(default_factory=dict)
    tolerance: float = 1e-5

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance

    def worst(self) -> str:
        return max(self.per_parameter, key=self.per_parameter.get) if self.per_parameter else ""


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = ERROR_FLOOR) -> float:
    diff = np.linalg.norm(analytic - numeric)
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), floor)
    return float(diff / scale)


def numeric_gradient(f, array: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """Central differences of scalar ``f()`` with respect to ``array`` (perturbed in place)."""
    grad = np.zeros_like(array)
    it = np.nditer(array, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        original = array[idx]
        array[idx] = original + step
        plus = f()
        array[idx] = original - step
        minus = f()
        array[idx] = original
        grad[idx] = (plus - minus) / (2.0 * step)
    return grad


def grad_check(
    model: Differentiable,
    x: np.ndarray,
    y: np.ndarray,
    tolerance: float = 1e-5,
    class_weights: Optional[np.ndarray] = None,
    masks: Optional[dict] = None,
    step: float = DEFAULT_STEP,
) -> GradCheckReport:
    """Compare analytic parameter gradients with central differences.

    ``masks`` are held fixed across every evaluation, so dropout is checked
    deterministically.
    """
    _, analytic = model.loss_and_grads(x, y, class_weights, masks)

    def loss() -> float:
        return model.loss_and_grads(x, y, class_weights, masks)[0]

    report = GradCheckReport(max_relative_error=0.0, tolerance=tolerance)
    for name, array in model.params.items():
        numeric = numeric_gradient(loss, array, step)
        err = relative_error(analytic[name], numeric)
        report.per_parameter[name] = err
        report.max_relative_error = max(report.max_relative_error, err)
    logger.debug("Gradient check: max relative error %.3e at %s", report.max_relative_error, report.worst())
    return report


def input_grad_check(
    model,
    x: np.ndarray,
    class_index: int,
    step: float = DEFAULT_STEP,
) -> float:
    """Relative error of ``model.input_gradient`` against central differences of the summed logit."""
    x = np.array(x, dtype=np.float64)
    analytic = model.input_gradient(x, class_index)

    def objective() -> float:
        return float(model.logits(x)[:, class_index].sum())

    return relative_error(analytic, numeric_gradient(objective, x, step))
