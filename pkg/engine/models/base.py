"""ModelGraph: parameters plus forward/backward for one architecture.

Subclasses implement ``_build`` (parameter creation), ``forward`` and
``backward``; everything else (loss, prediction, input gradients) is shared.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from typing import Dict, List, Optional, Tuple

import numpy as np

from engine.errors import SchemaMismatchError, ShapeError
from engine.models.config import ModelConfig
from engine.nn.activations import softmax
from engine.nn.loss import loss_and_logit_grad

logger = logging.getLogger(__name__)

PREDICT_BATCH = 1024


class ModelGraph:
    """Base class for the three architectures.

    Attributes:
        config: Architecture hyperparameters
        params: Ordered parameter arrays (declaration order = checkpoint order)
        schema_hash: Feature schema the model was built for
    """

    supports_input_gradient = True

    def __init__(self, config: ModelConfig, schema_hash: str = ""):
        self.config = config
        self.schema_hash = schema_hash
        self.params: "OrderedDict[str, np.ndarray]" = OrderedDict()
        self._build(np.random.default_rng(config.seed))

    def _build(self, rng: np.random.Generator) -> None:
        raise NotImplementedError

    def forward(self, x: np.ndarray, masks: Optional[dict] = None) -> Tuple[np.ndarray, dict]:
        """Logits (B, N_C) for x (B, T, V); ``masks=None`` is evaluation mode."""
        raise NotImplementedError

    def backward(self, dlogits: np.ndarray, cache: dict) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
        """Returns (parameter gradients, input gradient)."""
        raise NotImplementedError

    def sample_masks(self, batch_size: int, rng: np.random.Generator) -> Optional[dict]:
        """Training-time dropout masks; None when the model has no dropout."""
        return None

    @property
    def regularized(self) -> List[str]:
        """Weight matrices; biases are not penalized."""
        return [name for name in self.params if name.rsplit(".", 1)[-1].startswith("W")]

    @property
    def n_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def _check_input(self, x: np.ndarray) -> None:
        expected = (self.config.lookback, self.config.n_features)
        if x.ndim != 3 or x.shape[1:] != expected:
            raise ShapeError(f"Model expects input (batch, {expected[0]}, {expected[1]}), got {x.shape}")

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x, None)[0]

    def loss_and_grads(
        self,
        x: np.ndarray,
        y: np.ndarray,
        class_weights: Optional[np.ndarray] = None,
        masks: Optional[dict] = None,
    ) -> Tuple[float, Dict[str, np.ndarray]]:
        """Weighted cross-entropy and its parameter gradients (no L2 term)."""
        logits, cache = self.forward(x, masks)
        loss, dlogits = loss_and_logit_grad(softmax(logits), y, class_weights)
        grads, _ = self.backward(dlogits, cache)
        return loss, grads

    def predict_proba(self, x: np.ndarray, schema_hash: Optional[str] = None) -> np.ndarray:
        """Evaluation-mode class probabilities.

        Raises:
            SchemaMismatchError: ``schema_hash`` differs from the model's
        """
        if schema_hash is not None and self.schema_hash and schema_hash != self.schema_hash:
            raise SchemaMismatchError(self.schema_hash, schema_hash, where="predict_proba")
        x = np.asarray(x, dtype=np.float64)
        self._check_input(x)
        chunks = [softmax(self.logits(x[s:s + PREDICT_BATCH])) for s in range(0, x.shape[0], PREDICT_BATCH)]
        if not chunks:
            return np.zeros((0, self.config.n_classes))
        return np.concatenate(chunks, axis=0)

    def input_gradient(self, x: np.ndarray, class_index: int) -> np.ndarray:
        """Gradient of the pre-softmax logit of ``class_index`` with respect to x."""
        logits, cache = self.forward(np.asarray(x, dtype=np.float64), None)
        dlogits = np.zeros_like(logits)
        dlogits[:, class_index] = 1.0
        _, dx = self.backward(dlogits, cache)
        return dx

    def get_state(self) -> Dict[str, np.ndarray]:
        return {name: p.copy() for name, p in self.params.items()}

    def set_state(self, state: Dict[str, np.ndarray]) -> None:
        for name in self.params:
            if state[name].shape != self.params[name].shape:
                raise ShapeError(f"Parameter '{name}' has shape {self.params[name].shape}, got {state[name].shape}")
            self.params[name] = np.array(state[name], dtype=np.float64)


def predict_proba(model: ModelGraph, examples) -> np.ndarray:
    """Probabilities for an ExampleSet, enforcing its schema hash."""
    return model.predict_proba(examples.features, schema_hash=examples.schema_hash)
