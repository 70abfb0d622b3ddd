"""Logistic regression baseline over the flattened window."""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from engine.models.base import ModelGraph
from engine.nn.init import uniform_init
from engine.nn.layers import dense, dense_backward


class LogisticModel(ModelGraph):
    def _build(self, rng: np.random.Generator) -> None:
        width = self.config.lookback * self.config.n_features
        self.params["dense.W"] = uniform_init((self.config.n_classes, width), width, rng)
        self.params["dense.b"] = np.zeros(self.config.n_classes)

    def forward(self, x: np.ndarray, masks: Optional[dict] = None) -> Tuple[np.ndarray, dict]:
        self._check_input(x)
        flat = x.reshape(x.shape[0], -1)
        return dense(flat, self.params["dense.W"], self.params["dense.b"]), {"flat": flat, "shape": x.shape}

    def backward(self, dlogits: np.ndarray, cache: dict) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
        d_flat, dW, db = dense_backward(dlogits, cache["flat"], self.params["dense.W"])
        return {"dense.W": dW, "dense.b": db}, d_flat.reshape(cache["shape"])
