"""Two stacked LSTM layers, final top-layer state, dense softmax head."""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

import numpy as np

from engine.models.base import ModelGraph
from engine.nn.dropout import dropout_mask
from engine.nn.init import uniform_init
from engine.nn.layers import GATES, LSTMLayerParams, dense, dense_backward, lstm_backward, lstm_forward

N_LAYERS = 2
FORGET_BIAS = 1.0


class LSTMModel(ModelGraph):
    def _build(self, rng: np.random.Generator) -> None:
        L = self.config.hidden
        width = self.config.n_features
        for layer in range(N_LAYERS):
            fan_in = L + width
            for gate in GATES:
                self.params[f"lstm{layer}.W_{gate}"] = uniform_init((L, fan_in), fan_in, rng)
                bias = np.full(L, FORGET_BIAS) if gate == "f" else np.zeros(L)
                self.params[f"lstm{layer}.b_{gate}"] = bias
            width = L
        self.params["head.W_y"] = uniform_init((self.config.n_classes, L), L, rng)
        self.params["head.b_y"] = np.zeros(self.config.n_classes)

    def _layers(self) -> List[LSTMLayerParams]:
        return [LSTMLayerParams.from_params(self.params, f"lstm{k}") for k in range(N_LAYERS)]

    def sample_masks(self, batch_size: int, rng: np.random.Generator) -> Optional[dict]:
        shape = (batch_size, self.config.lookback, self.config.hidden)
        return {"lstm": dropout_mask(shape, self.config.lstm_keep, rng)}

    def forward(self, x: np.ndarray, masks: Optional[dict] = None) -> Tuple[np.ndarray, dict]:
        self._check_input(x)
        layers = self._layers()
        h_last, lstm_cache = lstm_forward(x, layers, (masks or {}).get("lstm"))
        logits = dense(h_last, self.params["head.W_y"], self.params["head.b_y"])
        return logits, {"lstm": lstm_cache, "h_last": h_last, "layers": layers}

    def backward(self, dlogits: np.ndarray, cache: dict) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
        dh, dW_y, db_y = dense_backward(dlogits, cache["h_last"], self.params["head.W_y"])
        dx, layer_grads = lstm_backward(dh, cache["lstm"], cache["layers"])
        grads: Dict[str, np.ndarray] = {}
        for k, g in enumerate(layer_grads):
            for gate in GATES:
                grads[f"lstm{k}.W_{gate}"] = g[f"W_{gate}"]
                grads[f"lstm{k}.b_{gate}"] = g[f"b_{gate}"]
        grads["head.W_y"] = dW_y
        grads["head.b_y"] = db_y
        return grads, dx
