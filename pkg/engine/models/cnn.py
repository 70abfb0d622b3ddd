"""Temporal CNN: parallel conv branches, max-pool, two fully connected layers.

Per branch of width k: conv (F filters, same padding) -> ReLU -> max-pool.
Branch outputs are flattened (filter-major) and concatenated in width order.
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from engine.models.base import ModelGraph
from engine.nn.activations import relu, relu_backward
from engine.nn.dropout import dropout_mask
from engine.nn.init import uniform_init
from engine.nn.layers import conv1d, conv1d_backward, dense, dense_backward, maxpool1d, maxpool1d_backward


class CNNModel(ModelGraph):
    @property
    def pooled_length(self) -> int:
        return self.config.lookback // self.config.cnn_pool

    @property
    def flat_width(self) -> int:
        return self.config.cnn_filters * self.pooled_length * len(self.config.cnn_widths)

    def _build(self, rng: np.random.Generator) -> None:
        cfg = self.config
        for k in cfg.cnn_widths:
            fan_in = cfg.n_features * k
            self.params[f"conv{k}.W"] = uniform_init((cfg.cnn_filters, cfg.n_features, k), fan_in, rng)
            self.params[f"conv{k}.b"] = np.zeros(cfg.cnn_filters)
        self.params["fc1.W"] = uniform_init((cfg.fc_hidden, self.flat_width), self.flat_width, rng)
        self.params["fc1.b"] = np.zeros(cfg.fc_hidden)
        self.params["fc2.W"] = uniform_init((cfg.n_classes, cfg.fc_hidden), cfg.fc_hidden, rng)
        self.params["fc2.b"] = np.zeros(cfg.n_classes)

    def sample_masks(self, batch_size: int, rng: np.random.Generator) -> Optional[dict]:
        return {"fc": dropout_mask((batch_size, self.config.fc_hidden), self.config.cnn_keep, rng)}

    def forward(self, x: np.ndarray, masks: Optional[dict] = None) -> Tuple[np.ndarray, dict]:
        self._check_input(x)
        channels = np.transpose(x, (0, 2, 1))
        B = x.shape[0]
        branches = []
        flats = []
        for k in self.config.cnn_widths:
            conv_out, conv_cache = conv1d(channels, self.params[f"conv{k}.W"], self.params[f"conv{k}.b"])
            activated = relu(conv_out)
            pooled, pool_cache = maxpool1d(activated, self.config.cnn_pool)
            branches.append({"conv": conv_cache, "pre": conv_out, "pool": pool_cache, "pooled_shape": pooled.shape})
            flats.append(pooled.reshape(B, -1))
        flat = np.concatenate(flats, axis=1)
        pre_hidden = dense(flat, self.params["fc1.W"], self.params["fc1.b"])
        hidden = relu(pre_hidden)
        mask = (masks or {}).get("fc")
        dropped = hidden * mask if mask is not None else hidden
        logits = dense(dropped, self.params["fc2.W"], self.params["fc2.b"])
        cache = {"branches": branches, "flat": flat, "pre_hidden": pre_hidden, "dropped": dropped, "mask": mask}
        return logits, cache

    def backward(self, dlogits: np.ndarray, cache: dict) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
        grads: Dict[str, np.ndarray] = {}
        d_dropped, grads["fc2.W"], grads["fc2.b"] = dense_backward(dlogits, cache["dropped"], self.params["fc2.W"])
        d_hidden = d_dropped * cache["mask"] if cache["mask"] is not None else d_dropped
        d_pre = relu_backward(d_hidden, cache["pre_hidden"])
        d_flat, grads["fc1.W"], grads["fc1.b"] = dense_backward(d_pre, cache["flat"], self.params["fc1.W"])

        d_channels = None
        offset = 0
        for k, branch in zip(self.config.cnn_widths, cache["branches"]):
            shape = branch["pooled_shape"]
            size = shape[1] * shape[2]
            d_pooled = d_flat[:, offset:offset + size].reshape(shape)
            offset += size
            d_act = maxpool1d_backward(d_pooled, branch["pool"])
            d_conv = relu_backward(d_act, branch["pre"])
            dx, grads[f"conv{k}.W"], grads[f"conv{k}.b"] = conv1d_backward(d_conv, branch["conv"])
            d_channels = dx if d_channels is None else d_channels + dx
        ordered = {name: grads[name] for name in self.params}
        return ordered, np.transpose(d_channels, (0, 2, 1))
