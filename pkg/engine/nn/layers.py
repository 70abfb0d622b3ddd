"""Layer primitives with explicit forward and backward passes.

Shapes use B for batch, T for time, L for hidden width, C for channels and
F for filters. The LSTM concatenates ``[h_{t-1}, x_t]`` so every gate
matrix has shape ``(L, L + input width)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from engine.errors import ShapeError
from engine.nn.activations import sigmoid

GATES = ("f", "i", "c", "o")


@dataclass(frozen=True)
class LSTMLayerParams:
    """Gate weights ``W_*`` (L x (L + in)) and biases ``b_*`` (L)."""

    W_f: np.ndarray
    W_i: np.ndarray
    W_c: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    def __post_init__(self) -> None:
        L = self.W_f.shape[0]
        if L == 0:
            raise ShapeError("LSTM layer needs at least one unit")
        for gate in GATES:
            W, b = getattr(self, f"W_{gate}"), getattr(self, f"b_{gate}")
            if W.shape != self.W_f.shape or b.shape != (L,):
                raise ShapeError(f"LSTM gate '{gate}' has inconsistent shapes {W.shape}, {b.shape}")

    @property
    def hidden(self) -> int:
        return int(self.W_f.shape[0])

    @property
    def input_width(self) -> int:
        return int(self.W_f.shape[1] - self.W_f.shape[0])

    @classmethod
    def from_params(cls, params: Mapping[str, np.ndarray], prefix: str) -> "LSTMLayerParams":
        return cls(**{f"{kind}_{gate}": params[f"{prefix}.{kind}_{gate}"] for kind in ("W", "b") for gate in GATES})


@dataclass(frozen=True)
class HiddenState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, batch: int, hidden: int) -> "HiddenState":
        return cls(np.zeros((batch, hidden)), np.zeros((batch, hidden)))


def lstm_cell(
    x_t: np.ndarray,
    prev: HiddenState,
    params: LSTMLayerParams,
) -> Tuple[HiddenState, Dict[str, np.ndarray]]:
    """One LSTM step for a batch: x_t (B, in), prev.h/prev.c (B, L)."""
    if x_t.ndim != 2 or x_t.shape[1] != params.input_width or prev.h.shape != (x_t.shape[0], params.hidden):
        raise ShapeError(
            f"lstm_cell: x {x_t.shape}, h {prev.h.shape} do not fit a layer of "
            f"{params.hidden} units over {params.input_width} inputs"
        )
    z = np.concatenate([prev.h, x_t], axis=1)
    f = sigmoid(z @ params.W_f.T + params.b_f)
    i = sigmoid(z @ params.W_i.T + params.b_i)
    g = np.tanh(z @ params.W_c.T + params.b_c)
    o = sigmoid(z @ params.W_o.T + params.b_o)
    c = f * prev.c + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    cache = {"z": z, "f": f, "i": i, "g": g, "o": o, "c_prev": prev.c, "c": c, "tanh_c": tanh_c}
    return HiddenState(h, c), cache


def lstm_cell_backward(
    dh: np.ndarray,
    dc: np.ndarray,
    cache: Mapping[str, np.ndarray],
    params: LSTMLayerParams,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Dict[str, np.ndarray]]:
    """Backward through one step.

    Returns:
        (dx_t, dh_prev, dc_prev, gradients keyed ``W_f``, ``b_f``, ...)
    """
    f, i, g, o, tanh_c = cache["f"], cache["i"], cache["g"], cache["o"], cache["tanh_c"]
    do = dh * tanh_c
    dc_total = dc + dh * o * (1.0 - tanh_c ** 2)
    pre = {
        "f": dc_total * cache["c_prev"] * f * (1.0 - f),
        "i": dc_total * g * i * (1.0 - i),
        "c": dc_total * i * (1.0 - g ** 2),
        "o": do * o * (1.0 - o),
    }
    z = cache["z"]
    grads: Dict[str, np.ndarray] = {}
    dz = np.zeros_like(z)
    for gate in GATES:
        grads[f"W_{gate}"] = pre[gate].T @ z
        grads[f"b_{gate}"] = pre[gate].sum(axis=0)
        dz += pre[gate] @ getattr(params, f"W_{gate}")
    L = params.hidden
    return dz[:, L:], dz[:, :L], dc_total * f, grads


def lstm_forward(
    x: np.ndarray,
    layers: List[LSTMLayerParams],
    dropout_mask: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, Dict]:
    """Stacked LSTM over x (B, T, in); returns the top layer's final h (B, L).

    States start at zero. ``dropout_mask`` (B, T, L) multiplies the first
    layer's outputs before they feed the second layer.
    """
    if x.ndim != 3 or x.shape[1] == 0:
        raise ShapeError(f"lstm_forward needs a non-empty (batch, time, features) input, got {x.shape}")
    B, T, _ = x.shape
    seq = x
    layer_caches = []
    for depth, params in enumerate(layers):
        state = HiddenState.zeros(B, params.hidden)
        outputs = np.empty((B, T, params.hidden))
        steps = []
        for t in range(T):
            state, step_cache = lstm_cell(seq[:, t, :], state, params)
            outputs[:, t, :] = state.h
            steps.append(step_cache)
        mask = dropout_mask if (depth == 0 and len(layers) > 1) else None
        layer_caches.append({"steps": steps, "mask": mask})
        seq = outputs * mask if mask is not None else outputs
    return seq[:, -1, :], {"layers": layer_caches, "T": T}


def lstm_backward(
    dh_last: np.ndarray,
    cache: Mapping,
    layers: List[LSTMLayerParams],
) -> Tuple[np.ndarray, List[Dict[str, np.ndarray]]]:
    """Backpropagation through time for :func:`lstm_forward`.

    Returns:
        (dx of shape (B, T, in), per-layer gradient dicts)
    """
    T = cache["T"]
    B = dh_last.shape[0]
    d_outputs = np.zeros((B, T, layers[-1].hidden))
    d_outputs[:, -1, :] = dh_last
    grads_per_layer: List[Dict[str, np.ndarray]] = [dict() for _ in layers]

    for depth in reversed(range(len(layers))):
        params = layers[depth]
        steps = cache["layers"][depth]["steps"]
        grads = {name: np.zeros_like(getattr(params, name)) for name in params.__dataclass_fields__}
        d_inputs = np.zeros((B, T, params.input_width))
        dh_next = np.zeros((B, params.hidden))
        dc_next = np.zeros((B, params.hidden))
        for t in reversed(range(T)):
            dx_t, dh_next, dc_next, step_grads = lstm_cell_backward(
                d_outputs[:, t, :] + dh_next, dc_next, steps[t], params
            )
            d_inputs[:, t, :] = dx_t
            for name, value in step_grads.items():
                grads[name] += value
        grads_per_layer[depth] = grads
        if depth > 0:
            mask = cache["layers"][depth - 1]["mask"]
            d_outputs = d_inputs * mask if mask is not None else d_inputs
        else:
            d_outputs = d_inputs
    return d_outputs, grads_per_layer


def same_padding(width: int) -> Tuple[int, int]:
    left = (width - 1) // 2
    return left, width - 1 - left


def conv1d(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, Dict]:
    """Temporal cross-correlation, stride 1, zero same-padding.

    x (B, C, T), W (F, C, k), b (F) -> (B, F, T)
    """
    if x.ndim != 3 or W.ndim != 3 or x.shape[1] != W.shape[1] or b.shape != (W.shape[0],):
        raise ShapeError(f"conv1d: input {x.shape} does not match filters {W.shape} / bias {b.shape}")
    k = W.shape[2]
    left, right = same_padding(k)
    padded = np.pad(x, ((0, 0), (0, 0), (left, right)))
    windows = sliding_window_view(padded, k, axis=2)
    out = np.einsum("bctk,fck->bft", windows, W) + b[None, :, None]
    return out, {"windows": windows, "padded_shape": padded.shape, "left": left, "T": x.shape[2], "W": W}


def conv1d_backward(dout: np.ndarray, cache: Mapping) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dW, db)."""
    W, T, left = cache["W"], cache["T"], cache["left"]
    dW = np.einsum("bft,bctk->fck", dout, cache["windows"])
    db = dout.sum(axis=(0, 2))
    d_padded = np.zeros(cache["padded_shape"])
    for j in range(W.shape[2]):
        d_padded[:, :, j:j + T] += np.einsum("bft,fc->bct", dout, W[:, :, j])
    return d_padded[:, :, left:left + T], dW, db


def maxpool1d(x: np.ndarray, pool: int) -> Tuple[np.ndarray, Dict]:
    """Non-overlapping max pooling over time; a trailing partial block is dropped."""
    B, F, T = x.shape
    if T < pool:
        raise ShapeError(f"maxpool1d: time length {T} is shorter than pool size {pool}")
    n = T // pool
    blocks = x[:, :, :n * pool].reshape(B, F, n, pool)
    argmax = blocks.argmax(axis=3)
    out = np.take_along_axis(blocks, argmax[..., None], axis=3)[..., 0]
    return out, {"argmax": argmax, "shape": x.shape, "pool": pool}


def maxpool1d_backward(dout: np.ndarray, cache: Mapping) -> np.ndarray:
    """Route each gradient to its block's first maximal index."""
    B, F, T = cache["shape"]
    pool = cache["pool"]
    n = dout.shape[2]
    d_blocks = np.zeros((B, F, n, pool))
    np.put_along_axis(d_blocks, cache["argmax"][..., None], dout[..., None], axis=3)
    dx = np.zeros((B, F, T))
    dx[:, :, :n * pool] = d_blocks.reshape(B, F, n * pool)
    return dx


def dense(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x (B, in) @ W.T + b with W (out, in)."""
    if x.shape[-1] != W.shape[1] or b.shape != (W.shape[0],):
        raise ShapeError(f"dense: input {x.shape} does not match weights {W.shape} / bias {b.shape}")
    return x @ W.T + b


def dense_backward(dout: np.ndarray, x: np.ndarray, W: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dW, db)."""
    return dout @ W, dout.T @ x, dout.sum(axis=0)
