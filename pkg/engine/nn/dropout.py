"""Inverted dropout masks."""

from __future__ import annotations

from typing import Tuple, Union

import numpy as np

from engine.errors import ValidationError


def dropout_mask(
    shape: Tuple[int, ...],
    keep: float,
    rng: Union[np.random.Generator, int],
) -> np.ndarray:
    """Bernoulli(keep) mask scaled by 1/keep, so each unit has expectation 1."""
    if not 0.0 < keep <= 1.0:
        raise ValidationError(f"Keep probability must be in (0, 1], got {keep}")
    if keep == 1.0:
        return np.ones(shape)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return (rng.random(shape) < keep).astype(np.float64) / keep
