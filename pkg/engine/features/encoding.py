"""Per-block encoders: physiological words, raw imputation, topics, statics, time."""

from __future__ import annotations

import logging
from typing import Mapping, Sequence, Tuple

import numpy as np
import pandas as pd

from engine.config import FOLD_IN_SWEEPS, WORD_Z_CLAMP
from engine.errors import ValidationError
from engine.core.stay import MeasurementGrid, StaticProfile
from engine.core.variables import N_MEASUREMENTS, STATIC_ENUMS
from engine.features.schema import STATIC_WIDTH, WORDS_PER_VARIABLE
from engine.features.stats import NormalizationStats
from engine.topics.lda import TopicModel, infer_topics

logger = logging.getLogger(__name__)


def round_half_away(z: np.ndarray) -> np.ndarray:
    return np.sign(z) * np.floor(np.abs(z) + 0.5)


def encode_words(grid: MeasurementGrid, stats: NormalizationStats) -> np.ndarray:
    """One-hot physiological words, n_hours x (29 * 9).

    z-scores are rounded half away from zero and clamped to [-4, 4]; an
    absent cell leaves all nine of its columns at 0.
    """
    n_hours = grid.n_hours
    z = (grid.values - stats.mean) / stats.std
    level = np.clip(round_half_away(z), -WORD_Z_CLAMP, WORD_Z_CLAMP).astype(np.int64)

    block = np.zeros((n_hours, N_MEASUREMENTS * WORDS_PER_VARIABLE))
    hours, variables = np.nonzero(grid.observed)
    block[hours, variables * WORDS_PER_VARIABLE + level[hours, variables] + WORD_Z_CLAMP] = 1.0
    return block


def normalize_impute(grid: MeasurementGrid, stats: NormalizationStats) -> np.ndarray:
    """Forward-fill, mean-impute leading gaps, then min-max scale into [0, 1]."""
    frame = pd.DataFrame(np.where(grid.observed, grid.values, np.nan))
    filled = frame.ffill().fillna(pd.Series(stats.mean)).to_numpy(dtype=np.float64)
    scaled = (filled - stats.minimum) / (stats.maximum - stats.minimum)
    return np.clip(scaled, 0.0, 1.0)


def aggregate_distributions(
    hours: Sequence[int],
    distributions: Sequence[np.ndarray],
    n_hours: int,
    n_topics: int,
) -> np.ndarray:
    """Running mean of note distributions: row t averages notes with hour <= t.

    Rows before the first note are all zero.
    """
    block = np.zeros((n_hours, n_topics))
    if not hours:
        return block
    hours_arr = np.asarray(hours, dtype=np.int64)
    if np.any(hours_arr < 0) or np.any(hours_arr >= n_hours):
        raise ValidationError(f"Note hour outside stay of {n_hours} hours")

    sums = np.zeros((n_hours, n_topics))
    counts = np.zeros(n_hours)
    np.add.at(sums, hours_arr, np.asarray(distributions, dtype=np.float64))
    np.add.at(counts, hours_arr, 1.0)
    cum_sums = np.cumsum(sums, axis=0)
    cum_counts = np.cumsum(counts)
    seen = cum_counts > 0
    block[seen] = cum_sums[seen] / cum_counts[seen, None]
    return block


def aggregate_topics(
    notes: Sequence[Tuple[int, Mapping[str, int]]],
    model: TopicModel,
    n_hours: int,
    fold_in_iterations: int = FOLD_IN_SWEEPS,
    seed: int = 0,
) -> np.ndarray:
    """Topic block (n_hours x K) from a stay's notes."""
    hours = [hour for hour, _ in notes]
    dists = [infer_topics(model, counts, fold_in_iterations, seed) for _, counts in notes]
    return aggregate_distributions(hours, dists, n_hours, model.n_topics)


def encode_statics(statics: StaticProfile, stats: NormalizationStats) -> np.ndarray:
    """Static block: age scaled by training min/max, then one-hot codes."""
    vector = np.zeros(STATIC_WIDTH)
    span = stats.age_max - stats.age_min
    vector[0] = np.clip((statics.age - stats.age_min) / span, 0.0, 1.0) if span > 0 else 0.0
    offset = 1
    for field_name, codes in STATIC_ENUMS.items():
        value = getattr(statics, field_name)
        if value not in codes:
            raise ValidationError(f"statics.{field_name}: code '{value}' not in {list(codes)}")
        vector[offset + codes.index(value)] = 1.0
        offset += len(codes)
    return vector


def time_of_day(admit_hour: int, n_hours: int) -> np.ndarray:
    """Wall-clock hour of each stay hour, scaled by 1/23."""
    return ((admit_hour + np.arange(n_hours)) % 24) / 23.0
