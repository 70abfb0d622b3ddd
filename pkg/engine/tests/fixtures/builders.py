"""Small hand-built stays, stats and example sets shared by the tests."""

from typing import Dict, Optional, Sequence

import numpy as np

from engine.core.stay import MeasurementGrid, PatientStay, StaticProfile
from engine.core.variables import N_MEASUREMENTS, InterventionKind
from engine.features.stats import NormalizationStats
from engine.windowing.windows import ExampleSet


def make_statics(age: float = 60.0, **overrides) -> StaticProfile:
    values = dict(
        gender="F",
        age=age,
        ethnicity="White",
        icu_unit="MICU",
        admission_type="Emergency",
    )
    values.update(overrides)
    return StaticProfile(**values)


def make_grid(n_hours: int, seed: int = 0, missing: float = 0.3) -> MeasurementGrid:
    """Standard-normal values with a random share of absent cells."""
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((n_hours, N_MEASUREMENTS))
    observed = rng.random((n_hours, N_MEASUREMENTS)) >= missing
    return MeasurementGrid(values=values, observed=observed)


def make_stay(
    stay_id: str = "s1",
    n_hours: int = 24,
    seed: int = 0,
    notes=(),
    tracks: Optional[Dict[InterventionKind, Sequence[int]]] = None,
    age: float = 60.0,
    subject_id: str = "",
    stay_seq: int = 1,
    admit_hour: int = 0,
) -> PatientStay:
    return PatientStay(
        stay_id=stay_id,
        subject_id=subject_id,
        stay_seq=stay_seq,
        admit_hour=admit_hour,
        statics=make_statics(age),
        grid=make_grid(n_hours, seed),
        notes=tuple(notes),
        interventions={k: np.asarray(v) for k, v in (tracks or {}).items()},
    )


def unit_stats(age_min: float = 15.0, age_max: float = 90.0) -> NormalizationStats:
    """Mean 0, std 1, range [-3, 3] for every variable."""
    return NormalizationStats(
        mean=np.zeros(N_MEASUREMENTS),
        std=np.ones(N_MEASUREMENTS),
        minimum=np.full(N_MEASUREMENTS, -3.0),
        maximum=np.full(N_MEASUREMENTS, 3.0),
        age_min=age_min,
        age_max=age_max,
    )


def make_example_set(
    features: np.ndarray,
    labels: Sequence[int],
    kind: InterventionKind = InterventionKind.COLBOL,
    schema_hash: str = "test-schema",
) -> ExampleSet:
    n = features.shape[0]
    return ExampleSet(
        features=np.asarray(features, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        stay_ids=tuple(f"s{i // 4}" for i in range(n)),
        starts=np.arange(n, dtype=np.int64) % 4,
        kind=kind,
        schema_hash=schema_hash,
    )


def separable_examples(n: int = 80, lookback: int = 3, width: int = 4, seed: int = 0) -> ExampleSet:
    """Binary bolus examples whose label is column 0 being high in the last hour."""
    rng = np.random.default_rng(seed)
    features = rng.random((n, lookback, width))
    labels = np.where(np.arange(n) % 4 == 0, 0, 1)
    features[labels == 0, -1, 0] += 2.0
    return make_example_set(features, labels)
