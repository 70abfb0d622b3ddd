"""ICU stay domain model.

A PatientStay is the aggregate that flows through the whole pipeline:
    cohort file → PatientStay → featurize → windowing → models

Values are immutable after construction (arrays are flagged read-only) so a
stay can be shared across workers without copying.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from engine.errors import CohortSchemaError, ValidationError
from engine.core.variables import (
    N_MEASUREMENTS,
    STATIC_ENUMS,
    VARIABLE_INDEX,
    InterventionKind,
)

logger = logging.getLogger(__name__)

Note = Tuple[int, Mapping[str, int]]


@dataclass(frozen=True)
class StaticProfile:
    """The five static variables; categorical fields hold enumeration codes."""

    gender: str
    age: float
    ethnicity: str
    icu_unit: str
    admission_type: str

    def check_codes(self) -> List[str]:
        """Return one message per field whose code is outside its enumeration."""
        problems = []
        for name, allowed in STATIC_ENUMS.items():
            value = getattr(self, name)
            if value not in allowed:
                problems.append(f"statics.{name}: code '{value}' not in {list(allowed)}")
        if not math.isfinite(self.age):
            problems.append("statics.age: not finite")
        return problems


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class MeasurementGrid:
    """Hourly grid of the 29 vitals/labs.

    Absence is explicit: ``observed[h, j]`` is False for an absent cell and
    the matching ``values`` entry carries no meaning.
    """

    values: np.ndarray
    observed: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[1] != N_MEASUREMENTS:
            raise CohortSchemaError(
                f"MeasurementGrid needs shape (hours, {N_MEASUREMENTS}); got {self.values.shape}"
            )
        if self.observed.shape != self.values.shape:
            raise CohortSchemaError("MeasurementGrid observed mask shape differs from values")
        values = np.where(self.observed, self.values, 0.0).astype(np.float64)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "observed", _frozen(self.observed.astype(bool)))

    @property
    def n_hours(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def empty(cls, n_hours: int) -> "MeasurementGrid":
        shape = (n_hours, N_MEASUREMENTS)
        return cls(values=np.zeros(shape), observed=np.zeros(shape, dtype=bool))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Optional[float]]]) -> "MeasurementGrid":
        """Build a grid from nested lists with ``None`` marking absent cells."""
        n_hours = len(rows)
        values = np.zeros((n_hours, N_MEASUREMENTS))
        observed = np.zeros((n_hours, N_MEASUREMENTS), dtype=bool)
        for h, row in enumerate(rows):
            if len(row) != N_MEASUREMENTS:
                raise CohortSchemaError(f"grid row {h} has {len(row)} cells; expected {N_MEASUREMENTS}")
            for j, cell in enumerate(row):
                if cell is not None:
                    values[h, j] = float(cell)
                    observed[h, j] = True
        return cls(values=values, observed=observed)

    def to_rows(self) -> List[List[Optional[float]]]:
        return [
            [float(v) if o else None for v, o in zip(vals, obs)]
            for vals, obs in zip(self.values, self.observed)
        ]

    def cell(self, hour: int, variable: str) -> Optional[float]:
        j = VARIABLE_INDEX[variable]
        return float(self.values[hour, j]) if self.observed[hour, j] else None

    def column(self, variable: str) -> List[Optional[float]]:
        j = VARIABLE_INDEX[variable]
        return [float(v) if o else None for v, o in zip(self.values[:, j], self.observed[:, j])]


@dataclass(frozen=True)
class PatientStay:
    """One ICU stay: grid, notes, intervention tracks and statics.

    Attributes:
        stay_id: Unique stay identifier
        statics: Static demographics
        grid: Hourly measurement grid; its length defines the stay length
        notes: (hour, token-count map) pairs in input order
        interventions: Per-kind binary hourly tracks
        subject_id: Patient identifier (several stays may share one)
        stay_seq: 1 for the subject's first ICU stay
        admit_hour: Wall-clock hour (0-23) of admission
    """

    stay_id: str
    statics: StaticProfile
    grid: MeasurementGrid
    notes: Tuple[Note, ...] = ()
    interventions: Dict[InterventionKind, np.ndarray] = field(default_factory=dict)
    subject_id: str = ""
    stay_seq: int = 1
    admit_hour: int = 0

    def __post_init__(self) -> None:
        tracks = {
            InterventionKind.parse(kind): _frozen(np.asarray(track, dtype=np.int64).copy())
            for kind, track in self.interventions.items()
        }
        notes = tuple((int(hour), dict(counts)) for hour, counts in self.notes)
        object.__setattr__(self, "interventions", tracks)
        object.__setattr__(self, "notes", notes)
        if not self.subject_id:
            object.__setattr__(self, "subject_id", self.stay_id)

    @property
    def n_hours(self) -> int:
        return self.grid.n_hours

    def track(self, kind: InterventionKind) -> np.ndarray:
        """Binary track for ``kind`` (all zeros if the stay never had it)."""
        kind = InterventionKind.parse(kind)
        if kind in self.interventions:
            return self.interventions[kind]
        return np.zeros(self.n_hours, dtype=np.int64)

    def ever_received(self, kind: InterventionKind) -> bool:
        return bool(self.track(kind).any())


def round_to_hour(minutes: float) -> int:
    """Nearest hour, half-up: minute 30 belongs to the next hour."""
    return int(math.floor((minutes + 30.0) / 60.0))


def ingest_events(
    raw_events: Iterable[Tuple[float, str, float]],
    n_hours: Optional[int] = None,
) -> MeasurementGrid:
    """Aggregate timestamped measurements into an hourly grid.

    Each event's time (minutes since admission) is rounded to the nearest
    hour; all events landing in the same (hour, variable) cell are averaged.

    Args:
        raw_events: (time in minutes, variable name, value) triples
        n_hours: Stay length; defaults to the last populated hour + 1.
            Events rounding past the end of the stay are skipped.

    Returns:
        MeasurementGrid with absent cells where no event landed

    Raises:
        CohortSchemaError: unknown variable name
        ValidationError: negative event time
    """
    rows = []
    for minutes, variable, value in raw_events:
        if variable not in VARIABLE_INDEX:
            raise CohortSchemaError(f"Unknown measurement variable '{variable}'")
        if minutes < 0:
            raise ValidationError(
                f"Event for '{variable}' at {minutes} min precedes ICU admission; negative times are rejected"
            )
        rows.append((round_to_hour(minutes), VARIABLE_INDEX[variable], float(value)))

    if not rows:
        return MeasurementGrid.empty(n_hours or 0)

    events = pd.DataFrame(rows, columns=["hour", "col", "value"])
    # fsum is exactly rounded, so the mean does not depend on event order
    means = events.groupby(["hour", "col"], sort=True)["value"].agg(lambda v: math.fsum(v) / len(v))

    last_hour = int(events["hour"].max())
    size = n_hours if n_hours is not None else last_hour + 1
    values = np.zeros((size, N_MEASUREMENTS))
    observed = np.zeros((size, N_MEASUREMENTS), dtype=bool)
    dropped = 0
    for (hour, col), mean in means.items():
        if hour >= size:
            dropped += 1
            continue
        values[hour, col] = mean
        observed[hour, col] = True
    if dropped:
        logger.warning("Skipped %d aggregated cells past the end of a %d-hour stay", dropped, size)
    return MeasurementGrid(values=values, observed=observed)


