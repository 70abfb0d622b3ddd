"""Cohort file I/O and cohort selection.

The cohort file is newline-delimited JSON, one stay per line. Records are
validated with pydantic at the file boundary and converted into immutable
PatientStay objects. Key names are documented in engine/docs/COHORT_SCHEMA.md.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError as PydanticValidationError, field_validator

from engine.config import MAX_STAY_HOURS, MIN_AGE_YEARS, MIN_STAY_HOURS
from engine.errors import CohortSchemaError
from engine.core.stay import MeasurementGrid, PatientStay, StaticProfile
from engine.core.variables import N_MEASUREMENTS, InterventionKind
from engine.utils.csv_io import HASH_PREFIX

logger = logging.getLogger(__name__)


class StaticsRecord(BaseModel):
    gender: str
    age: float
    ethnicity: str
    icu_unit: str
    admission_type: str


class NoteRecord(BaseModel):
    hour: int = Field(ge=0)
    tokens: Dict[str, int]


class StayRecord(BaseModel):
    """One line of the cohort file."""

    stay_id: str
    subject_id: str = ""
    stay_seq: int = Field(default=1, ge=1)
    admit_hour: int = Field(default=0, ge=0, le=23)
    statics: StaticsRecord
    grid: List[List[Optional[float]]]
    notes: List[NoteRecord] = Field(default_factory=list)
    interventions: Dict[str, List[int]] = Field(default_factory=dict)

    @field_validator("grid")
    @classmethod
    def _row_width(cls, rows: List[List[Optional[float]]]) -> List[List[Optional[float]]]:
        for h, row in enumerate(rows):
            if len(row) != N_MEASUREMENTS:
                raise ValueError(f"grid row {h} has {len(row)} cells; expected {N_MEASUREMENTS}")
        return rows

    @field_validator("interventions")
    @classmethod
    def _known_kinds(cls, tracks: Dict[str, List[int]]) -> Dict[str, List[int]]:
        for key in tracks:
            InterventionKind.parse(key)
        return tracks

    def to_stay(self) -> PatientStay:
        return PatientStay(
            stay_id=self.stay_id,
            subject_id=self.subject_id,
            stay_seq=self.stay_seq,
            admit_hour=self.admit_hour,
            statics=StaticProfile(**self.statics.model_dump()),
            grid=MeasurementGrid.from_rows(self.grid),
            notes=tuple((n.hour, n.tokens) for n in self.notes),
            interventions={InterventionKind.parse(k): np.asarray(v) for k, v in self.interventions.items()},
        )

    @classmethod
    def from_stay(cls, stay: PatientStay) -> "StayRecord":
        return cls(
            stay_id=stay.stay_id,
            subject_id=stay.subject_id,
            stay_seq=stay.stay_seq,
            admit_hour=stay.admit_hour,
            statics=StaticsRecord(
                gender=stay.statics.gender,
                age=stay.statics.age,
                ethnicity=stay.statics.ethnicity,
                icu_unit=stay.statics.icu_unit,
                admission_type=stay.statics.admission_type,
            ),
            grid=stay.grid.to_rows(),
            notes=[NoteRecord(hour=h, tokens=dict(c)) for h, c in stay.notes],
            interventions={
                kind.value: [int(v) for v in stay.interventions[kind]]
                for kind in InterventionKind
                if kind in stay.interventions
            },
        )


def stay_to_json(stay: PatientStay) -> str:
    """Serialize one stay to a single JSON line (absent cells become null)."""
    return json.dumps(StayRecord.from_stay(stay).model_dump(), separators=(",", ":"))


def stay_from_json(line: str, line_number: Optional[int] = None) -> PatientStay:
    try:
        record = StayRecord.model_validate_json(line)
        return record.to_stay()
    except (PydanticValidationError, ValueError) as e:
        where = f" at line {line_number}" if line_number is not None else ""
        raise CohortSchemaError(f"Invalid cohort record{where}: {e}", line=line_number) from e


def write_cohort(stays: Iterable[PatientStay], path: Path, config_hash: str = "") -> Path:
    """Write stays as newline-delimited JSON.

    With ``config_hash`` the file opens with a ``# config_hash=`` line, the
    same marker every CSV artifact carries.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [stay_to_json(stay) for stay in stays]
    if config_hash:
        lines.insert(0, f"{HASH_PREFIX}{config_hash}")
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return path


def read_cohort(path: Path) -> List[PatientStay]:
    """Read a cohort file written by :func:`write_cohort`; ``#`` lines are skipped."""
    stays = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, 1):
            if line.strip() and not line.startswith("#"):
                stays.append(stay_from_json(line, number))
    logger.debug("Read %d stays from %s", len(stays), path)
    return stays


def select_cohort(stays: Sequence[PatientStay]) -> Tuple[List[PatientStay], Dict[str, int]]:
    """Apply the cohort inclusion criteria.

    Keeps adults (age >= 15) whose stay lasts 12 to 240 hours, and only the
    first ICU stay of each subject.

    Returns:
        (kept stays in input order, exclusion counts per reason)
    """
    excluded: Counter = Counter()
    eligible = []
    for stay in stays:
        if stay.statics.age < MIN_AGE_YEARS:
            excluded["age"] += 1
        elif not MIN_STAY_HOURS <= stay.n_hours <= MAX_STAY_HOURS:
            excluded["length"] += 1
        else:
            eligible.append(stay)

    first_seq: Dict[str, int] = {}
    for stay in eligible:
        current = first_seq.get(stay.subject_id)
        if current is None or stay.stay_seq < current:
            first_seq[stay.subject_id] = stay.stay_seq

    kept = []
    seen = set()
    for stay in eligible:
        if stay.stay_seq != first_seq[stay.subject_id] or stay.subject_id in seen:
            excluded["not_first_stay"] += 1
            continue
        seen.add(stay.subject_id)
        kept.append(stay)

    if excluded:
        logger.info("Cohort selection excluded %s", dict(sorted(excluded.items())))
    return kept, dict(excluded)
