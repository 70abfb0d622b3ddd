"""Structural rules for a single ICU stay (hard fails).

These rules check the invariants every downstream stage relies on:
- Stay length within the cohort window
- Note hours inside the stay
- Intervention tracks as long as the stay and strictly binary
- Static codes drawn from their closed enumerations
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ...config import MAX_STAY_HOURS, MIN_STAY_HOURS
from ...core.stay import PatientStay


@dataclass(frozen=True)
class StayViolation:
    """One broken invariant: which field, which rule, and the specifics."""

    field: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        suffix = f" ({self.detail})" if self.detail else ""
        return f"{self.field}: {self.rule}{suffix}"


def validate_stay(stay: PatientStay) -> List[StayViolation]:
    """Check every PatientStay invariant.

    Args:
        stay: Stay to check

    Returns:
        List of violations (empty if the stay conforms)
    """
    violations: List[StayViolation] = []
    violations.extend(_check_length(stay))
    violations.extend(_check_notes(stay))
    violations.extend(_check_tracks(stay))
    violations.extend(_check_statics(stay))
    return violations


def _check_length(stay: PatientStay) -> List[StayViolation]:
    n = stay.n_hours
    if n < MIN_STAY_HOURS:
        return [StayViolation("grid.n_hours", f"length < {MIN_STAY_HOURS}", f"{n} hours")]
    if n > MAX_STAY_HOURS:
        return [StayViolation("grid.n_hours", f"length > {MAX_STAY_HOURS}", f"{n} hours")]
    return []


def _check_notes(stay: PatientStay) -> List[StayViolation]:
    violations = []
    for i, (hour, counts) in enumerate(stay.notes):
        if hour < 0 or hour >= stay.n_hours:
            violations.append(StayViolation(f"notes[{i}].hour", "note hour outside stay", f"hour {hour}"))
        if any(c < 0 for c in counts.values()):
            violations.append(StayViolation(f"notes[{i}].counts", "negative token count"))
    return violations


def _check_tracks(stay: PatientStay) -> List[StayViolation]:
    violations = []
    for kind, track in stay.interventions.items():
        name = f"interventions.{kind.value}"
        if len(track) != stay.n_hours:
            violations.append(
                StayViolation(name, "track length mismatch", f"{len(track)} != {stay.n_hours}")
            )
        if not np.isin(track, (0, 1)).all():
            violations.append(StayViolation(name, "track value not in {0, 1}"))
    return violations


def _check_statics(stay: PatientStay) -> List[StayViolation]:
    return [StayViolation("statics", "code outside enumeration", p) for p in stay.statics.check_codes()]
