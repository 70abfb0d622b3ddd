"""Cohort validation orchestrator.

Runs the per-stay structural rules over a cohort and adds cohort-level
checks. Returns a status plus error and warning lists; never raises.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence

from ..core.stay import PatientStay
from .rules.stay_rules import validate_stay


class ValidationStatus(Enum):
    """Validation outcome."""
    PASS = "PASS"              # No issues detected
    WEAK_PASS = "WEAK_PASS"    # Warnings only; usable cohort
    FAIL = "FAIL"              # At least one stay breaks an invariant


@dataclass
class ValidationResult:
    """Result of cohort validation.

    Attributes:
        status: Overall validation outcome
        errors: Hard failures (stay invariant violations, duplicate ids)
        warnings: Soft findings (repeated subjects, stays never intervened)
    """
    status: ValidationStatus
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


class CohortValidator:
    """Validate a list of stays before featurization."""

    def validate(self, stays: Sequence[PatientStay]) -> ValidationResult:
        errors: List[str] = []
        warnings: List[str] = []

        if not stays:
            return ValidationResult(ValidationStatus.FAIL, ["Cohort contains no stays."])

        for stay in stays:
            for violation in validate_stay(stay):
                errors.append(f"Stay {stay.stay_id}: {violation}")

        duplicates = [sid for sid, n in Counter(s.stay_id for s in stays).items() if n > 1]
        for sid in duplicates:
            errors.append(f"Stay id '{sid}' appears more than once.")

        repeated = [sub for sub, n in Counter(s.subject_id for s in stays).items() if n > 1]
        if repeated:
            warnings.append(
                f"{len(repeated)} subject(s) contribute several stays; select_cohort keeps the first only."
            )

        if errors:
            status = ValidationStatus.FAIL
        elif warnings:
            status = ValidationStatus.WEAK_PASS
        else:
            status = ValidationStatus.PASS
        return ValidationResult(status=status, errors=errors, warnings=warnings)
