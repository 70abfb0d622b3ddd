"""Closed vocabularies of the stay model.

The 29 time-varying vitals/labs, the five static variables with their code
enumerations, and the five intervention kinds.
"""

from __future__ import annotations

from enum import Enum
from typing import Dict, Tuple

# Column order of every MeasurementGrid.
MEASUREMENT_VARIABLES: Tuple[str, ...] = (
    "anion_gap",
    "bicarbonate",
    "ph",
    "bun",
    "chloride",
    "creatinine",
    "diastolic_bp",
    "fio2",
    "gcs",
    "glucose",
    "heart_rate",
    "hematocrit",
    "hemoglobin",
    "inr",
    "lactate",
    "magnesium",
    "mean_bp",
    "spo2",
    "ptt",
    "phosphate",
    "platelets",
    "potassium",
    "pt",
    "resp_rate",
    "sodium",
    "systolic_bp",
    "temperature",
    "weight",
    "wbc",
)
N_MEASUREMENTS = len(MEASUREMENT_VARIABLES)
VARIABLE_INDEX: Dict[str, int] = {name: i for i, name in enumerate(MEASUREMENT_VARIABLES)}

GENDERS: Tuple[str, ...] = ("F", "M")
ETHNICITIES: Tuple[str, ...] = ("White", "Black/African American", "Hispanic/Latino", "Other")
ICU_UNITS: Tuple[str, ...] = ("CCU", "CSRU", "MICU", "SICU", "TSICU")
ADMISSION_TYPES: Tuple[str, ...] = ("Elective", "Urgent", "Emergency")

STATIC_ENUMS: Dict[str, Tuple[str, ...]] = {
    "gender": GENDERS,
    "ethnicity": ETHNICITIES,
    "icu_unit": ICU_UNITS,
    "admission_type": ADMISSION_TYPES,
}


class InterventionKind(Enum):
    """Targeted ICU interventions."""

    VENT = "vent"
    NIVENT = "nivent"
    VASO = "vaso"
    COLBOL = "colbol"
    CRYSBOL = "crysbol"

    @property
    def has_duration(self) -> bool:
        """Boluses are point administrations; the rest run for a duration."""
        return self not in (InterventionKind.COLBOL, InterventionKind.CRYSBOL)

    @property
    def label(self) -> str:
        return _KIND_LABELS[self]

    @classmethod
    def parse(cls, value: "str | InterventionKind") -> "InterventionKind":
        """Accept enum members, values ("vent") or names ("VENT")."""
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        for kind in cls:
            if text.lower() == kind.value or text.upper() == kind.name:
                return kind
        raise ValueError(f"Unknown intervention kind '{value}'; expected one of {[k.value for k in cls]}")


_KIND_LABELS = {
    InterventionKind.VENT: "Ventilation",
    InterventionKind.NIVENT: "NI-Ventilation",
    InterventionKind.VASO: "Vasopressor",
    InterventionKind.COLBOL: "Colloid Bolus",
    InterventionKind.CRYSBOL: "Crystalloid Bolus",
}
