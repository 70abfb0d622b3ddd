"""Synthetic cohort configuration and default physiology table."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from engine.config import GAP_HOURS, LOOKBACK_HOURS, MAX_STAY_HOURS, MIN_STAY_HOURS
from engine.errors import ValidationError
from engine.core.variables import MEASUREMENT_VARIABLES, InterventionKind

# variable: (mean, std, circadian amplitude in std units, missingness rate)
DEFAULT_PHYSIOLOGY: Dict[str, Tuple[float, float, float, float]] = {
    "anion_gap": (12.0, 3.0, 0.0, 0.70),
    "bicarbonate": (24.0, 3.0, 0.0, 0.70),
    "ph": (7.39, 0.05, 0.0, 0.80),
    "bun": (20.0, 8.0, 0.0, 0.70),
    "chloride": (104.0, 4.0, 0.0, 0.70),
    "creatinine": (1.1, 0.4, 0.0, 0.70),
    "diastolic_bp": (65.0, 10.0, 0.3, 0.05),
    "fio2": (0.4, 0.1, 0.0, 0.60),
    "gcs": (13.0, 2.0, 0.0, 0.50),
    "glucose": (130.0, 30.0, 0.2, 0.50),
    "heart_rate": (85.0, 12.0, 0.3, 0.05),
    "hematocrit": (32.0, 4.0, 0.0, 0.70),
    "hemoglobin": (10.5, 1.5, 0.0, 0.70),
    "inr": (1.3, 0.3, 0.0, 0.80),
    "lactate": (1.8, 0.8, 0.0, 0.85),
    "magnesium": (2.0, 0.3, 0.0, 0.80),
    "mean_bp": (80.0, 10.0, 0.3, 0.05),
    "spo2": (96.0, 2.0, 0.1, 0.05),
    "ptt": (32.0, 6.0, 0.0, 0.80),
    "phosphate": (3.5, 0.8, 0.0, 0.80),
    "platelets": (220.0, 60.0, 0.0, 0.75),
    "potassium": (4.1, 0.4, 0.0, 0.70),
    "pt": (14.0, 2.0, 0.0, 0.80),
    "resp_rate": (18.0, 4.0, 0.3, 0.05),
    "sodium": (139.0, 3.0, 0.0, 0.70),
    "systolic_bp": (120.0, 15.0, 0.3, 0.05),
    "temperature": (37.0, 0.5, 0.4, 0.20),
    "weight": (80.0, 15.0, 0.0, 0.90),
    "wbc": (10.0, 3.0, 0.0, 0.75),
}

NOTE_THEMES: Dict[str, Tuple[str, ...]] = {
    "routine": ("stable", "comfortable", "resting", "family", "plan", "continue",
                "monitor", "rounds", "ambulating", "tolerating", "diet", "afebrile"),
    "severe": ("critical", "unstable", "deteriorating", "hypotensive", "septic", "acidosis",
               "worsening", "emergent", "arrest", "shock", "failure", "declining"),
    "respiratory": ("dyspnea", "bipap", "cpap", "mask", "wheezing", "tachypneic",
                    "desaturation", "nebulizer", "accessory", "muscles", "sputum", "hypoxia"),
    "fluid": ("hypovolemic", "dry", "fluids", "oliguria", "urine", "output",
              "turgor", "dehydrated", "albumin", "saline", "lactated", "replete"),
}

# Planted drivers: measurement variables with a shift direction, or a note theme.
MEASUREMENT_DRIVERS: Dict[InterventionKind, Tuple[Tuple[str, int], ...]] = {
    InterventionKind.VENT: (("resp_rate", 1),),
    InterventionKind.VASO: (("mean_bp", -1), ("systolic_bp", -1), ("diastolic_bp", -1)),
}
NOTE_DRIVERS: Dict[InterventionKind, str] = {
    InterventionKind.NIVENT: "respiratory",
    InterventionKind.COLBOL: "fluid",
    InterventionKind.CRYSBOL: "fluid",
}

DRIVER_SHAPES = ("linear", "threshold")


def _default_rates() -> Dict[str, float]:
    return {
        InterventionKind.VENT.value: 0.35,
        InterventionKind.NIVENT.value: 0.15,
        InterventionKind.VASO.value: 0.25,
        InterventionKind.COLBOL.value: 0.10,
        InterventionKind.CRYSBOL.value: 0.25,
    }


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    Attributes:
        n_patients: Number of stays (one per subject)
        min_hours / max_hours: Stay-length range, inside [12, 240]
        lead_hours: Hours before each onset that carry the driver shift
        effect_size: Driver shift in units of the variable's std
        driver_shape: "linear" (fixed direction) or "threshold" (random direction)
        intervention_rates: Mean per-stay probability of an episode per kind
        note_rate: Per-hour probability of a routine note
        note_effect: Mixture weight of the driver theme in a driver note
        ar_coefficient: AR(1) coefficient of measurement noise
        physiology: variable -> (mean, std, circadian amplitude, missingness)
    """

    n_patients: int = 200
    min_hours: int = 24
    max_hours: int = 72
    lead_hours: int = 8
    effect_size: float = 3.0
    driver_shape: str = "linear"
    intervention_rates: Dict[str, float] = field(default_factory=_default_rates)
    note_rate: float = 0.08
    tokens_per_note: int = 25
    note_effect: float = 3.0
    ar_coefficient: float = 0.7
    physiology: Dict[str, Tuple[float, float, float, float]] = field(
        default_factory=lambda: dict(DEFAULT_PHYSIOLOGY)
    )
    seed: int = 0

    @property
    def earliest_onset(self) -> int:
        """Onsets start late enough for a full lead window and one labeled window."""
        return max(self.lead_hours, LOOKBACK_HOURS + GAP_HOURS)

    def validate(self) -> List[str]:
        errors = []
        if self.n_patients < 1:
            errors.append("n_patients must be >= 1")
        if not MIN_STAY_HOURS <= self.min_hours <= self.max_hours <= MAX_STAY_HOURS:
            errors.append(f"stay-length range must lie within [{MIN_STAY_HOURS}, {MAX_STAY_HOURS}]")
        if not 0 < self.lead_hours < self.min_hours:
            errors.append("lead_hours must be positive and shorter than min_hours")
        if self.driver_shape not in DRIVER_SHAPES:
            errors.append(f"driver_shape must be one of {DRIVER_SHAPES}")
        for kind in InterventionKind:
            rate = self.intervention_rates.get(kind.value)
            if rate is None or not 0.0 <= rate <= 1.0:
                errors.append(f"intervention rate for {kind.value} must be in [0, 1]")
        if not 0.0 <= self.note_rate <= 1.0:
            errors.append("note_rate must be in [0, 1]")
        if not 0.0 <= self.ar_coefficient < 1.0:
            errors.append("ar_coefficient must be in [0, 1)")
        if self.tokens_per_note < 1:
            errors.append("tokens_per_note must be >= 1")
        if set(self.physiology) != set(MEASUREMENT_VARIABLES):
            errors.append("physiology must cover exactly the 29 measurement variables")
        for name, (_, std, _, missing) in self.physiology.items():
            if std <= 0 or not 0.0 <= missing < 1.0:
                errors.append(f"physiology for {name}: std must be > 0 and missingness in [0, 1)")
        return errors

    def check(self) -> "SynthConfig":
        errors = self.validate()
        if errors:
            raise ValidationError("Invalid synthetic cohort configuration", errors)
        return self
