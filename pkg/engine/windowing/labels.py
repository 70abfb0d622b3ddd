"""Label schemes and prediction-window labeling."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from engine.errors import ValidationError
from engine.core.variables import InterventionKind

ONSET = 0
WEAN = 1
STAY_ON = 2
STAY_OFF = 3
NO_ONSET = 1

DURATION_CLASSES: Tuple[str, ...] = ("onset", "wean", "stay_on", "stay_off")
BOLUS_CLASSES: Tuple[str, ...] = ("onset", "no_onset")

# Table column order for proportions reports.
_DISPLAY_ORDER = {
    4: ("onset", "wean", "stay_off", "stay_on"),
    2: ("onset", "no_onset"),
}
_DISPLAY_NAMES = {
    "onset": "Onset",
    "wean": "Wean",
    "stay_on": "Stay On",
    "stay_off": "Stay Off",
    "no_onset": "No Onset",
}


@dataclass(frozen=True)
class LabelScheme:
    kind: InterventionKind

    @classmethod
    def for_kind(cls, kind: "InterventionKind | str") -> "LabelScheme":
        return cls(InterventionKind.parse(kind))

    @property
    def classes(self) -> Tuple[str, ...]:
        return DURATION_CLASSES if self.kind.has_duration else BOLUS_CLASSES

    @property
    def n_classes(self) -> int:
        return len(self.classes)


def label_window(
    window: Sequence[int],
    scheme: LabelScheme,
    entry_state: Optional[int] = None,
) -> int:
    """Class id of one prediction window.

    Duration kinds: the entry state (the hour just before the window) is
    prepended before looking for transitions. A 0->1 transition gives ONSET,
    otherwise a 1->0 transition gives WEAN, otherwise the constant value
    gives STAY_ON or STAY_OFF. Bolus kinds: ONSET iff any hour is 1.

    Raises:
        ValidationError: empty window or non-binary values
    """
    values = np.asarray(window)
    if values.size == 0:
        raise ValidationError("Prediction window is empty")
    if not np.isin(values, (0, 1)).all() or (entry_state is not None and entry_state not in (0, 1)):
        raise ValidationError(f"Prediction window must be binary, got {values.tolist()}")

    if not scheme.kind.has_duration:
        return ONSET if values.any() else NO_ONSET

    sequence = values if entry_state is None else np.concatenate([[entry_state], values])
    steps = np.diff(sequence.astype(np.int64))
    if (steps == 1).any():
        return ONSET
    if (steps == -1).any():
        return WEAN
    return STAY_ON if values[0] == 1 else STAY_OFF


def class_counts(labels: Iterable[int], scheme: LabelScheme) -> Dict[str, int]:
    counts = Counter(int(label) for label in labels)
    return {name: counts.get(i, 0) for i, name in enumerate(scheme.classes)}


def class_proportions(labels: Iterable[int], scheme: LabelScheme) -> Dict[str, float]:
    """Per-class fractions (sum to 1)."""
    counts = class_counts(labels, scheme)
    total = sum(counts.values())
    if total == 0:
        raise ValidationError("Cannot compute class proportions of an empty example set")
    return {name: n / total for name, n in counts.items()}


def proportions_frame(rows: Mapping[InterventionKind, Mapping[str, float]]) -> pd.DataFrame:
    """Per-intervention class proportions as a table of display strings.

    Duration kinds fill Onset/Wean/Stay Off/Stay On; bolus kinds fill
    Onset/No Onset; the rest is "-".
    """
    columns = ["Onset", "Wean", "Stay Off", "Stay On", "No Onset"]
    records = []
    for kind, proportions in rows.items():
        kind = InterventionKind.parse(kind)
        record = {"Intervention": kind.label}
        order = _DISPLAY_ORDER[len(proportions)]
        for name in order:
            record[_DISPLAY_NAMES[name]] = f"{proportions[name]:.3f}"
        records.append(record)
    return pd.DataFrame(records, columns=["Intervention"] + columns).fillna("-")


def format_proportions(rows: Mapping[InterventionKind, Mapping[str, float]]) -> str:
    """Render per-intervention class proportions as a text table."""
    return proportions_frame(rows).to_string(index=False)
