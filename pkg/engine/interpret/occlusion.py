"""Feature occlusion: replace one feature with uniform noise and measure the AUC drop.

In WORDS mode the nine word columns of a variable form one unit and are
replaced together; every other column is its own unit. Each unit draws
its noise from a generator seeded by (seed, unit index), fresh for every
example-hour.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from engine.errors import UndefinedAUCError, ValidationError
from engine.features.schema import GROUP_VITALS_LABS, FeatureMode, FeatureSchema
from engine.models.base import ModelGraph, predict_proba
from engine.training.metrics import roc_auc
from engine.utils.csv_io import write_csv
from engine.utils.hashing import derive_seed
from engine.windowing.windows import ExampleSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureUnit:
    name: str
    group: str
    columns: Tuple[int, ...]


def feature_units(schema: FeatureSchema) -> List[FeatureUnit]:
    """Occlusion units in schema order."""
    units: List[FeatureUnit] = []
    seen_variables = set()
    for i, column in enumerate(schema.columns):
        if schema.mode is FeatureMode.WORDS and column.group == GROUP_VITALS_LABS:
            if column.source in seen_variables:
                continue
            seen_variables.add(column.source)
            units.append(FeatureUnit(column.source, column.group, tuple(schema.variable_columns(column.source))))
        else:
            units.append(FeatureUnit(column.name, column.group, (i,)))
    return units


def _per_class_auc(probs: np.ndarray, labels: np.ndarray, classes) -> Dict[str, Optional[float]]:
    aucs: Dict[str, Optional[float]] = {}
    for k, name in enumerate(classes):
        try:
            aucs[name] = roc_auc(probs[:, k], (labels == k).astype(np.int64))
        except UndefinedAUCError:
            aucs[name] = None
    return aucs


def occlude(
    model: ModelGraph,
    examples: ExampleSet,
    schema: FeatureSchema,
    feature_index: int,
    seed: int = 0,
    baseline: Optional[Dict[str, Optional[float]]] = None,
    identity: bool = False,
) -> Dict[str, Optional[float]]:
    """AUC(original) - AUC(occluded) per class for one feature unit.

    ``identity=True`` writes the unit's own values back instead of noise
    (control path; every delta is 0).
    """
    units = feature_units(schema)
    if not 0 <= feature_index < len(units):
        raise ValidationError(f"Feature index {feature_index} out of range [0, {len(units)})")
    classes = examples.scheme.classes
    if baseline is None:
        baseline = _per_class_auc(predict_proba(model, examples), examples.labels, classes)

    columns = list(units[feature_index].columns)
    occluded = examples.features.copy()
    if not identity:
        rng = np.random.default_rng(derive_seed(seed, feature_index))
        n, t, _ = occluded.shape
        occluded[:, :, columns] = rng.random((n, t, len(columns)))
    probs = model.predict_proba(occluded, schema_hash=examples.schema_hash)
    after = _per_class_auc(probs, examples.labels, classes)
    return {
        name: None if baseline[name] is None or after[name] is None else baseline[name] - after[name]
        for name in classes
    }


@dataclass
class OcclusionReport:
    """Per-unit AUC deltas, ranked by the delta of ``rank_class``."""

    rank_class: str
    classes: Tuple[str, ...]
    units: List[FeatureUnit] = field(default_factory=list)
    deltas: List[Dict[str, Optional[float]]] = field(default_factory=list)
    ranking: List[int] = field(default_factory=list)

    def ranked(self) -> List[Tuple[FeatureUnit, Dict[str, Optional[float]]]]:
        return [(self.units[i], self.deltas[i]) for i in self.ranking]

    def rank_of(self, name: str) -> int:
        """1-based rank of the unit called ``name``."""
        for position, i in enumerate(self.ranking, 1):
            if self.units[i].name == name:
                return position
        raise KeyError(name)

    def delta(self, name: str, class_name: Optional[str] = None) -> Optional[float]:
        for unit, deltas in zip(self.units, self.deltas):
            if unit.name == name:
                return deltas[class_name or self.rank_class]
        raise KeyError(name)

    def top(self, n: int, group: Optional[str] = None) -> List[Tuple[FeatureUnit, Optional[float]]]:
        picked = [(u, d[self.rank_class]) for u, d in self.ranked() if group is None or u.group == group]
        return picked[:n]


def rank_features(
    model: ModelGraph,
    examples: ExampleSet,
    schema: FeatureSchema,
    seed: int = 0,
    rank_class: Optional[str] = None,
) -> OcclusionReport:
    """Occlude every unit and rank by AUC drop (largest first, ties by schema order)."""
    classes = examples.scheme.classes
    rank_class = rank_class or classes[0]
    if rank_class not in classes:
        raise ValidationError(f"Class '{rank_class}' not in {list(classes)}")
    baseline = _per_class_auc(predict_proba(model, examples), examples.labels, classes)
    if baseline[rank_class] is None:
        raise ValidationError(f"Cannot rank features: AUC for '{rank_class}' is undefined on this set")

    units = feature_units(schema)
    report = OcclusionReport(rank_class=rank_class, classes=classes, units=units)
    for index in range(len(units)):
        report.deltas.append(occlude(model, examples, schema, index, seed, baseline))
    keys = [d[rank_class] if d[rank_class] is not None else -np.inf for d in report.deltas]
    report.ranking = sorted(range(len(units)), key=lambda i: (-keys[i], i))
    logger.info("Occlusion over %d units; top: %s", len(units),
                ", ".join(report.units[i].name for i in report.ranking[:3]))
    return report


def write_occlusion_csv(report: OcclusionReport, path: Path, config_hash: str = "") -> Path:
    """Rows (feature, group, class, delta_auc, rank)."""
    rows = []
    for rank, (unit, deltas) in enumerate(report.ranked(), 1):
        for name in report.classes:
            rows.append({"feature": unit.name, "group": unit.group, "class": name,
                         "delta_auc": deltas[name], "rank": rank})
    return write_csv(pd.DataFrame(rows, columns=["feature", "group", "class", "delta_auc", "rank"]), path, config_hash)
