"""ROC AUC, evaluation reports and the AUC summary table."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from engine.errors import UndefinedAUCError, ValidationError
from engine.core.variables import InterventionKind
from engine.models.base import predict_proba
from engine.utils.csv_io import read_csv, write_csv

logger = logging.getLogger(__name__)

MACRO = "macro"
_CLASS_TITLES = {
    "onset": "Onset",
    "wean": "Wean",
    "stay_on": "Stay On",
    "stay_off": "Stay Off",
    "no_onset": "No Onset",
    MACRO: "Macro",
}


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(score+ > score-) + 0.5 * P(tie).

    Raises:
        UndefinedAUCError: labels contain a single value
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValidationError(f"roc_auc: {scores.shape[0]} scores for {labels.shape[0]} labels")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("AUC is undefined when only one label value is present")
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass
class EvalReport:
    """Per-class one-vs-rest AUCs for one (intervention, model) pair.

    ``per_class`` holds None for classes whose AUC is undefined on the
    evaluated set; those are listed in ``missing_classes`` and left out of
    the macro average.
    """

    intervention: str
    model: str
    classes: Tuple[str, ...]
    per_class: Dict[str, Optional[float]]
    class_counts: Dict[str, int] = field(default_factory=dict)
    missing_classes: List[str] = field(default_factory=list)

    @property
    def macro(self) -> Optional[float]:
        defined = [v for v in self.per_class.values() if v is not None]
        if not defined:
            return None
        return math.fsum(defined) / len(defined)

    @property
    def is_partial(self) -> bool:
        return bool(self.missing_classes)

    def formatted(self, name: str = MACRO) -> str:
        value = self.macro if name == MACRO else self.per_class.get(name)
        return "-" if value is None else f"{value:.2f}"

    @classmethod
    def from_aucs(cls, aucs: Sequence[float], classes: Sequence[str], intervention: str = "", model: str = "") -> "EvalReport":
        return cls(intervention, model, tuple(classes), dict(zip(classes, (float(a) for a in aucs))))

    def to_json(self) -> str:
        data = asdict(self)
        data["classes"] = list(self.classes)
        data["macro"] = self.macro
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        data = json.loads(text)
        data.pop("macro", None)
        data["classes"] = tuple(data["classes"])
        data["per_class"] = {name: data["per_class"].get(name) for name in data["classes"]}
        return cls(**data)


def evaluate(model, examples, model_name: str = "") -> EvalReport:
    """One-vs-rest AUC per class from the model's predicted probabilities."""
    scheme = examples.scheme
    probs = predict_proba(model, examples)
    per_class: Dict[str, Optional[float]] = {}
    counts: Dict[str, int] = {}
    missing: List[str] = []
    for k, name in enumerate(scheme.classes):
        is_k = (examples.labels == k).astype(np.int64)
        counts[name] = int(is_k.sum())
        try:
            per_class[name] = roc_auc(probs[:, k], is_k)
        except UndefinedAUCError:
            per_class[name] = None
            missing.append(name)
    if missing:
        logger.warning("Evaluation set lacks classes %s; report is partial", missing)
    return EvalReport(
        intervention=scheme.kind.value,
        model=model_name or model.config.kind.value,
        classes=scheme.classes,
        per_class=per_class,
        class_counts=counts,
        missing_classes=missing,
    )


def write_metrics_csv(reports: Sequence[EvalReport], path: Path, config_hash: str = "") -> Path:
    """Rows (intervention, model, class, auc) plus one macro row per report."""
    rows = []
    for report in reports:
        for name in report.classes:
            rows.append({"intervention": report.intervention, "model": report.model,
                         "class": name, "auc": report.per_class[name]})
        rows.append({"intervention": report.intervention, "model": report.model,
                     "class": MACRO, "auc": report.macro})
    return write_csv(pd.DataFrame(rows, columns=["intervention", "model", "class", "auc"]), path, config_hash)


def read_metrics_csv(path: Path) -> pd.DataFrame:
    return read_csv(path)


def format_auc_table(metrics: pd.DataFrame) -> pd.DataFrame:
    """AUC grid: rows are (class, model), columns are interventions, cells two decimals."""
    if metrics.empty:
        return pd.DataFrame()
    frame = metrics.copy()
    frame["auc"] = frame["auc"].map(lambda v: "-" if pd.isna(v) else f"{float(v):.2f}")
    class_order = [c for c in _CLASS_TITLES if c in set(frame["class"])]
    frame["task"] = frame["class"].map(_CLASS_TITLES)
    frame["order"] = frame["class"].map(class_order.index)
    grid = frame.pivot_table(
        index=["order", "task", "model"], columns="intervention", values="auc", aggfunc="first"
    )
    grid = grid.reset_index().drop(columns="order").fillna("-")
    grid.columns.name = None
    kinds = [k.value for k in InterventionKind if k.value in grid.columns]
    grid = grid[["task", "model"] + kinds].rename(columns={k.value: k.label for k in InterventionKind})
    return grid
