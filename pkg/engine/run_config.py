"""Run configuration for the command-line stages.

A RunConfig is assembled from an optional flat ``key = value`` config file
and then overridden by command-line flags. Keys of sub-configurations are
dotted (``train.batch_size = 64``); top-level keys are bare (``seed = 7``).

The config hash that every artifact embeds covers everything except paths,
so moving a run folder does not change it.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, field_validator

from engine import config as defaults
from engine.core.variables import InterventionKind
from engine.errors import ValidationError
from engine.features.schema import FeatureMode
from engine.models.config import ModelKind
from engine.utils.hashing import config_hash

PATH_FIELDS = (
    "workdir",
    "cohort",
    "topics_dir",
    "features_dir",
    "shards_dir",
    "checkpoints_dir",
    "metrics_dir",
    "interpret_dir",
    "reports_dir",
)

# Folder names under the workdir (see packaging.folder_creator.STAGE_FOLDERS)
_DEFAULT_DIRS = {
    "topics_dir": "topics",
    "features_dir": "features",
    "shards_dir": "shards",
    "checkpoints_dir": "models",
    "metrics_dir": "metrics",
    "interpret_dir": "interpret",
    "reports_dir": "report",
}


def _int_tuple(value: Any) -> Any:
    if isinstance(value, str):
        return tuple(int(part) for part in value.replace(" ", "").split(",") if part)
    return value


def _float_tuple(value: Any) -> Any:
    if isinstance(value, str):
        return tuple(float(part) for part in value.replace(" ", "").split(",") if part)
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SynthSettings(_Section):
    n_patients: int = Field(default=200, ge=1)
    min_hours: int = 24
    max_hours: int = 72
    lead_hours: int = 8
    effect_size: float = 3.0
    driver_shape: str = "linear"
    note_rate: float = 0.08


class TopicSettings(_Section):
    n_topics: int = Field(default=defaults.N_TOPICS, ge=1)
    beta: float = Field(default=defaults.TOPIC_BETA, gt=0)
    iterations: int = Field(default=defaults.GIBBS_SWEEPS, ge=1)
    fold_in: int = Field(default=defaults.FOLD_IN_SWEEPS, ge=2)
    min_document_frequency: int = Field(default=defaults.MIN_DOCUMENT_FREQUENCY, ge=1)


class WindowSettings(_Section):
    lookback: int = Field(default=defaults.LOOKBACK_HOURS, ge=1)
    gap: int = Field(default=defaults.GAP_HOURS, ge=1)
    horizon: int = Field(default=defaults.HORIZON_HOURS, ge=1)
    stride: int = Field(default=defaults.STRIDE_HOURS, ge=1)
    split_ratios: Tuple[float, float, float] = defaults.SPLIT_RATIOS
    shard_size: int = Field(default=4096, ge=1)

    @field_validator("split_ratios", mode="before")
    @classmethod
    def _parse_ratios(cls, value: Any) -> Any:
        return _float_tuple(value)


class TrainSettings(_Section):
    batch_size: int = Field(default=defaults.BATCH_SIZE, ge=1)
    learning_rate: float = Field(default=defaults.LEARNING_RATE, gt=0)
    l2: float = Field(default=defaults.L2_LAMBDA, ge=0)
    patience: int = Field(default=defaults.PATIENCE, ge=1)
    max_epochs: int = Field(default=defaults.MAX_EPOCHS, ge=1)
    hidden: int = Field(default=defaults.LSTM_HIDDEN, ge=1)
    lstm_keep: float = Field(default=defaults.LSTM_KEEP, gt=0, le=1)
    cnn_filters: int = Field(default=defaults.CNN_FILTERS, ge=1)
    cnn_widths: Tuple[int, ...] = defaults.CNN_WIDTHS
    cnn_pool: int = Field(default=defaults.CNN_POOL, ge=1)
    fc_hidden: int = Field(default=defaults.CNN_FC_HIDDEN, ge=1)
    cnn_keep: float = Field(default=defaults.CNN_KEEP, gt=0, le=1)
    weighted: bool = True

    @field_validator("cnn_widths", mode="before")
    @classmethod
    def _parse_widths(cls, value: Any) -> Any:
        return _int_tuple(value)


class InterpretSettings(_Section):
    target_class: str = "onset"
    k: int = Field(default=defaults.TRAJECTORY_K, ge=1)
    steps: int = Field(default=defaults.HALLUCINATION_STEPS, ge=0)
    step_size: float = Field(default=defaults.HALLUCINATION_STEP_SIZE, gt=0)


class RunConfig(BaseModel):
    """Everything one stage invocation needs.

    ``seed`` has no default: every run names its seed.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int
    intervention: str = InterventionKind.VENT.value
    model: str = ModelKind.LSTM.value
    mode: str = FeatureMode.WORDS.value

    workdir: Path = Path(defaults.WORKDIR)
    cohort: Optional[Path] = None
    topics_dir: Optional[Path] = None
    features_dir: Optional[Path] = None
    shards_dir: Optional[Path] = None
    checkpoints_dir: Optional[Path] = None
    metrics_dir: Optional[Path] = None
    interpret_dir: Optional[Path] = None
    reports_dir: Optional[Path] = None

    synth: SynthSettings = Field(default_factory=SynthSettings)
    topics: TopicSettings = Field(default_factory=TopicSettings)
    window: WindowSettings = Field(default_factory=WindowSettings)
    train: TrainSettings = Field(default_factory=TrainSettings)
    interpret: InterpretSettings = Field(default_factory=InterpretSettings)

    @field_validator("intervention")
    @classmethod
    def _intervention(cls, value: str) -> str:
        return InterventionKind.parse(value).value

    @field_validator("model")
    @classmethod
    def _model(cls, value: str) -> str:
        return ModelKind.parse(value).value

    @field_validator("mode")
    @classmethod
    def _mode(cls, value: str) -> str:
        return FeatureMode.parse(value).value

    # ------------------------------------------------------------------
    # Resolved paths
    # ------------------------------------------------------------------

    def path(self, name: str) -> Path:
        """Resolved directory for ``name`` (an entry of PATH_FIELDS)."""
        value = getattr(self, name)
        if value is not None:
            return Path(value)
        if name == "cohort":
            return self.workdir / "cohort" / "cohort.ndjson"
        return self.workdir / _DEFAULT_DIRS[name]

    @property
    def cohort_path(self) -> Path:
        return self.path("cohort")

    @property
    def manifest_path(self) -> Path:
        return self.cohort_path.with_suffix(".manifest.json")

    @property
    def split_path(self) -> Path:
        return self.cohort_path.parent / "split.json"

    @property
    def kind(self) -> InterventionKind:
        return InterventionKind.parse(self.intervention)

    @property
    def feature_tag(self) -> str:
        """Name shared by features and shards of one (intervention, mode)."""
        return f"{self.intervention}_{self.mode}"

    @property
    def model_tag(self) -> str:
        """Name shared by checkpoints, metrics and interpret outputs of one model."""
        return f"{self.feature_tag}_{self.model}"

    # ------------------------------------------------------------------
    # Hashing
    # ------------------------------------------------------------------

    def hashable(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude=set(PATH_FIELDS))

    @property
    def hash(self) -> str:
        return config_hash(self.hashable())


def parse_config_text(text: str) -> Dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Raises:
        ValidationError: a line without ``=`` or a repeated key
    """
    values: Dict[str, str] = {}
    errors = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            errors.append(f"line {number}: expected 'key = value', got '{raw.strip()}'")
            continue
        if key in values:
            errors.append(f"line {number}: key '{key}' repeated")
            continue
        values[key] = value.strip()
    if errors:
        raise ValidationError("Invalid config file", errors)
    return values


def _nest(flat: Mapping[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        head, dot, tail = key.partition(".")
        if dot:
            nested.setdefault(head, {})[tail] = value
        else:
            nested[key] = value
    return nested


def build_run_config(
    overrides: Optional[Mapping[str, Any]] = None,
    config_file: Optional[Path] = None,
) -> RunConfig:
    """Config file values, overridden by ``overrides`` (dotted keys), validated.

    Raises:
        ValidationError: unreadable file, unknown key or invalid value
    """
    flat: Dict[str, Any] = {}
    if config_file is not None:
        path = Path(config_file)
        if not path.exists():
            raise ValidationError(f"Config file not found: {path}")
        flat.update(parse_config_text(path.read_text(encoding="utf-8")))
    flat.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig.model_validate(_nest(flat))
    except PydanticValidationError as e:
        details = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        ]
        raise ValidationError("Invalid run configuration", details) from e
    except ValueError as e:
        raise ValidationError(f"Invalid run configuration: {e}") from e
