"""Feature schema: the named, ordered columns of a FeatureMatrix.

Layout (both modes)::

    measurement block | topic block | static block | intervention_state | time_of_day

RAW mode has one measurement column per variable; WORDS mode has nine
columns per variable (``<var>_-4`` .. ``<var>_0`` .. ``<var>_+4``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

from engine.config import N_TOPICS, WORD_Z_CLAMP
from engine.errors import ValidationError
from engine.core.variables import MEASUREMENT_VARIABLES, STATIC_ENUMS
from engine.utils.hashing import names_hash

WORD_LEVELS: Tuple[int, ...] = tuple(range(-WORD_Z_CLAMP, WORD_Z_CLAMP + 1))
WORDS_PER_VARIABLE = len(WORD_LEVELS)

GROUP_VITALS_LABS = "vitals_labs"
GROUP_TOPICS = "topics"
GROUP_STATICS = "statics"
GROUP_INTERVENTION = "intervention"
GROUP_TIME = "time"


class FeatureMode(Enum):
    RAW = "raw"
    WORDS = "words"

    @classmethod
    def parse(cls, value: "str | FeatureMode") -> "FeatureMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"Unknown feature mode '{value}'; expected raw or words") from None


@dataclass(frozen=True)
class FeatureColumn:
    """One schema column.

    ``source`` is the measurement variable for vitals/labs columns, the topic
    index (as text) for topic columns, and the column name otherwise.
    """

    name: str
    group: str
    source: str


def word_column_name(variable: str, level: int) -> str:
    return f"{variable}_{level:+d}" if level else f"{variable}_0"


def static_column_names() -> List[str]:
    names = ["age"]
    for field_name, codes in STATIC_ENUMS.items():
        names.extend(f"{field_name}_{code}" for code in codes)
    return names


STATIC_WIDTH = len(static_column_names())


@dataclass(frozen=True)
class FeatureSchema:
    mode: FeatureMode
    columns: Tuple[FeatureColumn, ...]
    n_topics: int
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValidationError("Feature schema column names must be unique")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def width(self) -> int:
        return len(self.columns)

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]

    @property
    def hash(self) -> str:
        return names_hash(self.names, prefix=self.mode.value)

    def index(self, name: str) -> int:
        return self._index[name]

    def group_indices(self, group: str) -> List[int]:
        return [i for i, c in enumerate(self.columns) if c.group == group]

    def variable_columns(self, variable: str) -> List[int]:
        """Columns carrying ``variable`` (1 in RAW mode, 9 in WORDS mode)."""
        return [i for i, c in enumerate(self.columns) if c.group == GROUP_VITALS_LABS and c.source == variable]


def build_schema(mode: "FeatureMode | str", n_topics: int = N_TOPICS) -> FeatureSchema:
    mode = FeatureMode.parse(mode)
    columns: List[FeatureColumn] = []
    for variable in MEASUREMENT_VARIABLES:
        if mode is FeatureMode.RAW:
            columns.append(FeatureColumn(variable, GROUP_VITALS_LABS, variable))
        else:
            columns.extend(
                FeatureColumn(word_column_name(variable, level), GROUP_VITALS_LABS, variable)
                for level in WORD_LEVELS
            )
    columns.extend(FeatureColumn(f"topic_{k}", GROUP_TOPICS, str(k)) for k in range(n_topics))
    columns.extend(FeatureColumn(name, GROUP_STATICS, name) for name in static_column_names())
    columns.append(FeatureColumn("intervention_state", GROUP_INTERVENTION, "intervention_state"))
    columns.append(FeatureColumn("time_of_day", GROUP_TIME, "time_of_day"))
    return FeatureSchema(mode=mode, columns=tuple(columns), n_topics=n_topics)
