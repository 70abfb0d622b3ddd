"""Exception hierarchy shared across the pipeline.

Each error carries enough context for the CLI to print a useful failure
report and pick an exit code:

    ValidationError         -> exit 2
    SchemaMismatchError     -> exit 3
    NumericDivergenceError  -> exit 4
"""

from __future__ import annotations

from typing import Any, Dict, List, Optional


class IcuForgeError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[List[str]] = None):
        super().__init__(message)
        self.details = details or []


class ValidationError(IcuForgeError):
    """Input, configuration or data violates a documented contract."""

    exit_code = 2


class CohortSchemaError(ValidationError):
    """Cohort record or event references an unknown variable or bad field."""

    def __init__(self, message: str, line: int | None = None, details: Optional[List[str]] = None):
        super().__init__(message, details)
        self.line = line


class DegenerateVariableError(ValidationError):
    """Normalization statistics cannot be computed for some variables."""

    def __init__(self, variables: List[str], details: Optional[List[str]] = None):
        super().__init__(
            "Degenerate variables (zero variance or fewer than 2 observations): "
            + ", ".join(variables),
            details,
        )
        self.variables = variables


class MissingClassError(ValidationError):
    """A class required by the label scheme has no examples."""

    def __init__(self, class_name: str):
        super().__init__(f"Class '{class_name}' has no examples")
        self.class_name = class_name


class UndefinedAUCError(ValidationError, ValueError):
    """AUC requested for labels that contain a single value."""


class ShapeError(ValidationError):
    """Array shapes are inconsistent with the declared layout."""


class SchemaMismatchError(IcuForgeError):
    """Artifacts from different stages disagree on the feature schema."""

    exit_code = 3

    def __init__(self, expected: str, found: str, where: str = ""):
        location = f" ({where})" if where else ""
        super().__init__(f"Schema hash mismatch{location}: expected {expected}, found {found}")
        self.expected = expected
        self.found = found


class NumericDivergenceError(IcuForgeError):
    """A numeric procedure produced non-finite values."""

    exit_code = 4

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        details = [f"{key}: {value}" for key, value in (diagnostics or {}).items()]
        super().__init__(message, details)
        self.diagnostics = diagnostics or {}
