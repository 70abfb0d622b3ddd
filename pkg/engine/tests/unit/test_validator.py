"""Unit tests for validator."""

import numpy as np
import pytest

from engine.core.variables import InterventionKind
from engine.validation.rules.stay_rules import validate_stay
from engine.validation.validator import CohortValidator, ValidationStatus
from engine.tests.fixtures.builders import make_stay, make_statics


def test_validate_empty_cohort_fails():
    """Test that an empty cohort fails validation."""
    result = CohortValidator().validate([])
    assert result.status == ValidationStatus.FAIL
    assert "no stays" in result.errors[0]


def test_validate_valid_cohort_passes():
    """Test that well-formed stays pass validation."""
    stays = [make_stay("s1", seed=1), make_stay("s2", seed=2, tracks={InterventionKind.VENT: [0] * 12 + [1] * 12})]
    result = CohortValidator().validate(stays)
    assert result.status == ValidationStatus.PASS
    assert result.errors == []


def test_validate_short_stay_fails():
    """Test that a stay shorter than 12 hours fails."""
    result = CohortValidator().validate([make_stay("short", n_hours=8)])
    assert result.status == ValidationStatus.FAIL
    assert "length < 12" in result.errors[0]


def test_validate_duplicate_ids_fail():
    """Test that repeated stay ids fail."""
    result = CohortValidator().validate([make_stay("s1"), make_stay("s1", seed=3, subject_id="other")])
    assert result.status == ValidationStatus.FAIL
    assert any("more than once" in e for e in result.errors)


def test_validate_repeated_subject_is_warning():
    """Test that several stays of one subject give WEAK_PASS."""
    stays = [make_stay("s1", subject_id="p1"), make_stay("s2", subject_id="p1", stay_seq=2)]
    result = CohortValidator().validate(stays)
    assert result.status == ValidationStatus.WEAK_PASS
    assert "select_cohort keeps the first" in result.warnings[0]


@pytest.mark.parametrize("track, rule", [
    ([0, 1] * 6, "track length mismatch"),
    ([0] * 23 + [2], "not in {0, 1}"),
])
def test_track_rules(track, rule):
    """Test that malformed intervention tracks are reported."""
    stay = make_stay("s1", tracks={InterventionKind.VASO: track})
    messages = [str(v) for v in validate_stay(stay)]
    assert any(rule in m for m in messages)


def test_note_outside_stay():
    """Test that a note past the last hour is reported."""
    stay = make_stay("s1", notes=[(30, {"stable": 2})])
    violations = validate_stay(stay)
    assert violations[0].field == "notes[0].hour"


def test_static_code_outside_enumeration():
    """Test that unknown static codes are reported."""
    stay = make_stay("s1")
    bad = type(stay)(
        stay_id="s1",
        statics=make_statics(icu_unit="NICU"),
        grid=stay.grid,
    )
    messages = [str(v) for v in validate_stay(bad)]
    assert any("icu_unit" in m for m in messages)


def test_intervention_track_is_read_only():
    """Test that stored tracks cannot be modified in place."""
    stay = make_stay("s1", tracks={InterventionKind.VENT: np.zeros(24, dtype=int)})
    with pytest.raises(ValueError):
        stay.track(InterventionKind.VENT)[0] = 1
