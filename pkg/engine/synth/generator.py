"""Synthetic ICU cohort generator.

Every patient is drawn from its own generator seeded by (seed, patient
index). All random draws happen before any signal is planted, so a patient
can be re-drawn without its planted shifts; :func:`audit_drivers` relies on
that to check the shifts against the manifest exactly.

Measurements: baseline mean + per-patient offset + circadian sinusoid in the
wall-clock hour + AR(1) noise, all in units of the variable's std. Each
observed cell becomes one timestamped event (minute ``60 * hour + 0..29``)
and goes through ``ingest_events``.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from engine.errors import ValidationError
from engine.core.stay import PatientStay, StaticProfile, ingest_events
from engine.core.variables import (
    ADMISSION_TYPES,
    ETHNICITIES,
    GENDERS,
    ICU_UNITS,
    MEASUREMENT_VARIABLES,
    VARIABLE_INDEX,
    InterventionKind,
)
from engine.synth.config import MEASUREMENT_DRIVERS, NOTE_DRIVERS, NOTE_THEMES, SynthConfig

logger = logging.getLogger(__name__)

MIN_EPISODE_HOURS = 3
MAX_EPISODE_HOURS = 30
MAX_BOLUSES = 2
_THEME_NAMES = tuple(NOTE_THEMES)


@dataclass
class SignalManifest:
    """What the generator planted.

    Attributes:
        drivers: kind -> driver names (measurement variables, or ``notes:<theme>``)
        noise_only: Measurement variables carrying no outcome signal
        onsets: stay id -> kind -> onset hours
        directions: stay id -> kind -> shift multiplier per onset (+1/-1)
        stay_index: stay id -> patient index (for re-drawing)
        config: The SynthConfig used, as a plain dict
    """

    lead_hours: int
    effect_size: float
    driver_shape: str
    drivers: Dict[str, List[str]]
    noise_only: List[str]
    onsets: Dict[str, Dict[str, List[int]]] = field(default_factory=dict)
    directions: Dict[str, Dict[str, List[int]]] = field(default_factory=dict)
    stay_index: Dict[str, int] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def synth_config(self) -> SynthConfig:
        data = dict(self.config)
        data["physiology"] = {k: tuple(v) for k, v in data["physiology"].items()}
        return SynthConfig(**data)


@dataclass
class _PatientDraw:
    index: int
    n_hours: int
    admit_hour: int
    statics: StaticProfile
    severity: float
    base: np.ndarray
    observed: np.ndarray
    minute_offsets: np.ndarray
    tracks: Dict[InterventionKind, np.ndarray]
    directions: Dict[InterventionKind, List[int]]
    notes: List[Tuple[int, Dict[str, int]]]


def stay_id_for(index: int) -> str:
    return f"s{index:05d}"


def onset_hours(track: np.ndarray) -> List[int]:
    """Hours where the track switches on (hour 0 counts if it starts on)."""
    track = np.asarray(track, dtype=np.int64)
    previous = np.concatenate([[0], track[:-1]])
    return [int(h) for h in np.flatnonzero((previous == 0) & (track == 1))]


def _note(rng: np.random.Generator, config: SynthConfig, severity: float, theme: str = "") -> Dict[str, int]:
    weights = np.array([1.0, 1.5 * severity, 0.0, 0.0])
    if theme:
        weights[_THEME_NAMES.index(theme)] += config.note_effect
    n_tokens = config.tokens_per_note + int(rng.poisson(5))
    themes = rng.choice(len(_THEME_NAMES), size=n_tokens, p=weights / weights.sum())
    picks = rng.integers(0, 12, size=n_tokens)
    words = Counter(NOTE_THEMES[_THEME_NAMES[t]][w] for t, w in zip(themes, picks))
    return dict(sorted(words.items()))


def _draw_patient(config: SynthConfig, index: int) -> _PatientDraw:
    rng = np.random.default_rng([config.seed, index])
    n = int(rng.integers(config.min_hours, config.max_hours + 1))
    admit_hour = int(rng.integers(0, 24))
    statics = StaticProfile(
        gender=GENDERS[int(rng.integers(len(GENDERS)))],
        age=round(float(rng.uniform(18.0, 90.0)), 1),
        ethnicity=ETHNICITIES[int(rng.choice(len(ETHNICITIES), p=[0.7, 0.1, 0.05, 0.15]))],
        icu_unit=ICU_UNITS[int(rng.integers(len(ICU_UNITS)))],
        admission_type=ADMISSION_TYPES[int(rng.choice(len(ADMISSION_TYPES), p=[0.15, 0.05, 0.8]))],
    )
    severity = float(rng.random())

    clock = 2.0 * math.pi * ((admit_hour + np.arange(n)) % 24) / 24.0
    phi = config.ar_coefficient
    base = np.zeros((n, len(MEASUREMENT_VARIABLES)))
    missing = np.zeros(len(MEASUREMENT_VARIABLES))
    for j, name in enumerate(MEASUREMENT_VARIABLES):
        mean, std, amplitude, missing[j] = config.physiology[name]
        offset = rng.normal(0.0, 0.3)
        shocks = rng.standard_normal(n)
        noise = np.empty(n)
        noise[0] = shocks[0]
        for t in range(1, n):
            noise[t] = phi * noise[t - 1] + math.sqrt(1.0 - phi * phi) * shocks[t]
        circadian = amplitude * np.sin(clock + 2.0 * math.pi * j / len(MEASUREMENT_VARIABLES))
        base[:, j] = mean + std * (offset + circadian + noise)
    observed = rng.random(base.shape) >= missing
    minute_offsets = rng.integers(0, 30, size=base.shape)

    tracks: Dict[InterventionKind, np.ndarray] = {}
    directions: Dict[InterventionKind, List[int]] = {}
    lo = config.earliest_onset
    for kind in InterventionKind:
        happens = rng.random() < min(1.0, 2.0 * config.intervention_rates[kind.value] * severity)
        track = np.zeros(n, dtype=np.int64)
        if kind.has_duration:
            start = int(rng.integers(lo, n)) if lo < n else 0
            length = int(rng.integers(MIN_EPISODE_HOURS, MAX_EPISODE_HOURS + 1))
            sign = int(rng.choice([-1, 1]))
            if happens and lo < n:
                track[start:start + length] = 1
        else:
            count = int(rng.integers(1, MAX_BOLUSES + 1))
            hours = rng.integers(lo, n, size=count) if lo < n else np.zeros(0, dtype=np.int64)
            sign = int(rng.choice([-1, 1]))
            if happens:
                track[hours] = 1
        if track.any():
            tracks[kind] = track
            directions[kind] = [sign if config.driver_shape == "threshold" else 1] * len(onset_hours(track))

    notes: List[Tuple[int, Dict[str, int]]] = []
    for hour in range(n):
        if rng.random() < config.note_rate:
            notes.append((hour, _note(rng, config, severity)))
    for kind, theme in NOTE_DRIVERS.items():
        if kind in tracks:
            for h in onset_hours(tracks[kind]):
                hour = h - 1 - int(rng.integers(0, config.lead_hours))
                notes.append((hour, _note(rng, config, severity, theme)))
    notes.sort(key=lambda item: item[0])

    return _PatientDraw(index, n, admit_hour, statics, severity, base, observed,
                        minute_offsets, tracks, directions, notes)


def _planted_shift(draw: _PatientDraw, config: SynthConfig) -> np.ndarray:
    shift = np.zeros_like(draw.base)
    for kind, drivers in MEASUREMENT_DRIVERS.items():
        if kind not in draw.tracks:
            continue
        for h, multiplier in zip(onset_hours(draw.tracks[kind]), draw.directions[kind]):
            for variable, sign in drivers:
                j = VARIABLE_INDEX[variable]
                std = config.physiology[variable][1]
                shift[h - config.lead_hours:h, j] += sign * multiplier * config.effect_size * std
    return shift


def _render(draw: _PatientDraw, config: SynthConfig, plant: bool = True) -> PatientStay:
    values = draw.base + (_planted_shift(draw, config) if plant else 0.0)
    hours, cols = np.nonzero(draw.observed)
    events = [
        (float(60 * h + draw.minute_offsets[h, j]), MEASUREMENT_VARIABLES[j], float(values[h, j]))
        for h, j in zip(hours, cols)
    ]
    grid = ingest_events(events, n_hours=draw.n_hours)
    return PatientStay(
        stay_id=stay_id_for(draw.index),
        subject_id=f"p{draw.index:05d}",
        stay_seq=1,
        admit_hour=draw.admit_hour,
        statics=draw.statics,
        grid=grid,
        notes=tuple(draw.notes),
        interventions=draw.tracks,
    )


def _driver_names() -> Dict[str, List[str]]:
    drivers = {kind.value: [v for v, _ in specs] for kind, specs in MEASUREMENT_DRIVERS.items()}
    drivers.update({kind.value: [f"notes:{theme}"] for kind, theme in NOTE_DRIVERS.items()})
    return {kind.value: drivers[kind.value] for kind in InterventionKind}


def generate(config: SynthConfig) -> Tuple[List[PatientStay], SignalManifest]:
    """Generate a cohort and the manifest of its planted signal.

    Raises:
        ValidationError: invalid configuration
    """
    config.check()
    driver_variables = {v for specs in MEASUREMENT_DRIVERS.values() for v, _ in specs}
    manifest = SignalManifest(
        lead_hours=config.lead_hours,
        effect_size=config.effect_size,
        driver_shape=config.driver_shape,
        drivers=_driver_names(),
        noise_only=[v for v in MEASUREMENT_VARIABLES if v not in driver_variables],
        config=asdict(config),
    )
    stays = []
    for index in range(config.n_patients):
        draw = _draw_patient(config, index)
        stay = _render(draw, config)
        stays.append(stay)
        manifest.stay_index[stay.stay_id] = index
        manifest.onsets[stay.stay_id] = {k.value: onset_hours(t) for k, t in draw.tracks.items()}
        manifest.directions[stay.stay_id] = {k.value: list(d) for k, d in draw.directions.items()}
    logger.info(
        "Generated %d synthetic stays (seed %d, %s drivers, lead %dh)",
        len(stays), config.seed, config.driver_shape, config.lead_hours,
    )
    return stays, manifest


def audit_drivers(stays: Sequence[PatientStay], manifest: SignalManifest) -> List[str]:
    """Re-read generated data against the manifest.

    Checks that every onset in the tracks is manifested with hour >= lead
    time, that measurement drivers differ from the re-drawn unplanted values
    by exactly the manifested shift (inside [h - L, h) only), and that a
    driver-theme note precedes every note-driven onset within the lead window.

    Returns:
        Violation messages; empty when the cohort matches its manifest
    """
    config = manifest.synth_config()
    lead = manifest.lead_hours
    violations: List[str] = []
    for stay in stays:
        if stay.stay_id not in manifest.stay_index:
            violations.append(f"{stay.stay_id}: not in manifest")
            continue
        declared = manifest.onsets.get(stay.stay_id, {})
        for kind in InterventionKind:
            found = onset_hours(stay.track(kind))
            if found != declared.get(kind.value, []):
                violations.append(f"{stay.stay_id}/{kind.value}: onsets {found} != manifest {declared.get(kind.value, [])}")
            for h in found:
                if h < lead:
                    violations.append(f"{stay.stay_id}/{kind.value}: onset at hour {h} < lead time {lead}")

        draw = _draw_patient(config, manifest.stay_index[stay.stay_id])
        draw.directions = {InterventionKind.parse(k): list(v) for k, v in manifest.directions.get(stay.stay_id, {}).items()}
        unplanted = _render(draw, config, plant=False).grid
        expected = _planted_shift(draw, config)
        observed = stay.grid.observed
        actual = np.where(observed, stay.grid.values - unplanted.values, 0.0)
        expected = np.where(observed, expected, 0.0)
        scale = np.abs(stay.grid.values).max(initial=1.0)
        mismatch = ~np.isclose(actual, expected, rtol=0.0, atol=1e-9 * scale)
        if mismatch.any():
            bad = sorted({MEASUREMENT_VARIABLES[j] for j in np.nonzero(mismatch)[1]})
            violations.append(f"{stay.stay_id}: measurement shifts differ from manifest in {bad}")

        for kind, theme in NOTE_DRIVERS.items():
            words = set(NOTE_THEMES[theme])
            for h in declared.get(kind.value, []):
                if not any(h - lead <= hour < h and words & set(counts) for hour, counts in stay.notes):
                    violations.append(f"{stay.stay_id}/{kind.value}: no '{theme}' note in [{h - lead}, {h})")
    return violations


def write_manifest(manifest: SignalManifest, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(path: Path) -> SignalManifest:
    try:
        return SignalManifest(**json.loads(Path(path).read_text(encoding="utf-8")))
    except (TypeError, KeyError, json.JSONDecodeError) as e:
        raise ValidationError(f"Invalid signal manifest {path}: {e}") from e
