"""Unit tests for labeling, sliding windows, splits and shards."""

import itertools
import tempfile
from pathlib import Path

import numpy as np
import pytest

from engine.core.variables import InterventionKind
from engine.errors import SchemaMismatchError, ValidationError
from engine.features.assemble import FeatureMatrix
from engine.features.schema import build_schema
from engine.synth.config import SynthConfig
from engine.synth.generator import generate
from engine.utils.csv_io import read_config_hash, read_csv
from engine.windowing.labels import (
    NO_ONSET,
    ONSET,
    STAY_OFF,
    STAY_ON,
    WEAN,
    LabelScheme,
    class_counts,
    class_proportions,
    format_proportions,
    label_window,
)
from engine.windowing.shards import MANIFEST_FILE, read_shards, write_shards
from engine.windowing.split import CohortSplit, split_cohort, stratification_deviation
from engine.windowing.windows import WindowConfig, slide, stack_examples, windows_for_cohort
from engine.tests.fixtures.builders import make_example_set, make_stay

VENT = LabelScheme.for_kind("vent")
COLBOL = LabelScheme.for_kind("colbol")


def expected_duration_label(entry, window):
    text = "".join(str(v) for v in (entry, *window))
    if "01" in text:
        return ONSET
    if "10" in text:
        return WEAN
    return STAY_ON if window[0] == 1 else STAY_OFF


@pytest.mark.parametrize("entry", [0, 1])
def test_duration_labels_all_patterns(entry):
    """Test every 4-hour window against a string-search oracle."""
    for window in itertools.product((0, 1), repeat=4):
        assert label_window(window, VENT, entry) == expected_duration_label(entry, window), window


def test_bolus_labels_all_patterns():
    for window in itertools.product((0, 1), repeat=4):
        expected = ONSET if any(window) else NO_ONSET
        assert label_window(window, COLBOL) == expected


def test_label_scheme_classes():
    assert VENT.classes == ("onset", "wean", "stay_on", "stay_off")
    assert COLBOL.n_classes == 2


def test_label_window_rejects_bad_input():
    with pytest.raises(ValidationError):
        label_window([], VENT, 0)
    with pytest.raises(ValidationError):
        label_window([0, 2, 0, 0], VENT, 0)


def test_class_proportions():
    proportions = class_proportions([0, 0, 1, 3], VENT)
    assert proportions == {"onset": 0.5, "wean": 0.25, "stay_on": 0.0, "stay_off": 0.25}
    assert class_counts([1, 1], COLBOL) == {"onset": 0, "no_onset": 2}
    with pytest.raises(ValidationError):
        class_proportions([], VENT)


def test_format_proportions():
    text = format_proportions({
        InterventionKind.VENT: {"onset": 0.1, "wean": 0.1, "stay_on": 0.3, "stay_off": 0.5},
        InterventionKind.COLBOL: {"onset": 0.04, "no_onset": 0.96},
    })
    assert "Ventilation" in text
    assert "0.960" in text
    assert "-" in text


def matrix_for(n_hours, stay_id="s1"):
    schema = build_schema("raw", 0)
    values = np.zeros((n_hours, schema.width))
    values[:, 0] = np.arange(n_hours)
    return FeatureMatrix(schema=schema, values=values, stay_id=stay_id)


@pytest.mark.parametrize("n_hours, stride, expected", [(24, 1, 9), (16, 1, 1), (15, 1, 0), (24, 2, 5)])
def test_slide_counts(n_hours, stride, expected):
    """Test windows per stay for lookback 6, gap 6, horizon 4."""
    config = WindowConfig(lookback=6, gap=6, horizon=4, stride=stride)
    examples = slide(matrix_for(n_hours), np.zeros(n_hours, dtype=int), config, "vent")
    assert len(examples) == expected == config.n_windows(n_hours)


def test_slide_features_and_labels():
    """Test lookback slicing and gap-time labeling of each window."""
    track = np.zeros(24, dtype=int)
    track[14:20] = 1
    config = WindowConfig(lookback=6, gap=6, horizon=4)
    examples = slide(matrix_for(24), track, config, "vent")

    assert examples[3].features[:, 0].tolist() == [3, 4, 5, 6, 7, 8]
    labels = [e.label for e in examples]
    # prediction windows start at hours 12..20
    assert labels == [ONSET, ONSET, ONSET, STAY_ON, STAY_ON, WEAN, WEAN, WEAN, WEAN]


def test_window_config_validation():
    with pytest.raises(ValidationError):
        WindowConfig(lookback=0)


def test_windows_for_cohort_needs_every_matrix():
    stays = [make_stay("s1"), make_stay("s2")]
    with pytest.raises(ValidationError):
        windows_for_cohort({"s1": matrix_for(24)}, stays, "vent")


def test_split_sizes_and_coverage():
    """Test 70/10/20 sizes, disjoint parts and determinism."""
    stays = []
    for i in range(100):
        tracks = {InterventionKind.VENT: [0] * 12 + [1] * 12} if i % 3 == 0 else {}
        stays.append(make_stay(f"s{i:03d}", seed=i, tracks=tracks))
    split = split_cohort(stays, (0.7, 0.1, 0.2), seed=9)

    sizes = split.sizes()
    assert abs(sizes["train"] - 70) <= 1
    assert abs(sizes["val"] - 10) <= 1
    assert abs(sizes["test"] - 20) <= 1
    ids = [sid for part in split.parts().values() for sid in part]
    assert sorted(ids) == sorted(s.stay_id for s in stays)
    assert stratification_deviation(split, stays) <= 10.0
    assert split_cohort(list(reversed(stays)), (0.7, 0.1, 0.2), seed=9) == split


def test_split_stratification_on_synthetic_cohort():
    """Test per-intervention ever-received rates agree within 2 pp on 1,000 stays."""
    stays, _ = generate(SynthConfig(n_patients=1000, min_hours=24, max_hours=30, seed=4))
    split = split_cohort(stays, (0.7, 0.1, 0.2), seed=4)
    assert split.sizes() == {"train": 700, "val": 100, "test": 200}
    assert stratification_deviation(split, stays) <= 2.0
    assert split_cohort(stays, (0.7, 0.1, 0.2), seed=4) == split


def test_split_round_trip_and_validation():
    stays = [make_stay(f"s{i}") for i in range(12)]
    split = split_cohort(stays, seed=1)
    with tempfile.TemporaryDirectory() as tmpdir:
        assert CohortSplit.load(split.save(Path(tmpdir) / "split.json")) == split
    with pytest.raises(ValidationError):
        split_cohort(stays, (0.5, 0.5, 0.5))


def test_shards_round_trip():
    """Test sharding, manifest rows and re-reading in order."""
    rng = np.random.default_rng(0)
    examples = make_example_set(rng.random((10, 3, 2)), [0, 1] * 5)
    with tempfile.TemporaryDirectory() as tmpdir:
        directory = Path(tmpdir)
        paths = write_shards(examples, directory, shard_size=4, config_hash="abc", split_name="train")
        restored = read_shards(directory, "train", expected_hash="test-schema")
        manifest = read_csv(directory / MANIFEST_FILE)
        assert read_config_hash(directory / MANIFEST_FILE) == "abc"
        with pytest.raises(SchemaMismatchError):
            read_shards(directory, "train", expected_hash="other")
        with pytest.raises(ValidationError):
            read_shards(directory, "test")

    assert [p.name for p in paths] == ["train_0000.icuf", "train_0001.icuf", "train_0002.icuf"]
    np.testing.assert_array_equal(restored.features, examples.features)
    np.testing.assert_array_equal(restored.labels, examples.labels)
    assert restored.stay_ids == examples.stay_ids
    assert manifest["n_examples"].tolist() == [4, 4, 2]
    assert manifest["n_onset"].sum() == 5


def test_stack_examples_empty():
    stacked = stack_examples([], "h", "vent", n_features=7, lookback=6)
    assert stacked.features.shape == (0, 6, 7)
    assert len(stacked) == 0
