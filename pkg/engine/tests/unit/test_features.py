"""Unit tests for feature encoding and assembly."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from engine.core.stay import MeasurementGrid
from engine.core.variables import N_MEASUREMENTS, VARIABLE_INDEX, InterventionKind
from engine.errors import DegenerateVariableError, SchemaMismatchError
from engine.features.assemble import assemble, read_matrices, read_matrix, write_matrices, write_matrix
from engine.features.encoding import (
    aggregate_distributions,
    encode_statics,
    encode_words,
    normalize_impute,
    round_half_away,
    time_of_day,
)
from engine.features.schema import (
    GROUP_STATICS,
    GROUP_TOPICS,
    STATIC_WIDTH,
    FeatureMode,
    build_schema,
)
from engine.features.stats import compute_stats, load_stats, save_stats
from engine.topics.lda import TopicModel
from engine.topics.vocabulary import Vocabulary
from engine.tests.fixtures.builders import make_grid, make_stay, make_statics, unit_stats


def single_variable_grid(values, variable="heart_rate"):
    """Grid where only ``variable`` is observed (None marks absent hours)."""
    rows = [[None] * N_MEASUREMENTS for _ in values]
    for h, v in enumerate(values):
        rows[h][VARIABLE_INDEX[variable]] = v
    return MeasurementGrid.from_rows(rows)


def test_schema_widths():
    """Test column counts of both modes."""
    assert STATIC_WIDTH == 15
    assert build_schema("raw", 50).width == 29 + 50 + 15 + 2
    assert build_schema("words", 50).width == 29 * 9 + 50 + 15 + 2
    words = build_schema(FeatureMode.WORDS, 3)
    assert words.names[:9] == [f"anion_gap_{lvl}" for lvl in ("-4", "-3", "-2", "-1", "0", "+1", "+2", "+3", "+4")]
    assert words.names[-2:] == ["intervention_state", "time_of_day"]
    assert len(words.variable_columns("ph")) == 9
    assert build_schema("raw", 3).hash != words.hash


def test_round_half_away():
    z = np.array([0.5, -0.5, 1.49, -2.5, 0.0])
    assert round_half_away(z).tolist() == [1.0, -1.0, 1.0, -3.0, 0.0]


def test_encode_words_levels():
    """Test rounding and clamping of z-scores into words."""
    grid = single_variable_grid([0.5, -0.5, 2.49, -4.6, 9.0, None])
    block = encode_words(grid, unit_stats())
    base = VARIABLE_INDEX["heart_rate"] * 9
    levels = [int(np.argmax(block[h, base:base + 9])) - 4 for h in range(5)]
    assert levels == [1, -1, 2, -4, 4]
    assert block[5].sum() == 0.0


def test_encode_words_one_hot_invariant():
    """Test exactly one word per observed cell and none per absent cell over ~1e5 cells."""
    grid = make_grid(3500, seed=11, missing=0.4)
    block = encode_words(grid, unit_stats()).reshape(3500, N_MEASUREMENTS, 9)
    per_cell = block.sum(axis=2)
    np.testing.assert_array_equal(per_cell, grid.observed.astype(float))
    assert set(np.unique(block)) <= {0.0, 1.0}


def test_normalize_impute():
    """Test forward fill, mean imputation of leading gaps and min-max scaling."""
    grid = single_variable_grid([None, None, 1.5, None, -6.0, None])
    block = normalize_impute(grid, unit_stats())
    column = block[:, VARIABLE_INDEX["heart_rate"]]
    np.testing.assert_allclose(column, [0.5, 0.5, 0.75, 0.75, 0.0, 0.0])
    assert np.all((block >= 0) & (block <= 1))
    np.testing.assert_allclose(block[:, VARIABLE_INDEX["ph"]], 0.5)


def test_aggregate_distributions_running_mean():
    """Test that each hour averages every note up to and including it."""
    dists = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 0.0])]
    block = aggregate_distributions([2, 2, 5], dists, n_hours=7, n_topics=2)
    np.testing.assert_array_equal(block[:2], 0.0)
    np.testing.assert_allclose(block[2:5], [[0.5, 0.5]] * 3)
    np.testing.assert_allclose(block[5:], [[2 / 3, 1 / 3]] * 2)


def test_aggregate_distributions_without_notes():
    assert aggregate_distributions([], [], 4, 3).shape == (4, 3)


def test_encode_statics():
    vector = encode_statics(make_statics(age=52.5, gender="M", icu_unit="CCU"), unit_stats(15.0, 90.0))
    assert vector.shape == (15,)
    assert vector[0] == pytest.approx(0.5)
    assert vector[1:].sum() == 4.0
    assert vector[2] == 1.0


def test_time_of_day_wraps():
    np.testing.assert_allclose(time_of_day(22, 4), np.array([22, 23, 0, 1]) / 23.0)


def test_compute_stats():
    """Test moments over observed cells only."""
    stays = [make_stay("a", seed=1), make_stay("b", seed=2)]
    stats = compute_stats(stays)
    j = VARIABLE_INDEX["glucose"]
    observed = np.concatenate([s.grid.values[s.grid.observed[:, j], j] for s in stays])
    assert stats.mean[j] == pytest.approx(observed.mean())
    assert stats.std[j] == pytest.approx(observed.std())
    assert stats.age_min == stats.age_max == 60.0


def test_compute_stats_degenerate_variable():
    """Test that a variable observed once is reported by name."""
    grid = single_variable_grid([3.0] + [None] * 13)
    stay = make_stay("a")
    lonely = type(stay)(stay_id="a", statics=stay.statics, grid=grid)
    with pytest.raises(DegenerateVariableError) as info:
        compute_stats([lonely])
    assert "heart_rate" in info.value.variables


def test_stats_round_trip():
    stats = compute_stats([make_stay("a", seed=5)])
    with tempfile.TemporaryDirectory() as tmpdir:
        restored = load_stats(save_stats(stats, Path(tmpdir) / "stats.json"))
    np.testing.assert_array_equal(restored.mean, stats.mean)
    np.testing.assert_array_equal(restored.maximum, stats.maximum)


def uniform_topics(k=3):
    vocab = Vocabulary(terms=("shock", "stable"))
    return TopicModel(phi=np.full((k, 2), 0.5), alpha=0.5, beta=0.01, vocabulary=vocab)


@pytest.mark.parametrize("mode", ["raw", "words"])
def test_assemble_layout(mode):
    """Test block placement of one assembled stay."""
    track = [0] * 10 + [1] * 6
    stay = make_stay("s1", n_hours=16, notes=[(4, {"shock": 2})], tracks={InterventionKind.VENT: track}, admit_hour=23)
    matrix = assemble(stay, mode, unit_stats(), uniform_topics(), "vent", fold_in_iterations=4)
    schema = matrix.schema

    assert matrix.values.shape == (16, schema.width)
    np.testing.assert_array_equal(matrix.column("intervention_state"), track)
    assert matrix.column("time_of_day")[1] == 0.0
    topics = matrix.values[:, schema.group_indices(GROUP_TOPICS)]
    np.testing.assert_array_equal(topics[:4], 0.0)
    np.testing.assert_allclose(topics[4:].sum(axis=1), 1.0)
    statics = matrix.values[:, schema.group_indices(GROUP_STATICS)]
    assert np.all(statics == statics[0])


def test_assemble_schema_mismatch():
    stay = make_stay("s1", n_hours=16)
    with pytest.raises(SchemaMismatchError):
        assemble(stay, "words", unit_stats(), uniform_topics(3), "vent", schema=build_schema("words", 5))


def test_matrix_bundle_round_trip():
    """Test the binary bundle and its schema check."""
    matrices = {
        sid: assemble(make_stay(sid, n_hours=14, seed=i), "raw", unit_stats(), uniform_topics(), "vaso")
        for i, sid in enumerate(["s1", "s2"])
    }
    with tempfile.TemporaryDirectory() as tmpdir:
        path = write_matrices(matrices, Path(tmpdir) / "vaso_raw.icuf", config_hash="h1")
        restored = read_matrices(path, expected_hash=matrices["s1"].schema.hash)
        with pytest.raises(SchemaMismatchError):
            read_matrices(path, expected_hash=build_schema("words", 3).hash)
    assert list(restored) == ["s1", "s2"]
    np.testing.assert_array_equal(restored["s2"].values, matrices["s2"].values)


def test_matrix_csv_round_trip():
    matrix = assemble(make_stay("s9", n_hours=13), "words", unit_stats(), uniform_topics(), "colbol")
    with tempfile.TemporaryDirectory() as tmpdir:
        path = write_matrix(matrix, Path(tmpdir) / "s9.csv", config_hash="h2")
        assert path.read_text(encoding="utf-8").startswith("# config_hash=h2\n")
        restored = read_matrix(path)
    assert restored.stay_id == "s9"
    np.testing.assert_array_equal(restored.values, matrix.values)
