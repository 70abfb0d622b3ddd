"""Unit tests for occlusion, trajectory extremes and activation maximization."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from engine.errors import ValidationError
from engine.features.schema import (
    GROUP_STATICS,
    GROUP_VITALS_LABS,
    STATIC_WIDTH,
    FeatureColumn,
    FeatureMode,
    FeatureSchema,
    build_schema,
)
from engine.interpret.activation_max import activation_maximize, write_hallucination_csv
from engine.interpret.occlusion import feature_units, occlude, rank_features, write_occlusion_csv
from engine.interpret.trajectories import extreme_examples, most_differentiated_features, write_trajectories_csv
from engine.models.config import ModelConfig
from engine.models.factory import build_model
from engine.utils.csv_io import read_csv
from engine.tests.fixtures.builders import make_example_set, separable_examples

NAMES = ("a", "b", "c", "d")
TINY_SCHEMA = FeatureSchema(
    mode=FeatureMode.RAW,
    columns=tuple(FeatureColumn(n, GROUP_VITALS_LABS, n) for n in NAMES),
    n_topics=0,
)


def last_hour_model(feature=0, weight=5.0, lookback=3):
    """Logistic model whose class-0 logit is ``weight`` times one feature at the last hour."""
    model = build_model(ModelConfig(kind="lr", n_features=len(NAMES), n_classes=2, lookback=lookback))
    W = np.zeros((2, lookback, len(NAMES)))
    W[0, -1, feature] = weight
    model.params["dense.W"] = W.reshape(2, -1)
    model.params["dense.b"] = np.zeros(2)
    return model


def test_feature_units_counts():
    """Test one unit per column in raw mode and per variable in words mode."""
    raw = build_schema("raw", 5)
    words = build_schema("words", 5)
    assert len(feature_units(raw)) == raw.width
    units = feature_units(words)
    assert len(units) == 29 + 5 + STATIC_WIDTH + 2
    assert units[0].name == "anion_gap"
    assert len(units[0].columns) == 9
    assert sum(1 for u in units if u.group == GROUP_STATICS) == STATIC_WIDTH


def test_occlude_identity_is_zero():
    model = last_hour_model()
    examples = separable_examples(40)
    deltas = occlude(model, examples, TINY_SCHEMA, 0, seed=1, identity=True)
    assert deltas == {"onset": 0.0, "no_onset": 0.0}


def test_occlude_unused_feature_is_zero():
    """Test that noise in a feature with zero weight leaves every AUC unchanged."""
    model = last_hour_model(feature=0)
    examples = separable_examples(40)
    for index in (1, 2, 3):
        assert occlude(model, examples, TINY_SCHEMA, index, seed=3) == {"onset": 0.0, "no_onset": 0.0}
    assert occlude(model, examples, TINY_SCHEMA, 0, seed=3)["onset"] > 0.2


def test_occlude_is_seeded():
    model = last_hour_model()
    examples = separable_examples(40)
    assert occlude(model, examples, TINY_SCHEMA, 0, seed=7) == occlude(model, examples, TINY_SCHEMA, 0, seed=7)
    with pytest.raises(ValidationError):
        occlude(model, examples, TINY_SCHEMA, 4)


def test_rank_features_and_csv():
    """Test that the only used feature ranks first and ties keep schema order."""
    model = last_hour_model(feature=2)
    base = separable_examples(40)
    examples = make_example_set(base.features[:, :, [2, 1, 0, 3]], base.labels)
    report = rank_features(model, examples, TINY_SCHEMA, seed=0)
    assert report.rank_of("c") == 1
    assert [u.name for u, _ in report.ranked()] == ["c", "a", "b", "d"]
    assert report.delta("a") == 0.0
    assert report.top(1)[0][0].name == "c"

    with tempfile.TemporaryDirectory() as tmpdir:
        frame = read_csv(write_occlusion_csv(report, Path(tmpdir) / "occ.csv", "cfg"))
    assert list(frame.columns) == ["feature", "group", "class", "delta_auc", "rank"]
    assert len(frame) == 4 * 2
    assert frame.loc[frame["feature"] == "c", "rank"].unique().tolist() == [1]


def test_rank_features_rejects_unknown_class():
    with pytest.raises(ValidationError):
        rank_features(last_hour_model(), separable_examples(8), TINY_SCHEMA, rank_class="wean")


def test_extreme_examples():
    """Test top/bottom selection by predicted probability of the class."""
    model = last_hour_model()
    examples = separable_examples(80)
    top, bottom = extreme_examples(model, examples, 0, NAMES, k=10)
    signal = examples.features[:, -1, 0]
    assert set(top.indices) == set(np.argsort(-signal)[:10])
    assert set(bottom.indices) == set(np.argsort(signal)[:10])
    assert top.mean.shape == (3, 4)
    assert np.all(top.probabilities[:-1] >= top.probabilities[1:])
    assert most_differentiated_features(top, bottom, 1) == ["a"]

    with tempfile.TemporaryDirectory() as tmpdir:
        frame = read_csv(write_trajectories_csv([top, bottom], Path(tmpdir) / "traj.csv"))
    assert len(frame) == 2 * 3 * 4
    assert set(frame["polarity"]) == {"top", "bottom"}


def test_extreme_examples_clamps_k():
    top, _ = extreme_examples(last_hour_model(), separable_examples(6), 1, NAMES, k=10)
    assert top.k == 6


def test_activation_maximize_linear_oracle():
    """Test that a linear logit drives each input to the bound its weight points at."""
    model = build_model(ModelConfig(kind="lr", n_features=4, n_classes=2, lookback=3))
    rng = np.random.default_rng(4)
    signs = rng.choice([-1.0, 1.0], size=(3, 4))
    W = np.zeros((2, 3, 4))
    W[1] = signs * rng.uniform(0.5, 2.0, size=(3, 4))
    model.params["dense.W"] = W.reshape(2, -1)

    result = activation_maximize(model, 1, steps=40, step_size=0.1, seed=0)
    np.testing.assert_array_equal(result.inputs, (signs > 0).astype(float))
    assert all(b >= a for a, b in zip(result.trace, result.trace[1:]))
    assert result.objective == pytest.approx(W[1][signs > 0].sum())

    with tempfile.TemporaryDirectory() as tmpdir:
        frame = read_csv(write_hallucination_csv(result, NAMES, Path(tmpdir) / "hal.csv"))
    assert len(frame) == 12
    assert frame["value"].isin([0.0, 1.0]).all()


def test_activation_maximize_cnn_trace_is_monotone():
    model = build_model(ModelConfig(kind="cnn", n_features=3, n_classes=2, lookback=6, cnn_filters=3,
                                    cnn_widths=(2, 3), cnn_pool=3, fc_hidden=4, seed=2))
    result = activation_maximize(model, 0, steps=15, step_size=0.05, seed=1)
    assert result.inputs.shape == (6, 3)
    assert np.all((result.inputs >= 0) & (result.inputs <= 1))
    assert all(b >= a for a, b in zip(result.trace, result.trace[1:]))
    assert len(result.trace) == 16


def test_activation_maximize_checks_class():
    with pytest.raises(ValidationError):
        activation_maximize(last_hour_model(), 2, steps=1)
