"""Unit tests for AUC metrics, class weights and the training loop."""

import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from engine.errors import MissingClassError, NumericDivergenceError, UndefinedAUCError, ValidationError
from engine.models.config import ModelConfig
from engine.models.factory import build_model
from engine.training.metrics import (
    EvalReport,
    evaluate,
    format_auc_table,
    read_metrics_csv,
    roc_auc,
    write_metrics_csv,
)
from engine.training.trainer import TrainConfig, class_weights, train, write_history_csv
from engine.utils.csv_io import read_config_hash
from engine.windowing.labels import LabelScheme
from engine.tests.fixtures.builders import make_example_set, separable_examples


def pairwise_auc(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1][:, None]
    neg = scores[labels == 0][None, :]
    wins = (pos > neg).sum() + 0.5 * (pos == neg).sum()
    return wins / (pos.size * neg.size)


def random_tied_instance(rng):
    n = int(rng.integers(2, 101))
    scores = rng.integers(0, int(rng.integers(2, 12)), size=n) / 10.0
    labels = rng.integers(0, 2, size=n)
    labels[:2] = [0, 1]
    return scores, labels


def test_roc_auc_matches_pairwise_count():
    """Test the rank formula against the O(n^2) definition on 1,000 tied instances."""
    rng = np.random.default_rng(0)
    for _ in range(1000):
        scores, labels = random_tied_instance(rng)
        assert roc_auc(scores, labels) == pytest.approx(pairwise_auc(scores, labels), abs=1e-12)


def test_roc_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(1)
    for _ in range(100):
        scores, labels = random_tied_instance(rng)
        expected = roc_auc(scores, labels)
        assert roc_auc(np.exp(3.0 * scores) - 7.0, labels) == pytest.approx(expected, abs=1e-12)
        assert roc_auc(scores ** 3, labels) == pytest.approx(expected, abs=1e-12)


def test_roc_auc_flipped_labels():
    """Test that swapping positives and negatives gives 1 - AUC."""
    rng = np.random.default_rng(2)
    for _ in range(100):
        scores, labels = random_tied_instance(rng)
        assert roc_auc(scores, 1 - labels) == pytest.approx(1.0 - roc_auc(scores, labels), abs=1e-12)


def test_roc_auc_edge_values():
    assert roc_auc([0.1, 0.9], [0, 1]) == 1.0
    assert roc_auc([0.9, 0.1], [0, 1]) == 0.0
    assert roc_auc([0.5, 0.5, 0.5], [0, 1, 1]) == 0.5
    with pytest.raises(UndefinedAUCError):
        roc_auc([0.2, 0.3], [1, 1])


def test_macro_auc_arithmetic():
    """Test the macro average and its two-decimal display."""
    report = EvalReport.from_aucs([0.75, 0.90, 0.97, 0.97], ("onset", "wean", "stay_on", "stay_off"), "vent", "lstm")
    assert report.macro == pytest.approx(0.8975)
    assert report.formatted() == "0.90"
    assert report.formatted("wean") == "0.90"


def test_macro_skips_undefined_classes():
    report = EvalReport("vent", "lr", ("onset", "wean"), {"onset": 0.8, "wean": None}, missing_classes=["wean"])
    assert report.macro == pytest.approx(0.8)
    assert report.is_partial
    assert report.formatted("wean") == "-"
    restored = EvalReport.from_json(report.to_json())
    assert restored == report


def test_class_weights():
    """Test inverse-frequency weights rescaled to mean 1."""
    scheme = LabelScheme.for_kind("colbol")
    weights = class_weights(np.array([0] * 90 + [1] * 10), scheme)
    np.testing.assert_allclose(weights, [0.2, 1.8])
    with pytest.raises(MissingClassError):
        class_weights(np.zeros(5, dtype=int), scheme)


def test_macro_insensitive_to_class_duplication():
    """Test that duplicating one class leaves every one-vs-rest AUC unchanged."""
    model = build_model(ModelConfig(kind="lr", n_features=4, n_classes=2, lookback=3, seed=2))
    examples = separable_examples(40)
    doubled_index = np.concatenate([np.arange(40), np.flatnonzero(examples.labels == 0)])
    base = evaluate(model, examples)
    doubled = evaluate(model, examples.subset(doubled_index))
    assert doubled.macro == pytest.approx(base.macro)


def test_evaluate_reports_missing_class():
    model = build_model(ModelConfig(kind="lr", n_features=4, n_classes=2, lookback=3))
    examples = make_example_set(np.random.default_rng(0).random((6, 3, 4)), [1] * 6)
    report = evaluate(model, examples)
    assert report.missing_classes == ["onset", "no_onset"]
    assert report.macro is None
    assert report.class_counts == {"onset": 0, "no_onset": 6}


def test_metrics_csv_and_auc_table():
    """Test the metrics CSV layout and the intervention-by-task grid."""
    vent = EvalReport.from_aucs([0.75, 0.90, 0.97, 0.97], ("onset", "wean", "stay_on", "stay_off"), "vent", "lstm")
    colbol = EvalReport.from_aucs([0.61, 0.61], ("onset", "no_onset"), "colbol", "lstm")
    with tempfile.TemporaryDirectory() as tmpdir:
        path = write_metrics_csv([vent, colbol], Path(tmpdir) / "m.csv", config_hash="cfg")
        assert read_config_hash(path) == "cfg"
        metrics = read_metrics_csv(path)
    assert list(metrics.columns) == ["intervention", "model", "class", "auc"]
    assert len(metrics) == 5 + 3

    table = format_auc_table(metrics)
    assert list(table.columns) == ["task", "model", "Ventilation", "Colloid Bolus"]
    macro = table[table["task"] == "Macro"].iloc[0]
    assert macro["Ventilation"] == "0.90"
    assert macro["Colloid Bolus"] == "0.61"
    wean = table[table["task"] == "Wean"].iloc[0]
    assert wean["Colloid Bolus"] == "-"
    assert format_auc_table(pd.DataFrame()).empty


def fit(seed, max_epochs=6, patience=3):
    model = build_model(ModelConfig(kind="lr", n_features=4, n_classes=2, lookback=3, seed=seed))
    history = train(
        model,
        separable_examples(80, seed=1),
        separable_examples(40, seed=2),
        TrainConfig(batch_size=16, learning_rate=0.05, max_epochs=max_epochs, patience=patience, seed=seed),
    )
    return model, history


def test_train_learns_separable_signal():
    model, history = fit(0)
    assert history.best_val_macro_auc is not None
    assert history.best_val_macro_auc > 0.9
    assert 1 <= history.best_epoch <= len(history.epochs)


def test_train_is_deterministic():
    """Test that the same seed reproduces parameters and losses exactly."""
    first, h1 = fit(3)
    second, h2 = fit(3)
    assert [r.loss for r in h1.epochs] == [r.loss for r in h2.epochs]
    for name in first.params:
        np.testing.assert_array_equal(first.params[name], second.params[name])


def test_train_early_stop_restores_best():
    """Test patience-based stopping when validation AUC never improves on epoch 1."""
    model = build_model(ModelConfig(kind="lr", n_features=4, n_classes=2, lookback=3, seed=0))
    val = separable_examples(40, seed=2)
    flat = make_example_set(np.zeros_like(val.features), val.labels)
    history = train(model, separable_examples(80), flat, TrainConfig(batch_size=16, max_epochs=20, patience=2))
    assert history.stopped_early
    assert history.best_epoch == 1
    assert len(history.epochs) == 3


def test_train_divergence_raises():
    model = build_model(ModelConfig(kind="lr", n_features=4, n_classes=2, lookback=3))
    examples = separable_examples(16)
    poisoned = make_example_set(np.full_like(examples.features, np.nan), examples.labels)
    with pytest.raises(NumericDivergenceError) as info:
        train(model, poisoned, examples, TrainConfig(batch_size=8, max_epochs=1))
    assert info.value.exit_code == 4


def test_train_rejects_empty_sets():
    model = build_model(ModelConfig(kind="lr", n_features=4, n_classes=2, lookback=3))
    empty = separable_examples(8).subset(np.array([], dtype=np.int64))
    with pytest.raises(ValidationError):
        train(model, empty, separable_examples(8))


def test_history_csv():
    _, history = fit(0, max_epochs=2, patience=5)
    with tempfile.TemporaryDirectory() as tmpdir:
        path = write_history_csv(history, Path(tmpdir) / "h.csv", "cfg")
        frame = read_metrics_csv(path)
    assert list(frame.columns) == ["epoch", "loss", "val_macro_auc"]
    assert frame["epoch"].tolist() == [1, 2]
