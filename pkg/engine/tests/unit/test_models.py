"""Unit tests for the three architectures, gradient checks and checkpoints."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from engine.errors import SchemaMismatchError, ShapeError, ValidationError
from engine.models.checkpoint import load_checkpoint, read_checkpoint_header, save_checkpoint
from engine.models.config import ModelConfig, ModelKind
from engine.models.factory import build_cnn, build_lr, build_lstm, build_model
from engine.nn.gradcheck import grad_check, input_grad_check, relative_error


def small_config(kind, **overrides):
    values = dict(
        kind=kind,
        n_features=3,
        n_classes=2,
        lookback=6,
        hidden=4,
        cnn_filters=4,
        cnn_widths=(2, 3),
        cnn_pool=3,
        fc_hidden=5,
        seed=1,
    )
    values.update(overrides)
    return ModelConfig(**values)


def batch(n=4, lookback=6, width=3, classes=2, seed=0):
    rng = np.random.default_rng(seed)
    return rng.random((n, lookback, width)), np.arange(n) % classes


def test_parameter_counts():
    """Test parameter totals against the layer formulas."""
    lstm = build_lstm(small_config("lstm"))
    # layer 0: 4 * (4 * (4 + 3) + 4), layer 1: 4 * (4 * 8 + 4), head: 2 * 4 + 2
    assert lstm.n_parameters == 128 + 144 + 10
    cnn = build_cnn(small_config("cnn"))
    # conv2: 4*3*2 + 4, conv3: 4*3*3 + 4, fc1: 5 * (4 * 2 * 2) + 5, fc2: 2 * 5 + 2
    assert cnn.n_parameters == 28 + 40 + 85 + 12
    lr = build_lr(small_config("lr"))
    assert lr.n_parameters == 2 * 18 + 2


def test_regularized_excludes_biases():
    model = build_model(small_config("cnn"))
    assert "fc1.W" in model.regularized
    assert all(".b" not in name for name in model.regularized)


def test_factory_kind_check():
    with pytest.raises(ValidationError):
        build_lstm(small_config("cnn"))
    with pytest.raises(ValidationError):
        ModelKind.parse("gru")


def test_config_validation():
    with pytest.raises(ValidationError):
        small_config("lstm", n_classes=1)
    with pytest.raises(ValidationError):
        small_config("cnn", lookback=2)
    with pytest.raises(ValidationError):
        small_config("lstm", lstm_keep=0.0)


def test_config_round_trip():
    config = small_config("cnn", cnn_widths=(3, 5))
    assert ModelConfig.from_dict(config.to_dict()) == config


def test_grad_check_logistic():
    model = build_lr(small_config("lr"))
    x, y = batch()
    report = grad_check(model, x, y, tolerance=1e-6)
    assert report.passed, report.per_parameter


def test_grad_check_lstm_with_dropout():
    """Test every LSTM parameter with a fixed inter-layer dropout mask."""
    model = build_lstm(small_config("lstm", n_classes=4))
    x, y = batch(classes=4)
    masks = model.sample_masks(4, np.random.default_rng(5))
    report = grad_check(model, x, y, tolerance=1e-5, class_weights=np.array([0.5, 1.0, 1.5, 1.0]), masks=masks)
    assert report.passed, report.worst()
    assert len(report.per_parameter) == len(model.params)


def test_grad_check_cnn_with_dropout():
    model = build_cnn(small_config("cnn"))
    x, y = batch()
    masks = model.sample_masks(4, np.random.default_rng(2))
    report = grad_check(model, x, y, tolerance=1e-5, masks=masks)
    assert report.passed, report.worst()


@pytest.mark.parametrize("kind", ["lstm", "cnn", "lr"])
def test_input_gradient(kind):
    """Test the class-logit input gradient against finite differences."""
    model = build_model(small_config(kind))
    x, _ = batch(n=2)
    assert model.supports_input_gradient
    assert input_grad_check(model, x, class_index=1) <= 1e-5


def test_relative_error_of_zero_vectors():
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0


def test_predict_proba():
    model = build_model(small_config("lstm"), schema_hash="s1")
    x, _ = batch(n=3)
    probs = model.predict_proba(x, schema_hash="s1")
    assert probs.shape == (3, 2)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0)
    with pytest.raises(SchemaMismatchError):
        model.predict_proba(x, schema_hash="s2")
    with pytest.raises(ShapeError):
        model.predict_proba(np.zeros((1, 5, 3)))


def test_same_seed_same_parameters():
    first = build_model(small_config("cnn"))
    second = build_model(small_config("cnn"))
    for name in first.params:
        np.testing.assert_array_equal(first.params[name], second.params[name])
    assert first.params["fc1.b"].sum() == 0.0


def test_lstm_forget_bias():
    model = build_lstm(small_config("lstm"))
    np.testing.assert_array_equal(model.params["lstm0.b_f"], 1.0)
    np.testing.assert_array_equal(model.params["lstm1.b_i"], 0.0)


@pytest.mark.parametrize("kind", ["lstm", "cnn", "lr"])
def test_checkpoint_round_trip(kind):
    """Test that a reloaded model predicts identically."""
    model = build_model(small_config(kind), schema_hash="abc")
    x, _ = batch(n=5)
    with tempfile.TemporaryDirectory() as tmpdir:
        path = save_checkpoint(model, Path(tmpdir) / f"{kind}.icuf", config_hash="h", extra={"best_epoch": 3})
        restored = load_checkpoint(path, expected_schema_hash="abc")
        header = read_checkpoint_header(path)
        with pytest.raises(SchemaMismatchError):
            load_checkpoint(path, expected_schema_hash="other")
    assert header["model_kind"] == kind
    assert header["extra"] == {"best_epoch": 3}
    np.testing.assert_array_equal(restored.predict_proba(x), model.predict_proba(x))


def test_checkpoint_bytes_are_deterministic():
    model = build_model(small_config("lr"))
    with tempfile.TemporaryDirectory() as tmpdir:
        a = save_checkpoint(model, Path(tmpdir) / "a.icuf").read_bytes()
        b = save_checkpoint(model, Path(tmpdir) / "b.icuf").read_bytes()
    assert a == b
    assert a[:4] == b"ICUF"
