"""Checkpoint format: bit-exact round trips and distinct corruption errors."""

import numpy as np
import pytest

from selnet.errors import (
    CheckpointMagicError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    ShapeError,
)
from selnet.model.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from selnet.model.network import SelectorNet, SelectorNetConfig


@pytest.fixture
def trained_like_model():
    """A model with non-default parameters and running statistics."""
    model = SelectorNet(SelectorNetConfig(feature_dim=7, steps=2, embed_dim=4, seed=21))
    rng = np.random.default_rng(5)
    for _ in range(3):
        X = rng.uniform(0, 1, (16, 7))
        emb = rng.uniform(0, 1, (16, 4))
        model.zero_grad()
        model.loss_graph(X, emb, rng.integers(0, 2, 16), training=True)
        model.backward()
        from selnet.core.optim import sgd_step

        sgd_step(model.parameters(), lr=0.1)
    return model


def test_roundtrip_forward_bitwise_identical(trained_like_model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    restored = load_checkpoint(path)
    rng = np.random.default_rng(9)
    X = rng.uniform(0, 1, (5, 7))
    emb = rng.uniform(0, 1, (5, 4))
    p1, _ = trained_like_model.forward(X, emb, training=False)
    p2, _ = restored.forward(X, emb, training=False)
    assert np.array_equal(p1, p2)


def test_roundtrip_state_bitwise_identical(trained_like_model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    restored = load_checkpoint(path)
    original = dict(trained_like_model.state_arrays())
    for name, arr in restored.state_arrays():
        assert np.array_equal(arr, original[name]), name
    assert restored.config == trained_like_model.config


def test_bad_magic_raises_distinct_error(trained_like_model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    data = bytearray(path.read_bytes())
    data[:3] = b"XXX"
    path.write_bytes(bytes(data))
    with pytest.raises(CheckpointMagicError):
        load_checkpoint(path)


def test_version_mismatch_raises_distinct_error(trained_like_model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    data = bytearray(path.read_bytes())
    data[len(MAGIC)] = 99
    path.write_bytes(bytes(data))
    with pytest.raises(CheckpointVersionError):
        load_checkpoint(path)


@pytest.mark.parametrize("keep_fraction", [0.3, 0.8, 0.99])
def test_truncation_raises_distinct_error(trained_like_model, tmp_path, keep_fraction):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    data = path.read_bytes()
    path.write_bytes(data[: int(len(data) * keep_fraction)])
    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(path)


def test_trailing_garbage_rejected(trained_like_model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(path)


def test_corrupt_file_leaves_no_partial_model(trained_like_model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    try:
        load_checkpoint(path)
    except CheckpointTruncatedError:
        pass
    # loading must be all-or-nothing: a fresh load of the intact bytes works
    path.write_bytes(data)
    assert load_checkpoint(path) is not None


def test_width_mismatch_surfaces_at_forward(trained_like_model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    restored = load_checkpoint(path)  # feature_dim 7
    with pytest.raises(ShapeError, match="feature_dim 7"):
        restored.forward(np.ones((2, 5)), np.ones((2, 4)))


def test_checkpoint_starts_with_magic(trained_like_model, tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(trained_like_model, path)
    assert path.read_bytes().startswith(b"SELNET1")
