# pylint: disable=missing-function-docstring
import struct

import pytest
import torch

from molforge.errors import CheckpointError
from molforge.numeric import (
    decode_checkpoint,
    derive_seed,
    derive_seeds,
    encode_checkpoint,
    load_checkpoint,
    rng_gaussian,
    save_checkpoint,
)


def test_gaussian_moments():
    draws = rng_gaussian((1_000_000,), seed=11, dtype=torch.float64)
    assert abs(float(draws.mean())) < 5e-3
    assert abs(float(draws.var()) - 1) < 1e-2


def test_gaussian_determinism():
    assert torch.equal(rng_gaussian((3, 4), seed=5), rng_gaussian((3, 4), seed=5))
    assert not torch.equal(rng_gaussian((3, 4), seed=5), rng_gaussian((3, 4), seed=6))


def test_gaussian_needs_a_source():
    with pytest.raises(ValueError):
        rng_gaussian((2,))


def test_derived_seeds_do_not_depend_on_count():
    assert derive_seeds(9, 3) == derive_seeds(9, 10)[:3]
    assert len(set(derive_seeds(9, 100))) == 100
    assert derive_seed(9, 1, 2) != derive_seed(9, 2, 1)


@pytest.fixture
def tensors():
    return {"weight": torch.arange(6, dtype=torch.float32).reshape(2, 3), "scalar": torch.tensor(1.5)}


def test_checkpoint_round_trip(tensors, tmp_path):
    digest = save_checkpoint(tmp_path / "model.ckpt", tensors, {"dim": 3})
    assert len(digest) == 64
    config, loaded = load_checkpoint(tmp_path / "model.ckpt")
    assert config == {"dim": 3}
    assert list(loaded) == ["weight", "scalar"]
    for name, value in tensors.items():
        assert torch.equal(loaded[name], value)


def test_checkpoint_is_deterministic(tensors, tmp_path):
    assert save_checkpoint(tmp_path / "a.ckpt", tensors, {}) == save_checkpoint(tmp_path / "b.ckpt", tensors, {})


@pytest.mark.parametrize(
    "corrupt",
    [
        lambda payload: b"XXXX" + payload[4:],
        lambda payload: payload[:4] + struct.pack("<I", 99) + payload[8:],
        lambda payload: payload[:-3],
        lambda payload: payload + b"\x00",
    ],
    ids=["magic", "version", "truncated", "trailing"],
)
def test_checkpoint_errors(tensors, corrupt):
    with pytest.raises(CheckpointError):
        decode_checkpoint(corrupt(encode_checkpoint(tensors, {})))
