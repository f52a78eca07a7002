# pylint: disable=missing-function-docstring
import pytest
import torch
from numpy.testing import assert_allclose
from torch.autograd import gradcheck

from molforge.errors import ShapeMismatch
from molforge.numeric import add, dropout, feed_forward, layer_norm, matmul, softmax_attention


def randn(*shape, seed=0):
    generator = torch.Generator().manual_seed(seed)
    return torch.randn(*shape, generator=generator, dtype=torch.float64, requires_grad=True)


def test_matmul_identity():
    left = randn(3, 4).detach()
    assert torch.equal(matmul(left, torch.eye(4, dtype=torch.float64)), left)


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        matmul(torch.ones(2, 3), torch.ones(2, 3))


def test_add_broadcast():
    assert add(torch.ones(2, 3), torch.ones(3)).shape == (2, 3)
    with pytest.raises(ShapeMismatch):
        add(torch.ones(2, 3), torch.ones(2))


def test_layer_norm_constant_row():
    result = layer_norm(torch.full((2, 5), 3.0))
    assert_allclose(result.numpy(), 0.0, atol=1e-6)


def test_layer_norm_statistics():
    result = layer_norm(randn(4, 16).detach())
    assert_allclose(result.mean(-1).numpy(), 0.0, atol=1e-10)
    assert_allclose(result.var(-1, unbiased=False).numpy(), 1.0, atol=1e-4)


def test_attention_single_key_returns_value():
    query, key, value = randn(2, 3, 4, seed=1), randn(2, 1, 4, seed=2), randn(2, 1, 5, seed=3)
    result = softmax_attention(query, key, value)
    assert_allclose(result.detach().numpy(), value.detach().expand(2, 3, 5).numpy())


def test_attention_mask_ignores_padding():
    query, key, value = randn(1, 2, 4, seed=1), randn(1, 3, 4, seed=2), randn(1, 3, 4, seed=3)
    mask = torch.tensor([[False, False, True]])
    masked = softmax_attention(query, key, value, mask)
    trimmed = softmax_attention(query, key[:, :2], value[:, :2])
    assert_allclose(masked.detach().numpy(), trimmed.detach().numpy(), atol=1e-12)


def test_attention_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        softmax_attention(torch.ones(1, 2, 4), torch.ones(1, 3, 5), torch.ones(1, 3, 4))


def test_dropout():
    inputs = torch.ones(1000)
    assert torch.equal(dropout(inputs, 0.5, seed=1, training=False), inputs)
    first, second = dropout(inputs, 0.5, seed=1), dropout(inputs, 0.5, seed=1)
    assert torch.equal(first, second)
    assert set(first.unique().tolist()) <= {0.0, 2.0}
    with pytest.raises(ValueError):
        dropout(inputs, 0.0)


@pytest.mark.parametrize("seed", range(50))
def test_primitive_gradients(seed):
    left, right = randn(3, 4, seed=seed), randn(4, 2, seed=seed + 100)
    assert gradcheck(matmul, (left, right), eps=1e-6, atol=1e-4, rtol=1e-4)
    assert gradcheck(add, (left, randn(4, seed=seed + 200)), eps=1e-6, atol=1e-4, rtol=1e-4)
    weight, bias = randn(4, seed=seed + 300), randn(4, seed=seed + 400)
    assert gradcheck(layer_norm, (left, weight, bias), eps=1e-6, atol=1e-4, rtol=1e-4)
    query, key, value = randn(1, 2, 4, seed=seed + 1), randn(1, 3, 4, seed=seed + 2), randn(1, 3, 4, seed=seed + 3)
    assert gradcheck(softmax_attention, (query, key, value), eps=1e-6, atol=1e-4, rtol=1e-4)
    ff_args = (
        left,
        randn(5, 4, seed=seed + 5),
        randn(5, seed=seed + 6),
        randn(4, 5, seed=seed + 7),
        randn(4, seed=seed + 8),
    )
    assert gradcheck(feed_forward, ff_args, eps=1e-6, atol=1e-4, rtol=1e-4)
