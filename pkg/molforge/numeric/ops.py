"""
Dense tensor primitives used by the denoiser, the scaffold encoder and the property predictors.

Every function works on ``torch.Tensor`` and is recorded by autograd,
shape problems surface as :class:`~molforge.errors.ShapeMismatch`.
"""
import math
from typing import Optional

import torch
import torch.nn.functional as F

from molforge.errors import ShapeMismatch


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ShapeMismatch(message)


def matmul(left: torch.Tensor, right: torch.Tensor) -> torch.Tensor:
    """
    Matrix product over the last axis of ``left`` and the second to last axis of ``right``.

    >>> matmul(torch.tensor([[1., 2.], [3., 4.]]), torch.eye(2)).tolist()
    [[1.0, 2.0], [3.0, 4.0]]
    """
    _require(
        left.dim() >= 1 and right.dim() >= 2, f"matmul needs matrices, got {tuple(left.shape)}, {tuple(right.shape)}"
    )
    _require(
        left.shape[-1] == right.shape[-2],
        f"matmul inner dimensions differ: {tuple(left.shape)} @ {tuple(right.shape)}",
    )
    return torch.matmul(left, right)


def add(left: torch.Tensor, right: torch.Tensor) -> torch.Tensor:
    """Elementwise sum with broadcasting"""
    try:
        torch.broadcast_shapes(left.shape, right.shape)
    except RuntimeError as exc:
        raise ShapeMismatch(f"cannot add {tuple(left.shape)} and {tuple(right.shape)}") from exc
    return left + right


def layer_norm(
    inputs: torch.Tensor,
    weight: Optional[torch.Tensor] = None,
    bias: Optional[torch.Tensor] = None,
    eps: float = 1e-5,
) -> torch.Tensor:
    """
    Normalize the last axis to zero mean and unit variance, then scale and shift.

    A constant row maps to zeros before scale and shift.
    """
    width = inputs.shape[-1]
    for name, param in (("weight", weight), ("bias", bias)):
        if param is not None:
            _require(tuple(param.shape) == (width,), f"layer_norm {name} must have shape ({width},)")
    return F.layer_norm(inputs, (width,), weight, bias, eps)


def softmax_attention(
    query: torch.Tensor,
    key: torch.Tensor,
    value: torch.Tensor,
    key_padding_mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Scaled dot-product attention without a causal mask.

    :param query: ``(..., n, d_k)``
    :param key: ``(..., m, d_k)``
    :param value: ``(..., m, d_v)``
    :param key_padding_mask: ``(batch, m)`` boolean, ``True`` marks keys to ignore
    :return: ``(..., n, d_v)``
    """
    _require(query.shape[-1] == key.shape[-1], f"query {tuple(query.shape)} and key {tuple(key.shape)} widths differ")
    _require(key.shape[-2] == value.shape[-2], f"key {tuple(key.shape)} and value {tuple(value.shape)} lengths differ")
    scores = torch.matmul(query, key.transpose(-1, -2)) / math.sqrt(query.shape[-1])
    if key_padding_mask is not None:
        _require(
            key_padding_mask.shape[-1] == key.shape[-2],
            f"padding mask {tuple(key_padding_mask.shape)} does not match {key.shape[-2]} keys",
        )
        mask = key_padding_mask
        while mask.dim() < scores.dim():
            mask = mask.unsqueeze(-2)
        scores = scores.masked_fill(mask, float("-inf"))
    weights = torch.softmax(scores, dim=-1)
    return torch.matmul(weights, value)


def feed_forward(
    inputs: torch.Tensor,
    weight_in: torch.Tensor,
    bias_in: torch.Tensor,
    weight_out: torch.Tensor,
    bias_out: torch.Tensor,
) -> torch.Tensor:
    """Two affine maps with a GELU in between, weights stored ``(out, in)`` as in ``nn.Linear``"""
    _require(
        inputs.shape[-1] == weight_in.shape[1], f"feed_forward input width {inputs.shape[-1]} != {weight_in.shape[1]}"
    )
    _require(weight_in.shape[0] == weight_out.shape[1], "feed_forward hidden widths differ")
    hidden = F.gelu(F.linear(inputs, weight_in, bias_in))
    return F.linear(hidden, weight_out, bias_out)


def dropout(inputs: torch.Tensor, keep_prob: float, seed: Optional[int] = None, training: bool = True) -> torch.Tensor:
    """
    Inverted dropout.

    :param inputs: activations
    :param keep_prob: probability of keeping a unit, in ``(0, 1]``
    :param seed: mask seed, the global generator is used when ``None``
    :param training: identity when ``False``
    """
    if not 0 < keep_prob <= 1:
        raise ValueError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if not training or keep_prob == 1:
        return inputs
    generator = None
    if seed is not None:
        generator = torch.Generator(device=inputs.device).manual_seed(seed)
    mask = torch.rand(inputs.shape, generator=generator, device=inputs.device, dtype=inputs.dtype) < keep_prob
    return inputs * mask / keep_prob
