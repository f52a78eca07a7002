"""
Transformer building blocks shared by the denoisers, the scaffold encoder and the property predictors
"""
import math
from typing import Optional

import torch
from torch import nn

from molforge.errors import ShapeMismatch
from molforge.numeric import ops


def uniform_init(module: nn.Module) -> None:
    """
    Linear and embedding weights uniform in ``+-1/sqrt(fan_in)``, layer norms at scale 1 and shift 0.

    :param module: module to initialize in place, children included
    """
    for layer in module.modules():
        if isinstance(layer, nn.Linear):
            bound = 1 / math.sqrt(layer.in_features)
            nn.init.uniform_(layer.weight, -bound, bound)
            if layer.bias is not None:
                nn.init.uniform_(layer.bias, -bound, bound)
        elif isinstance(layer, nn.Embedding):
            bound = 1 / math.sqrt(layer.embedding_dim)
            nn.init.uniform_(layer.weight, -bound, bound)
        elif isinstance(layer, nn.LayerNorm):
            nn.init.ones_(layer.weight)
            nn.init.zeros_(layer.bias)


class MultiHeadAttention(nn.Module):
    """Scaled dot-product attention over ``heads`` subspaces of width ``d / heads``"""

    def __init__(self, dim: int, heads: int):
        """
        :param dim: model width d
        :param heads: number of heads, must divide ``dim``
        """
        super().__init__()
        if dim % heads:
            raise ShapeMismatch(f"width {dim} is not divisible by {heads} heads")
        self.heads = heads
        self.query = nn.Linear(dim, dim)
        self.key = nn.Linear(dim, dim)
        self.value = nn.Linear(dim, dim)
        self.output = nn.Linear(dim, dim)

    def _split(self, inputs: torch.Tensor) -> torch.Tensor:
        batch, length, dim = inputs.shape
        return inputs.reshape(batch, length, self.heads, dim // self.heads).transpose(1, 2)

    # pylint: disable=arguments-differ
    def forward(  # type: ignore
        self,
        inputs: torch.Tensor,
        context: Optional[torch.Tensor] = None,
        context_mask: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        """
        :param inputs: queries ``(batch, n, d)``
        :param context: keys and values ``(batch, m, d)``, ``inputs`` when omitted
        :param context_mask: ``(batch, m)``, ``True`` marks padding
        :return: ``(batch, n, d)``
        """
        context = inputs if context is None else context
        if context.shape[-1] != inputs.shape[-1] or context.shape[0] != inputs.shape[0]:
            raise ShapeMismatch(f"context {tuple(context.shape)} does not fit inputs {tuple(inputs.shape)}")
        attended = ops.softmax_attention(
            self._split(self.query(inputs)),
            self._split(self.key(context)),
            self._split(self.value(context)),
            key_padding_mask=context_mask,
        )
        batch, _, length, _ = attended.shape
        return self.output(attended.transpose(1, 2).reshape(batch, length, -1))


class FeedForward(nn.Module):
    """Position-wise two layer perceptron"""

    def __init__(self, dim: int, hidden: int):
        super().__init__()
        self.expand = nn.Linear(dim, hidden)
        self.project = nn.Linear(hidden, dim)

    # pylint: disable=arguments-differ
    def forward(self, inputs: torch.Tensor) -> torch.Tensor:  # type: ignore
        return ops.feed_forward(inputs, self.expand.weight, self.expand.bias, self.project.weight, self.project.bias)


class TransformerLayer(nn.Module):
    """
    Post-norm encoder layer, optionally with cross-attention to a context sequence.

    Without context: ``z' = LN1(z + SA(z))``.
    With context: ``s = SA(z)`` and ``z' = LN1(z + s + CA(s, c))``.
    Both continue with ``LN2(z' + dropout(FFN(z')))``.
    """

    # pylint: disable=too-many-arguments
    def __init__(self, dim: int, heads: int, hidden: int, dropout: float = 0.0, cross_attention: bool = False):
        """
        :param dim: model width
        :param heads: attention heads
        :param hidden: feed-forward width
        :param dropout: drop probability after the feed-forward block
        :param cross_attention: add a cross-attention block
        """
        super().__init__()
        self.self_attention = MultiHeadAttention(dim, heads)
        self.cross_attention = MultiHeadAttention(dim, heads) if cross_attention else None
        self.norm1 = nn.LayerNorm(dim)
        self.feed_forward = FeedForward(dim, hidden)
        self.norm2 = nn.LayerNorm(dim)
        self.keep_prob = 1 - dropout

    def zero_cross_attention(self) -> None:
        """Zero the cross-attention output projection so the block contributes nothing"""
        if self.cross_attention is not None:
            with torch.no_grad():
                self.cross_attention.output.weight.zero_()
                self.cross_attention.output.bias.zero_()

    # pylint: disable=arguments-differ
    def forward(  # type: ignore
        self,
        inputs: torch.Tensor,
        context: Optional[torch.Tensor] = None,
        context_mask: Optional[torch.Tensor] = None,
        padding_mask: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        attended = self.self_attention(inputs, context_mask=padding_mask)
        residual = inputs + attended
        if self.cross_attention is not None and context is not None:
            residual = residual + self.cross_attention(attended, context, context_mask)
        hidden = ops.layer_norm(residual, self.norm1.weight, self.norm1.bias, self.norm1.eps)
        update = ops.dropout(self.feed_forward(hidden), self.keep_prob, training=self.training)
        return ops.layer_norm(hidden + update, self.norm2.weight, self.norm2.bias, self.norm2.eps)
