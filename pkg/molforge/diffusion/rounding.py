"""
Bridge between token ids and the continuous embedding space
"""
import torch
import torch.nn.functional as F

from molforge.errors import ShapeMismatch


def embed(tokens: torch.Tensor, table: torch.Tensor) -> torch.Tensor:
    """
    Embedding rows for token ids.

    :param tokens: int64 ids of any shape
    :param table: ``(v, d)`` embedding table
    :return: ``tokens.shape + (d,)``
    """
    return F.embedding(tokens, table)


def squared_distances(x0: torch.Tensor, table: torch.Tensor) -> torch.Tensor:
    """
    Squared L2 distance from every row of ``x0`` to every embedding.

    :return: ``x0.shape[:-1] + (v,)``
    """
    if x0.shape[-1] != table.shape[-1]:
        raise ShapeMismatch(f"state width {x0.shape[-1]} differs from embedding width {table.shape[-1]}")
    return ((x0.unsqueeze(-2) - table.to(x0.dtype)) ** 2).sum(-1)


def round_to_tokens(x0: torch.Tensor, table: torch.Tensor) -> torch.Tensor:
    """Nearest embedding per position, ties go to the lowest id"""
    return torch.argmin(squared_distances(x0, table), dim=-1)


def rounding_loss(x0_hat: torch.Tensor, tokens: torch.Tensor, table: torch.Tensor) -> torch.Tensor:
    """
    Cross-entropy of the softmax over negative squared distances, averaged over positions.

    :param x0_hat: predicted clean state ``(batch, n, d)``
    :param tokens: target ids ``(batch, n)``
    :param table: embedding table ``(v, d)``
    """
    logits = -squared_distances(x0_hat, table)
    return F.cross_entropy(logits.reshape(-1, logits.shape[-1]), tokens.reshape(-1))


def min_embedding_gap(table: torch.Tensor) -> float:
    """Smallest distance between two different embedding rows"""
    distances = torch.cdist(table.unsqueeze(0), table.unsqueeze(0))[0]
    distances.fill_diagonal_(float("inf"))
    return float(distances.min())
