"""
Gradients with respect to arbitrary inputs, not only module parameters
"""
from typing import Dict, Optional

import torch

from molforge.errors import DetachedTensor, NotScalar


class ComputeTape:
    """
    Records a computation for one reverse pass.

    Usage::

        with ComputeTape() as tape:
            x = tape.watch("x", x_t)
            loss = model(x).sum()
        grads = tape.gradient(loss)

    A tape belongs to the thread that created it.
    """

    def __init__(self):
        self._watched: Dict[str, torch.Tensor] = {}
        self._grad_mode: Optional[torch.enable_grad] = None

    def __enter__(self) -> "ComputeTape":
        self._grad_mode = torch.enable_grad()
        self._grad_mode.__enter__()
        return self

    def __exit__(self, *exc_info):
        self._grad_mode.__exit__(*exc_info)
        self._grad_mode = None

    @property
    def watched(self) -> Dict[str, torch.Tensor]:
        return dict(self._watched)

    def watch(self, name: str, tensor: torch.Tensor) -> torch.Tensor:
        """
        Mark a tensor as a differentiable leaf.

        :param name: key in the gradient map
        :param tensor: value, copied and detached from any earlier graph
        :return: leaf to use in the recorded computation
        """
        leaf = tensor.detach().clone().requires_grad_(True)
        self._watched[name] = leaf
        return leaf

    def gradient(self, loss: torch.Tensor, retain_graph: bool = False) -> Dict[str, torch.Tensor]:
        return backward(self, loss, retain_graph)


def backward(tape: ComputeTape, loss: torch.Tensor, retain_graph: bool = False) -> Dict[str, torch.Tensor]:
    """
    Reverse pass from a scalar.

    :param tape: tape holding the watched leaves
    :param loss: scalar computed from the watched leaves
    :param retain_graph: keep the graph for another pass
    :return: gradient per watched name, zeros for leaves the loss does not depend on
    """
    if loss.numel() != 1:
        raise NotScalar(f"backward needs a scalar, got shape {tuple(loss.shape)}")
    names = list(tape.watched)
    if not names:
        raise DetachedTensor("nothing is watched on this tape")
    if not loss.requires_grad:
        raise DetachedTensor("loss is not connected to any watched tensor")
    leaves = [tape.watched[name] for name in names]
    grads = torch.autograd.grad(loss.reshape(()), leaves, retain_graph=retain_graph, allow_unused=True)
    if all(grad is None for grad in grads):
        raise DetachedTensor("loss is not connected to any watched tensor")
    return {
        name: torch.zeros_like(leaf) if grad is None else grad for name, leaf, grad in zip(names, leaves, grads)
    }
