"""
Structure and property control: blending denoiser branches and predictor gradients into one x0 prediction
"""
from typing import Dict, Mapping, Optional, Sequence

import torch

from molforge.chem.descriptors import MAXIMIZE, TARGET
from molforge.diffusion.models import DenoiserParams
from molforge.diffusion.schedule import Steps
from molforge.errors import DependencyMissing, ShapeMismatch
from molforge.guidance.config import PropertyTarget
from molforge.guidance.predictor import PropertyPredictor
from molforge.numeric.autodiff import ComputeTape
from molforge.numeric.ops import add


def combine_structure(uncond: torch.Tensor, cond: Optional[torch.Tensor], w_s: float) -> torch.Tensor:
    """
    ``w_s * uncond + (1 - w_s) * cond``, exactly ``uncond`` at ``w_s = 1`` or without a conditional branch
    and exactly ``cond`` at ``w_s = 0``.
    """
    if cond is None or w_s == 1:
        return uncond
    if cond.shape != uncond.shape:
        raise ShapeMismatch(f"branch shapes differ: {tuple(uncond.shape)} and {tuple(cond.shape)}")
    if w_s == 0:
        return cond
    return w_s * uncond + (1 - w_s) * cond


def combine_property(
    uncond: torch.Tensor,
    gradients: Sequence[torch.Tensor],
    w_p: float,
    weights: Optional[Sequence[float]] = None,
) -> torch.Tensor:
    """
    ``w_p * uncond + (1 - w_p) * sum_i lambda_i * g_i``, exactly ``uncond`` at ``w_p = 1``.

    :param uncond: unconditional prediction
    :param gradients: one log-likelihood gradient per active predictor
    :param w_p: weight of the unconditional prediction
    :param weights: lambda per gradient, ones when omitted
    """
    if w_p == 1:
        return uncond
    weights = [1.0] * len(gradients) if weights is None else list(weights)
    if len(weights) != len(gradients):
        raise ShapeMismatch(f"{len(weights)} weights for {len(gradients)} gradients")
    guidance = torch.zeros_like(uncond)
    for weight, gradient in zip(weights, gradients):
        if gradient.shape != uncond.shape:
            raise ShapeMismatch(f"gradient {tuple(gradient.shape)} does not match {tuple(uncond.shape)}")
        guidance = guidance + weight * gradient
    return w_p * uncond + (1 - w_p) * guidance


def fuse_scores(structure: torch.Tensor, prop: torch.Tensor) -> torch.Tensor:
    """Elementwise sum of the structure and property predictions"""
    if structure.shape != prop.shape:
        raise ShapeMismatch(f"cannot fuse {tuple(structure.shape)} and {tuple(prop.shape)}")
    return add(structure, prop)


def fused_estimate(
    uncond: torch.Tensor,
    structure: Optional[torch.Tensor],
    gradients: Sequence[torch.Tensor],
    w_p: float,
    weights: Optional[Sequence[float]] = None,
) -> torch.Tensor:
    """
    x0 prediction of the fused phase: structure prediction plus property prediction.

    Without a scaffold the structure share is ``(1 - w_p) * uncond``,
    so the result is ``uncond + (1 - w_p) * sum_i lambda_i * g_i``.

    :param uncond: unconditional prediction
    :param structure: output of ``combine_structure`` or ``None`` when no scaffold is given
    :param gradients: one log-likelihood gradient per active predictor
    :param w_p: weight of the unconditional prediction
    :param weights: lambda per gradient, ones when omitted
    """
    prop = combine_property(uncond, gradients, w_p, weights)
    if structure is None:
        structure = (1 - w_p) * uncond
    return fuse_scores(structure, prop)


def scm_predict(
    params: DenoiserParams,
    x_t: torch.Tensor,
    steps: Steps,
    scaffold: Optional[torch.Tensor],
    w_s: float,
    scaffold_mask: Optional[torch.Tensor] = None,
    uncond: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Structure-guided x0 prediction.

    :param params: trained denoisers
    :param x_t: noisy state
    :param steps: timestep
    :param scaffold: scaffold encoding, unconditional prediction when ``None``
    :param w_s: weight of the unconditional branch
    :param scaffold_mask: scaffold padding mask
    :param uncond: precomputed unconditional prediction
    """
    uncond = params.denoise_uncond(x_t, steps) if uncond is None else uncond
    if scaffold is None or w_s == 1:
        return uncond
    return combine_structure(uncond, params.denoise_cond(x_t, steps, scaffold, scaffold_mask), w_s)


def conditioning_values(
    predictor: PropertyPredictor, targets: Sequence[PropertyTarget], kappa: float
) -> Dict[str, float]:
    """
    Desired values of the other targeted descriptors this predictor conditions on.

    Directional goals use the corpus mean moved by ``kappa`` standard deviations.
    """
    values = {}
    for target in targets:
        if target.descriptor not in predictor.spec.condition_on:
            continue
        mean, std = predictor.spec.condition_stats[target.descriptor]
        if target.direction == TARGET:
            values[target.descriptor] = float(target.value)
        else:
            values[target.descriptor] = mean + (kappa if target.direction == MAXIMIZE else -kappa) * std
    return values


def _per_chain_norm(values: torch.Tensor) -> torch.Tensor:
    flat = values.reshape(values.shape[0], -1) if values.dim() == 3 else values.reshape(1, -1)
    norms = flat.norm(dim=1)
    return norms.reshape(-1, 1, 1) if values.dim() == 3 else norms.reshape(())


# pylint: disable=too-many-arguments
def pcm_gradient(
    predictor: PropertyPredictor,
    x_t: torch.Tensor,
    steps: Steps,
    target: PropertyTarget,
    sigma_g: float = 1.0,
    kappa: float = 2.0,
    scaffold: Optional[torch.Tensor] = None,
    scaffold_mask: Optional[torch.Tensor] = None,
    conditions: Optional[Mapping[str, float]] = None,
) -> torch.Tensor:
    """
    Gradient with respect to ``x_t`` of ``-(pred - goal)^2 / (2 sigma_g^2)``.

    For directional targets the goal is the current prediction moved by ``kappa`` label standard deviations,
    held constant during differentiation.

    :param predictor: regressor for ``target.descriptor``
    :param x_t: noisy state ``(n, d)`` or ``(batch, n, d)``
    :param steps: timestep, at most the predictor's ``t_max``
    :param target: property goal
    :param sigma_g: guidance temperature
    :param kappa: margin of directional goals
    :param scaffold: scaffold encoding for scaffold-aware predictors
    :param scaffold_mask: scaffold padding mask
    :param conditions: raw values of the other targeted descriptors
    :return: tensor shaped like ``x_t``
    """
    predictor.check_step(steps)
    unbatched = x_t.dim() == 2
    batch = 1 if unbatched else x_t.shape[0]
    with ComputeTape() as tape:
        leaf = tape.watch("x_t", x_t)
        inputs = leaf.unsqueeze(0) if unbatched else leaf
        prediction = predictor(
            inputs, steps, scaffold, scaffold_mask, predictor.normalize_conditions(dict(conditions or {}), batch)
        )
        if target.direction == TARGET:
            goal = torch.full_like(prediction, float(target.value))
        else:
            shift = kappa * predictor.spec.label_std * (1 if target.direction == MAXIMIZE else -1)
            goal = prediction.detach() + shift
        log_likelihood = -((prediction - goal) ** 2).sum() / (2 * sigma_g**2)
        gradient = tape.gradient(log_likelihood)["x_t"]
    return gradient


# pylint: disable=too-many-arguments, too-many-locals
def pcm_predict(
    params: DenoiserParams,
    predictors: Mapping[str, PropertyPredictor],
    x_t: torch.Tensor,
    steps: int,
    targets: Sequence[PropertyTarget],
    w_p: float,
    scaffold: Optional[torch.Tensor] = None,
    scaffold_mask: Optional[torch.Tensor] = None,
    sigma_g: float = 1.0,
    kappa: float = 2.0,
    normalize_gradients: bool = True,
    uncond: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Property-guided x0 prediction.

    Predictors queried above their trained range contribute nothing.
    With ``normalize_gradients`` every gradient is rescaled per chain to the norm of the unconditional prediction.

    :param params: trained denoisers
    :param predictors: regressor per descriptor id
    :param x_t: noisy state
    :param steps: timestep
    :param targets: property goals
    :param w_p: weight of the unconditional prediction
    :return: tensor shaped like ``x_t``
    """
    uncond = params.denoise_uncond(x_t, steps) if uncond is None else uncond
    if w_p == 1:
        return uncond
    gradients = property_gradients(
        predictors, x_t, steps, targets, scaffold, scaffold_mask, sigma_g, kappa, normalize_gradients, uncond
    )
    return combine_property(uncond, gradients, w_p, [target.weight for target in targets])


# pylint: disable=too-many-arguments
def property_gradients(
    predictors: Mapping[str, PropertyPredictor],
    x_t: torch.Tensor,
    steps: int,
    targets: Sequence[PropertyTarget],
    scaffold: Optional[torch.Tensor],
    scaffold_mask: Optional[torch.Tensor],
    sigma_g: float,
    kappa: float,
    normalize_gradients: bool,
    uncond: torch.Tensor,
) -> Sequence[torch.Tensor]:
    """One gradient per target, zeros where the predictor is out of range"""
    gradients = []
    for target in targets:
        if target.descriptor not in predictors:
            raise DependencyMissing(f"no trained predictor for {target.descriptor}")
        predictor = predictors[target.descriptor]
        if steps > predictor.spec.t_max:
            gradients.append(torch.zeros_like(uncond))
            continue
        others = [item for item in targets if item.descriptor != target.descriptor]
        gradient = pcm_gradient(
            predictor,
            x_t,
            steps,
            target,
            sigma_g,
            kappa,
            scaffold,
            scaffold_mask,
            conditioning_values(predictor, others, kappa),
        )
        if normalize_gradients:
            norm = _per_chain_norm(gradient)
            scale = torch.where(norm > 0, _per_chain_norm(uncond) / norm.clamp_min(1e-12), torch.zeros_like(norm))
            gradient = gradient * scale
        gradients.append(gradient.detach())
    return gradients
