"""
Variance schedule, forward noising and the reverse posterior step.

Tables are indexed by timestep ``0..T`` with ``alpha_bar[0] = 1`` so the
posterior is well formed at ``t = 1``.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import torch

from molforge.errors import StepOutOfRange
from molforge.numeric.random import rng_gaussian

TERMINAL_ALPHA_BAR = 1e-3
PHASES = ("one", "two")

Steps = Union[int, torch.Tensor]


class NoiseSchedule:
    """
    Strictly increasing ``beta_1..beta_T`` with the derived ``alpha`` and ``alpha_bar`` tables.

    :param betas: variances for ``t = 1..T``
    :param require_terminal: demand ``alpha_bar_T < 1e-3``
    """

    def __init__(self, betas: Sequence[float], require_terminal: bool = True):
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size == 0:
            raise ValueError("betas must be a non-empty vector")
        if not np.all((betas > 0) & (betas < 1)):
            raise ValueError("every beta must lie in (0, 1)")
        if np.any(np.diff(betas) <= 0):
            raise ValueError("betas must be strictly increasing")
        alpha_bars = np.cumprod(1 - betas)
        if require_terminal and alpha_bars[-1] >= TERMINAL_ALPHA_BAR:
            raise ValueError(f"alpha_bar_T = {alpha_bars[-1]:.3g} is not below {TERMINAL_ALPHA_BAR}")
        self.steps = betas.size
        self.betas = torch.from_numpy(np.concatenate([[0.0], betas]))
        self.alphas = 1 - self.betas
        self.alpha_bars = torch.from_numpy(np.concatenate([[1.0], alpha_bars]))

    def __len__(self) -> int:
        return self.steps

    def __repr__(self) -> str:
        return f"NoiseSchedule(T={self.steps}, beta_1={self.betas[1]:.3g}, beta_T={self.betas[-1]:.3g})"

    @classmethod
    def linear(cls, steps: int, beta_start: float = 1e-4, beta_end: float = 0.02) -> "NoiseSchedule":
        """
        Linear betas, scaled up by 5% increments until ``alpha_bar_T`` drops below the terminal level.

        >>> float(NoiseSchedule.linear(200).alpha_bars[-1]) < 1e-3
        True
        """
        if steps < 2:
            raise ValueError(f"a linear schedule needs at least 2 steps, got {steps}")
        betas = np.linspace(beta_start, beta_end, steps)
        scale = 1.0
        while np.prod(1 - scale * betas) >= TERMINAL_ALPHA_BAR:
            scale *= 1.05
            if scale * beta_end >= 1:
                raise ValueError(f"{steps} steps cannot reach alpha_bar_T < {TERMINAL_ALPHA_BAR} linearly")
        return cls(scale * betas)

    def check_step(self, step: Steps) -> None:
        low, high = (int(step.min()), int(step.max())) if torch.is_tensor(step) else (int(step), int(step))
        if low < 1 or high > self.steps:
            raise StepOutOfRange(f"timestep must be in [1, {self.steps}], got {low if low < 1 else high}")

    def posterior_coefficients(self, step: Steps) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """
        Mean weights and variance of ``q(x_{t-1} | x_t, x_0)``.

        :param step: timestep ``t`` or a vector of them
        :return: weight of ``x0_hat``, weight of ``x_t``, variance, in float64
        """
        self.check_step(step)
        alpha_bar = self.alpha_bars[step]
        alpha_bar_prev = self.alpha_bars[step - 1]
        beta = self.betas[step]
        coef_x0 = torch.sqrt(alpha_bar_prev) * beta / (1 - alpha_bar)
        coef_xt = torch.sqrt(self.alphas[step]) * (1 - alpha_bar_prev) / (1 - alpha_bar)
        variance = (1 - alpha_bar_prev) / (1 - alpha_bar) * beta
        return coef_x0, coef_xt, variance


def _per_row(values: torch.Tensor, like: torch.Tensor) -> torch.Tensor:
    """Broadcast per-step scalars over the trailing axes of ``like``"""
    values = values.to(dtype=like.dtype, device=like.device)
    if values.dim() == 0:
        return values
    return values.reshape(values.shape + (1,) * (like.dim() - values.dim()))


def q_sample(
    x0: torch.Tensor,
    step: Steps,
    schedule: NoiseSchedule,
    seed: Optional[int] = None,
    noise: Optional[torch.Tensor] = None,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """
    Draw ``x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) z``.

    :param x0: clean embeddings, ``(n, d)`` or ``(batch, n, d)``
    :param step: timestep, or one per batch row
    :param schedule: noise schedule
    :param seed: noise seed
    :param noise: explicit ``z``, wins over ``seed`` and ``generator``
    :param generator: generator to draw ``z`` from
    """
    schedule.check_step(step)
    if noise is None:
        noise = rng_gaussian(x0.shape, seed=seed, dtype=x0.dtype, generator=generator).to(x0.device)
    alpha_bar = _per_row(schedule.alpha_bars[step], x0)
    return torch.sqrt(alpha_bar) * x0 + torch.sqrt(1 - alpha_bar) * noise


def reverse_step(
    x_t: torch.Tensor,
    step: Steps,
    x0_hat: torch.Tensor,
    schedule: NoiseSchedule,
    seed: Optional[int] = None,
    noise: Optional[torch.Tensor] = None,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """
    Sample ``x_{t-1}`` from the posterior given the predicted clean state.

    No noise is drawn at ``t = 1``.
    """
    coef_x0, coef_xt, variance = schedule.posterior_coefficients(step)
    mean = _per_row(coef_x0, x0_hat) * x0_hat + _per_row(coef_xt, x_t) * x_t
    if not torch.is_tensor(step) and int(step) == 1:
        return mean
    if noise is None:
        noise = rng_gaussian(x_t.shape, seed=seed, dtype=x_t.dtype, generator=generator).to(x_t.device)
    return mean + torch.sqrt(_per_row(variance, x_t)) * noise


@dataclass
class DiffusionState:
    """
    One chain position in the reverse process.

    :param x: state, ``(n, d)`` or ``(batch, n, d)``
    :param step: timestep in ``[0, T]``
    :param phase: ``"one"`` for structure-only steps, ``"two"`` for fused steps
    """

    x: torch.Tensor
    step: int
    phase: str = "one"

    def __post_init__(self):
        if self.step < 0:
            raise StepOutOfRange(f"timestep must be non-negative, got {self.step}")
        if self.phase not in PHASES:
            raise ValueError(f"phase must be one of {PHASES}, got {self.phase!r}")
