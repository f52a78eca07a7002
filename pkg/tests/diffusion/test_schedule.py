# pylint: disable=missing-function-docstring
import math

import numpy as np
import pytest
import torch
from numpy.testing import assert_allclose

from molforge.diffusion import DiffusionState, NoiseSchedule, q_sample, reverse_step
from molforge.errors import StepOutOfRange


def test_linear_schedule_reaches_terminal_level():
    for steps in (20, 200, 2000):
        schedule = NoiseSchedule.linear(steps)
        assert len(schedule) == steps
        assert float(schedule.alpha_bars[-1]) < 1e-3
        assert bool(torch.all(torch.diff(schedule.alpha_bars) < 0))
        assert float(schedule.alpha_bars[0]) == 1.0


def test_alpha_bar_is_a_running_product():
    schedule = NoiseSchedule.linear(200)
    product = 1.0
    for step in range(1, 201):
        product *= 1 - float(schedule.betas[step])
        assert abs(product - float(schedule.alpha_bars[step])) < 1e-12


@pytest.mark.parametrize("betas", [[0.2, 0.1], [0.0, 0.1], [0.5, 1.0]])
def test_invalid_betas(betas):
    with pytest.raises(ValueError):
        NoiseSchedule(betas, require_terminal=False)


def test_terminal_requirement():
    with pytest.raises(ValueError):
        NoiseSchedule([0.1, 0.2])


def test_hand_computed_mean():
    schedule = NoiseSchedule([0.1, 0.2], require_terminal=False)
    x_t = torch.tensor([0.5], dtype=torch.float64)
    x0_hat = torch.tensor([1.0], dtype=torch.float64)
    result = reverse_step(x_t, 2, x0_hat, schedule, noise=torch.zeros(1, dtype=torch.float64))
    expected = math.sqrt(0.9) * 0.2 / (1 - 0.72) + math.sqrt(0.8) * 0.1 / 0.28 * 0.5
    assert abs(float(result) - expected) < 1e-12


def test_posterior_against_recomputation():
    rng = np.random.default_rng(0)
    for _ in range(100):
        steps = int(rng.integers(2, 50))
        betas = np.sort(rng.uniform(1e-4, 0.5, steps))
        schedule = NoiseSchedule(betas, require_terminal=False)
        step = int(rng.integers(1, steps + 1))
        alpha_bar = np.prod(1 - betas[:step])
        alpha_bar_prev = np.prod(1 - betas[: step - 1])
        beta = betas[step - 1]
        coef_x0, coef_xt, variance = schedule.posterior_coefficients(step)
        assert abs(float(coef_x0) - math.sqrt(alpha_bar_prev) * beta / (1 - alpha_bar)) < 1e-12
        assert abs(float(coef_xt) - math.sqrt(1 - beta) * (1 - alpha_bar_prev) / (1 - alpha_bar)) < 1e-12
        assert abs(float(variance) - (1 - alpha_bar_prev) / (1 - alpha_bar) * beta) < 1e-12


def test_first_step_has_no_noise():
    schedule = NoiseSchedule.linear(20)
    _, _, variance = schedule.posterior_coefficients(1)
    assert float(variance) == 0.0
    x_t = torch.randn(3, 4, dtype=torch.float64)
    assert torch.equal(reverse_step(x_t, 1, x_t, schedule, seed=1), reverse_step(x_t, 1, x_t, schedule, seed=2))


def test_composed_transitions_match_closed_form():
    schedule = NoiseSchedule([0.1, 0.2, 0.3], require_terminal=False)
    assert abs(float(schedule.alpha_bars[3]) - 0.9 * 0.8 * 0.7) < 1e-12
    ones = torch.ones(1, dtype=torch.float64)
    samples = torch.stack([q_sample(ones, 3, schedule, seed=seed) for seed in range(20000)])
    assert abs(float(samples.mean()) - math.sqrt(0.504)) < 3 * math.sqrt(0.496 / 20000) * 1.5
    assert abs(float(samples.var()) - 0.496) < 0.03


def test_q_sample_batched_steps():
    schedule = NoiseSchedule.linear(20)
    x0 = torch.ones(2, 3, 4)
    noisy = q_sample(x0, torch.tensor([1, 20]), schedule, noise=torch.zeros(2, 3, 4))
    assert_allclose(noisy[0].numpy(), math.sqrt(float(schedule.alpha_bars[1])), rtol=1e-6)
    assert_allclose(noisy[1].numpy(), math.sqrt(float(schedule.alpha_bars[20])), rtol=1e-5)


def test_step_range():
    schedule = NoiseSchedule.linear(20)
    with pytest.raises(StepOutOfRange):
        q_sample(torch.ones(2), 0, schedule, seed=1)
    with pytest.raises(StepOutOfRange):
        schedule.posterior_coefficients(21)


def test_diffusion_state():
    with pytest.raises(ValueError):
        DiffusionState(torch.zeros(2, 2), 3, phase="three")
    assert DiffusionState(torch.zeros(2, 2), 0).phase == "one"
