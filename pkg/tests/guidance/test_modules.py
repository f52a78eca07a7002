# pylint: disable=redefined-outer-name, missing-function-docstring, unused-import
import pytest
import torch
from numpy.testing import assert_allclose

from molforge.errors import ShapeMismatch, StepOutOfRange
from molforge.guidance import (
    PredictorSpec,
    PropertyPredictor,
    PropertyTarget,
    combine_property,
    combine_structure,
    conditioning_values,
    fuse_scores,
    fused_estimate,
    pcm_gradient,
    pcm_predict,
    scm_predict,
)

from tests.utils import tiny_config, tiny_params, toy_corpus, toy_vocab


def randn(*shape, seed=0):
    return torch.randn(*shape, generator=torch.Generator().manual_seed(seed), dtype=torch.float64)


@pytest.fixture
def predictor(tiny_config):
    spec = PredictorSpec("HBD", t_max=15, label_mean=1.0, label_std=0.8, use_scaffold=True)
    return PropertyPredictor.initial(tiny_config, spec, seed=5).double().eval()


def test_structure_endpoints():
    uncond, cond = randn(2, 3, 4, seed=1), randn(2, 3, 4, seed=2)
    assert torch.equal(combine_structure(uncond, cond, 1.0), uncond)
    assert torch.equal(combine_structure(uncond, cond, 0.0), cond)
    assert torch.equal(combine_structure(uncond, None, 0.3), uncond)
    assert_allclose(combine_structure(uncond, cond, 0.5).numpy(), ((uncond + cond) / 2).numpy(), atol=1e-12)


def test_property_combination():
    uncond, first, second = randn(2, 3, 4, seed=1), randn(2, 3, 4, seed=2), randn(2, 3, 4, seed=3)
    assert torch.equal(combine_property(uncond, [first], 1.0), uncond)
    result = combine_property(uncond, [first, second], 0.3, [1.0, 1.0])
    assert_allclose(result.numpy(), (0.3 * uncond + 0.7 * (first + second)).numpy(), atol=1e-12)
    with pytest.raises(ShapeMismatch):
        combine_property(uncond, [first], 0.3, [1.0, 2.0])


def test_fuse():
    first, second = randn(3, 4, seed=1), randn(3, 4, seed=2)
    assert torch.equal(fuse_scores(first, torch.zeros_like(first)), first)
    assert torch.equal(fuse_scores(first, second), fuse_scores(second, first))
    with pytest.raises(ShapeMismatch):
        fuse_scores(first, randn(4, 3))


@pytest.mark.parametrize("instance", range(100))
def test_fused_score_expansion(instance):
    generator = torch.Generator().manual_seed(instance)
    w_p = float(torch.rand(1, generator=generator, dtype=torch.float64))
    w_s = 1 - w_p
    uncond, cond, first, second = (randn(2, 5, 4, seed=100 * instance + idx) for idx in range(4))
    fused = fuse_scores(combine_structure(uncond, cond, w_s), combine_property(uncond, [first, second], w_p))
    expanded = uncond + (1 - w_s) * cond + (1 - w_p) * (first + second)
    assert_allclose(fused.numpy(), expanded.numpy(), atol=1e-10, rtol=0)


def test_scm_endpoints(tiny_params, tiny_config):
    x_t = torch.randn(2, tiny_config.seq_len, tiny_config.dim)
    scaffold = tiny_params.encode_scaffold("c1ccccc1").detach()
    with torch.no_grad():
        uncond = tiny_params.denoise_uncond(x_t, 4)
        cond = tiny_params.denoise_cond(x_t, 4, scaffold)
        assert torch.equal(scm_predict(tiny_params, x_t, 4, scaffold, 1.0), uncond)
        assert torch.equal(scm_predict(tiny_params, x_t, 4, scaffold, 0.0), cond)
        assert torch.equal(scm_predict(tiny_params, x_t, 4, None, 0.0), uncond)


def test_gradient_matches_finite_differences(predictor, tiny_config):
    for instance in range(5):
        x_t = randn(1, tiny_config.seq_len, tiny_config.dim, seed=instance)
        target = PropertyTarget("HBD", "target", 2.0)
        gradient = pcm_gradient(predictor, x_t, 6, target, sigma_g=0.7)

        def log_likelihood(values):
            with torch.no_grad():
                return float(-((predictor(values, 6) - 2.0) ** 2).sum() / (2 * 0.7**2))

        generator = torch.Generator().manual_seed(instance)
        for _ in range(10):
            position = tuple(int(torch.randint(size, (1,), generator=generator)) for size in x_t.shape)
            shift = torch.zeros_like(x_t)
            shift[position] = 1e-6
            numeric = (log_likelihood(x_t + shift) - log_likelihood(x_t - shift)) / 2e-6
            analytic = float(gradient[position])
            assert abs(numeric - analytic) <= 1e-4 * max(abs(numeric), 1e-3)


def test_gradient_vanishes_at_target(predictor, tiny_config):
    x_t = randn(2, tiny_config.seq_len, tiny_config.dim, seed=3)
    with torch.no_grad():
        prediction = float(predictor(x_t[:1], 3))
    gradient = pcm_gradient(predictor, x_t[0], 3, PropertyTarget("HBD", "target", prediction))
    assert torch.equal(gradient, torch.zeros_like(gradient))


def test_direction_flip_negates(predictor, tiny_config):
    x_t = randn(2, tiny_config.seq_len, tiny_config.dim, seed=4)
    up = pcm_gradient(predictor, x_t, 5, PropertyTarget("HBD", "maximize"))
    down = pcm_gradient(predictor, x_t, 5, PropertyTarget("HBD", "minimize"))
    assert_allclose(up.numpy(), (-down).numpy(), atol=1e-12)
    assert float(up.abs().sum()) > 0


def test_step_out_of_range(predictor, tiny_config):
    with pytest.raises(StepOutOfRange):
        pcm_gradient(predictor, randn(1, tiny_config.seq_len, tiny_config.dim), 16, PropertyTarget("HBD"))


def test_pcm_predict(tiny_params, predictor, tiny_config):
    params = tiny_params
    params.theta0.double()
    x_t = randn(2, tiny_config.seq_len, tiny_config.dim, seed=5)
    targets = [PropertyTarget("HBD", "maximize")]
    with torch.no_grad():
        uncond = params.denoise_uncond(x_t, 5)
    assert torch.equal(pcm_predict(params, {"HBD": predictor}, x_t, 5, targets, 1.0), uncond)
    above = pcm_predict(params, {"HBD": predictor}, x_t, 18, targets, 0.5, uncond=uncond)
    assert torch.equal(above, 0.5 * uncond)
    guided = pcm_predict(params, {"HBD": predictor}, x_t, 5, targets, 0.5, uncond=uncond)
    guidance = (guided - 0.5 * uncond) / 0.5
    assert_allclose(
        guidance.reshape(2, -1).norm(dim=1).numpy(), uncond.reshape(2, -1).norm(dim=1).numpy(), rtol=1e-9
    )


def test_conditioning_values(tiny_config):
    spec = PredictorSpec(
        "HBD", t_max=10, condition_on=("HBA", "MolWeight"), condition_stats={"HBA": (2.0, 1.0), "MolWeight": (100, 20)}
    )
    predictor = PropertyPredictor(tiny_config, spec)
    targets = [PropertyTarget("HBA", "minimize"), PropertyTarget("MolWeight", "target", 150.0)]
    assert conditioning_values(predictor, targets, kappa=2.0) == {"HBA": 0.0, "MolWeight": 150.0}


def test_fused_estimate_without_scaffold():
    uncond, first, second = randn(2, 3, 4, seed=4), randn(2, 3, 4, seed=5), randn(2, 3, 4, seed=6)
    result = fused_estimate(uncond, None, [first, second], 0.25, [2.0, -1.0])
    expected = uncond + 0.75 * (2.0 * first - 1.0 * second)
    assert_allclose(result.numpy(), expected.numpy(), atol=1e-12)
    assert torch.equal(fused_estimate(uncond, None, [first], 1.0), uncond)


def test_fused_estimate_with_scaffold():
    uncond, cond, gradient = randn(2, 3, 4, seed=7), randn(2, 3, 4, seed=8), randn(2, 3, 4, seed=9)
    structure = combine_structure(uncond, cond, 0.4)
    result = fused_estimate(uncond, structure, [gradient], 0.6)
    expected = 0.4 * uncond + 0.6 * cond + 0.6 * uncond + 0.4 * gradient
    assert_allclose(result.numpy(), expected.numpy(), atol=1e-12)
