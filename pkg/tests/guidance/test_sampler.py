# pylint: disable=redefined-outer-name, missing-function-docstring, unused-import
import pytest
import torch

from molforge.errors import ConfigError, DecodeFailure, DependencyMissing
from molforge.guidance import GuidanceConfig, PredictorSpec, PropertyPredictor, PropertyTarget, sample, sample_many

from tests.utils import tiny_config, tiny_params, toy_corpus, toy_vocab


@pytest.fixture
def predictors(tiny_config):
    spec = PredictorSpec("HBD", t_max=15, label_mean=1.0, label_std=0.8, use_scaffold=True)
    return {"HBD": PropertyPredictor.initial(tiny_config, spec, seed=5)}


def raw_outputs(results):
    return [result.raw for result in results]


def test_unconditional_is_deterministic(tiny_params):
    config = GuidanceConfig(w_s=1.0, w_p=1.0)
    first = sample_many(config, tiny_params, seed=7, count=3, batch_size=2)
    second = sample_many(config, tiny_params, seed=7, count=3, batch_size=2)
    assert raw_outputs(first) == raw_outputs(second)
    assert [result.chain for result in first] == [0, 1, 2]
    assert raw_outputs(sample_many(config, tiny_params, seed=8, count=3, batch_size=2)) != raw_outputs(first)


def test_workers_do_not_change_results(tiny_params):
    config = GuidanceConfig()
    single = sample_many(config, tiny_params, seed=3, count=4, batch_size=1)
    threaded = sample_many(config, tiny_params, seed=3, count=4, batch_size=1, workers=3)
    assert raw_outputs(single) == raw_outputs(threaded)


def test_trace_has_one_phase_change(tiny_params, tiny_config):
    result = sample_many(GuidanceConfig(trace_every=5), tiny_params, seed=1, count=1)[0]
    assert len(result.trace) == tiny_config.diffusion_steps
    assert result.trace.phase_changes == 1
    boundary = int(0.75 * tiny_config.diffusion_steps)
    assert [record.phase for record in result.trace.records].count("two") == boundary
    assert [record.step for record in result.trace.records if record.decode is not None] == [20, 15, 10, 5, 1]


def test_guided_sampling_records_every_component(tiny_params, predictors):
    config = GuidanceConfig(scaffold="c1ccccc1", targets=(PropertyTarget("HBD"),), w_s=0.5, w_p=0.5)
    result = sample_many(config, tiny_params, seed=2, count=2, predictors=predictors)[1]
    phase_one, phase_two = result.trace.records[0], result.trace.records[-1]
    assert set(phase_one.norms) == {"uncond", "cond"}
    assert set(phase_two.norms) == {"uncond", "cond", "grad_HBD"}


def test_clamped_sampling_runs(tiny_params):
    results = sample_many(GuidanceConfig(clamp_x0=True), tiny_params, seed=4, count=2)
    assert len(results) == 2


def test_sample_matches_first_chain(tiny_params):
    config = GuidanceConfig()
    first = sample_many(config, tiny_params, seed=9, count=2)[0]
    if first.decoded:
        smiles, trace = sample(config, tiny_params, seed=9)
        assert smiles == first.smiles
        assert len(trace) == len(first.trace)
    else:
        with pytest.raises(DecodeFailure):
            sample(config, tiny_params, seed=9)


def test_missing_predictor(tiny_params):
    config = GuidanceConfig(targets=(PropertyTarget("HBA"),))
    with pytest.raises(DependencyMissing):
        sample_many(config, tiny_params, seed=1, count=1)


def test_weights_must_agree_when_both_modules_are_on():
    with pytest.raises(ConfigError):
        GuidanceConfig(scaffold="c1ccccc1", targets=(PropertyTarget("HBD"),), w_s=0.3, w_p=0.3)
    GuidanceConfig(scaffold="c1ccccc1", w_s=0.3, w_p=0.3)


@pytest.mark.parametrize("text", ["HBD", "HBD:sideways:1", "HBD:maximize:x", ":maximize"])
def test_bad_target_text(text):
    with pytest.raises(ConfigError):
        PropertyTarget.parse(text)


def test_boundary_default_and_range():
    assert GuidanceConfig().boundary(200) == 150
    with pytest.raises(ConfigError):
        GuidanceConfig(t2_boundary=300).boundary(200)
