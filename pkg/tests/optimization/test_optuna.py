# pylint: disable=redefined-outer-name, missing-function-docstring, unused-import
import pytest

from molforge.chem import parse_smiles
from molforge.errors import ConfigError
from molforge.guidance import GuidanceConfig, PropertyTarget
from molforge.metrics import EvalReport
from molforge.optimization import SEARCH_SPACE, guidance_score, prepare_param_borders, trial_config, tune_guidance

from tests.utils import SMALL_CORPUS, fix_seeds, tiny_config, tiny_params, toy_corpus, toy_vocab


@pytest.mark.parametrize(
    "borders",
    [
        {"wrong_name": [0, 1]},
        {"w_p": [0.5]},
        {"w_p": [0.8, 0.2]},
        {"boundary_fraction": [0.2, 0.9]},
        {"boundary_fraction": [0.6, 1.2]},
    ],
    ids=["wrong name", "border's too short", "reversed", "below range", "above range"],
)
def test_bad_borders(borders):
    with pytest.raises(ConfigError):
        prepare_param_borders(borders)


def test_partial_borders():
    space = prepare_param_borders({"w_p": [0.1, 0.4]})
    assert space["w_p"]["args"] == [0.1, 0.4]
    assert space["boundary_fraction"] == SEARCH_SPACE["boundary_fraction"]
    assert SEARCH_SPACE["w_p"]["args"] == [0.0, 1.0]


def test_trial_config_ties_weights():
    config = GuidanceConfig(scaffold="c1ccccc1", targets=(PropertyTarget("HBD"),))
    current = trial_config(config, 0.3, 0.5, 20)
    assert current.w_p == 0.3
    assert current.w_s == pytest.approx(0.7)
    assert current.boundary(20) == 10


def test_score_ignores_missing_values():
    report = EvalReport(2, 2, 0, 0.0, 0.0, 0.0, scaffold="c1ccccc1", scaffold_existence=float("nan"))
    report.improvements = {"HBD": None}
    assert guidance_score(report, {"HBD": 1.0}) == 0.0


def test_tuning_needs_a_goal(tiny_params):
    with pytest.raises(ConfigError):
        tune_guidance(GuidanceConfig(), tiny_params, {}, [])


def test_tune_guidance(tiny_params):
    corpus = [parse_smiles(text) for text in SMALL_CORPUS]
    config = GuidanceConfig(scaffold="c1ccccc1")
    best, study = tune_guidance(config, tiny_params, {}, corpus, seed=5, count=2, budget=2)
    assert set(best) == {"w_p", "boundary_fraction"}
    assert len(study.trials) == 2
    assert study.trials[0].params == {"w_p": 0.5, "boundary_fraction": 0.75}
    assert 0.5 <= best["boundary_fraction"] <= 1.0
