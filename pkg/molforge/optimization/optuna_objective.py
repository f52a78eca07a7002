"""
Search of guidance weights and the phase boundary with optuna
"""
import logging
from copy import deepcopy
from dataclasses import replace
from functools import partial
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from optuna import Study, Trial, create_study
from optuna.samplers import TPESampler

from molforge.chem import CorpusStats, MoleculeGraph
from molforge.diffusion import DenoiserParams
from molforge.errors import ConfigError, EmptySampleSet
from molforge.guidance import GuidanceConfig, PropertyPredictor, sample_many
from molforge.metrics import EvalReport, evaluate

logger = logging.getLogger("molforge")

SEARCH_SPACE: Dict[str, Dict[str, Any]] = {
    "w_p": {"type": "uniform", "args": [0.0, 1.0]},
    "boundary_fraction": {"type": "uniform", "args": [0.5, 1.0]},
}


# pylint: disable=too-few-public-methods
class ObjectiveWrapper:
    """
    This class is implemented according to
    `instruction <https://optuna.readthedocs.io/en/stable/faq.html#how-to-define-objective-functions-that-have-own-arguments>`_
    on integration with ``optuna``.

    Criterion is calculated with ``__call__``,
    other arguments are passed into ``__init__``.
    """

    def __init__(self, objective_calculator: Callable[..., float], **kwargs: Any):
        self.objective_calculator = objective_calculator
        self.kwargs = kwargs

    def __call__(self, trial: Trial) -> float:
        """
        Calculate criterion for ``optuna``.

        :param trial: current trial
        :return: criterion value
        """
        return self.objective_calculator(trial=trial, **self.kwargs)


def suggest_params(trial: Trial, search_space: Dict[str, Dict[str, Union[str, List[Any]]]]) -> Dict[str, Any]:
    """
    This function suggests params to try.

    :param trial: optuna trial
    :param search_space: parameters and their bounds
    :return: dict with parameter values
    """
    suggest_dict = {
        "uniform": trial.suggest_float,
        "int": trial.suggest_int,
        "loguniform": partial(trial.suggest_float, log=True),
    }
    res = {}
    for param, space in search_space.items():
        low, high = space["args"]
        res[param] = suggest_dict[space["type"]](param, low=low, high=high)
    return res


def prepare_param_borders(param_borders: Optional[Mapping[str, Sequence[float]]] = None) -> Dict[str, Dict[str, Any]]:
    """
    Search space with user borders.

    >>> prepare_param_borders({"w_p": [0.2, 0.8]})["w_p"]["args"]
    [0.2, 0.8]

    :param param_borders: ``{param: [low, high]}``, parameters absent keep their default range
    """
    search_space = deepcopy(SEARCH_SPACE)
    for param, borders in (param_borders or {}).items():
        if param not in search_space:
            raise ConfigError(f"{param} is not searched, expected one of {sorted(search_space)}")
        borders = list(borders)
        default_low, default_high = SEARCH_SPACE[param]["args"]
        if len(borders) != 2 or not default_low <= borders[0] <= borders[1] <= default_high:
            raise ConfigError(f"{param} borders must be [low, high] within [{default_low}, {default_high}]")
        search_space[param]["args"] = borders
    return search_space


def trial_config(config: GuidanceConfig, w_p: float, boundary_fraction: float, steps: int) -> GuidanceConfig:
    """
    Guidance settings of one trial, ``w_s`` is tied to ``1 - w_p``.

    :param steps: diffusion steps T of the model
    """
    return replace(config, w_p=w_p, w_s=1 - w_p, t2_boundary=int(round(boundary_fraction * steps)))


def guidance_score(report: EvalReport, weights: Mapping[str, float]) -> float:
    """
    Scaffold existence plus lambda-weighted improvements in hundredths.

    >>> report = EvalReport(4, 4, 4, 1.0, 1.0, 1.0, scaffold="c1ccccc1", scaffold_existence=0.5)
    >>> report.improvements = {"HBD": 20.0, "SASProxy": None}
    >>> guidance_score(report, {"HBD": 2.0, "SASProxy": 1.0})
    0.9
    """
    existence = report.scaffold_existence
    score = 0.0 if existence is None or existence != existence else existence
    for desc, value in report.improvements.items():
        if value is not None:
            score += weights.get(desc, 1.0) * value / 100
    return score


# pylint: disable=too-many-arguments
def guidance_objective_calculator(
    trial: Trial,
    search_space: Dict[str, Dict[str, Any]],
    config: GuidanceConfig,
    params: DenoiserParams,
    predictors: Mapping[str, PropertyPredictor],
    corpus: Sequence[MoleculeGraph],
    stats: Optional[CorpusStats],
    seed: int,
    count: int,
    workers: int = 1,
) -> float:
    """
    Sample with suggested weights and score the batch.

    :param trial: optuna trial
    :param search_space: ``w_p`` and ``boundary_fraction`` bounds
    :param config: guidance goals, its weights and boundary are replaced
    :param params: trained denoisers
    :param predictors: property regressors by descriptor id
    :param corpus: training molecules for the baselines
    :param stats: corpus statistics
    :param seed: sampling seed, shared by all trials
    :param count: samples per trial
    :param workers: sampling threads
    :return: guidance score
    """
    suggested = suggest_params(trial, search_space)
    current = trial_config(config, suggested["w_p"], suggested["boundary_fraction"], params.config.diffusion_steps)
    logger.debug("Sampling inside optimization with %s", suggested)
    results = sample_many(current, params, seed, count, predictors, workers=workers)
    texts = [result.smiles for result in results if result.decoded]
    try:
        report = evaluate(texts, corpus, current.scaffold, current.targets, stats)
    except EmptySampleSet:
        logger.debug("no chain decoded, trial scores zero")
        return 0.0
    weights = {target.descriptor: target.weight for target in current.targets}
    value = guidance_score(report, weights)
    logger.debug("score=%.6f", value)
    return value


GuidanceObjective = partial(ObjectiveWrapper, objective_calculator=guidance_objective_calculator)


# pylint: disable=too-many-arguments
def tune_guidance(
    config: GuidanceConfig,
    params: DenoiserParams,
    predictors: Mapping[str, PropertyPredictor],
    corpus: Sequence[MoleculeGraph],
    stats: Optional[CorpusStats] = None,
    seed: int = 0,
    count: int = 32,
    budget: int = 10,
    param_borders: Optional[Mapping[str, Sequence[float]]] = None,
    workers: int = 1,
) -> Tuple[Dict[str, Any], Study]:
    """
    Searches the best guidance weights with optuna.

    :param config: guidance goals, at least a scaffold or a property target
    :param params: trained denoisers
    :param predictors: property regressors by descriptor id
    :param corpus: training molecules
    :param stats: corpus statistics
    :param seed: seeds the TPE sampler and every trial's chains
    :param count: samples per trial
    :param budget: number of trials
    :param param_borders: ``{param: [low, high]}`` for ``w_p`` and ``boundary_fraction``
    :param workers: sampling threads
    :return: best parameters and the study
    """
    if not config.structure_active and not config.property_active:
        raise ConfigError("tuning needs a scaffold or a property target")
    search_space = prepare_param_borders(param_borders)
    study = create_study(direction="maximize", sampler=TPESampler(seed=seed))
    steps = params.config.diffusion_steps
    initial = {"w_p": config.w_p, "boundary_fraction": config.boundary(steps) / steps}
    if all(space["args"][0] <= initial[name] <= space["args"][1] for name, space in search_space.items()):
        study.enqueue_trial(initial)
    objective = GuidanceObjective(
        search_space=search_space,
        config=config,
        params=params,
        predictors=predictors,
        corpus=corpus,
        stats=stats,
        seed=seed,
        count=count,
        workers=workers,
    )
    study.optimize(objective, budget)
    best_params = study.best_params
    logger.info("best guidance parameters %s with score %.4f", best_params, study.best_value)
    return best_params, study
