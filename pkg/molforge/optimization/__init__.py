"""
Guidance weight search with optuna
"""
from molforge.optimization.optuna_objective import (
    SEARCH_SPACE,
    GuidanceObjective,
    guidance_score,
    prepare_param_borders,
    trial_config,
    tune_guidance,
)
