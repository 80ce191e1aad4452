"""Experiment orchestration: configs, scenario runs, Monte Carlo, gain maps, CLI."""

from .config import DropDistribution, ScenarioConfig, config_from_dict, load_config, trial_rng
from .experiments import (
    SCHEMES,
    heatmap,
    monte_carlo,
    robustness_sweep,
    run_scenario,
    separation_degradation,
)

__all__ = [
    "DropDistribution",
    "SCHEMES",
    "ScenarioConfig",
    "config_from_dict",
    "heatmap",
    "load_config",
    "monte_carlo",
    "robustness_sweep",
    "run_scenario",
    "separation_degradation",
    "trial_rng",
]
