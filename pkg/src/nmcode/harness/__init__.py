"""Experiment runners, outcome statistics and the command line."""
from .experiments import ExperimentConfig, run, run_hybrid_replay, run_nm_experiment, run_switching_experiment
from .stats import BOTTOM, DistributionTable, hoeffding_halfwidth, stat_distance

__all__ = ["ExperimentConfig", "run", "run_hybrid_replay", "run_nm_experiment", "run_switching_experiment",
           "BOTTOM", "DistributionTable", "hoeffding_halfwidth", "stat_distance"]
