"""Contextual multi-objective bandit for blending a safe and a performant controller."""

from .blender import Blender, StepRecord, assert_nondominated_pick
from .estimator import Estimator, EstimatorConfig, batch_solve, beta_value
from .metrics import (
    RunTrace,
    cml_upper_bound,
    correct_pick_rate,
    cumulative_maximal_loss,
    pareto_regret,
    pr_theory_bound,
)
from .pareto import (
    dominates,
    maximal_loss,
    maximal_losses,
    non_dominated_set,
    pareto_suboptimality_gap,
    suboptimality_gaps,
)

__all__ = [
    "Blender",
    "StepRecord",
    "assert_nondominated_pick",
    "Estimator",
    "EstimatorConfig",
    "batch_solve",
    "beta_value",
    "RunTrace",
    "cml_upper_bound",
    "correct_pick_rate",
    "cumulative_maximal_loss",
    "pareto_regret",
    "pr_theory_bound",
    "dominates",
    "maximal_loss",
    "maximal_losses",
    "non_dominated_set",
    "pareto_suboptimality_gap",
    "suboptimality_gaps",
]
