"""Ground-truth performance accounting and computable bound curves.

All metrics are post-processing over an immutable run trace: per-step true
mean vectors (from environment ground truth) aligned with the step records
emitted by the blender.  The bound curves are the explicit expressions behind
the regret and loss guarantees, evaluated with the run's hyperparameters.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blender import StepRecord
from .estimator import EstimatorConfig, beta_value


@dataclass
class RunTrace:
    records: list[StepRecord]
    true_means: list[np.ndarray]      # per step, (K, m) expected feedback per arm
    config: EstimatorConfig

    def __post_init__(self):
        if len(self.records) != len(self.true_means):
            raise ValueError(
                f"{len(self.records)} records vs {len(self.true_means)} true-mean entries"
            )

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class MetricSeries:
    pr_cum: np.ndarray
    cml_cum: np.ndarray
    cml_bound: np.ndarray
    pr_theory: np.ndarray
    correct_pick: np.ndarray          # bool per step
    psg_increment: np.ndarray
    ml_increment: np.ndarray


def _stacked(trace: RunTrace) -> tuple[np.ndarray, np.ndarray]:
    means = np.stack(trace.true_means)                       # (T, K, m)
    arms = np.array([rec.arm for rec in trace.records])
    return means, arms


def _per_step_gaps(trace: RunTrace) -> tuple[np.ndarray, np.ndarray]:
    means, arms = _stacked(trace)
    rows = np.arange(len(trace))
    diff = means[:, :, None, :] - means[:, None, :, :]       # (T, xp, x, m)
    psg_all = np.maximum(0.0, diff.min(axis=3).max(axis=1))  # (T, K)
    ml_all = np.maximum(0.0, means.max(axis=1)[:, None, :] - means).max(axis=2)
    return psg_all[rows, arms], ml_all[rows, arms]


def pareto_regret(trace: RunTrace) -> np.ndarray:
    """Cumulative sum of the pulled arms' true suboptimality gaps."""
    return np.cumsum(_per_step_gaps(trace)[0])


def cumulative_maximal_loss(trace: RunTrace) -> np.ndarray:
    """Cumulative sum of the pulled arms' true maximal losses."""
    return np.cumsum(_per_step_gaps(trace)[1])


def cml_upper_bound(trace: RunTrace) -> np.ndarray:
    """Cumulative on-the-fly loss bound: sum of est_loss + 2 beta_T ||psi||_{V^-1}.

    beta is evaluated at the run's final horizon, matching the step in the
    derivation that replaces the increasing beta_t by beta_T.
    """
    T = len(trace)
    beta_T = beta_value(T, trace.config)
    inc = np.array(
        [rec.est_losses[rec.arm] + 2.0 * beta_T * rec.inv_norm_pulled for rec in trace.records]
    )
    return np.cumsum(inc)


def pr_theory_bound(T: int, config: EstimatorConfig) -> float:
    """Explicit high-probability regret bound: 8 beta_T^2 sqrt(2 T d log(lam + T L / d))."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    b = beta_value(T, config)
    return float(8.0 * b**2 * np.sqrt(2.0 * T * config.d * np.log(config.lam + T * config.L / config.d)))


def correct_picks(trace: RunTrace) -> np.ndarray:
    """Per step, whether the pulled arm's true feedback vector is non-dominated."""
    means, arms = _stacked(trace)
    rows = np.arange(len(trace))
    mine = means[rows, arms][:, None, :]                     # (T, 1, m)
    geq = np.all(means >= mine, axis=2)                      # (T, K): arm j >= pulled
    gt = np.any(means > mine, axis=2)
    return ~np.any(geq & gt, axis=1)


def correct_pick_rate(trace: RunTrace) -> float:
    """Fraction of steps on which the pulled arm was not Pareto dominated."""
    return float(correct_picks(trace).mean())


def compute_series(trace: RunTrace) -> MetricSeries:
    """All metric curves for one trace."""
    psg, ml = _per_step_gaps(trace)
    T = len(trace)
    return MetricSeries(
        pr_cum=np.cumsum(psg),
        cml_cum=np.cumsum(ml),
        cml_bound=cml_upper_bound(trace),
        pr_theory=np.array([pr_theory_bound(t, trace.config) for t in range(1, T + 1)]),
        correct_pick=correct_picks(trace),
        psg_increment=psg,
        ml_increment=ml,
    )
