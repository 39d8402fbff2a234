"""The controller-blending bandit state machine.

At each step an arm is pulled uniformly at random from the candidate set O,
the estimator ingests the pulled arm's context and feedback, UCB indices are
recomputed for every arm, the estimated maximal losses are derived from them,
and the next candidate set is the exact argmin of those estimated losses.

Two orderings are supported:

* faithful (default): O was formed from the previous step's contexts, so the
  pull lags the contexts by one step, matching the pseudocode ordering.
* fresh_context: the caller supplies the current contexts via
  ``refresh_candidates`` before pulling, and O is recomputed pre-pull.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimator import Estimator, EstimatorConfig
from .pareto import dominates, maximal_losses


@dataclass
class StepRecord:
    """Everything observed and computed at one step, for metric computation."""
    step: int
    arm: int
    context_pulled: np.ndarray          # psi of the pulled arm, shape (d,)
    feedback: np.ndarray                # shape (m,)
    ucb_indices: np.ndarray             # (K, m), computed post-update this step
    est_losses: np.ndarray              # (K,), from ucb_indices
    inv_norm_pulled: float              # ||psi||_{V_t^-1}, post-update
    beta_t: float
    # UCB matrix that produced the candidate set this pull was drawn from
    # (None for the initial pulls from the full arm set).
    pull_ucb: np.ndarray | None = field(default=None, repr=False)


def estimated_losses(ucb_indices) -> np.ndarray:
    """Per-arm estimated maximal loss computed from the UCB index vectors."""
    return maximal_losses(ucb_indices)


def assert_nondominated_pick(record: StepRecord) -> bool:
    """Check the pulled arm's UCB row is not dominated among the indices that formed its O-set."""
    if record.pull_ucb is None:
        return True
    row = record.pull_ucb[record.arm]
    return not any(
        dominates(record.pull_ucb[other], row)
        for other in range(record.pull_ucb.shape[0])
        if other != record.arm
    )


class Blender:
    """Sequential blending bandit over K arms (single-writer state machine)."""

    def __init__(self, config: EstimatorConfig, n_arms: int, rng, fresh_context: bool = False):
        if n_arms < 1:
            raise ValueError(f"need at least one arm, got {n_arms}")
        self.config = config
        self.n_arms = n_arms
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.fresh_context = fresh_context
        self.estimator = Estimator(config)
        self.candidate_set: list[int] = list(range(n_arms))
        self.step = 0
        self._last_ucb: np.ndarray | None = None   # matrix that formed candidate_set

    def select_arm(self) -> int:
        """Uniform draw from the current candidate set."""
        if not self.candidate_set:
            raise RuntimeError("candidate set is empty (internal invariant violation)")
        return int(self.candidate_set[self.rng.integers(len(self.candidate_set))])

    def refresh_candidates(self, contexts_all_arms) -> None:
        """Recompute O from the supplied contexts without updating the estimator.

        Used in fresh_context mode so the pull reflects the current state.
        """
        ucb = self.estimator.ucb_all(contexts_all_arms)
        losses = estimated_losses(ucb)
        self._set_candidates(ucb, losses)

    def _set_candidates(self, ucb: np.ndarray, losses: np.ndarray) -> None:
        best = losses.min()
        self.candidate_set = [k for k in range(self.n_arms) if losses[k] == best]
        self._last_ucb = ucb

    def observe(self, arm: int, feedback, contexts_all_arms) -> StepRecord:
        """Ingest one step: estimator update, UCB/loss recomputation, new candidate set."""
        if not 0 <= arm < self.n_arms:
            raise IndexError(f"arm {arm} out of range for K={self.n_arms}")
        contexts = np.asarray(contexts_all_arms, dtype=float)
        if contexts.shape != (self.n_arms, self.config.d):
            raise ValueError(
                f"contexts shape {contexts.shape}, expected ({self.n_arms}, {self.config.d})"
            )
        feedback = np.asarray(feedback, dtype=float)
        pull_ucb = self._last_ucb

        psi = contexts[arm]
        self.estimator.update(psi, feedback)
        ucb = self.estimator.ucb_all(contexts)
        losses = estimated_losses(ucb)
        self._set_candidates(ucb, losses)
        self.step += 1
        return StepRecord(
            step=self.step,
            arm=arm,
            context_pulled=psi.copy(),
            feedback=feedback.copy(),
            ucb_indices=ucb,
            est_losses=losses,
            inv_norm_pulled=self.estimator.inv_norm(psi),
            beta_t=self.estimator.beta(),
            pull_ucb=pull_ucb,
        )
