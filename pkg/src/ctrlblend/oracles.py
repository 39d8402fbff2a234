"""Brute-force oracles for the Pareto losses and the incremental estimator.

These deliberately avoid the closed forms used by the library: the loss
measures are recovered by bisection on their defining predicates, and the
incremental least-squares state is compared against a direct dense solve on
the full data.  Used by the test suite and the ``oracle-check`` CLI command.
"""
from __future__ import annotations

import numpy as np

from .estimator import Estimator, EstimatorConfig, batch_solve
from .pareto import dominates

BISECT_ITERS = 60


def _bisect(predicate, hi: float) -> float:
    """Smallest eps in [0, hi] where the monotone predicate turns true."""
    if predicate(0.0):
        return 0.0
    lo = 0.0
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def gap_oracle(means, arm: int) -> float:
    """Suboptimality gap via bisection on 'mu + eps*1 is not dominated by any arm'."""
    mat = np.asarray(means, dtype=float)
    span = float(mat.max() - mat.min()) + 1.0
    others = np.delete(mat, arm, axis=0)

    def escaped(eps: float) -> bool:
        shifted = mat[arm] + eps
        dominated = (others >= shifted).all(axis=1) & (others > shifted).any(axis=1)
        return not dominated.any()

    return _bisect(escaped, span)


def maximal_loss_oracle(means, arm: int) -> float:
    """Maximal loss via bisection on 'mu + eps*1 dominates every arm' (infimum of closure)."""
    mat = np.asarray(means, dtype=float)
    span = float(mat.max() - mat.min()) + 1.0
    others = np.delete(mat, arm, axis=0)

    def dominates_all(eps: float) -> bool:
        shifted = mat[arm] + eps
        beats = (shifted >= others).all(axis=1) & (shifted > others).any(axis=1)
        return bool(beats.all())

    return _bisect(dominates_all, span)


def non_dominated_oracle(vectors) -> set[int]:
    """Exhaustive pairwise non-dominated set."""
    mat = np.asarray(vectors, dtype=float)
    n = mat.shape[0]
    return {
        i for i in range(n)
        if not any(dominates(mat[j], mat[i]) for j in range(n) if j != i)
    }


def pareto_oracle_deviation(cases: int, seed: int = 0) -> float:
    """Max |closed form - bisection| over random instances (K<=6, m<=4, values in [-1,1])."""
    from .pareto import maximal_losses, suboptimality_gaps

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 5))
        mat = rng.uniform(-1.0, 1.0, size=(n, m))
        if rng.random() < 0.2 and n > 1:
            mat[rng.integers(n)] = mat[rng.integers(n)]   # force exact ties sometimes
        arm = int(rng.integers(n))
        worst = max(worst, abs(suboptimality_gaps(mat)[arm] - gap_oracle(mat, arm)))
        worst = max(worst, abs(maximal_losses(mat)[arm] - maximal_loss_oracle(mat, arm)))
    return worst


def estimator_oracle_deviation(updates: int, d: int = 8, m: int = 2, seed: int = 0) -> float:
    """Max |incremental theta_hat - dense batch ridge solve| over a random update stream."""
    rng = np.random.default_rng(seed)
    config = EstimatorConfig(d=d, m=m, lam=1.0, L=1.0)
    est = Estimator(config)
    contexts = np.empty((updates, d))
    targets = np.empty((updates, m))
    worst = 0.0
    check_at = {updates} | {int(x) for x in np.linspace(1, updates, num=min(updates, 25))}
    for t in range(updates):
        psi = rng.standard_normal(d)
        psi /= max(np.linalg.norm(psi), 1.0)
        y = rng.uniform(-1.0, 1.0, size=m)
        contexts[t] = psi
        targets[t] = y
        est.update(psi, y)
        if t + 1 in check_at:
            for i in range(m):
                ref = batch_solve(contexts[: t + 1], targets[: t + 1, i], config.lam)
                worst = max(worst, float(np.abs(est.theta_hat[i] - ref).max()))
    return worst
