"""Pareto dominance algebra over objective vectors.

All objectives are maximized.  The two loss measures defined here share the
same structure: the smallest uniform (componentwise) shift ``eps`` that makes
an arm's mean vector escape domination (suboptimality gap) or dominate every
competitor (maximal loss).  Both have closed forms in terms of coordinatewise
max/min reductions, which is what we implement; the brute-force bisection
oracles live in the test suite.
"""
from __future__ import annotations

import numpy as np


def _as_matrix(vectors) -> np.ndarray:
    mat = np.asarray(vectors, dtype=float)
    if mat.ndim == 1:
        mat = mat[None, :]
    if mat.ndim != 2 or mat.shape[0] == 0 or mat.shape[1] == 0:
        raise ValueError(f"expected a non-empty list of equal-length vectors, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("objective vectors must be finite")
    return mat


def dominates(u, v) -> bool:
    """True iff u Pareto dominates v: u >= v componentwise with at least one strict coordinate."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("objective vectors must be finite")
    return bool(np.all(u >= v) and np.any(u > v))


def non_dominated_set(vectors) -> set[int]:
    """Indices of vectors not Pareto dominated by any other vector in the list."""
    mat = _as_matrix(vectors)
    n = mat.shape[0]
    # i is dominated by j iff mat[j] >= mat[i] everywhere and > somewhere
    geq = np.all(mat[:, None, :] >= mat[None, :, :], axis=2)   # geq[j, i]
    gt = np.any(mat[:, None, :] > mat[None, :, :], axis=2)
    dominated = np.any(geq & gt, axis=0)
    result = {i for i in range(n) if not dominated[i]}
    assert result, "non-dominated set cannot be empty"
    return result


def suboptimality_gaps(means) -> np.ndarray:
    """Suboptimality gap of every arm: max(0, max_{x'} min_i (mu_{x'} - mu_x)).

    The gap is the smallest uniform shift that makes the arm's mean vector
    non-dominated by every other arm's.
    """
    mat = _as_matrix(means)
    # diff[xp, x, i] = mu_{xp, i} - mu_{x, i}
    diff = mat[:, None, :] - mat[None, :, :]
    return np.maximum(0.0, diff.min(axis=2).max(axis=0))


def maximal_losses(means) -> np.ndarray:
    """Maximal loss of every arm: max(0, max_{x'} max_i (mu_{x'} - mu_x)).

    Equivalently the smallest uniform shift that makes the arm's mean vector
    dominate every other arm's (infimum of the closure at equality ties).
    """
    mat = _as_matrix(means)
    return np.maximum(0.0, mat.max(axis=0)[None, :] - mat).max(axis=1)


def _check_arm(means, arm: int) -> np.ndarray:
    mat = _as_matrix(means)
    if not 0 <= arm < mat.shape[0]:
        raise IndexError(f"arm index {arm} out of range for {mat.shape[0]} arms")
    return mat


def pareto_suboptimality_gap(means, arm: int) -> float:
    """Suboptimality gap of a single arm."""
    mat = _check_arm(means, arm)
    return float(suboptimality_gaps(mat)[arm])


def maximal_loss(means, arm: int) -> float:
    """Maximal loss of a single arm."""
    mat = _check_arm(means, arm)
    return float(maximal_losses(mat)[arm])
