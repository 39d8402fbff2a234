"""Incremental per-objective l2-regularized least squares with confidence ellipsoids.

One shared Gram matrix V_t = lambda*I + sum_s psi_s psi_s^T serves all m
objectives; the per-objective moment vectors W and coefficient estimates
theta_hat are stacked as (m, d) arrays.  The inverse of V is maintained by a
rank-one update and re-factorized periodically to keep drift bounded, so a
single update costs O(m*d + d^2).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EstimatorConfig:
    d: int
    m: int
    lam: float = 1.0
    sigma: float = 0.1
    S: float = 1.5
    L: float = 1.0
    delta: float = 0.1

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError(f"d and m must be positive, got d={self.d}, m={self.m}")
        for name in ("lam", "sigma", "S", "L"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.lam < max(1.0, self.L**2):
            raise ValueError(
                f"lam={self.lam} violates lam >= max(1, L^2) = {max(1.0, self.L**2)}"
            )


def beta_value(t: int, config: EstimatorConfig) -> float:
    """Confidence-ellipsoid radius after t updates.

    beta_t = sigma * sqrt(d * log((1 + t L^2 / lam) / delta)) + sqrt(lam) * S
    """
    arg = config.d * np.log((1.0 + t * config.L**2 / config.lam) / config.delta)
    return float(config.sigma * np.sqrt(max(arg, 0.0)) + np.sqrt(config.lam) * config.S)


def batch_solve(contexts, targets, lam: float) -> np.ndarray:
    """Direct dense ridge solve (Psi^T Psi + lam I)^-1 Psi^T y.

    Test oracle for the incremental estimate; contexts may be empty, in which
    case the dimension is taken from the (required) 2-D contexts array.
    """
    psi = np.asarray(contexts, dtype=float)
    y = np.asarray(targets, dtype=float)
    if psi.ndim != 2:
        raise ValueError("contexts must be a 2-D array (n, d)")
    if y.shape != (psi.shape[0],):
        raise ValueError(f"targets shape {y.shape} does not match {psi.shape[0]} contexts")
    d = psi.shape[1]
    gram = psi.T @ psi + lam * np.eye(d)
    return np.linalg.solve(gram, psi.T @ y)


class Estimator:
    """Mutable estimator state (V, V_inv, W, theta_hat, t) with query ops."""

    REFRESH_EVERY = 1000
    DRIFT_TOL = 1e-6

    def __init__(self, config: EstimatorConfig):
        self.config = config
        d, m = config.d, config.m
        self.V = config.lam * np.eye(d)
        self.V_inv = np.eye(d) / config.lam
        self.W = np.zeros((m, d))
        self.theta_hat = np.zeros((m, d))
        self.t = 0

    def update(self, psi, y) -> None:
        """Ingest one (context, feedback) pair: rank-one V update, W update, theta refresh."""
        psi = np.asarray(psi, dtype=float)
        y = np.asarray(y, dtype=float)
        if psi.shape != (self.config.d,):
            raise ValueError(f"context shape {psi.shape}, expected ({self.config.d},)")
        if y.shape != (self.config.m,):
            raise ValueError(f"feedback shape {y.shape}, expected ({self.config.m},)")
        if not np.all(np.isfinite(y)):
            raise ValueError("feedback must be finite")
        norm = np.linalg.norm(psi)
        if norm > self.config.L * (1 + 1e-12):
            warnings.warn(
                f"context norm {norm:.6g} exceeds L={self.config.L}; "
                "confidence radius no longer guaranteed",
                stacklevel=2,
            )
        self.V += np.outer(psi, psi)
        # Sherman-Morrison on the cached inverse
        vp = self.V_inv @ psi
        self.V_inv -= np.outer(vp, vp) / (1.0 + psi @ vp)
        self.W += y[:, None] * psi[None, :]
        self.t += 1
        if self.t % self.REFRESH_EVERY == 0 or self._drift() > self.DRIFT_TOL:
            self._refactor()
        self.theta_hat = self.W @ self.V_inv  # V_inv symmetric

    def _drift(self) -> float:
        return float(np.abs(self.V @ self.V_inv - np.eye(self.config.d)).max())

    def _refactor(self) -> None:
        self.V_inv = np.linalg.inv(self.V)
        self.V_inv = 0.5 * (self.V_inv + self.V_inv.T)

    def beta(self) -> float:
        return beta_value(self.t, self.config)

    def inv_norm(self, psi) -> float:
        """The V_t^-1 norm of psi, sqrt(psi^T V_inv psi)."""
        psi = np.asarray(psi, dtype=float)
        if psi.shape != (self.config.d,):
            raise ValueError(f"context shape {psi.shape}, expected ({self.config.d},)")
        return float(np.sqrt(max(psi @ self.V_inv @ psi, 0.0)))

    def ucb_index(self, psi, objective: int) -> float:
        """Optimistic feedback estimate theta_hat . psi + beta_t ||psi||_{V^-1}."""
        if not 0 <= objective < self.config.m:
            raise IndexError(f"objective {objective} out of range for m={self.config.m}")
        psi = np.asarray(psi, dtype=float)
        if psi.shape != (self.config.d,):
            raise ValueError(f"context shape {psi.shape}, expected ({self.config.d},)")
        return float(self.theta_hat[objective] @ psi + self.beta() * self.inv_norm(psi))

    def ucb_all(self, contexts) -> np.ndarray:
        """UCB indices for a (K, d) stack of contexts, returned as (K, m)."""
        ctx = np.asarray(contexts, dtype=float)
        if ctx.ndim != 2 or ctx.shape[1] != self.config.d:
            raise ValueError(f"contexts shape {ctx.shape}, expected (K, {self.config.d})")
        mean = ctx @ self.theta_hat.T                                   # (K, m)
        widths = np.sqrt(np.maximum(np.einsum("kd,de,ke->k", ctx, self.V_inv, ctx), 0.0))
        return mean + self.beta() * widths[:, None]

    # -- snapshot serialization (versioned structured text) ------------------

    SNAPSHOT_VERSION = 1

    def to_dict(self) -> dict:
        return {
            "version": self.SNAPSHOT_VERSION,
            "config": vars(self.config) | {},
            "t": self.t,
            "V": self.V.ravel().tolist(),
            "W": self.W.ravel().tolist(),
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_dict(cls, data: dict) -> "Estimator":
        if data.get("version") != cls.SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {data.get('version')!r}")
        config = EstimatorConfig(**data["config"])
        est = cls(config)
        est.t = int(data["t"])
        est.V = np.array(data["V"], dtype=float).reshape(config.d, config.d)
        est.W = np.array(data["W"], dtype=float).reshape(config.m, config.d)
        est._refactor()
        est.theta_hat = est.W @ est.V_inv
        return est

    @classmethod
    def load(cls, path) -> "Estimator":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
