"""Synthetic linear-feedback environment with subgaussian noise.

Feedback for the pulled arm is theta_star @ psi plus a single noise draw per
step shared across objectives (the literal reading of the feedback model); a
per-objective-noise variant is available behind a flag.  Contexts are fresh
i.i.d. draws from the ball of radius L for every arm at every step.
"""
from __future__ import annotations

import numpy as np

NOISE_MODELS = ("gaussian", "uniform")


def sample_theta_star(m: int, d: int, S: float, seed) -> np.ndarray:
    """Random coefficient rows with 2-norm exactly 0.9*S (inside the S-ball)."""
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal((m, d))
    theta *= (0.9 * S) / np.linalg.norm(theta, axis=1, keepdims=True)
    return theta


class SyntheticLinearEnv:
    """K-armed environment with known linear feedback coefficients."""

    def __init__(
        self,
        theta_star,
        K: int,
        L: float = 1.0,
        sigma: float = 0.1,
        noise: str = "gaussian",
        per_objective_noise: bool = False,
        seed=None,
    ):
        self.theta_star = np.asarray(theta_star, dtype=float)
        if self.theta_star.ndim != 2:
            raise ValueError("theta_star must have shape (m, d)")
        self.m, self.d = self.theta_star.shape
        if K < 1:
            raise ValueError(f"need K >= 1 arms, got {K}")
        if noise not in NOISE_MODELS:
            raise ValueError(f"noise must be one of {NOISE_MODELS}, got {noise!r}")
        self.K = K
        self.L = float(L)
        self.sigma = float(sigma)
        self.noise = noise
        self.per_objective_noise = per_objective_noise
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        ctx_ss, noise_ss = ss.spawn(2)
        self._ctx_rng = np.random.default_rng(ctx_ss)
        self._noise_rng = np.random.default_rng(noise_ss)
        self._contexts: np.ndarray | None = None

    def sample_contexts(self) -> np.ndarray:
        """Draw fresh i.i.d. contexts for all arms, uniform in the L-ball."""
        g = self._ctx_rng.standard_normal((self.K, self.d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        radii = self.L * self._ctx_rng.random(self.K) ** (1.0 / self.d)
        self._contexts = g * radii[:, None]
        return self._contexts

    def _noise_draw(self) -> np.ndarray:
        size = self.m if self.per_objective_noise else 1
        if self.noise == "gaussian":
            eta = self._noise_rng.normal(0.0, self.sigma, size=size)
        else:
            # bounded uniform with matching variance sigma^2
            half = self.sigma * np.sqrt(3.0)
            eta = self._noise_rng.uniform(-half, half, size=size)
        return eta if self.per_objective_noise else np.full(self.m, eta[0])

    def feedback_for(self, arm: int) -> np.ndarray:
        """Noisy feedback for the given arm at the already-sampled contexts."""
        if self._contexts is None:
            raise RuntimeError("sample_contexts must be called before feedback_for")
        if not 0 <= arm < self.K:
            raise IndexError(f"arm {arm} out of range for K={self.K}")
        return self.theta_star @ self._contexts[arm] + self._noise_draw()

    def synth_step(self, arm: int) -> tuple[np.ndarray, np.ndarray]:
        """Fresh contexts for all arms plus the pulled arm's noisy feedback."""
        contexts = self.sample_contexts()
        return contexts, self.feedback_for(arm)

    def true_means(self, contexts_all_arms) -> np.ndarray:
        """Expected feedback per arm at the given contexts, shape (K, m)."""
        contexts = np.asarray(contexts_all_arms, dtype=float)
        return contexts @ self.theta_star.T
