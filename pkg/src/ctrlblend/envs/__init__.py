from .gridworld import Controller, GridworldEnv, GridworldSession, grid_build_controllers
from .synthetic import SyntheticLinearEnv, sample_theta_star

__all__ = [
    "Controller",
    "GridworldEnv",
    "GridworldSession",
    "grid_build_controllers",
    "SyntheticLinearEnv",
    "sample_theta_star",
]
