"""Deterministic gridworld with a hand-built safe and performant controller.

The agent moves with king moves (8-connected, off-grid moves clipped).  Cost
is incurred on hazard cells (1.0) and on cells Chebyshev-adjacent to a hazard
(0.5); the emitted safety objective is 1 - cost so both feedback components
are maximized.  Entering the goal yields reward 1 and teleports the agent
back to the start, so episodes have a fixed length and faster controllers
collect more goal visits.

Controllers are greedy policies from value iteration on reward minus a
hazard-cost penalty: penalty 0 gives the performant controller (ignores
hazards entirely), a large penalty gives the safe controller, which detours
around every positive-cost cell whenever such a path exists and otherwise
drifts away from hazards.  The context of a controller at a state is built
from its own action-value tables (reward and safety policy evaluations).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

# king moves, fixed order for deterministic tie-breaking
MOVES = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
N_ACTIONS = len(MOVES)

ADJACENT_COST = 0.5
HAZARD_COST = 1.0
SAFE_PENALTY = 10.0
VI_TOL = 1e-9
# Tiny tie-breaking term in the planning objective: with king moves, many
# cells share the same Chebyshev distance-to-go, and breaking those value
# ties by raw action order can pick a move that walks away from the goal.
# Penalizing the landing cell's Manhattan distance makes the greedy argmax
# unique and forward-moving without ever outweighing reward or cost.
PROGRESS_SHAPING = 1e-6

FIXTURE_MAP = """\
S......
.......
.......
..##...
.......
.......
......G
"""


@dataclass
class Controller:
    """A fixed policy plus its own-action-value tables used as the feature map."""
    policy: np.ndarray        # (S,) action index per state
    q_reward: np.ndarray      # (S, A) discounted reward under the policy
    q_safety: np.ndarray      # (S, A) discounted safety under the policy
    q_objective: np.ndarray   # (S, A) the planning objective the policy maximizes
    gamma: float


class GridworldEnv:
    """Episodic gridworld; sequential per instance, deterministic throughout."""

    def __init__(self, width, height, start, goal, hazards, episode_len=200):
        self.width = int(width)
        self.height = int(height)
        self.start = tuple(start)
        self.goal = tuple(goal)
        self.hazards = {tuple(h) for h in hazards}
        if self.goal in self.hazards:
            raise ValueError("goal cell cannot be a hazard")
        for cell in [self.start, self.goal, *self.hazards]:
            if not (0 <= cell[0] < self.height and 0 <= cell[1] < self.width):
                raise ValueError(f"cell {cell} outside the {self.height}x{self.width} grid")
        self.episode_len = int(episode_len)
        self.n_states = self.width * self.height
        self._build_tables()

    # -- map I/O -------------------------------------------------------------

    @classmethod
    def from_text(cls, text: str, episode_len: int = 200) -> "GridworldEnv":
        rows = [line for line in text.splitlines() if line.strip()]
        height, width = len(rows), len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("all map rows must have equal length")
        start = goal = None
        hazards = []
        for r, row in enumerate(rows):
            for c, ch in enumerate(row):
                if ch == "S":
                    start = (r, c)
                elif ch == "G":
                    goal = (r, c)
                elif ch == "#":
                    hazards.append((r, c))
                elif ch != ".":
                    raise ValueError(f"unknown map character {ch!r} at row {r}, col {c}")
        if start is None or goal is None:
            raise ValueError("map must contain exactly one S and one G")
        return cls(width, height, start, goal, hazards, episode_len=episode_len)

    @classmethod
    def from_file(cls, path, episode_len: int = 200) -> "GridworldEnv":
        return cls.from_text(Path(path).read_text(), episode_len=episode_len)

    @classmethod
    def fixture(cls, episode_len: int = 200) -> "GridworldEnv":
        """The 7x7 test map: start (0,0), goal (6,6), hazards (3,2) and (3,3)."""
        return cls.from_text(FIXTURE_MAP, episode_len=episode_len)

    # -- precomputed dynamics ------------------------------------------------

    def _idx(self, cell) -> int:
        return cell[0] * self.width + cell[1]

    def _cell(self, idx: int) -> tuple[int, int]:
        return divmod(idx, self.width)

    def _build_tables(self) -> None:
        S, A = self.n_states, N_ACTIONS
        self.cell_cost = np.zeros(S)
        for idx in range(S):
            r, c = self._cell(idx)
            if (r, c) in self.hazards:
                self.cell_cost[idx] = HAZARD_COST
            elif any(max(abs(r - hr), abs(c - hc)) == 1 for hr, hc in self.hazards):
                self.cell_cost[idx] = ADJACENT_COST
        self.cell_reward = np.zeros(S)
        self.cell_reward[self._idx(self.goal)] = 1.0

        self.next_state = np.empty((S, A), dtype=int)   # landing cell (feedback source)
        self.post_state = np.empty((S, A), dtype=int)   # position afterwards (goal teleports)
        start_idx, goal_idx = self._idx(self.start), self._idx(self.goal)
        for idx in range(S):
            r, c = self._cell(idx)
            for a, (dr, dc) in enumerate(MOVES):
                nr = min(max(r + dr, 0), self.height - 1)
                nc = min(max(c + dc, 0), self.width - 1)
                nidx = nr * self.width + nc
                self.next_state[idx, a] = nidx
                self.post_state[idx, a] = start_idx if nidx == goal_idx else nidx

    # -- planning ------------------------------------------------------------

    def plan_controller(self, hazard_penalty: float, gamma: float = 0.9) -> Controller:
        """Value-iterate reward - penalty*cost, extract the greedy policy, evaluate its tables."""
        if self._idx(self.goal) == self._idx(self.start):
            raise ValueError("goal must differ from start")
        goal_dist = np.array(
            [abs(r - self.goal[0]) + abs(c - self.goal[1])
             for r, c in map(self._cell, range(self.n_states))]
        )
        obj = (
            self.cell_reward[self.next_state]
            - hazard_penalty * self.cell_cost[self.next_state]
            - PROGRESS_SHAPING * goal_dist[self.next_state]
        )
        V = np.zeros(self.n_states)
        while True:
            q = obj + gamma * V[self.post_state]
            V_new = q.max(axis=1)
            if np.abs(V_new - V).max() <= VI_TOL * (1 - gamma):
                break
            V = V_new
        q = obj + gamma * V[self.post_state]
        policy = q.argmax(axis=1)
        if V[self._idx(self.start)] <= 0 and hazard_penalty == 0:
            raise ValueError("goal unreachable from start")
        q_objective = self._policy_eval(policy, obj, gamma)
        q_reward = self._policy_eval(policy, self.cell_reward[self.next_state], gamma)
        q_safety = self._policy_eval(policy, 1.0 - self.cell_cost[self.next_state], gamma)
        return Controller(policy, q_reward, q_safety, q_objective, gamma)

    def _policy_eval(self, policy, step_value, gamma) -> np.ndarray:
        """Q-table of the policy for a per-(state, action) one-step value, to 1e-9."""
        V = np.zeros(self.n_states)
        rows = np.arange(self.n_states)
        while True:
            q = step_value + gamma * V[self.post_state]
            V_new = q[rows, policy]
            if np.abs(V_new - V).max() <= VI_TOL * (1 - gamma):
                break
            V = V_new
        return step_value + gamma * V[self.post_state]


def grid_build_controllers(env: GridworldEnv, gamma: float = 0.9) -> tuple[Controller, Controller]:
    """(safe, performant): identical machinery, only the hazard penalty differs."""
    safe = env.plan_controller(SAFE_PENALTY, gamma)
    performant = env.plan_controller(0.0, gamma)
    return safe, performant


def grid_context(env: GridworldEnv, state: int, controller: Controller) -> np.ndarray:
    """Feature vector [scaled q_reward, scaled q_safety, bias] with 2-norm <= 1."""
    a = controller.policy[state]
    scale = 1.0 - controller.gamma
    return np.array(
        [
            scale * controller.q_reward[state, a],
            scale * controller.q_safety[state, a],
            1.0,
        ]
    ) / np.sqrt(3.0)


class GridworldSession:
    """Episode state on top of a GridworldEnv, stepped by one controller per step."""

    def __init__(self, env: GridworldEnv, controllers):
        self.env = env
        self.controllers = list(controllers)
        # everything a step needs is a function of (state, controller): precompute
        K, S = len(self.controllers), env.n_states
        self._ctx_table = np.empty((S, K, 3))
        self._probe_table = np.empty((S, K, 2))
        self._landing = np.empty((S, K), dtype=int)
        self._post = np.empty((S, K), dtype=int)
        for k, ctrl in enumerate(self.controllers):
            for s in range(S):
                self._ctx_table[s, k] = grid_context(env, s, ctrl)
                nxt = env.next_state[s, ctrl.policy[s]]
                self._probe_table[s, k] = (env.cell_reward[nxt], 1.0 - env.cell_cost[nxt])
                self._landing[s, k] = nxt
                self._post[s, k] = env.post_state[s, ctrl.policy[s]]
        self.reset()

    def reset(self) -> None:
        self.state = self.env._idx(self.env.start)
        self.steps = 0
        self.done = False

    def contexts(self) -> np.ndarray:
        """Context of every controller at the current state, shape (K, 3)."""
        return self._ctx_table[self.state]

    def probe_true_feedback(self) -> np.ndarray:
        """Exact one-step feedback each controller would receive, without moving."""
        return self._probe_table[self.state]

    def step(self, arm: int) -> tuple[np.ndarray, np.ndarray, bool]:
        """Apply the chosen controller's action; returns (contexts, feedback, done)."""
        if self.done:
            raise RuntimeError("episode already finished; call reset()")
        if not 0 <= arm < len(self.controllers):
            raise IndexError(f"arm {arm} out of range")
        ctx = self._ctx_table[self.state]
        feedback = self._probe_table[self.state, arm]
        self.state = self._post[self.state, arm]
        self.steps += 1
        self.done = self.steps >= self.env.episode_len
        return ctx, feedback, self.done
