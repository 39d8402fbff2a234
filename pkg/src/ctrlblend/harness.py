"""Experiment harness: config parsing, multi-seed runs, CSV output.

Config files are flat INI text (``key = value`` under sections); see
``configs/`` for documented samples.  A run produces, per seed and policy, a
per-step CSV trace, plus aggregate and plot-ready CSVs across seeds.  Every
run is fully deterministic given (config, seed): the arm-selection stream,
the environment noise stream, and the baseline-policy stream are spawned
independently from the seed so comparisons hold the environment fixed.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .blender import Blender, StepRecord
from .envs.gridworld import GridworldEnv, GridworldSession, grid_build_controllers
from .envs.synthetic import SyntheticLinearEnv, sample_theta_star
from .estimator import EstimatorConfig
from .metrics import MetricSeries, RunTrace, compute_series

POLICIES = ("blender", "always_safe", "always_performant", "uniform_random")
ENVS = ("synthetic", "gridworld")
MODES = ("faithful", "fresh_context")
BATCH_EPISODES = 30
FLOAT_FMT = ".15g"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    env: str = "gridworld"
    map_path: str | None = None            # None -> built-in fixture map
    mode: str = "faithful"
    policies: tuple[str, ...] = ("blender",)
    estimator: EstimatorConfig = field(default_factory=lambda: EstimatorConfig(d=3, m=2))
    T: int = 0                             # synthetic horizon; 0 -> episodes * episode_len
    episodes: int = 30
    episode_len: int = 200
    seeds: tuple[int, ...] = (0,)
    output_dir: str = "out"
    # synthetic extras
    K: int = 2
    theta_seed: int = 0
    noise: str = "gaussian"
    per_objective_noise: bool = False
    # gridworld extras
    gamma: float = 0.9

    def __post_init__(self):
        if self.env not in ENVS:
            raise ConfigError(f"env must be one of {ENVS}, got {self.env!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        for p in self.policies:
            if p not in POLICIES:
                raise ConfigError(f"policy must be one of {POLICIES}, got {p!r}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.horizon < 1:
            raise ConfigError("T (or episodes * episode_len) must be >= 1")
        if self.map_path is not None and not Path(self.map_path).exists():
            raise ConfigError(f"map file not found: {self.map_path}")
        if self.env == "gridworld" and self.K != 2:
            raise ConfigError("gridworld runs use exactly K=2 arms (safe, performant)")

    @property
    def horizon(self) -> int:
        return self.T if self.T > 0 else self.episodes * self.episode_len


def load_config(path) -> ExperimentConfig:
    """Parse and validate an INI experiment config."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file: {path}")
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    est = parser["estimator"] if parser.has_section("estimator") else {}
    syn = parser["synthetic"] if parser.has_section("synthetic") else {}
    grid = parser["gridworld"] if parser.has_section("gridworld") else {}

    def get(section, key, cast, default):
        if key not in section:
            return default
        try:
            if cast is bool:
                return str(section[key]).strip().lower() in ("1", "true", "yes", "on")
            return cast(section[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {section[key]!r}") from exc

    est_cfg = EstimatorConfig(
        d=get(est, "d", int, 3),
        m=get(est, "m", int, 2),
        lam=get(est, "lambda", float, 1.0),
        sigma=get(est, "sigma", float, 0.1),
        S=get(est, "S", float, 1.5),
        L=get(est, "L", float, 1.0),
        delta=get(est, "delta", float, 0.1),
    )
    seeds = tuple(int(s) for s in str(exp.get("seeds", "0")).replace(",", " ").split())
    policies = tuple(str(exp.get("policy", "blender")).replace(",", " ").split())
    return ExperimentConfig(
        env=get(exp, "env", str, "gridworld"),
        map_path=exp.get("map") or None,
        mode=get(exp, "mode", str, "faithful"),
        policies=policies,
        estimator=est_cfg,
        T=get(exp, "T", int, 0),
        episodes=get(exp, "episodes", int, 30),
        episode_len=get(exp, "episode_len", int, 200),
        seeds=seeds,
        output_dir=get(exp, "output_dir", str, "out"),
        K=get(syn, "K", int, 2),
        theta_seed=get(syn, "theta_seed", int, 0),
        noise=get(syn, "noise", str, "gaussian"),
        per_objective_noise=get(syn, "per_objective_noise", bool, False),
        gamma=get(grid, "gamma", float, 0.9),
    )


# -- single-seed runs --------------------------------------------------------


@dataclass
class SeedResult:
    seed: int
    trace: RunTrace
    series: MetricSeries
    episode_reward: np.ndarray     # (episodes,)
    episode_cost: np.ndarray
    episode_correct: np.ndarray


def _pick(policy: str, blender: Blender, policy_rng, n_arms: int) -> int:
    if policy == "blender":
        return blender.select_arm()
    if policy == "always_safe":
        return 0
    if policy == "always_performant":
        return 1
    return int(policy_rng.integers(n_arms))


def run_seed(config: ExperimentConfig, policy: str, seed: int) -> SeedResult:
    """One full run of one policy with one seed."""
    ss = np.random.SeedSequence(seed)
    env_ss, arm_ss, policy_ss = ss.spawn(3)
    est = config.estimator
    fresh = config.mode == "fresh_context"
    policy_rng = np.random.default_rng(policy_ss)

    records: list[StepRecord] = []
    truths: list[np.ndarray] = []
    feedbacks = []

    if config.env == "synthetic":
        theta = sample_theta_star(est.m, est.d, est.S, config.theta_seed)
        env = SyntheticLinearEnv(
            theta, config.K, L=est.L, sigma=est.sigma, noise=config.noise,
            per_objective_noise=config.per_objective_noise, seed=env_ss,
        )
        blender = Blender(est, config.K, np.random.default_rng(arm_ss), fresh_context=fresh)
        for _ in range(config.horizon):
            if fresh:
                contexts = env.sample_contexts()
                blender.refresh_candidates(contexts)
                arm = _pick(policy, blender, policy_rng, config.K)
                feedback = env.feedback_for(arm)
            else:
                arm = _pick(policy, blender, policy_rng, config.K)
                contexts, feedback = env.synth_step(arm)
            records.append(blender.observe(arm, feedback, contexts))
            truths.append(env.true_means(contexts))
            feedbacks.append(feedback)
    else:
        if config.map_path:
            env = GridworldEnv.from_file(config.map_path, episode_len=config.episode_len)
        else:
            env = GridworldEnv.fixture(episode_len=config.episode_len)
        controllers = grid_build_controllers(env, gamma=config.gamma)
        session = GridworldSession(env, controllers)
        blender = Blender(est, 2, np.random.default_rng(arm_ss), fresh_context=fresh)
        for _ in range(config.episodes):
            session.reset()
            done = False
            while not done:
                truth = session.probe_true_feedback()
                if fresh:
                    blender.refresh_candidates(session.contexts())
                arm = _pick(policy, blender, policy_rng, 2)
                contexts, feedback, done = session.step(arm)
                records.append(blender.observe(arm, feedback, contexts))
                truths.append(truth)
                feedbacks.append(feedback)

    trace = RunTrace(records, truths, est)
    series = compute_series(trace)
    fb = np.asarray(feedbacks)
    ep_len = config.episode_len if config.env == "gridworld" else max(
        1, config.horizon // max(1, config.episodes)
    )
    n_ep = len(trace) // ep_len
    cut = n_ep * ep_len
    # episode reward = summed first objective; episode cost = summed (1 - second objective)
    ep_reward = fb[:cut, 0].reshape(n_ep, ep_len).sum(axis=1)
    ep_cost = (1.0 - fb[:cut, 1]).reshape(n_ep, ep_len).sum(axis=1)
    ep_correct = series.correct_pick[:cut].reshape(n_ep, ep_len).mean(axis=1)
    return SeedResult(seed, trace, series, ep_reward, ep_cost, ep_correct)


# -- aggregation -------------------------------------------------------------


@dataclass
class AggregateSummary:
    policy: str
    seeds: tuple[int, ...]
    episode_reward: np.ndarray         # (n_seeds, episodes)
    episode_cost: np.ndarray
    episode_correct: np.ndarray
    pr_cum: np.ndarray                 # (n_seeds, T)
    cml_cum: np.ndarray
    cml_bound: np.ndarray
    pr_theory: np.ndarray              # (T,)

    @property
    def n_batches(self) -> int:
        return self.episode_reward.shape[1] // BATCH_EPISODES

    def batch_stats(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        """(mean, std) per batch of 30 episodes, pooled across seeds."""
        data = getattr(self, f"episode_{which}")
        nb = self.n_batches
        if nb == 0:
            # fall back to one batch of everything when fewer than 30 episodes
            return np.array([data.mean()]), np.array([data.std()])
        cut = data[:, : nb * BATCH_EPISODES].reshape(data.shape[0], nb, BATCH_EPISODES)
        return cut.mean(axis=(0, 2)), cut.std(axis=(0, 2))


def _run_seed_star(args):
    return run_seed(*args)


def run_experiment(config: ExperimentConfig, policy: str, jobs: int = 1,
                   write_csv: bool = True) -> AggregateSummary:
    """Run one policy over all configured seeds and write per-seed step CSVs."""
    tasks = [(config, policy, seed) for seed in config.seeds]
    if jobs > 1:
        with Pool(jobs) as pool:
            results = pool.map(_run_seed_star, tasks)
    else:
        results = [run_seed(*task) for task in tasks]

    outdir = Path(config.output_dir)
    if write_csv:
        outdir.mkdir(parents=True, exist_ok=True)
        for res in results:
            write_step_csv(res.trace, res.series, outdir / f"steps_{policy}_seed{res.seed}.csv")

    summary = AggregateSummary(
        policy=policy,
        seeds=config.seeds,
        episode_reward=np.stack([r.episode_reward for r in results]),
        episode_cost=np.stack([r.episode_cost for r in results]),
        episode_correct=np.stack([r.episode_correct for r in results]),
        pr_cum=np.stack([r.series.pr_cum for r in results]),
        cml_cum=np.stack([r.series.cml_cum for r in results]),
        cml_bound=np.stack([r.series.cml_bound for r in results]),
        pr_theory=results[0].series.pr_theory,
    )
    if write_csv:
        _write_summary_csv(summary, outdir / f"summary_{policy}.csv")
    return summary


# -- delimited output --------------------------------------------------------


def step_csv_header(K: int, m: int) -> list[str]:
    cols = ["step", "arm"]
    cols += [f"feedback_{i}" for i in range(m)]
    cols += [f"ucb_{k}_{i}" for k in range(K) for i in range(m)]
    cols += [f"est_loss_{k}" for k in range(K)]
    cols += ["psg_increment", "ml_increment", "pr_cum", "cml_cum", "cml_bound",
             "beta_t", "inv_norm"]
    return cols


def write_step_csv(trace: RunTrace, series: MetricSeries, path) -> None:
    """One row per step; deterministic column order, >=12 significant digits."""
    if not trace.records:
        raise ValueError("cannot write an empty trace")
    K, m = trace.records[0].ucb_indices.shape
    lines = [",".join(step_csv_header(K, m))]
    for t, rec in enumerate(trace.records):
        vals = [
            *rec.feedback,
            *rec.ucb_indices.ravel(),
            *rec.est_losses,
            series.psg_increment[t],
            series.ml_increment[t],
            series.pr_cum[t],
            series.cml_cum[t],
            series.cml_bound[t],
            rec.beta_t,
            rec.inv_norm_pulled,
        ]
        row = [str(rec.step), str(rec.arm)] + [format(v, FLOAT_FMT) for v in vals]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_summary_csv(summary: AggregateSummary, path) -> None:
    lines = ["seed,final_pr,final_cml,final_cml_bound,final_pr_theory,"
             "mean_episode_reward,mean_episode_cost,correct_pick_rate"]
    for i, seed in enumerate(summary.seeds):
        vals = [
            summary.pr_cum[i, -1],
            summary.cml_cum[i, -1],
            summary.cml_bound[i, -1],
            summary.pr_theory[-1],
            summary.episode_reward[i].mean(),
            summary.episode_cost[i].mean(),
            summary.episode_correct[i].mean(),
        ]
        lines.append(str(seed) + "," + ",".join(format(v, FLOAT_FMT) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def emit_plot_data(summaries: list[AggregateSummary], outdir) -> dict[str, Path]:
    """Plot-ready CSVs: per-batch reward/cost/correct-pick per policy, plus regret curves."""
    if not summaries:
        raise ValueError("need at least one summary")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    for which in ("reward", "cost", "correct"):
        header = ["batch"]
        columns = []
        for s in summaries:
            mean, std = s.batch_stats(which)
            header += [f"{s.policy}_mean", f"{s.policy}_std"]
            columns.append((mean, std))
        n = len(columns[0][0])
        lines = [",".join(header)]
        for b in range(n):
            row = [str(b)]
            for mean, std in columns:
                row += [format(mean[b], FLOAT_FMT), format(std[b], FLOAT_FMT)]
            lines.append(",".join(row))
        path = outdir / f"plot_{which}.csv"
        path.write_text("\n".join(lines) + "\n")
        written[which] = path

    # regret curves from the blender summary when present, else the first one
    reg = next((s for s in summaries if s.policy == "blender"), summaries[0])
    lines = ["t,pr_mean,pr_std,pr_theory,cml_mean,cml_std,cml_bound_mean"]
    T = reg.pr_cum.shape[1]
    for t in range(T):
        vals = [
            reg.pr_cum[:, t].mean(), reg.pr_cum[:, t].std(), reg.pr_theory[t],
            reg.cml_cum[:, t].mean(), reg.cml_cum[:, t].std(), reg.cml_bound[:, t].mean(),
        ]
        lines.append(str(t + 1) + "," + ",".join(format(v, FLOAT_FMT) for v in vals))
    path = outdir / "plot_regret.csv"
    path.write_text("\n".join(lines) + "\n")
    written["regret"] = path
    return written
