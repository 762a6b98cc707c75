"""Experiment harness: seeded agent populations, sweeps, CSV/plot output."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .advisor import ChannelNoise, SimulatedAdvisor
from .affordance import AffordanceNet, failure_table, generate_dataset, train
from .fusion import CommandLexicon
from .learner import LearnerConfig, N_ACTIONS, run_episode
from .scenario import enumerate_states

CONDITIONS = ("rl", "irl", "rl-aff", "irl-aff")

THETA_SWEEP = (0.0, 0.25, 0.5, 0.75)
ETA_SWEEP = (0.3, 0.5, 0.8, 1.0)

DEFAULT_SMOOTHING_WINDOW = 10


@dataclass
class ExperimentConfig:
    condition: str = "rl"
    agents: int = 100
    episodes: int = 500
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    noise: ChannelNoise = field(default_factory=ChannelNoise)
    smoothing_window: int = DEFAULT_SMOOTHING_WINDOW
    master_seed: int = 0
    affordance_seed: int = 0
    affordance_epochs: int = 100

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"condition must be one of {CONDITIONS}")
        if self.agents < 1 or self.episodes < 1:
            raise ValueError("agents and episodes must be positive")
        if self.smoothing_window < 1:
            raise ValueError("smoothing window must be positive")

    def resolved_learner(self) -> LearnerConfig:
        return replace(
            self.learner,
            use_feedback=self.condition in ("irl", "irl-aff"),
            use_affordances=self.condition in ("rl-aff", "irl-aff"),
        )


@dataclass
class LearningCurve:
    condition: str
    param: str
    raw_mean: List[float]
    smoothed_mean: List[float]
    stderr: List[float]
    cumulative_per_agent: List[float] = field(default_factory=list)
    rewards: Optional[np.ndarray] = None  # (agents, episodes); not persisted

    @property
    def mean_cumulative(self) -> float:
        return float(np.mean(self.cumulative_per_agent))

    @property
    def stderr_cumulative(self) -> float:
        n = len(self.cumulative_per_agent)
        return float(np.std(self.cumulative_per_agent, ddof=1) / math.sqrt(n)) if n > 1 else 0.0


def smooth(raw: Sequence[float], window: int) -> List[float]:
    """Trailing moving average with partial windows at the start."""
    if window < 1:
        raise ValueError("window must be >= 1")
    out = []
    acc = 0.0
    for i, v in enumerate(raw):
        acc += v
        if i >= window:
            acc -= raw[i - window]
        out.append(acc / min(i + 1, window))
    return out


def trained_net(cfg: ExperimentConfig) -> AffordanceNet:
    return train(generate_dataset(), epochs=cfg.affordance_epochs, seed=cfg.affordance_seed)


def run_condition(
    cfg: ExperimentConfig,
    net: Optional[AffordanceNet] = None,
    lexicon: Optional[CommandLexicon] = None,
    param: str = "",
    initial_q: Optional[np.ndarray] = None,
) -> LearningCurve:
    """Run one condition over the agent population; deterministic per seed."""
    learner_cfg = cfg.resolved_learner()
    lexicon = lexicon or CommandLexicon.default()
    advisor = SimulatedAdvisor(lexicon, cfg.noise) if learner_cfg.use_feedback else None
    fail = None
    if learner_cfg.use_affordances:
        if net is None:
            net = trained_net(cfg)
        fail = failure_table(net)

    n_states = len(enumerate_states())
    rewards = np.empty((cfg.agents, cfg.episodes))
    for i in range(cfg.agents):
        rng = np.random.default_rng(cfg.master_seed ^ i)
        q = np.zeros((n_states, N_ACTIONS)) if initial_q is None else initial_q.copy()
        for ep in range(cfg.episodes):
            rewards[i, ep], _ = run_episode(q, learner_cfg, rng, advisor, fail)

    raw_mean = [math.fsum(rewards[:, ep]) / cfg.agents for ep in range(cfg.episodes)]
    stderr = (rewards.std(axis=0, ddof=1) / math.sqrt(cfg.agents)).tolist() if cfg.agents > 1 else [0.0] * cfg.episodes
    return LearningCurve(
        condition=cfg.condition,
        param=param,
        raw_mean=raw_mean,
        smoothed_mean=smooth(raw_mean, cfg.smoothing_window),
        stderr=stderr,
        cumulative_per_agent=rewards.sum(axis=1).tolist(),
        rewards=rewards,
    )


def sweep(
    base: ExperimentConfig,
    parameter: str,
    values: Sequence[float],
    net: Optional[AffordanceNet] = None,
    lexicon: Optional[CommandLexicon] = None,
) -> List[Tuple[float, LearningCurve]]:
    """One run per value, shared master seed; parameter is theta_min or eta."""
    if parameter not in ("theta_min", "eta"):
        raise ValueError("sweep parameter must be 'theta_min' or 'eta'")
    results = []
    for value in values:
        cfg = replace(base, learner=replace(base.learner, **{parameter: value}))
        label = f"{parameter}={value:g}"
        results.append((value, run_condition(cfg, net=net, lexicon=lexicon, param=label)))
    return results


CSV_HEADER = ["episode", "condition", "param", "raw_mean", "smoothed_mean", "stderr"]


def persist(curves: Sequence[LearningCurve], path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for curve in curves:
                for ep in range(len(curve.raw_mean)):
                    writer.writerow(
                        [
                            ep,
                            curve.condition,
                            curve.param,
                            repr(curve.raw_mean[ep]),
                            repr(curve.smoothed_mean[ep]),
                            repr(curve.stderr[ep]),
                        ]
                    )
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def load_curves(path: Union[str, Path]) -> List[LearningCurve]:
    curves: Dict[Tuple[str, str], LearningCurve] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        for row in reader:
            key = (row[1], row[2])
            curve = curves.setdefault(key, LearningCurve(row[1], row[2], [], [], []))
            curve.raw_mean.append(float(row[3]))
            curve.smoothed_mean.append(float(row[4]))
            curve.stderr.append(float(row[5]))
    return list(curves.values())


def emit_plots(curves: Sequence[LearningCurve], path: Union[str, Path]) -> None:
    """Render all smoothed curves on one axes and save as an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5))
    for curve in curves:
        label = curve.condition if not curve.param else f"{curve.condition} ({curve.param})"
        ax.plot(curve.smoothed_mean, label=label)
    ax.set_xlabel("episode")
    ax.set_ylabel("smoothed mean reward")
    ax.legend()
    fig.tight_layout()
    try:
        fig.savefig(path)
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
    finally:
        plt.close(fig)
