"""SARSA learner with advice gating and affordance-based failure bypassing.

Action selection runs a three-stage pipeline: (1) optionally take trainer
advice when its fused confidence clears the acceptance threshold, (2) fall
back to epsilon-greedy over the Q table, (3) with probability eta consult the
effect predictor and swap out actions predicted to break the task.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .advisor import SimulatedAdvisor
from .fusion import IntegratedFeedback
from .scenario import (
    ACTIONS,
    Action,
    Location,
    WorldState,
    enumerate_states,
    is_final,
    state_index,
    step,
)

N_ACTIONS = len(ACTIONS)


@dataclass
class LearnerConfig:
    alpha: float = 0.3
    gamma: float = 0.9
    epsilon: float = 0.1
    feedback_probability: float = 0.3
    theta_min: float = 0.25
    eta: float = 1.0
    use_feedback: bool = False
    use_affordances: bool = False
    max_steps_per_episode: int = 100

    def __post_init__(self):
        for name in ("epsilon", "feedback_probability", "theta_min", "eta"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


class QTable:
    """Tabular action values over the state enumeration, initialized to zero."""

    def __init__(self, n_states: Optional[int] = None):
        if n_states is None:
            n_states = len(enumerate_states())
        self.values = np.zeros((n_states, N_ACTIONS))

    def get(self, s: int, a: Action) -> float:
        return float(self.values[s, ACTIONS.index(a)])

    def copy(self) -> "QTable":
        q = QTable(self.values.shape[0])
        q.values = self.values.copy()
        return q


@dataclass
class StepRecord:
    state: str
    chosen_action: str
    advice_used: bool
    advice_gated: bool
    affordance_bypassed: bool
    reward: float
    next_state: str  # successor token, or "failed" / "done"


@functools.lru_cache(maxsize=1)
def transition_tables() -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(next index, reward, done, failed) arrays over the enumeration.

    Successors of final states can fall outside the enumeration; those rows
    are never used by the episode loop and get a -1 successor index.
    """
    states = enumerate_states()
    index = state_index()
    n = len(states)
    nxt = np.full((n, N_ACTIONS), -1, dtype=np.int64)
    reward = np.zeros((n, N_ACTIONS))
    done = np.zeros((n, N_ACTIONS), dtype=bool)
    failed = np.zeros((n, N_ACTIONS), dtype=bool)
    for i, s in enumerate(states):
        for j, a in enumerate(ACTIONS):
            outcome = step(s, a)
            reward[i, j] = outcome.reward
            if outcome.failed:
                failed[i, j] = True
            else:
                done[i, j] = outcome.done
                nxt[i, j] = index.get(outcome.next_state, -1)
    return nxt, reward, done, failed


def select_action(
    q: np.ndarray,
    s: int,
    cfg: LearnerConfig,
    rng: np.random.Generator,
    advisor: Optional[SimulatedAdvisor] = None,
    fail_table: Optional[np.ndarray] = None,
    advice: Optional[IntegratedFeedback] = None,
) -> Tuple[int, bool, bool, bool]:
    """Returns (action index, advice_used, advice_gated, affordance_bypassed).

    ``advice`` overrides the sampled advisor channel (live sessions hand the
    human's fused advice in directly; batch runs sample the simulated one).
    """
    fused = advice
    if fused is None and cfg.use_feedback and advisor is not None:
        if rng.random() < cfg.feedback_probability:
            fused = advisor.emit(enumerate_states()[s], rng).fused

    advice_used = False
    advice_gated = False
    exploring = False
    candidate = -1
    if fused is not None:
        if fused.confidence > cfg.theta_min:
            candidate = ACTIONS.index(fused.label)
            advice_used = True
        else:
            advice_gated = True
    if candidate < 0:
        if rng.random() < cfg.epsilon:
            candidate = int(rng.integers(N_ACTIONS))
            exploring = True
        else:
            candidate = int(np.argmax(q[s]))

    bypassed = False
    if cfg.use_affordances and fail_table is not None and rng.random() < cfg.eta:
        if fail_table[s, candidate]:
            safe = np.flatnonzero(~fail_table[s])
            if safe.size:
                if exploring:
                    candidate = int(safe[rng.integers(safe.size)])
                else:
                    candidate = int(safe[np.argmax(q[s, safe])])
                bypassed = True
    return candidate, advice_used, advice_gated, bypassed


def sarsa_update(
    q: np.ndarray,
    s: int,
    a: int,
    r: float,
    s2: int,
    a2: int,
    cfg: LearnerConfig,
    terminal: bool = False,
) -> None:
    bootstrap = 0.0 if terminal else q[s2, a2]
    q[s, a] += cfg.alpha * (r + cfg.gamma * bootstrap - q[s, a])


def draw_initial_index(rng: np.random.Generator) -> int:
    """Uniform goblet side per episode; indices 0/1 are the initial states."""
    return int(rng.integers(2))


def run_episode(
    q: np.ndarray,
    cfg: LearnerConfig,
    rng: np.random.Generator,
    advisor: Optional[SimulatedAdvisor] = None,
    fail_table: Optional[np.ndarray] = None,
    record_trace: bool = False,
) -> Tuple[float, List[StepRecord]]:
    """One episode of SARSA; updates ``q`` in place, returns the reward sum."""
    nxt, reward, done, failed = transition_tables()
    states = enumerate_states()
    s = draw_initial_index(rng)
    a, used, gated, bypassed = select_action(q, s, cfg, rng, advisor, fail_table)
    total = 0.0
    steps = 0
    trace: List[StepRecord] = []
    while True:
        r = reward[s, a]
        total += r
        steps += 1
        is_terminal = done[s, a] or failed[s, a]
        if record_trace:
            if failed[s, a]:
                nxt_token = "failed"
            elif done[s, a]:
                nxt_token = "done"
            else:
                nxt_token = states[nxt[s, a]].token()
            trace.append(
                StepRecord(
                    states[s].token(),
                    ACTIONS[a].value,
                    used,
                    gated,
                    bypassed,
                    float(r),
                    nxt_token,
                )
            )
        if is_terminal:
            sarsa_update(q, s, a, r, 0, 0, cfg, terminal=True)
            break
        s2 = nxt[s, a]
        a2, used, gated, bypassed = select_action(q, s2, cfg, rng, advisor, fail_table)
        sarsa_update(q, s, a, r, s2, a2, cfg)
        if steps >= cfg.max_steps_per_episode:
            break
        s, a = s2, a2
    return total, trace


def initial_q_from_oracle() -> np.ndarray:
    """Q table whose greedy policy is the value-iteration oracle (for tests)."""
    from .scenario import optimal_policy

    states = enumerate_states()
    q = np.full((len(states), N_ACTIONS), -1e9)
    for s, action in optimal_policy().items():
        q[state_index()[s], ACTIONS.index(action)] = 1.0
    return q
