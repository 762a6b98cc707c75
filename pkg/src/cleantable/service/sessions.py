"""Live learning sessions: one SARSA learner per session, human advice in the loop.

In live mode the batch learner's per-step feedback probability is replaced by
"use the trainer's advice whenever one is pending": a human cannot be sampled.
Gating by the acceptance threshold and the affordance check is byte-for-byte
the same code path as the batch learner.
"""
from __future__ import annotations

import asyncio
import itertools
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..affordance import AffordanceNet, failure_table
from ..fusion import (
    CommandLexicon,
    IntegratedFeedback,
    audio_recognize,
    gesture_recognize,
    integrate,
)
from ..learner import LearnerConfig, N_ACTIONS, sarsa_update, select_action, transition_tables
from ..scenario import ACTIONS, enumerate_states
from .models import (
    AdviceAck,
    AdvicePayload,
    ConfigUpdate,
    FusedAdvice,
    SessionConfig,
    SessionSnapshot,
    StateFields,
    StateUpdate,
    EpisodeEnd,
)

_LN3 = math.log(3.0)


def _state_fields(idx: int) -> StateFields:
    s = enumerate_states()[idx]
    return StateFields(
        token=s.token(),
        hand_object=s.hand_object.value,
        hand_position=s.hand_position.value,
        goblet_position=s.goblet_position.value,
        left_clean=s.sides.left_clean,
        right_clean=s.sides.right_clean,
    )


def fuse_payload(payload: AdvicePayload, lexicon: CommandLexicon) -> IntegratedFeedback:
    """Turn an advice submission into integrated feedback.

    Raw sentence + gesture window go through the regular recognizers; a direct
    (label, confidence) pair is taken as already-fused advice.
    """
    if payload.sentence is not None or payload.gesture_window is not None:
        if payload.sentence is None or payload.gesture_window is None:
            raise ValueError("raw advice needs both a sentence and a gesture window")
        by_sentence = {s: a for a, s in zip(ACTIONS, lexicon.sentences)}
        try:
            window = [by_sentence[g] for g in payload.gesture_window]
        except KeyError as exc:
            raise ValueError(f"unknown gesture label {exc.args[0]!r}") from exc
        audio = audio_recognize([payload.sentence], lexicon)
        vision = gesture_recognize(window)
        return integrate(audio, vision)
    if payload.label is None or payload.confidence is None:
        raise ValueError("advice needs either raw channels or a (label, confidence) pair")
    try:
        label = ACTIONS[[a.value for a in ACTIONS].index(payload.label)]
    except ValueError:
        raise ValueError(f"unknown action label {payload.label!r}")
    likeliness = math.expm1(payload.confidence * _LN3)
    return IntegratedFeedback(label, payload.confidence, likeliness, True)


class Session:
    def __init__(
        self,
        session_id: str,
        config: SessionConfig,
        lexicon: CommandLexicon,
        net: Optional[AffordanceNet],
    ):
        self.session_id = session_id
        self.config = config
        self.lexicon = lexicon
        self.learner_cfg = LearnerConfig(
            alpha=config.alpha,
            gamma=config.gamma,
            epsilon=config.epsilon,
            theta_min=config.theta_min,
            eta=config.eta,
            use_feedback=False,
            use_affordances=config.use_affordances,
            max_steps_per_episode=config.max_steps_per_episode,
        )
        self.fail_table = failure_table(net) if (config.use_affordances and net) else None
        self.rng = np.random.default_rng(config.seed)
        self.q = np.zeros((len(enumerate_states()), N_ACTIONS))
        self.pace = config.pace
        self.episode = 0
        self.step_no = 0
        self.episode_reward = 0.0
        self.last_reward: Optional[float] = None
        self.cumulative: List[float] = []
        self.pending: Optional[IntegratedFeedback] = None
        self.subscribers: List[asyncio.Queue] = []
        self.task: Optional[asyncio.Task] = None
        self._prev: Optional[Tuple[int, int, float]] = None
        self.state_idx = int(self.rng.integers(2))

    @property
    def running(self) -> bool:
        return self.task is not None and not self.task.done()

    def subscribe(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue()
        self.subscribers.append(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        if queue in self.subscribers:
            self.subscribers.remove(queue)

    def _broadcast(self, message) -> None:
        doc = message.model_dump()
        for queue in self.subscribers:
            queue.put_nowait(doc)

    def submit_advice(self, payload: AdvicePayload) -> AdviceAck:
        """Hand advice to the single-slot mailbox; consumed at the next step."""
        if self.pending is not None:
            return AdviceAck(accepted=False, reason="advice already pending")
        try:
            fused = fuse_payload(payload, self.lexicon)
        except ValueError as exc:
            return AdviceAck(accepted=False, reason=str(exc))
        self.pending = fused
        return AdviceAck(
            accepted=True,
            fused=FusedAdvice(
                label=fused.label.value,
                confidence=fused.confidence,
                congruent=fused.congruent,
            ),
        )

    def apply_config_update(self, update: ConfigUpdate) -> ConfigUpdate:
        if update.pace is not None:
            self.pace = update.pace
        if update.theta_min is not None:
            self.learner_cfg.theta_min = update.theta_min
        if update.eta is not None:
            self.learner_cfg.eta = update.eta
        return ConfigUpdate(
            pace=self.pace, theta_min=self.learner_cfg.theta_min, eta=self.learner_cfg.eta
        )

    def advance(self) -> bool:
        """One learner step; returns False when the episode budget is spent."""
        nxt, reward, done, failed = transition_tables()
        advice = self.pending
        self.pending = None
        gamma_i = advice.confidence if advice is not None else None
        s = self.state_idx
        a, used, gated, bypassed = select_action(
            self.q, s, self.learner_cfg, self.rng,
            fail_table=self.fail_table, advice=advice,
        )
        if self._prev is not None:
            ps, pa, pr = self._prev
            sarsa_update(self.q, ps, pa, pr, s, a, self.learner_cfg)
        r = float(reward[s, a])
        self.episode_reward += r
        self.last_reward = r
        self.step_no += 1
        terminal: Optional[str] = None
        if failed[s, a]:
            terminal = "failed"
        elif done[s, a]:
            terminal = "done"
        elif self.step_no >= self.learner_cfg.max_steps_per_episode:
            terminal = "truncated"
        self._broadcast(
            StateUpdate(
                session_id=self.session_id,
                episode=self.episode,
                step=self.step_no,
                state=_state_fields(s),
                action=ACTIONS[a].value,
                reward=r,
                advice_used=used,
                advice_gated=gated,
                affordance_bypassed=bypassed,
                advice_confidence=gamma_i,
                episode_reward=self.episode_reward,
                terminal=terminal,
            )
        )
        if terminal is None:
            self._prev = (s, a, r)
            self.state_idx = int(nxt[s, a])
            return True

        if terminal in ("failed", "done"):
            sarsa_update(self.q, s, a, r, 0, 0, self.learner_cfg, terminal=True)
        else:
            # truncation: bootstrap through a fresh selection, like the batch loop
            s2 = int(nxt[s, a])
            a2, _, _, _ = select_action(
                self.q, s2, self.learner_cfg, self.rng, fail_table=self.fail_table
            )
            sarsa_update(self.q, s, a, r, s2, a2, self.learner_cfg)
        self._broadcast(
            EpisodeEnd(
                session_id=self.session_id,
                episode=self.episode,
                reward=self.episode_reward,
                outcome=terminal,
            )
        )
        self.cumulative.append(self.episode_reward)
        self.episode += 1
        self.step_no = 0
        self.episode_reward = 0.0
        self._prev = None
        self.state_idx = int(self.rng.integers(2))
        return self.config.episodes is None or self.episode < self.config.episodes

    async def run(self) -> None:
        try:
            while True:
                await asyncio.sleep(1.0 / self.pace)
                if not self.advance():
                    break
        except asyncio.CancelledError:
            pass

    def snapshot(self) -> SessionSnapshot:
        return SessionSnapshot(
            session_id=self.session_id,
            episode=self.episode,
            step=self.step_no,
            state=_state_fields(self.state_idx),
            last_reward=self.last_reward,
            episode_reward=self.episode_reward,
            cumulative=list(self.cumulative),
            pending_advice=self.pending is not None,
            running=self.running,
            pace=self.pace,
            config=self.config,
        )


class SessionManager:
    def __init__(self, lexicon: Optional[CommandLexicon] = None):
        self.lexicon = lexicon or CommandLexicon.default()
        self.sessions: Dict[str, Session] = {}
        self._counter = itertools.count(1)

    def create(self, config: SessionConfig, net: Optional[AffordanceNet]) -> Session:
        session_id = f"s{next(self._counter)}"
        session = Session(session_id, config, self.lexicon, net)
        self.sessions[session_id] = session
        session.task = asyncio.get_running_loop().create_task(session.run())
        return session

    def get(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            raise KeyError(session_id)
        return self.sessions[session_id]

    def stop(self, session_id: str) -> None:
        session = self.get(session_id)
        if session.task is not None:
            session.task.cancel()
        del self.sessions[session_id]
