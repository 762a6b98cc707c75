"""Simulated parent-like trainer with noisy audio and vision channels.

The trainer always intends the optimal action for the current state; the
channels corrupt that intent.  Audio replicates the command sentence into a
10-best list with per-character substitution noise; vision builds a 5-frame
gesture window with per-frame mislabel noise.  Both channels then go through
the regular recognizers and the fusion step.
"""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .fusion import (
    GESTURE_WINDOW_SIZE,
    CommandLexicon,
    IntegratedFeedback,
    UnimodalPrediction,
    audio_recognize,
    gesture_recognize,
    integrate,
)
from .scenario import ACTIONS, Action, WorldState, is_final, optimal_policy

_LETTERS = string.ascii_lowercase


@dataclass(frozen=True)
class ChannelNoise:
    audio_char_error_rate: float = 0.05
    vision_label_error_rate: float = 0.2
    hypothesis_count: int = 10

    def __post_init__(self):
        if not 0.0 <= self.audio_char_error_rate <= 1.0:
            raise ValueError("audio error rate must be in [0, 1]")
        if not 0.0 <= self.vision_label_error_rate <= 1.0:
            raise ValueError("vision error rate must be in [0, 1]")
        if self.hypothesis_count < 1:
            raise ValueError("need at least one hypothesis")


@dataclass(frozen=True)
class AdviceEvent:
    intended: Action
    audio: UnimodalPrediction
    vision: UnimodalPrediction
    fused: IntegratedFeedback

    def to_dict(self) -> dict:
        return {
            "intended": self.intended.value,
            "audio": {"label": self.audio.label.value, "confidence": self.audio.confidence},
            "vision": {"label": self.vision.label.value, "confidence": self.vision.confidence},
            "fused": {
                "label": self.fused.label.value,
                "confidence": self.fused.confidence,
                "likeliness": self.fused.likeliness,
                "congruent": self.fused.congruent,
            },
        }


def intended_advice(s: WorldState) -> Action:
    if is_final(s):
        raise ValueError("no advice for a finished task")
    return optimal_policy()[s]


def _corrupt_sentence(sentence: str, rate: float, count: int, rng: np.random.Generator):
    length = len(sentence)
    if rate <= 0.0:
        return [sentence] * count
    mask = rng.random((count, length)) < rate
    letters = rng.integers(0, len(_LETTERS), size=(count, length))
    hypotheses = []
    for i in range(count):
        if not mask[i].any():
            hypotheses.append(sentence)
            continue
        chars = list(sentence)
        for j in np.flatnonzero(mask[i]):
            chars[j] = _LETTERS[letters[i, j]]
        hypotheses.append("".join(chars))
    return hypotheses


def _corrupt_window(intended: Action, rate: float, rng: np.random.Generator):
    flips = rng.random(GESTURE_WINDOW_SIZE) < rate
    others = rng.integers(0, len(ACTIONS) - 1, size=GESTURE_WINDOW_SIZE)
    intended_idx = ACTIONS.index(intended)
    window = []
    for flip, other in zip(flips, others):
        if not flip:
            window.append(intended)
        else:
            idx = int(other)
            if idx >= intended_idx:
                idx += 1
            window.append(ACTIONS[idx])
    return window


class SimulatedAdvisor:
    """Stateless given an explicit generator; share one per agent stream."""

    def __init__(self, lexicon: CommandLexicon, noise: ChannelNoise = ChannelNoise()):
        self.lexicon = lexicon
        self.noise = noise

    def emit(self, s: WorldState, rng: np.random.Generator) -> AdviceEvent:
        intended = intended_advice(s)
        return self.emit_for(intended, rng)

    def emit_for(self, intended: Action, rng: np.random.Generator) -> AdviceEvent:
        hypotheses = _corrupt_sentence(
            self.lexicon.sentence(intended),
            self.noise.audio_char_error_rate,
            self.noise.hypothesis_count,
            rng,
        )
        audio = audio_recognize(hypotheses, self.lexicon)
        window = _corrupt_window(intended, self.noise.vision_label_error_rate, rng)
        vision = gesture_recognize(window)
        return AdviceEvent(intended, audio, vision, integrate(audio, vision))


def channel_fidelity(
    advisor: SimulatedAdvisor,
    state: WorldState,
    draws: int,
    rng: np.random.Generator,
) -> float:
    """Fraction of advice events whose fused label matches the intent."""
    intended = intended_advice(state)
    hits = 0
    for _ in range(draws):
        event = advisor.emit_for(intended, rng)
        hits += event.fused.label is intended
    return hits / draws
