"""Audio/vision command recognition confidences and their integration.

The audio channel matches free-form hypothesis strings against a fixed command
lexicon by Levenshtein distance; the vision channel takes the mode of a
5-frame gesture window.  Both produce a (label, confidence) pair which the
integration step combines into a single label and a confidence in [0, 1],
boosting congruent channels and damping incongruent ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .scenario import ACTIONS, Action

GESTURE_WINDOW_SIZE = 5

_RESCALE = math.log(3.0)  # maximum of ln(1 + likeliness), at likeliness = 2


class Modality(Enum):
    AUDIO = "audio"
    VISION = "vision"


@dataclass(frozen=True)
class UnimodalPrediction:
    label: Action
    confidence: float
    modality: Modality


@dataclass(frozen=True)
class IntegratedFeedback:
    label: Action
    confidence: float
    likeliness: float
    congruent: bool


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (substitution, insertion, deletion all cost 1)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


DEFAULT_SENTENCES: Tuple[str, ...] = tuple(a.value for a in ACTIONS)


class CommandLexicon:
    """Ordered sentence list, one command sentence per action."""

    def __init__(self, sentences: Sequence[str]):
        sentences = tuple(sentences)
        if len(sentences) != len(ACTIONS):
            raise ValueError(f"lexicon needs {len(ACTIONS)} sentences, got {len(sentences)}")
        if len(set(sentences)) != len(sentences):
            raise ValueError("lexicon sentences must be distinct")
        if any(not s for s in sentences):
            raise ValueError("lexicon sentences must be non-empty")
        self.sentences = sentences
        self._by_action = dict(zip(ACTIONS, sentences))
        # per-hypothesis match cache; corrupted hypotheses repeat heavily
        self._match_cache: Dict[str, Tuple[int, int]] = {}

    @classmethod
    def default(cls) -> "CommandLexicon":
        return cls(DEFAULT_SENTENCES)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "CommandLexicon":
        lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
        return cls(lines)

    def sentence(self, action: Action) -> str:
        return self._by_action[action]

    def best_match(self, hypothesis: str) -> Tuple[int, int]:
        """(distance, sentence index) of the closest sentence; ties by order."""
        cached = self._match_cache.get(hypothesis)
        if cached is not None:
            return cached
        best = (len(hypothesis) + max(len(s) for s in self.sentences) + 1, -1)
        for j, sj in enumerate(self.sentences):
            d = levenshtein(hypothesis, sj)
            if d < best[0]:
                best = (d, j)
        self._match_cache[hypothesis] = best
        return best


def audio_recognize(hypotheses: Sequence[str], lexicon: CommandLexicon) -> UnimodalPrediction:
    """Pick the lexicon sentence nearest to any hypothesis.

    Ties in distance go to the earlier lexicon sentence, then to the earlier
    hypothesis.  Confidence is 1 - distance/|sentence|, clamped at zero.
    """
    if not hypotheses:
        raise ValueError("need at least one hypothesis")
    best_d, best_j = None, None
    for h in hypotheses:
        d, j = lexicon.best_match(h)
        if best_d is None or d < best_d or (d == best_d and j < best_j):
            best_d, best_j = d, j
    sentence = lexicon.sentences[best_j]
    confidence = max(0.0, 1.0 - best_d / len(sentence))
    return UnimodalPrediction(ACTIONS[best_j], confidence, Modality.AUDIO)


def gesture_recognize(window: Sequence[Action]) -> UnimodalPrediction:
    """Mode of the 5-frame window; tie broken by the most recent occurrence."""
    if len(window) != GESTURE_WINDOW_SIZE:
        raise ValueError(f"gesture window must have {GESTURE_WINDOW_SIZE} frames")
    counts: Dict[Action, int] = {}
    for label in window:
        counts[label] = counts.get(label, 0) + 1
    top = max(counts.values())
    winner = None
    for label in window:  # latest occurrence of a top-count label wins
        if counts[label] == top:
            winner = label
    return UnimodalPrediction(winner, top / GESTURE_WINDOW_SIZE, Modality.VISION)


def integrate(audio: UnimodalPrediction, vision: UnimodalPrediction) -> IntegratedFeedback:
    """Fuse the two channels into one label and a rescaled log confidence."""
    if audio.modality is not Modality.AUDIO or vision.modality is not Modality.VISION:
        raise ValueError("integrate expects one audio and one vision prediction")
    label = audio.label if audio.confidence > vision.confidence else vision.label
    congruent = audio.label is vision.label
    if congruent:
        likeliness = audio.confidence + vision.confidence
    else:
        likeliness = abs(audio.confidence - vision.confidence)
    confidence = math.log(1.0 + likeliness) / _RESCALE
    return IntegratedFeedback(label, confidence, likeliness, congruent)


def default_lexicon_path() -> Path:
    return Path(str(resources.files("cleantable").joinpath("data/lexicon.txt")))
