"""Wire schemas for the live training session service (all versioned v=1)."""
from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field

WIRE_VERSION = 1

MessageKind = Literal[
    "stateUpdate", "adviceSubmit", "adviceAck", "episodeEnd", "configUpdate"
]


class SessionConfig(BaseModel):
    alpha: float = 0.3
    gamma: float = 0.9
    epsilon: float = 0.1
    theta_min: float = Field(0.25, ge=0.0, le=1.0)
    eta: float = Field(1.0, ge=0.0, le=1.0)
    use_affordances: bool = True
    max_steps_per_episode: int = Field(100, ge=1)
    pace: float = Field(5.0, gt=0.0, description="steps per second")
    seed: int = 0
    episodes: Optional[int] = Field(None, ge=1, description="stop after this many episodes")


class StateFields(BaseModel):
    token: str
    hand_object: str
    hand_position: str
    goblet_position: str
    left_clean: bool
    right_clean: bool


class AdvicePayload(BaseModel):
    """Either raw channels (fused server-side) or a direct (label, confidence)."""

    sentence: Optional[str] = None
    gesture_window: Optional[List[str]] = None
    label: Optional[str] = None
    confidence: Optional[float] = Field(None, ge=0.0, le=1.0)


class FusedAdvice(BaseModel):
    label: str
    confidence: float
    congruent: Optional[bool] = None


class AdviceAck(BaseModel):
    v: int = WIRE_VERSION
    kind: Literal["adviceAck"] = "adviceAck"
    accepted: bool
    reason: Optional[str] = None
    fused: Optional[FusedAdvice] = None


class StateUpdate(BaseModel):
    v: int = WIRE_VERSION
    kind: Literal["stateUpdate"] = "stateUpdate"
    session_id: str
    episode: int
    step: int
    state: StateFields
    action: str
    reward: float
    advice_used: bool
    advice_gated: bool
    affordance_bypassed: bool
    advice_confidence: Optional[float] = None
    episode_reward: float
    terminal: Optional[Literal["done", "failed", "truncated"]] = None


class EpisodeEnd(BaseModel):
    v: int = WIRE_VERSION
    kind: Literal["episodeEnd"] = "episodeEnd"
    session_id: str
    episode: int
    reward: float
    outcome: Literal["done", "failed", "truncated"]


class ConfigUpdate(BaseModel):
    v: int = WIRE_VERSION
    kind: Literal["configUpdate"] = "configUpdate"
    pace: Optional[float] = Field(None, gt=0.0)
    theta_min: Optional[float] = Field(None, ge=0.0, le=1.0)
    eta: Optional[float] = Field(None, ge=0.0, le=1.0)


class SessionCreated(BaseModel):
    session_id: str


class SessionSnapshot(BaseModel):
    session_id: str
    episode: int
    step: int
    state: StateFields
    last_reward: Optional[float]
    episode_reward: float
    cumulative: List[float]
    pending_advice: bool
    running: bool
    pace: float
    config: SessionConfig
