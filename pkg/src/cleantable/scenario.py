"""Cleaning-table MDP: states, actions, deterministic transitions and oracles.

A robot arm tidies a two-section table.  A sponge rests at the home position,
a goblet sits on one of the two sections, and both sections start dirty.  The
task is done when both sections are wiped and the sponge is back home with a
free hand.  Certain actions (grasping thin air, wiping without the sponge,
wiping under the goblet, ...) break the task irrecoverably; those transitions
end in a failed terminal with reward -1.  Every ordinary step costs -0.01 and
finishing pays +1.
"""
from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple, Union

REWARD_DONE = 1.0
REWARD_FAILED = -1.0
REWARD_STEP = -0.01

DISCOUNT = 0.9


class HandObject(Enum):
    FREE = "free"
    SPONGE = "sponge"
    GOBLET = "goblet"


class Location(Enum):
    LEFT = "left"
    RIGHT = "right"
    HOME = "home"


class GobletPlace(Enum):
    LEFT = "left"
    RIGHT = "right"
    IN_HAND = "hand"


class Action(Enum):
    GO_LEFT = "go left"
    GO_RIGHT = "go right"
    GO_HOME = "go home"
    GRASP = "grasp"
    PLACE = "place"
    WIPE = "wipe"
    ABORT = "abort"


ACTIONS: Tuple[Action, ...] = tuple(Action)

_HAND_ORDER = (HandObject.FREE, HandObject.SPONGE, HandObject.GOBLET)
_LOC_ORDER = (Location.LEFT, Location.RIGHT, Location.HOME)
_GOBLET_ORDER = (GobletPlace.LEFT, GobletPlace.RIGHT, GobletPlace.IN_HAND)

STATE_CODE_SIZE = 13  # 3 hand + 3 position + 3 goblet + 4 side combo
ACTION_CODE_SIZE = 7


@dataclass(frozen=True, order=True)
class SideCondition:
    left_clean: bool
    right_clean: bool

    def token(self) -> str:
        return ("C" if self.left_clean else "D") + ("C" if self.right_clean else "D")

    @staticmethod
    def from_token(token: str) -> "SideCondition":
        if len(token) != 2 or any(c not in "CD" for c in token):
            raise ValueError(f"bad side token {token!r}")
        return SideCondition(token[0] == "C", token[1] == "C")

    def mirrored(self) -> "SideCondition":
        return SideCondition(self.right_clean, self.left_clean)

    @property
    def index(self) -> int:
        # one-hot group order: DD, DC, CD, CC
        return (2 if self.left_clean else 0) + (1 if self.right_clean else 0)


@dataclass(frozen=True)
class WorldState:
    """Immutable 4-variable world state."""

    hand_object: HandObject
    hand_position: Location
    goblet_position: GobletPlace
    sides: SideCondition

    def is_consistent(self) -> bool:
        return (self.goblet_position is GobletPlace.IN_HAND) == (
            self.hand_object is HandObject.GOBLET
        )

    def sort_key(self) -> Tuple[int, int, int, int]:
        return (
            _HAND_ORDER.index(self.hand_object),
            _LOC_ORDER.index(self.hand_position),
            _GOBLET_ORDER.index(self.goblet_position),
            self.sides.index,
        )

    def __lt__(self, other: "WorldState") -> bool:
        return self.sort_key() < other.sort_key()

    def token(self) -> str:
        """Canonical short string, e.g. ``"free|home|right|DD"``."""
        return "|".join(
            (
                self.hand_object.value,
                self.hand_position.value,
                self.goblet_position.value,
                self.sides.token(),
            )
        )

    @staticmethod
    def from_token(token: str) -> "WorldState":
        parts = token.split("|")
        if len(parts) != 4:
            raise ValueError(f"bad state token {token!r}")
        return WorldState(
            HandObject(parts[0]),
            Location(parts[1]),
            GobletPlace(parts[2]),
            SideCondition.from_token(parts[3]),
        )

    def code(self) -> Tuple[int, ...]:
        """13-component one-hot encoding (3 + 3 + 3 + 4 groups)."""
        bits = [0] * STATE_CODE_SIZE
        bits[_HAND_ORDER.index(self.hand_object)] = 1
        bits[3 + _LOC_ORDER.index(self.hand_position)] = 1
        bits[6 + _GOBLET_ORDER.index(self.goblet_position)] = 1
        bits[9 + self.sides.index] = 1
        return tuple(bits)

    @staticmethod
    def from_code(bits: Iterable[int]) -> "WorldState":
        bits = list(bits)
        if len(bits) != STATE_CODE_SIZE:
            raise ValueError("state code must have 13 components")

        def pick(group, offset, size):
            chunk = bits[offset : offset + size]
            if sum(chunk) != 1:
                raise ValueError("state code groups must be one-hot")
            return group[chunk.index(1)]

        hand = pick(_HAND_ORDER, 0, 3)
        pos = pick(_LOC_ORDER, 3, 3)
        goblet = pick(_GOBLET_ORDER, 6, 3)
        side_idx = pick((0, 1, 2, 3), 9, 4)
        sides = SideCondition(bool(side_idx & 2), bool(side_idx & 1))
        return WorldState(hand, pos, goblet, sides)

    def mirrored(self) -> "WorldState":
        swap_loc = {Location.LEFT: Location.RIGHT, Location.RIGHT: Location.LEFT}
        swap_gob = {GobletPlace.LEFT: GobletPlace.RIGHT, GobletPlace.RIGHT: GobletPlace.LEFT}
        return WorldState(
            self.hand_object,
            swap_loc.get(self.hand_position, self.hand_position),
            swap_gob.get(self.goblet_position, self.goblet_position),
            self.sides.mirrored(),
        )


def action_code(action: Action) -> Tuple[int, ...]:
    bits = [0] * ACTION_CODE_SIZE
    bits[ACTIONS.index(action)] = 1
    return tuple(bits)


def mirror_action(action: Action) -> Action:
    if action is Action.GO_LEFT:
        return Action.GO_RIGHT
    if action is Action.GO_RIGHT:
        return Action.GO_LEFT
    return action


class Failed:
    """Singleton marker for the failed terminal."""

    _instance: Optional["Failed"] = None

    def __new__(cls) -> "Failed":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Failed"


FAILED = Failed()


@dataclass(frozen=True)
class TransitionOutcome:
    next_state: Union[WorldState, Failed]
    reward: float
    done: bool

    @property
    def failed(self) -> bool:
        return isinstance(self.next_state, Failed)


def is_final(s: WorldState) -> bool:
    """Task complete: hand free at home, both sides clean (goblet either side)."""
    return (
        s.hand_object is HandObject.FREE
        and s.hand_position is Location.HOME
        and s.sides.left_clean
        and s.sides.right_clean
    )


def initial_state(goblet_side: Location) -> WorldState:
    if goblet_side not in (Location.LEFT, Location.RIGHT):
        raise ValueError("the goblet starts on the left or right section, never home")
    place = GobletPlace.LEFT if goblet_side is Location.LEFT else GobletPlace.RIGHT
    return WorldState(HandObject.FREE, Location.HOME, place, SideCondition(False, False))


INITIAL_STATES: Tuple[WorldState, ...] = (
    initial_state(Location.LEFT),
    initial_state(Location.RIGHT),
)


def _goblet_at(s: WorldState, loc: Location) -> bool:
    return (s.goblet_position is GobletPlace.LEFT and loc is Location.LEFT) or (
        s.goblet_position is GobletPlace.RIGHT and loc is Location.RIGHT
    )


def _ok(next_state: WorldState) -> TransitionOutcome:
    if is_final(next_state):
        return TransitionOutcome(next_state, REWARD_DONE, True)
    return TransitionOutcome(next_state, REWARD_STEP, False)


def _fail() -> TransitionOutcome:
    return TransitionOutcome(FAILED, REWARD_FAILED, True)


def step(s: WorldState, a: Action) -> TransitionOutcome:
    """Deterministic transition function.

    Total over all consistent states; the episode loop is responsible for not
    stepping out of a terminal.
    """
    if not s.is_consistent():
        raise ValueError(f"inconsistent state {s!r}")

    if a in (Action.GO_LEFT, Action.GO_RIGHT, Action.GO_HOME):
        target = {
            Action.GO_LEFT: Location.LEFT,
            Action.GO_RIGHT: Location.RIGHT,
            Action.GO_HOME: Location.HOME,
        }[a]
        return _ok(WorldState(s.hand_object, target, s.goblet_position, s.sides))

    if a is Action.GRASP:
        if s.hand_object is not HandObject.FREE:
            return _fail()
        if s.hand_position is Location.HOME:
            # the sponge rests at home whenever it is not held
            return _ok(WorldState(HandObject.SPONGE, s.hand_position, s.goblet_position, s.sides))
        if _goblet_at(s, s.hand_position):
            return _ok(
                WorldState(HandObject.GOBLET, s.hand_position, GobletPlace.IN_HAND, s.sides)
            )
        return _fail()

    if a is Action.PLACE:
        if s.hand_object is HandObject.FREE:
            return _fail()
        if s.hand_object is HandObject.SPONGE:
            if s.hand_position is not Location.HOME:
                return _fail()
            return _ok(WorldState(HandObject.FREE, s.hand_position, s.goblet_position, s.sides))
        # holding the goblet: only the table sections can take it
        if s.hand_position is Location.HOME:
            return _fail()
        place = GobletPlace.LEFT if s.hand_position is Location.LEFT else GobletPlace.RIGHT
        return _ok(WorldState(HandObject.FREE, s.hand_position, place, s.sides))

    if a is Action.WIPE:
        if s.hand_object is not HandObject.SPONGE:
            return _fail()
        if s.hand_position is Location.HOME:
            return _fail()
        if _goblet_at(s, s.hand_position):
            return _fail()
        sides = SideCondition(
            s.sides.left_clean or s.hand_position is Location.LEFT,
            s.sides.right_clean or s.hand_position is Location.RIGHT,
        )
        return _ok(WorldState(s.hand_object, s.hand_position, s.goblet_position, sides))

    # Abort: full reset.  Arm goes home, sides revert to dirty, a held sponge
    # returns to home, a held goblet is set down on the arm's current section.
    # Holding the goblet at home leaves it in hand (there is nowhere at home
    # to set it down), so that one configuration resets everything else only.
    if s.hand_object is HandObject.GOBLET:
        if s.hand_position is Location.LEFT:
            goblet = GobletPlace.LEFT
        elif s.hand_position is Location.RIGHT:
            goblet = GobletPlace.RIGHT
        else:
            return _ok(
                WorldState(
                    HandObject.GOBLET,
                    Location.HOME,
                    GobletPlace.IN_HAND,
                    SideCondition(False, False),
                )
            )
    else:
        goblet = s.goblet_position
    return _ok(
        WorldState(HandObject.FREE, Location.HOME, goblet, SideCondition(False, False))
    )


@functools.lru_cache(maxsize=1)
def enumerate_states() -> Tuple[WorldState, ...]:
    """Breadth-first closure of ``step`` from both initial states.

    Final states are included in the enumeration (they are states of the
    world) but never expanded; the failed terminal has no state vector and is
    excluded.  Discovery order is deterministic, so indices are stable.
    """
    order: List[WorldState] = []
    seen = set()
    queue = deque(INITIAL_STATES)
    for s in INITIAL_STATES:
        seen.add(s)
        order.append(s)
    while queue:
        s = queue.popleft()
        if is_final(s):
            continue
        for a in ACTIONS:
            outcome = step(s, a)
            ns = outcome.next_state
            if isinstance(ns, Failed) or ns in seen:
                continue
            seen.add(ns)
            order.append(ns)
            queue.append(ns)
    return tuple(order)


@functools.lru_cache(maxsize=1)
def state_index() -> Dict[WorldState, int]:
    return {s: i for i, s in enumerate(enumerate_states())}


@functools.lru_cache(maxsize=1)
def optimal_policy() -> Dict[WorldState, Action]:
    """Greedy policy from exact value iteration over the true MDP."""
    states = [s for s in enumerate_states() if not is_final(s)]
    values: Dict[WorldState, float] = {s: 0.0 for s in states}

    def q_value(s: WorldState, a: Action) -> float:
        outcome = step(s, a)
        if outcome.done:
            return outcome.reward
        return outcome.reward + DISCOUNT * values[outcome.next_state]

    while True:
        delta = 0.0
        for s in states:
            best = max(q_value(s, a) for a in ACTIONS)
            delta = max(delta, abs(best - values[s]))
            values[s] = best
        if delta < 1e-12:
            break

    policy: Dict[WorldState, Action] = {}
    for s in states:
        best_a = ACTIONS[0]
        best_q = q_value(s, best_a)
        for a in ACTIONS[1:]:
            q = q_value(s, a)
            if q > best_q:
                best_a, best_q = a, q
        policy[s] = best_a
    return policy


def oracle_episode_length(start: WorldState, max_steps: int = 1000) -> int:
    """Number of steps the optimal policy takes from ``start`` to Done."""
    policy = optimal_policy()
    s = start
    for n in range(1, max_steps + 1):
        outcome = step(s, policy[s])
        if outcome.done:
            if outcome.failed:
                raise RuntimeError("oracle policy hit a failed state")
            return n
        s = outcome.next_state
    raise RuntimeError("oracle policy did not finish")
