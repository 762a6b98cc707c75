"""Action-effect prediction network for the cleaning-table world.

A 20-30-13 sigmoid MLP memorizes the full transition enumeration: input is a
13-component state code plus a 7-component action code; the target is the
13-component code of the successor, or the all-zero vector when the action
breaks the task.  Training uses damped Gauss-Newton (Levenberg-Marquardt)
steps on the batch sum of squared errors.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .scenario import (
    ACTION_CODE_SIZE,
    ACTIONS,
    STATE_CODE_SIZE,
    Action,
    Failed,
    FAILED,
    WorldState,
    action_code,
    enumerate_states,
    step,
)

logger = logging.getLogger(__name__)

INPUT_SIZE = STATE_CODE_SIZE + ACTION_CODE_SIZE
HIDDEN_SIZE = 30
OUTPUT_SIZE = STATE_CODE_SIZE

DEFAULT_EPOCHS = 100
CONVERGENCE_MSE = 1e-2
DECODE_THRESHOLD = 0.5

_INIT_SCALE = 0.5  # weights start uniform in [-0.5, 0.5]
_DAMPING_INIT = 1e-2
_DAMPING_FACTOR = 10.0
_DAMPING_MAX = 1e10
_MSE_FLOOR = 1e-12  # stop early once the fit is numerically exact


@dataclass(frozen=True)
class AffordanceSample:
    input: Tuple[int, ...]
    target: Tuple[int, ...]


def generate_dataset() -> List[AffordanceSample]:
    """One sample per enumerated (state, action) pair; targets from ``step``."""
    samples = []
    for s in enumerate_states():
        for a in ACTIONS:
            outcome = step(s, a)
            if outcome.failed:
                target = (0,) * OUTPUT_SIZE
            else:
                target = outcome.next_state.code()
            samples.append(AffordanceSample(s.code() + action_code(a), target))
    return samples


def dataset_matrices(dataset: Sequence[AffordanceSample]) -> Tuple[np.ndarray, np.ndarray]:
    x = np.array([s.input for s in dataset], dtype=float)
    t = np.array([s.target for s in dataset], dtype=float)
    return x, t


def save_dataset_csv(dataset: Sequence[AffordanceSample], path: Union[str, Path]) -> None:
    header = [f"x{i}" for i in range(INPUT_SIZE)] + [f"y{i}" for i in range(OUTPUT_SIZE)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in dataset:
            writer.writerow(list(s.input) + list(s.target))


def load_dataset_csv(path: Union[str, Path]) -> List[AffordanceSample]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        samples = []
        for row in reader:
            values = [int(v) for v in row]
            samples.append(
                AffordanceSample(tuple(values[:INPUT_SIZE]), tuple(values[INPUT_SIZE:]))
            )
    return samples


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


@dataclass
class AffordanceNet:
    """Trained network; treat as immutable once returned from ``train``."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    seed: Optional[int] = None
    final_mse: Optional[float] = None
    error_history: List[float] = field(default_factory=list)

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = _sigmoid(x @ self.w1 + self.b1)
        return _sigmoid(h @ self.w2 + self.b2)

    def to_json(self, path: Union[str, Path]) -> None:
        doc = {
            "shapes": {
                "w1": list(self.w1.shape),
                "b1": list(self.b1.shape),
                "w2": list(self.w2.shape),
                "b2": list(self.b2.shape),
            },
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
            "seed": self.seed,
            "final_mse": self.final_mse,
        }
        Path(path).write_text(json.dumps(doc))

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "AffordanceNet":
        doc = json.loads(Path(path).read_text())
        return cls(
            w1=np.array(doc["w1"]),
            b1=np.array(doc["b1"]),
            w2=np.array(doc["w2"]),
            b2=np.array(doc["b2"]),
            seed=doc.get("seed"),
            final_mse=doc.get("final_mse"),
        )


def _unpack(params: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    n1 = INPUT_SIZE * HIDDEN_SIZE
    n2 = n1 + HIDDEN_SIZE
    n3 = n2 + HIDDEN_SIZE * OUTPUT_SIZE
    w1 = params[:n1].reshape(INPUT_SIZE, HIDDEN_SIZE)
    b1 = params[n1:n2]
    w2 = params[n2:n3].reshape(HIDDEN_SIZE, OUTPUT_SIZE)
    b2 = params[n3:]
    return w1, b1, w2, b2


def _pack(w1, b1, w2, b2) -> np.ndarray:
    return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])


def residuals(params: np.ndarray, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    w1, b1, w2, b2 = _unpack(params)
    h = _sigmoid(x @ w1 + b1)
    y = _sigmoid(h @ w2 + b2)
    return (y - t).ravel()


def residual_jacobian(params: np.ndarray, x: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Residual vector and its Jacobian w.r.t. the flattened parameters.

    Rows are ordered (sample, output) row-major to match ``residuals``.
    """
    w1, b1, w2, b2 = _unpack(params)
    n = x.shape[0]
    h = _sigmoid(x @ w1 + b1)
    y = _sigmoid(h @ w2 + b2)
    gy = y * (1.0 - y)  # (n, out)
    gh = h * (1.0 - h)  # (n, hid)

    # chain through the hidden layer: (n, out, hid)
    delta = gy[:, :, None] * w2.T[None, :, :] * gh[:, None, :]

    j_w1 = np.einsum("nkj,ni->nkij", delta, x).reshape(n, OUTPUT_SIZE, -1)
    j_b1 = delta
    j_w2 = np.zeros((n, OUTPUT_SIZE, HIDDEN_SIZE, OUTPUT_SIZE))
    idx = np.arange(OUTPUT_SIZE)
    j_w2[:, idx, :, idx] = (gy[:, :, None] * h[:, None, :]).transpose(1, 0, 2)
    j_w2 = j_w2.reshape(n, OUTPUT_SIZE, -1)
    j_b2 = np.zeros((n, OUTPUT_SIZE, OUTPUT_SIZE))
    j_b2[:, idx, idx] = gy
    jac = np.concatenate([j_w1, j_b1, j_w2, j_b2], axis=2).reshape(n * OUTPUT_SIZE, -1)
    return (y - t).ravel(), jac


def initial_params(seed: Optional[int]) -> np.ndarray:
    rng = np.random.default_rng(seed)
    size = INPUT_SIZE * HIDDEN_SIZE + HIDDEN_SIZE + HIDDEN_SIZE * OUTPUT_SIZE + OUTPUT_SIZE
    return rng.uniform(-_INIT_SCALE, _INIT_SCALE, size=size)


def train(
    dataset: Sequence[AffordanceSample],
    epochs: int = DEFAULT_EPOCHS,
    seed: Optional[int] = 0,
) -> AffordanceNet:
    """Batch Levenberg-Marquardt with the classic x10 / /10 damping schedule.

    Each epoch computes one Jacobian and accepts at most one step; rejected
    trial steps only raise the damping.  Returns the best parameters seen.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    x, t = dataset_matrices(dataset)
    params = initial_params(seed)
    damping = _DAMPING_INIT
    r = residuals(params, x, t)
    sse = float(r @ r)
    history = [sse / r.size]
    eye = None

    for _ in range(epochs):
        r, jac = residual_jacobian(params, x, t)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        if eye is None:
            eye = np.eye(jtj.shape[0])
        while damping <= _DAMPING_MAX:
            try:
                delta = np.linalg.solve(jtj + damping * eye, -jtr)
            except np.linalg.LinAlgError:
                damping *= _DAMPING_FACTOR
                continue
            trial = params + delta
            r_trial = residuals(trial, x, t)
            sse_trial = float(r_trial @ r_trial)
            if sse_trial < sse:
                params = trial
                sse = sse_trial
                damping /= _DAMPING_FACTOR
                break
            damping *= _DAMPING_FACTOR
        history.append(sse / r.size)
        if damping > _DAMPING_MAX or sse / r.size < _MSE_FLOOR:
            break

    mse = sse / (x.shape[0] * OUTPUT_SIZE)
    if mse > CONVERGENCE_MSE:
        logger.warning(
            "effect network did not converge: mse %.3g after %d epochs", mse, epochs
        )
    w1, b1, w2, b2 = _unpack(params)
    return AffordanceNet(
        w1=w1.copy(),
        b1=b1.copy(),
        w2=w2.copy(),
        b2=b2.copy(),
        seed=seed,
        final_mse=mse,
        error_history=history,
    )


@dataclass(frozen=True)
class EffectPrediction:
    raw: Tuple[float, ...]
    decoded: Union[WorldState, Failed]

    @property
    def failed(self) -> bool:
        return isinstance(self.decoded, Failed)


def decode(raw: np.ndarray) -> Union[WorldState, Failed]:
    """All components below threshold means failed; else per-group argmax."""
    if raw.shape != (OUTPUT_SIZE,):
        raise ValueError("expected a 13-component effect vector")
    if np.all(raw < DECODE_THRESHOLD):
        return FAILED
    bits = [0] * OUTPUT_SIZE
    for lo, hi in ((0, 3), (3, 6), (6, 9), (9, 13)):
        bits[lo + int(np.argmax(raw[lo:hi]))] = 1
    return WorldState.from_code(bits)


def predict_effect(net: AffordanceNet, s: WorldState, a: Action) -> EffectPrediction:
    raw = net.forward(np.array(s.code() + action_code(a), dtype=float))
    return EffectPrediction(tuple(raw.tolist()), decode(raw))


def predicts_failure(net: AffordanceNet, s: WorldState, a: Action) -> bool:
    return predict_effect(net, s, a).failed


def failure_table(net: AffordanceNet) -> np.ndarray:
    """Boolean (n_states, n_actions) failure predictions in enumeration order."""
    states = enumerate_states()
    x = np.array(
        [s.code() + action_code(a) for s in states for a in ACTIONS], dtype=float
    )
    raw = net.forward(x)
    return np.all(raw < DECODE_THRESHOLD, axis=1).reshape(len(states), len(ACTIONS))


def decode_accuracy(net: AffordanceNet) -> Tuple[float, float]:
    """(full decode agreement, failed-flag agreement) against the true dynamics."""
    states = enumerate_states()
    total = 0
    decode_hits = 0
    flag_hits = 0
    for s in states:
        for a in ACTIONS:
            outcome = step(s, a)
            pred = predict_effect(net, s, a)
            total += 1
            if outcome.failed == pred.failed:
                flag_hits += 1
                if outcome.failed or outcome.next_state == pred.decoded:
                    decode_hits += 1
    return decode_hits / total, flag_hits / total
