/** Pure view state: everything here is derived from received wire messages
 *  (or the snapshot endpoint) so it can be unit-tested without a DOM. */

import {
  ACTIONS,
  ActionLabel,
  AdviceSubmit,
  ServerMessage,
  SessionSnapshot,
  StateFields,
  adviceSubmit,
} from "./wire.js";

export const GESTURE_WINDOW_SIZE = 5;

export type AdviceStatus =
  | "pending" // submitted, no ack yet
  | "rejected" // ack said no (malformed / slot already full)
  | "accepted" // ack'd, not consumed by a step yet
  | "used" // executed by the learner
  | "gated" // confidence below the acceptance threshold
  | "bypassed"; // accepted but replaced by the failure-prediction check

export interface AdviceRow {
  sentence: string;
  gestureWindow: string[];
  fusedLabel: string | null;
  fusedConfidence: number | null;
  audioNote: string | null;
  status: AdviceStatus;
  reason: string | null;
}

export interface ViewModel {
  connected: boolean;
  everConnected: boolean;
  sessionId: string | null;
  episode: number;
  step: number;
  state: StateFields | null;
  lastAction: string | null;
  lastReward: number | null;
  episodeReward: number;
  rewards: number[]; // one entry per finished episode
  lastOutcome: string | null;
  history: AdviceRow[];
  pace: number | null;
  thetaMin: number | null;
  eta: number | null;
}

export function initialViewModel(): ViewModel {
  return {
    connected: false,
    everConnected: false,
    sessionId: null,
    episode: 0,
    step: 0,
    state: null,
    lastAction: null,
    lastReward: null,
    episodeReward: 0,
    rewards: [],
    lastOutcome: null,
    history: [],
    pace: null,
    thetaMin: null,
    eta: null,
  };
}

/** Connection loss keeps all history; only the liveness flag flips. */
export function setConnected(vm: ViewModel, connected: boolean): ViewModel {
  return { ...vm, connected, everConnected: vm.everConnected || connected };
}

export function applySnapshot(vm: ViewModel, snap: SessionSnapshot): ViewModel {
  return {
    ...vm,
    sessionId: snap.session_id,
    episode: snap.episode,
    step: snap.step,
    state: snap.state,
    lastReward: snap.last_reward,
    episodeReward: snap.episode_reward,
    rewards: [...snap.cumulative],
    pace: snap.pace,
  };
}

function resolveLatest(
  history: AdviceRow[],
  from: AdviceStatus,
  to: AdviceStatus,
  patch: Partial<AdviceRow> = {},
): AdviceRow[] {
  const idx = history.map((r) => r.status).lastIndexOf(from);
  if (idx < 0) return history;
  const next = history.slice();
  next[idx] = { ...next[idx], ...patch, status: to };
  return next;
}

export function applyMessage(vm: ViewModel, msg: ServerMessage): ViewModel {
  switch (msg.kind) {
    case "stateUpdate": {
      let history = vm.history;
      if (msg.advice_confidence !== null) {
        const status: AdviceStatus = msg.advice_gated
          ? "gated"
          : msg.affordance_bypassed
            ? "bypassed"
            : "used";
        history = resolveLatest(history, "accepted", status);
      }
      return {
        ...vm,
        sessionId: msg.session_id,
        episode: msg.episode,
        step: msg.step,
        state: msg.state,
        lastAction: msg.action,
        lastReward: msg.reward,
        episodeReward: msg.episode_reward,
        history,
      };
    }
    case "episodeEnd":
      return {
        ...vm,
        rewards: [...vm.rewards, msg.reward],
        lastOutcome: msg.outcome,
        episodeReward: 0,
        step: 0,
      };
    case "adviceAck": {
      const history = msg.accepted
        ? resolveLatest(vm.history, "pending", "accepted", {
            fusedLabel: msg.fused?.label ?? null,
            fusedConfidence: msg.fused?.confidence ?? null,
          })
        : resolveLatest(vm.history, "pending", "rejected", {
            reason: msg.reason,
          });
      return { ...vm, history };
    }
    case "configUpdate":
      return {
        ...vm,
        pace: msg.pace ?? vm.pace,
        thetaMin: msg.theta_min ?? vm.thetaMin,
        eta: msg.eta ?? vm.eta,
      };
  }
}

// ---------------------------------------------------------------- composer

export interface Composer {
  sentence: string;
  /** Always exactly five slots; defaults to five copies of the selected
   *  command (a clean window). */
  gestureSlots: string[];
  selectedCommand: ActionLabel;
  injectNoise: boolean;
}

export function initialComposer(): Composer {
  return {
    sentence: ACTIONS[0],
    gestureSlots: Array(GESTURE_WINDOW_SIZE).fill(ACTIONS[0]),
    selectedCommand: ACTIONS[0],
    injectNoise: false,
  };
}

export function selectCommand(composer: Composer, command: ActionLabel): Composer {
  return {
    ...composer,
    selectedCommand: command,
    sentence: command,
    gestureSlots: Array(GESTURE_WINDOW_SIZE).fill(command),
  };
}

export function setSentence(composer: Composer, sentence: string): Composer {
  return { ...composer, sentence };
}

export function setSlot(composer: Composer, index: number, label: string): Composer {
  const gestureSlots = composer.gestureSlots.slice();
  gestureSlots[index] = label;
  return { ...composer, gestureSlots };
}

/** Demonstrates incongruent channels: each slot is re-rolled uniformly. */
export function toggleNoise(composer: Composer, random: () => number): Composer {
  if (composer.injectNoise) {
    return selectCommand({ ...composer, injectNoise: false }, composer.selectedCommand);
  }
  const gestureSlots = composer.gestureSlots.map(
    () => ACTIONS[Math.floor(random() * ACTIONS.length)],
  );
  return { ...composer, injectNoise: true, gestureSlots };
}

export function composeAdvice(composer: Composer): AdviceSubmit {
  return adviceSubmit(composer.sentence, composer.gestureSlots);
}

/** History row recorded at submit time; resolved by the ack / next update. */
export function recordSubmission(vm: ViewModel, composer: Composer): ViewModel {
  const row: AdviceRow = {
    sentence: composer.sentence,
    gestureWindow: [...composer.gestureSlots],
    fusedLabel: null,
    fusedConfidence: null,
    audioNote: null,
    status: "pending",
    reason: null,
  };
  return { ...vm, history: [...vm.history, row] };
}

// ---------------------------------------------------------------- rendering helpers

/** Normalized polyline points for an SVG sparkline of episode rewards. */
export function sparklinePoints(
  rewards: number[],
  width: number,
  height: number,
): Array<[number, number]> {
  if (rewards.length === 0) return [];
  const lo = Math.min(...rewards, 0);
  const hi = Math.max(...rewards, 1);
  const span = hi - lo || 1;
  const dx = rewards.length > 1 ? width / (rewards.length - 1) : 0;
  return rewards.map((r, i) => [i * dx, height - ((r - lo) / span) * height]);
}
