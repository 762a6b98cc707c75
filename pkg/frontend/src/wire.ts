/** Wire protocol (v=1) of the live training service. The UI never computes
 *  fusion or learning itself; it renders exactly what these messages carry. */

export const WIRE_VERSION = 1;

export const ACTIONS = [
  "go left",
  "go right",
  "go home",
  "grasp",
  "place",
  "wipe",
  "abort",
] as const;

export type ActionLabel = (typeof ACTIONS)[number];

export interface StateFields {
  token: string;
  hand_object: string;
  hand_position: string;
  goblet_position: string;
  left_clean: boolean;
  right_clean: boolean;
}

export interface StateUpdate {
  v: number;
  kind: "stateUpdate";
  session_id: string;
  episode: number;
  step: number;
  state: StateFields;
  action: string;
  reward: number;
  advice_used: boolean;
  advice_gated: boolean;
  affordance_bypassed: boolean;
  advice_confidence: number | null;
  episode_reward: number;
  terminal: "done" | "failed" | "truncated" | null;
}

export interface EpisodeEnd {
  v: number;
  kind: "episodeEnd";
  session_id: string;
  episode: number;
  reward: number;
  outcome: "done" | "failed" | "truncated";
}

export interface FusedAdvice {
  label: string;
  confidence: number;
  congruent: boolean | null;
}

export interface AdviceAck {
  v: number;
  kind: "adviceAck";
  accepted: boolean;
  reason: string | null;
  fused: FusedAdvice | null;
}

export interface ConfigUpdate {
  v: number;
  kind: "configUpdate";
  pace: number | null;
  theta_min: number | null;
  eta: number | null;
}

export type ServerMessage = StateUpdate | EpisodeEnd | AdviceAck | ConfigUpdate;

export interface AdviceSubmit {
  v: number;
  kind: "adviceSubmit";
  payload: {
    sentence?: string;
    gesture_window?: string[];
    label?: string;
    confidence?: number;
  };
}

export interface SessionSnapshot {
  session_id: string;
  episode: number;
  step: number;
  state: StateFields;
  last_reward: number | null;
  episode_reward: number;
  cumulative: number[];
  pending_advice: boolean;
  running: boolean;
  pace: number;
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null;
}

export function parseServerMessage(raw: unknown): ServerMessage | null {
  if (!isRecord(raw) || raw.v !== WIRE_VERSION) return null;
  switch (raw.kind) {
    case "stateUpdate":
      return isRecord(raw.state) && typeof raw.action === "string"
        ? (raw as unknown as StateUpdate)
        : null;
    case "episodeEnd":
      return typeof raw.reward === "number" ? (raw as unknown as EpisodeEnd) : null;
    case "adviceAck":
      return typeof raw.accepted === "boolean" ? (raw as unknown as AdviceAck) : null;
    case "configUpdate":
      return raw as unknown as ConfigUpdate;
    default:
      return null;
  }
}

export function adviceSubmit(
  sentence: string,
  gestureWindow: string[],
): AdviceSubmit {
  return {
    v: WIRE_VERSION,
    kind: "adviceSubmit",
    payload: { sentence, gesture_window: gestureWindow },
  };
}

export function configUpdate(fields: {
  pace?: number;
  theta_min?: number;
  eta?: number;
}): ConfigUpdate {
  return {
    v: WIRE_VERSION,
    kind: "configUpdate",
    pace: fields.pace ?? null,
    theta_min: fields.theta_min ?? null,
    eta: fields.eta ?? null,
  };
}
