// Payload shapes of the session service JSON API.

export type Cell = [number, number];

export interface GridSpec {
  width: number;
  height: number;
  walls: Cell[];
  water: Cell[];
  lamp: Cell;
  fire: Cell;
  door: Cell;
  charger: Cell;
  chair: Cell;
  items: Record<string, Cell>;
  robot_start: Cell;
}

export interface Question {
  id: string;
  kind: "paraphrase" | "taskOrder" | "atomParam" | "opParam";
  prompt: string;
  atoms: string[];
  slot: string | null;
}

export interface NlResponse {
  enumerated: number;
  pendingQuestions: number;
  bounds: [number, number] | null;
}

export interface DemoResponse {
  length: number;
  label: string;
  trace: TraceRecord[];
}

export interface CandidatesOut {
  enumerated: number;
  templates: string[];
}

export interface FormulaOut {
  status: "pending" | "selected" | "none";
  formula: string | null;
  userInteractions: number;
  runtimeSeconds: number;
}

export interface TrainStatus {
  status: "idle" | "running" | "finished" | "cancelled" | "failed";
  episode: number;
  episodes: number;
  error: string | null;
}

export type TraceRecord = Record<string, boolean | number>;

export interface PolicyOut {
  satisfied: boolean;
  actions: string[];
  rollout: TraceRecord[];
  tableSize: number;
}

export const MOVE_ACTIONS = ["moveN", "moveS", "moveE", "moveW"] as const;

export const BUTTON_ACTIONS = [
  "pickUp",
  "drop",
  "toggleLamp",
  "toggleFire",
  "toggleDoor",
  "plugCharger",
  "sit",
  "stand",
  "wait",
] as const;

export type Action =
  | (typeof MOVE_ACTIONS)[number]
  | (typeof BUTTON_ACTIONS)[number];
