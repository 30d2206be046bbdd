// Session view-model: a small store whose every mutation either records a
// server response or applies one local draft edit.

import { ApiClient } from "./api.js";
import { applyAction, initialDraftState, type DraftState } from "./replay.js";
import type {
  Action,
  Cell,
  FormulaOut,
  GridSpec,
  Question,
  TraceRecord,
  TrainStatus,
} from "./types.js";

export interface ViewModel {
  grid: GridSpec | null;
  sessionId: string | null;
  enumerated: number;
  pendingQuestions: Question[];
  candidates: string[];
  draftActions: Action[];
  draftState: DraftState | null;
  draftStart: Cell | null;
  lastEditRejected: boolean;
  demoCount: number;
  formula: FormulaOut | null;
  training: TrainStatus | null;
  rollout: TraceRecord[];
  rolloutActions: string[];
  frame: number;
  error: string | null;
}

export function emptyViewModel(): ViewModel {
  return {
    grid: null,
    sessionId: null,
    enumerated: 0,
    pendingQuestions: [],
    candidates: [],
    draftActions: [],
    draftState: null,
    draftStart: null,
    lastEditRejected: false,
    demoCount: 0,
    formula: null,
    training: null,
    rollout: [],
    rolloutActions: [],
    frame: 0,
    error: null,
  };
}

export type Listener = (model: ViewModel) => void;

export class SessionController {
  model: ViewModel = emptyViewModel();
  private listeners: Listener[] = [];

  constructor(private api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.model);
  }

  private patch(changes: Partial<ViewModel>): void {
    this.model = { ...this.model, ...changes };
    this.emit();
  }

  async start(): Promise<void> {
    const grid = await this.api.world();
    const sessionId = await this.api.createSession();
    this.patch({
      grid,
      sessionId,
      draftState: initialDraftState(grid),
      draftStart: grid.robot_start,
    });
  }

  async submitNl(text: string): Promise<void> {
    if (!this.model.sessionId) throw new Error("no session");
    const response = await this.api.submitNl(this.model.sessionId, text);
    this.patch({ enumerated: response.enumerated });
    await this.refresh();
  }

  /** Re-sync questions, candidates, and the formula after any mutation. */
  async refresh(): Promise<void> {
    if (!this.model.sessionId) return;
    const [questions, candidates, formula] = await Promise.all([
      this.api.questions(this.model.sessionId),
      this.api.candidates(this.model.sessionId),
      this.api.formula(this.model.sessionId),
    ]);
    this.patch({
      pendingQuestions: questions,
      candidates: candidates.templates,
      enumerated: candidates.enumerated,
      formula,
    });
  }

  async answer(questionId: string, payload: unknown): Promise<void> {
    if (!this.model.sessionId) throw new Error("no session");
    try {
      await this.api.answer(this.model.sessionId, questionId, payload);
      this.patch({ error: null });
    } catch (err) {
      this.patch({ error: String(err) });
    }
    await this.refresh();
  }

  /** One local draft edit; rejected edits only raise the visual cue. */
  edit(action: Action): boolean {
    const { grid, draftState } = this.model;
    if (!grid || !draftState) return false;
    const next = applyAction(grid, draftState, action);
    if (next === null) {
      this.patch({ lastEditRejected: true });
      return false;
    }
    this.patch({
      draftActions: [...this.model.draftActions, action],
      draftState: next,
      lastEditRejected: false,
    });
    return true;
  }

  undoEdit(): void {
    const { grid, draftActions, draftStart } = this.model;
    if (!grid || draftActions.length === 0) return;
    const remaining = draftActions.slice(0, -1);
    let state = initialDraftState(grid, draftStart ?? undefined);
    for (const action of remaining) {
      const next = applyAction(grid, state, action);
      if (next) state = next;
    }
    this.patch({ draftActions: remaining, draftState: state, lastEditRejected: false });
  }

  clearDraft(): void {
    const { grid, draftStart } = this.model;
    if (!grid) return;
    this.patch({
      draftActions: [],
      draftState: initialDraftState(grid, draftStart ?? undefined),
      lastEditRejected: false,
    });
  }

  setDraftStart(cell: Cell): void {
    const { grid } = this.model;
    if (!grid) return;
    this.patch({
      draftStart: cell,
      draftActions: [],
      draftState: initialDraftState(grid, cell),
      lastEditRejected: false,
    });
  }

  async submitDemo(label: "positive" | "negative"): Promise<void> {
    const { sessionId, draftActions, draftStart, grid } = this.model;
    if (!sessionId || !grid) throw new Error("no session");
    const initial =
      draftStart && draftStart !== grid.robot_start ? { robot: draftStart } : {};
    try {
      await this.api.uploadDemo(sessionId, draftActions, label, initial);
      this.patch({ demoCount: this.model.demoCount + 1, error: null });
      this.clearDraft();
    } catch (err) {
      this.patch({ error: String(err) });
    }
    await this.refresh();
  }

  async startTraining(episodes?: number, seed?: number): Promise<void> {
    if (!this.model.sessionId) throw new Error("no session");
    try {
      const status = await this.api.startTraining(this.model.sessionId, episodes, seed);
      this.patch({ training: status, error: null });
    } catch (err) {
      this.patch({ error: String(err) });
    }
  }

  async pollTraining(): Promise<TrainStatus | null> {
    if (!this.model.sessionId) return null;
    const status = await this.api.trainingStatus(this.model.sessionId);
    this.patch({ training: status });
    if (status.status === "finished") {
      const policy = await this.api.policy(this.model.sessionId);
      this.patch({ rollout: policy.rollout, rolloutActions: policy.actions, frame: 0 });
    }
    return status;
  }

  /** Playback is enabled only once training produced a rollout. */
  playbackEnabled(): boolean {
    return (
      this.model.training?.status === "finished" && this.model.rollout.length > 0
    );
  }

  stepFrame(delta: number): void {
    if (!this.playbackEnabled()) return;
    const last = this.model.rollout.length - 1;
    const frame = Math.max(0, Math.min(last, this.model.frame + delta));
    this.patch({ frame });
  }

  currentFrame(): TraceRecord | null {
    return this.model.rollout[this.model.frame] ?? null;
  }
}

/** Atom badges for one rollout frame, for the playback side panel. */
export function frameBadges(record: TraceRecord): string[] {
  const badges: string[] = [];
  for (const [key, value] of Object.entries(record)) {
    if (typeof value === "boolean" && value && !key.includes("_")) {
      badges.push(key);
    }
  }
  return badges.sort();
}

export function robotPosition(record: TraceRecord): Cell {
  return [record["robot_x"] as number, record["robot_y"] as number];
}
