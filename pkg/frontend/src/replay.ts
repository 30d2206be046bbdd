// Client-side draft replay: movement legality only.
//
// This mirrors the server's no-op movement rules (bounds, walls, the closed
// door) so obviously-broken edits get an immediate cue.  Everything else
// (pickup visibility, toggle adjacency, key possession) is left to the
// authoritative server replay on submit.

import type { Action, Cell, GridSpec } from "./types.js";

export interface DraftState {
  robot: Cell;
  doorOpen: boolean;
}

const MOVES: Record<string, [number, number]> = {
  moveN: [0, 1],
  moveS: [0, -1],
  moveE: [1, 0],
  moveW: [-1, 0],
};

function sameCell(a: Cell, b: Cell): boolean {
  return a[0] === b[0] && a[1] === b[1];
}

function isWall(grid: GridSpec, cell: Cell): boolean {
  return grid.walls.some((w) => sameCell(w, cell));
}

function inBounds(grid: GridSpec, cell: Cell): boolean {
  return cell[0] >= 0 && cell[0] < grid.width && cell[1] >= 0 && cell[1] < grid.height;
}

export function initialDraftState(grid: GridSpec, start?: Cell): DraftState {
  return { robot: start ?? grid.robot_start, doorOpen: false };
}

/** Apply one action to the draft state; returns null when the edit would be
 * an obvious no-op (wall bump, out of bounds, closed door). */
export function applyAction(
  grid: GridSpec,
  state: DraftState,
  action: Action,
): DraftState | null {
  const move = MOVES[action];
  if (move) {
    const target: Cell = [state.robot[0] + move[0], state.robot[1] + move[1]];
    if (!inBounds(grid, target) || isWall(grid, target)) {
      return null;
    }
    if (sameCell(target, grid.door) && !state.doorOpen) {
      return null;
    }
    return { ...state, robot: target };
  }
  if (action === "toggleDoor") {
    // optimistic: the server still requires adjacency and the key
    return { ...state, doorOpen: !state.doorOpen };
  }
  return { ...state };
}

/** Replay a whole action list; returns the per-step states or the index of
 * the first illegal edit. */
export function replayDraft(
  grid: GridSpec,
  actions: Action[],
  start?: Cell,
): { states: DraftState[] } | { illegalAt: number } {
  let state = initialDraftState(grid, start);
  const states = [state];
  for (let i = 0; i < actions.length; i++) {
    const next = applyAction(grid, state, actions[i]);
    if (next === null) {
      return { illegalAt: i };
    }
    state = next;
    states.push(state);
  }
  return { states };
}
