// Canvas renderer for the grid, the draft path, and rollout frames.

import type { DraftState } from "./replay.js";
import type { Cell, GridSpec, TraceRecord } from "./types.js";
import { robotPosition } from "./state.js";

const CELL = 48;

const FIXTURE_COLORS: Record<string, string> = {
  lamp: "#f5c518",
  fire: "#e25822",
  door: "#8b5a2b",
  charger: "#2e86de",
  chair: "#9b59b6",
};

const ITEM_COLORS: Record<string, string> = {
  doorKey: "#c0a030",
  greenCube: "#27ae60",
  purpleCube: "#8e44ad",
};

export function canvasSize(grid: GridSpec): [number, number] {
  return [grid.width * CELL, grid.height * CELL];
}

// y grows north; the canvas origin is top-left
function toPixel(grid: GridSpec, cell: Cell): [number, number] {
  return [cell[0] * CELL, (grid.height - 1 - cell[1]) * CELL];
}

export function pixelToCell(grid: GridSpec, x: number, y: number): Cell {
  return [Math.floor(x / CELL), grid.height - 1 - Math.floor(y / CELL)];
}

export function drawGrid(
  ctx: CanvasRenderingContext2D,
  grid: GridSpec,
  draft: DraftState | null,
  frame: TraceRecord | null,
  rejected: boolean,
): void {
  const [w, h] = canvasSize(grid);
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, w, h);

  for (const cell of grid.water) {
    fillCell(ctx, grid, cell, "#aed6f1");
  }
  for (const cell of grid.walls) {
    fillCell(ctx, grid, cell, "#2d3436");
  }
  for (const [name, cell] of Object.entries({
    lamp: grid.lamp,
    fire: grid.fire,
    door: grid.door,
    charger: grid.charger,
    chair: grid.chair,
  })) {
    fillCell(ctx, grid, cell as Cell, FIXTURE_COLORS[name], 0.35);
    label(ctx, grid, cell as Cell, name[0].toUpperCase());
  }
  for (const [item, cell] of Object.entries(grid.items)) {
    if (frame && frame[`itemOnRobot(${item})`]) continue;
    const where = frame
      ? ([frame[`${item}_x`] as number, frame[`${item}_y`] as number] as Cell)
      : cell;
    if (where[0] >= 0) {
      dot(ctx, grid, where, ITEM_COLORS[item] ?? "#555", 8);
    }
  }

  ctx.strokeStyle = "#ddd";
  for (let i = 0; i <= grid.width; i++) {
    line(ctx, i * CELL, 0, i * CELL, h);
  }
  for (let j = 0; j <= grid.height; j++) {
    line(ctx, 0, j * CELL, w, j * CELL);
  }

  const robot: Cell | null = frame
    ? robotPosition(frame)
    : draft
      ? draft.robot
      : null;
  if (robot) {
    dot(ctx, grid, robot, rejected ? "#e74c3c" : "#16a085", 14);
  }
}

function fillCell(
  ctx: CanvasRenderingContext2D,
  grid: GridSpec,
  cell: Cell,
  color: string,
  alpha = 1,
): void {
  const [x, y] = toPixel(grid, cell);
  ctx.globalAlpha = alpha;
  ctx.fillStyle = color;
  ctx.fillRect(x, y, CELL, CELL);
  ctx.globalAlpha = 1;
}

function dot(
  ctx: CanvasRenderingContext2D,
  grid: GridSpec,
  cell: Cell,
  color: string,
  radius: number,
): void {
  const [x, y] = toPixel(grid, cell);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x + CELL / 2, y + CELL / 2, radius, 0, Math.PI * 2);
  ctx.fill();
}

function label(
  ctx: CanvasRenderingContext2D,
  grid: GridSpec,
  cell: Cell,
  text: string,
): void {
  const [x, y] = toPixel(grid, cell);
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.fillText(text, x + 4, y + 14);
}

function line(
  ctx: CanvasRenderingContext2D,
  x1: number,
  y1: number,
  x2: number,
  y2: number,
): void {
  ctx.beginPath();
  ctx.moveTo(x1, y1);
  ctx.lineTo(x2, y2);
  ctx.stroke();
}

export const KEY_TO_ACTION: Record<string, string> = {
  ArrowUp: "moveN",
  ArrowDown: "moveS",
  ArrowRight: "moveE",
  ArrowLeft: "moveW",
};
