// Page wiring: one DOM event -> one controller call.

import { ApiClient } from "./api.js";
import { KEY_TO_ACTION, canvasSize, drawGrid, pixelToCell } from "./grid.js";
import { SessionController, frameBadges } from "./state.js";
import { BUTTON_ACTIONS, type Action } from "./types.js";

const POLL_MS = 1000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(baseUrl: string): SessionController {
  const controller = new SessionController(new ApiClient(baseUrl));
  const canvas = el<HTMLCanvasElement>("grid");
  const ctx = canvas.getContext("2d")!;

  controller.subscribe((model) => {
    if (!model.grid) return;
    const [w, h] = canvasSize(model.grid);
    canvas.width = w;
    canvas.height = h;
    drawGrid(
      ctx,
      model.grid,
      model.draftState,
      controller.playbackEnabled() ? controller.currentFrame() : null,
      model.lastEditRejected,
    );
    renderQuestions(controller);
    renderStatus(controller);
  });

  el<HTMLButtonElement>("submit-nl").onclick = () => {
    void controller.submitNl(el<HTMLInputElement>("nl-input").value);
  };
  document.addEventListener("keydown", (event) => {
    const action = KEY_TO_ACTION[event.key];
    if (action) {
      event.preventDefault();
      controller.edit(action as Action);
    }
  });
  const buttonBar = el<HTMLDivElement>("action-buttons");
  for (const action of BUTTON_ACTIONS) {
    const button = document.createElement("button");
    button.textContent = action;
    button.onclick = () => controller.edit(action);
    buttonBar.appendChild(button);
  }
  el<HTMLButtonElement>("undo-edit").onclick = () => controller.undoEdit();
  el<HTMLButtonElement>("clear-draft").onclick = () => controller.clearDraft();
  el<HTMLButtonElement>("submit-positive").onclick = () => {
    void controller.submitDemo("positive");
  };
  el<HTMLButtonElement>("submit-negative").onclick = () => {
    void controller.submitDemo("negative");
  };
  canvas.addEventListener("click", (event) => {
    if (!controller.model.grid || controller.model.draftActions.length > 0) return;
    const rect = canvas.getBoundingClientRect();
    controller.setDraftStart(
      pixelToCell(controller.model.grid, event.clientX - rect.left, event.clientY - rect.top),
    );
  });

  el<HTMLButtonElement>("start-training").onclick = () => {
    void controller.startTraining().then(() => pollLoop(controller));
  };
  el<HTMLButtonElement>("frame-prev").onclick = () => controller.stepFrame(-1);
  el<HTMLButtonElement>("frame-next").onclick = () => controller.stepFrame(1);

  void controller.start();
  return controller;
}

function pollLoop(controller: SessionController): void {
  const timer = setInterval(async () => {
    const status = await controller.pollTraining();
    if (!status || status.status !== "running") {
      clearInterval(timer);
    }
  }, POLL_MS);
}

function renderQuestions(controller: SessionController): void {
  const panel = el<HTMLDivElement>("questions");
  panel.innerHTML = "";
  for (const question of controller.model.pendingQuestions) {
    const row = document.createElement("div");
    row.className = "question";
    const prompt = document.createElement("span");
    prompt.textContent = question.prompt;
    row.appendChild(prompt);
    if (question.kind === "taskOrder") {
      for (const value of [true, false]) {
        const button = document.createElement("button");
        button.textContent = value ? "yes" : "no";
        button.onclick = () => void controller.answer(question.id, value);
        row.appendChild(button);
      }
    } else {
      const input = document.createElement("input");
      const send = document.createElement("button");
      send.textContent = "answer";
      send.onclick = () => void controller.answer(question.id, input.value);
      row.append(input, send);
    }
    panel.appendChild(row);
  }
}

function renderStatus(controller: SessionController): void {
  const model = controller.model;
  el<HTMLDivElement>("formula").textContent =
    model.formula?.formula ?? `(${model.formula?.status ?? "idle"})`;
  el<HTMLDivElement>("candidates").textContent =
    `${model.candidates.length} candidates (${model.enumerated} enumerated)`;
  el<HTMLDivElement>("training-status").textContent = model.training
    ? `${model.training.status} ${model.training.episode}/${model.training.episodes}`
    : "not started";
  const frame = controller.currentFrame();
  el<HTMLDivElement>("badges").textContent = frame
    ? frameBadges(frame).join(" ")
    : "";
  el<HTMLDivElement>("error").textContent = model.error ?? "";
  el<HTMLDivElement>("draft").textContent = model.draftActions.join(" ");
}
