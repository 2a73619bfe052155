// Bootstrap: read the API base from bootstrap.json, wire state, canvas, and
// panels together. All semantics live on the server; this file only connects
// events to controller calls.

import { Api } from "./api.js";
import { FingerprintCanvas } from "./canvas.js";
import { ExplorerController } from "./controller.js";
import { buildPanels, renderResults } from "./panels.js";
import { formatHover, hoverInfo, renderModel } from "./render.js";
import { ViewState } from "./state.js";

async function bootstrap(): Promise<void> {
  let apiBase = "http://127.0.0.1:8080";
  try {
    const response = await fetch("./bootstrap.json");
    if (response.ok) {
      const config = (await response.json()) as { apiBase?: string };
      if (config.apiBase) apiBase = config.apiBase;
    }
  } catch {
    // fall back to the default base
  }

  const state = new ViewState(apiBase);
  const api = new Api(apiBase);
  const controller = new ExplorerController(api, state);

  const canvasEl = document.getElementById("fingerprint") as HTMLCanvasElement;
  const hoverEl = document.getElementById("hover")!;
  const errorEl = document.getElementById("error")!;
  const subjectEl = document.getElementById("subject")!;
  const resultsEl = document.getElementById("results")!;
  const panelsEl = document.getElementById("panels")!;

  const canvas = new FingerprintCanvas(
    canvasEl,
    (row, col) => {
      if (!state.fingerprint) return;
      if (row >= state.fingerprint.height || col >= state.fingerprint.width) return;
      state.cycleCell(row, col);
      redraw();
    },
    (row, col) => {
      const info = hoverInfo(state, controller.meta, row, col);
      hoverEl.textContent = info ? formatHover(info) : "";
    },
  );

  function redraw(): void {
    canvas.paint(renderModel(state));
    errorEl.textContent = state.error ?? "";
    errorEl.className = state.error ? "banner visible" : "banner";
    subjectEl.textContent = state.fingerprint
      ? `${state.fingerprint.subject || "(unnamed set)"}: ` +
        `${state.pendingEdits.size} pending edit(s)`
      : "no fingerprint loaded";
    renderResults(resultsEl, state.lastResults, (entity) => {
      void controller.loadFingerprint(entity);
    });
  }

  controller.onChange = redraw;
  buildPanels(panelsEl, controller);

  try {
    const health = await api.health();
    document.getElementById("status")!.textContent =
      `connected: ${health.entities} entities, ${health.relations} relations` +
      (health.predict_available ? ", classifier loaded" : "");
    await controller.loadMeta();
  } catch (error) {
    state.setError(
      `service unreachable at ${apiBase}; start it and reload (${String(error)})`,
    );
    redraw();
  }
  redraw();
}

void bootstrap();
