// Browser bootstrap.  All state lives on the server; this file only
// forwards commands and re-renders from responses, one request in
// flight at a time.

import { ApiError, Client } from "./api.js";
import { handleKey, KeyState } from "./keys.js";
import {
  paletteButtons,
  renderPalette,
  renderStuckToast,
  renderTrace,
  renderTree,
} from "./render.js";
import type { Command, View } from "./types.js";

const DEFAULT_SPEC = `sort s
sort e
op let : (e, e.s) s
op exp : (e) s
op plus : (e, e) e
litop num : int e
litop var : name e
`;

interface Ui {
  client: Client;
  view: View | null;
  keys: KeyState;
  chain: Promise<void>;
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function enqueue(ui: Ui, task: () => Promise<void>): void {
  // single in-flight request; responses applied in order
  ui.chain = ui.chain.then(task).catch((err) => showError(String(err)));
}

function showError(message: string): void {
  byId("toast").innerHTML = renderStuckToast(message);
  setTimeout(() => (byId("toast").innerHTML = ""), 4000);
}

function applyView(ui: Ui, view: View): void {
  ui.view = view;
  byId("tree").innerHTML = renderTree(view.tree);
  byId("palette").innerHTML = renderPalette(
    paletteButtons(view.operators, view.palette),
  );
  byId("sexpr").textContent = view.sexpr;
  byId("meta").textContent =
    `cursor at [${view.cursorPath.join(", ")}] over ${view.enclosedSort}`;
  if (view.stuck) {
    byId("toast").innerHTML = renderStuckToast(view.stuck);
    setTimeout(() => (byId("toast").innerHTML = ""), 2500);
  }
  refreshInspector(ui);
  refreshTrace(ui);
}

function refreshInspector(ui: Ui): void {
  const phi = byId<HTMLInputElement>("phi").value.trim();
  const badge = byId("phi-badge");
  if (!ui.view || !phi) {
    badge.textContent = "";
    badge.className = "badge";
    return;
  }
  const id = ui.view.id;
  ui.client
    .query(id, phi)
    .then(({ result }) => {
      badge.textContent = result ? "true" : "false";
      badge.className = `badge ${result ? "yes" : "no"}`;
    })
    .catch((err: unknown) => {
      badge.textContent = err instanceof ApiError ? err.message : String(err);
      badge.className = "badge error";
    });
}

function refreshTrace(ui: Ui): void {
  if (!ui.view) return;
  ui.client.trace(ui.view.id).then((trace) => {
    byId("trace").innerHTML = renderTrace(trace.entries);
  });
}

function sendCommand(ui: Ui, command: Command): void {
  enqueue(ui, async () => {
    if (!ui.view) return;
    applyView(ui, await ui.client.command(ui.view.id, command));
  });
}

export function start(): void {
  const ui: Ui = {
    client: new Client(""),
    view: null,
    keys: { digits: "" },
    chain: Promise.resolve(),
  };
  byId<HTMLTextAreaElement>("spec").value = DEFAULT_SPEC;

  byId("create").addEventListener("click", () => {
    enqueue(ui, async () => {
      const spec = byId<HTMLTextAreaElement>("spec").value;
      const rootSort = byId<HTMLInputElement>("root-sort").value.trim();
      applyView(ui, await ui.client.createSession(spec, rootSort));
    });
  });

  byId("palette").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const op = target.dataset.op;
    if (!op || (target as HTMLButtonElement).disabled) return;
    let arg = op;
    const param = target.dataset.param;
    if (param === "int") {
      const raw = prompt(`integer literal for ${op}`, "0");
      if (raw === null) return;
      arg = `${op}:${parseInt(raw, 10)}`;
    } else if (param === "name") {
      const raw = prompt(`variable name for ${op}`);
      if (!raw) return;
      arg = `${op}:${raw.trim()}`;
    }
    sendCommand(ui, { kind: "insert", arg });
  });

  document.addEventListener("keydown", (event) => {
    if (
      event.target instanceof HTMLInputElement ||
      event.target instanceof HTMLTextAreaElement
    ) {
      return;
    }
    const action = handleKey(event.key, ui.keys);
    ui.keys = action.state;
    if (action.type === "command") {
      event.preventDefault();
      sendCommand(ui, action.command);
    }
  });

  byId<HTMLInputElement>("phi").addEventListener("input", () =>
    refreshInspector(ui),
  );

  byId("run-script").addEventListener("click", () => {
    enqueue(ui, async () => {
      if (!ui.view) return;
      const text = byId<HTMLTextAreaElement>("script").value;
      const result = await ui.client.runScript(ui.view.id, text);
      byId("script-status").textContent =
        `${result.status} in ${result.steps} steps` +
        (result.stuckReason ? ` (${result.stuckReason})` : "") +
        (result.committed ? "" : " — tree unchanged");
      applyView(ui, result.view);
    });
  });
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}
