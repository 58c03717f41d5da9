// Wires the client, reducer, and renderers to the page. All state lives in
// the view model; every handler either posts an input or repaints.

import { SessionClient } from "./client.js";
import { DEMO_CONFIG } from "./democonfig.js";
import type { Snapshot } from "./protocol.js";
import {
  beliefBars,
  canvasToTable,
  drawStack,
  drawTable,
  stackSideView,
  tableLayout,
} from "./render.js";
import type { Connection, ViewModel } from "./state.js";
import { enabledControls, initialViewModel, reduce } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const tableCanvas = $<HTMLCanvasElement>("table");
const stackCanvas = $<HTMLCanvasElement>("stack");
const beliefDiv = $<HTMLDivElement>("belief-chart");
const transcriptDiv = $<HTMLDivElement>("transcript");
const connectionBadge = $<HTMLDivElement>("connection");
const answerForm = $<HTMLFormElement>("answer-form");
const answerText = $<HTMLInputElement>("answer-text");
const answerSend = $<HTMLButtonElement>("answer-send");
const confirmYes = $<HTMLButtonElement>("confirm-yes");
const confirmNo = $<HTMLButtonElement>("confirm-no");
const confirmPrompt = $<HTMLSpanElement>("confirm-prompt");
const gazeHint = $<HTMLSpanElement>("gaze-hint");

const client = new SessionClient(location.origin);
let vm: ViewModel | null = null;
let sessionId: string | null = null;

function paint(): void {
  if (!vm) return;
  const controls = enabledControls(vm);

  const layout = tableLayout(vm.scene, vm.stack, tableCanvas.width, tableCanvas.height);
  drawTable(tableCanvas.getContext("2d")!, layout, tableCanvas.width, tableCanvas.height);
  tableCanvas.style.cursor = controls.gaze ? "crosshair" : "default";
  gazeHint.textContent = controls.gaze ? "click a block to look at it" : "";

  drawStack(
    stackCanvas.getContext("2d")!,
    stackSideView(vm, stackCanvas.width, stackCanvas.height),
    stackCanvas.width,
    stackCanvas.height,
  );

  beliefDiv.replaceChildren(
    ...beliefBars(vm).map((bar) => {
      const row = document.createElement("div");
      row.className = "belief-row";
      const label = document.createElement("span");
      label.className = "label";
      label.textContent = bar.label;
      const track = document.createElement("div");
      track.className = "bar-track";
      const fill = document.createElement("div");
      fill.className = "bar";
      fill.style.width = `${(bar.probability * 100).toFixed(1)}%`;
      track.appendChild(fill);
      const value = document.createElement("span");
      value.className = "value";
      value.textContent = bar.probability.toFixed(3);
      row.append(label, track, value);
      return row;
    }),
  );

  transcriptDiv.replaceChildren(
    ...vm.transcript.map((entry) => {
      const line = document.createElement("div");
      line.className = entry.speaker;
      line.textContent = `${entry.speaker}: ${entry.text}`;
      return line;
    }),
  );
  transcriptDiv.scrollTop = transcriptDiv.scrollHeight;

  answerText.disabled = !controls.answer;
  answerSend.disabled = !controls.answer;
  confirmYes.disabled = !controls.confirm;
  confirmNo.disabled = !controls.confirm;
  confirmPrompt.textContent = controls.confirm && vm.ghost ? vm.ghost.prompt : "";

  connectionBadge.textContent = vm.finished ? "done" : vm.connection;
  connectionBadge.className = `badge ${vm.connection}`;
}

function setConnection(status: Connection): void {
  if (!vm) return;
  vm.connection = status;
  paint();
}

async function attach(snapshot: Snapshot): Promise<void> {
  sessionId = snapshot.id;
  vm = initialViewModel(snapshot);
  $<HTMLInputElement>("join-id").value = snapshot.id;
  paint();
  client.subscribe(snapshot.id, {
    since: -1,
    onEvent: (event) => {
      if (vm) {
        reduce(vm, event);
        paint();
      }
    },
    onStatus: (status) => setConnection(status === "live" ? "live" : status),
  });
}

$<HTMLButtonElement>("new-session").addEventListener("click", async () => {
  try {
    const handle = await client.createSession(DEMO_CONFIG);
    await attach(await client.snapshot(handle.id));
  } catch (error) {
    connectionBadge.textContent = `error: ${String(error)}`;
  }
});

$<HTMLButtonElement>("join-session").addEventListener("click", async () => {
  const id = $<HTMLInputElement>("join-id").value.trim();
  if (!id) return;
  try {
    await attach(await client.snapshot(id));
  } catch {
    connectionBadge.textContent = "error: session not found";
  }
});

tableCanvas.addEventListener("click", async (mouse) => {
  if (!vm || !sessionId || !enabledControls(vm).gaze) return; // disabled phase
  const rect = tableCanvas.getBoundingClientRect();
  const layout = tableLayout(vm.scene, vm.stack, tableCanvas.width, tableCanvas.height);
  const [x, y] = canvasToTable(
    layout,
    vm.scene.table,
    mouse.clientX - rect.left,
    mouse.clientY - rect.top,
  );
  const line = { step: vm.stepCursor, speaker: "person" as const, text: `looks at (${x.toFixed(0)}, ${y.toFixed(0)})` };
  vm.transcript.push(line);
  await client.sendGaze(sessionId, x, y);
});

answerForm.addEventListener("submit", async (submit) => {
  submit.preventDefault();
  if (!vm || !sessionId || !enabledControls(vm).answer) return;
  const text = answerText.value.trim();
  if (!text) return;
  answerText.value = "";
  vm.transcript.push({ step: vm.stepCursor, speaker: "person", text });
  await client.sendUtterance(sessionId, text);
});

confirmYes.addEventListener("click", async () => {
  if (!vm || !sessionId || !enabledControls(vm).confirm) return;
  vm.transcript.push({ step: vm.stepCursor, speaker: "person", text: "yes" });
  await client.sendConfirmation(sessionId, true);
});

confirmNo.addEventListener("click", async () => {
  if (!vm || !sessionId || !enabledControls(vm).confirm) return;
  vm.transcript.push({ step: vm.stepCursor, speaker: "person", text: "no" });
  await client.sendConfirmation(sessionId, false);
});
