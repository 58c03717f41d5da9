// Event-sourced view model. Every rendered value originates from a server
// snapshot or WireEvent; the reducer never invents state.

import type {
  BeliefPayload,
  Phase,
  ProjectionPayload,
  SceneDoc,
  Snapshot,
  StackDoc,
  WireEvent,
} from "./protocol.js";

export type Connection = "connecting" | "live" | "reconnecting" | "closed";

export interface TranscriptEntry {
  step: number;
  speaker: "robot" | "person" | "system";
  text: string;
}

export interface BeliefBar {
  label: string;
  probability: number;
}

export interface GhostView {
  candidate: string;
  scene: SceneDoc;
  stable: boolean;
  margins: number[];
  prompt: string;
}

export interface ViewModel {
  phase: Phase;
  taskIndex: number;
  stepCursor: number;
  scene: SceneDoc;
  stack: StackDoc;
  lastBelief: BeliefPayload | null;
  transcript: TranscriptEntry[];
  pendingQuestion: string | null;
  pendingAttribute: string | null;
  ghost: GhostView | null;
  connection: Connection;
  finished: boolean;
}

export function initialViewModel(snapshot: Snapshot): ViewModel {
  return {
    phase: snapshot.phase,
    taskIndex: snapshot.task_index,
    stepCursor: -1,
    scene: snapshot.scene,
    stack: snapshot.stack,
    lastBelief: null,
    transcript: [],
    pendingQuestion: null,
    pendingAttribute: null,
    ghost: null,
    connection: "connecting",
    finished: snapshot.phase === "done",
  };
}

/** Exactly one interactive control is enabled in any waiting phase. */
export function enabledControls(vm: ViewModel): {
  gaze: boolean;
  answer: boolean;
  confirm: boolean;
} {
  return {
    gaze: vm.phase === "awaiting_gaze",
    answer: vm.phase === "awaiting_answer",
    confirm: vm.phase === "awaiting_confirmation",
  };
}

export function beliefChart(vm: ViewModel): BeliefBar[] {
  if (vm.lastBelief === null) return [];
  return vm.lastBelief.states.map((label, i) => ({
    label,
    probability: vm.lastBelief!.belief[i],
  }));
}

function say(
  vm: ViewModel,
  step: number,
  speaker: TranscriptEntry["speaker"],
  text: string,
): void {
  vm.transcript.push({ step, speaker, text });
}

/**
 * Fold one ordered server event into the view model (mutating, returns the
 * same object). Events at or below the cursor are ignored, so replaying a
 * backlog after a resume is harmless.
 */
export function reduce(vm: ViewModel, event: WireEvent): ViewModel {
  if (event.step <= vm.stepCursor) return vm;
  vm.stepCursor = event.step;
  vm.phase = event.phase;

  // Structural invariant: a ghost exists only while a confirmation hangs.
  if (event.phase !== "awaiting_confirmation") {
    vm.ghost = null;
  }
  if (event.phase !== "awaiting_answer") {
    vm.pendingQuestion = null;
    vm.pendingAttribute = null;
  }

  switch (event.kind) {
    case "belief": {
      const payload = event.payload as unknown as BeliefPayload;
      vm.lastBelief = payload;
      vm.taskIndex = payload.task_index;
      if (payload.note) {
        say(vm, event.step, "system", `belief ${payload.note}`);
      }
      break;
    }
    case "gaze_request": {
      say(vm, event.step, "robot", String(event.payload.text ?? "Please look at the block you mean."));
      break;
    }
    case "question": {
      const text = String(event.payload.text ?? "");
      vm.pendingQuestion = text;
      vm.pendingAttribute = String(event.payload.attribute ?? "") || null;
      say(vm, event.step, "robot", event.payload.reask ? `${text} (again)` : text);
      break;
    }
    case "projection": {
      const payload = event.payload as unknown as ProjectionPayload;
      vm.ghost = {
        candidate: payload.candidate,
        scene: payload.ghost_scene,
        stable: payload.report.stable,
        margins: payload.report.margins,
        prompt: payload.text,
      };
      say(vm, event.step, "robot", payload.text);
      break;
    }
    case "robot_action": {
      vm.stack = event.payload.stack as StackDoc;
      say(vm, event.step, "robot", `Stacking the ${String(event.payload.object_id)} block.`);
      break;
    }
    case "error": {
      say(vm, event.step, "system", String(event.payload.reason ?? "error"));
      break;
    }
    case "done": {
      vm.finished = true;
      say(vm, event.step, "robot", "All done.");
      break;
    }
  }
  return vm;
}
