// Wire types for the session service. Everything here mirrors the JSON the
// server actually sends; the client renders from these and nothing else.

export type Phase =
  | "ready"
  | "awaiting_gaze"
  | "awaiting_answer"
  | "awaiting_confirmation"
  | "acting"
  | "done";

export type WireKind =
  | "gaze_request"
  | "question"
  | "projection"
  | "robot_action"
  | "belief"
  | "error"
  | "done";

export interface ObjectDoc {
  id: string;
  color: string;
  size: string;
  shape: string;
  footprint: [number, number];
  height: number;
  position: [number, number];
  ghost?: boolean;
  elevation?: number;
}

export interface SceneDoc {
  table: [number, number];
  targets: Record<string, [number, number]>;
  objects: ObjectDoc[];
}

export interface StackLayerDoc {
  object_id: string;
  pose: [number, number, number, number]; // x, y, z, yaw
}

export interface StackDoc {
  target_position: [number, number];
  layers: StackLayerDoc[];
}

export interface StabilityReportDoc {
  stable: boolean;
  margins: number[];
  overlap_ratios: number[];
}

export interface BeliefPayload {
  task_index: number;
  states: string[];
  belief: number[];
  note?: string;
}

export interface ProjectionPayload {
  task_index: number;
  action: string;
  candidate: string;
  ghost_scene: SceneDoc;
  report: StabilityReportDoc;
  text: string;
}

export interface WireEvent {
  step: number;
  phase: Phase;
  kind: WireKind;
  payload: Record<string, unknown>;
  belief_after: number[] | null;
}

export interface SessionHandle {
  id: string;
  created_at: string;
  digest: string;
}

export interface Snapshot {
  id: string;
  digest: string;
  phase: Phase;
  task_index: number;
  step: number;
  agent_steps: number;
  scene: SceneDoc;
  stack: StackDoc;
  belief: { states: string[]; belief: number[] } | null;
  pending_attribute: string | null;
  pending_candidate: string | null;
  candidates: string[];
}

export interface SessionConfig {
  scene: SceneDoc;
  tasks: { candidates: string[]; target: string }[];
  observation: Record<string, unknown>;
  rewards: Record<string, unknown>;
  discount: number;
  attributes?: string[];
  exclusion_rule?: boolean;
}

/** Clamp a table-plane point to the table bounds (centered coordinates). */
export function clampToTable(
  table: [number, number],
  x: number,
  y: number,
): [number, number] {
  const hx = table[0] / 2;
  const hy = table[1] / 2;
  return [Math.min(hx, Math.max(-hx, x)), Math.min(hy, Math.max(-hy, y))];
}
