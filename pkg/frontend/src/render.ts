// View geometry. The builders are pure data transforms over the view model
// so they can be checked without a DOM; the draw* functions at the bottom
// are the only code that touches a canvas.

import type { SceneDoc, StackDoc } from "./protocol.js";
import { clampToTable } from "./protocol.js";
import type { BeliefBar, ViewModel } from "./state.js";
import { beliefChart } from "./state.js";

const CSS_COLORS = new Set([
  "red", "green", "blue", "yellow", "orange", "purple", "brown", "gray", "pink",
]);

function fillFor(color: string): string {
  return CSS_COLORS.has(color) ? color : "#8a8a8a";
}

export interface TableRect {
  id: string;
  x: number; // px, top-left
  y: number;
  w: number;
  h: number;
  fill: string;
  label: string;
}

export interface TableLayout {
  scale: number; // px per mm
  originX: number; // px of table-coordinate (0,0)
  originY: number;
  rects: TableRect[];
  target: { x: number; y: number } | null;
}

function stackedIds(stack: StackDoc): Set<string> {
  return new Set(stack.layers.map((layer) => layer.object_id));
}

/** Top-down table view: objects still on the table, plus the stack target. */
export function tableLayout(
  scene: SceneDoc,
  stack: StackDoc,
  width: number,
  height: number,
): TableLayout {
  const [tw, th] = scene.table;
  const scale = Math.min(width / tw, height / th) * 0.92;
  const originX = width / 2;
  const originY = height / 2;
  const gone = stackedIds(stack);
  const rects = scene.objects
    .filter((obj) => !gone.has(obj.id) && !obj.ghost)
    .map((obj) => {
      const [fw, fd] = obj.footprint;
      return {
        id: obj.id,
        x: originX + (obj.position[0] - fw / 2) * scale,
        y: originY - (obj.position[1] + fd / 2) * scale,
        w: fw * scale,
        h: fd * scale,
        fill: fillFor(obj.color),
        label: obj.id,
      };
    });
  const targetPos = scene.targets["stack"] ?? null;
  const target = targetPos
    ? { x: originX + targetPos[0] * scale, y: originY - targetPos[1] * scale }
    : null;
  return { scale, originX, originY, rects, target };
}

/** Canvas pixel -> table mm, clamped to the table bounds. */
export function canvasToTable(
  layout: TableLayout,
  table: [number, number],
  px: number,
  py: number,
): [number, number] {
  const x = (px - layout.originX) / layout.scale;
  const y = (layout.originY - py) / layout.scale;
  return clampToTable(table, x, y);
}

export interface StackBar {
  objectId: string;
  x: number;
  y: number; // px, top-left of the bar
  w: number;
  h: number;
  fill: string;
  ghost: boolean;
  annotation: string | null;
}

/** Side view of the committed stack with the ghost preview on top. */
export function stackSideView(
  vm: ViewModel,
  width: number,
  height: number,
): StackBar[] {
  interface Piece {
    id: string;
    w: number;
    h: number;
    ghost: boolean;
    annotation: string | null;
  }
  const heightOf = (id: string) =>
    vm.scene.objects.find((o) => o.id === id)?.height ?? 40;
  const widthOf = (id: string) =>
    vm.scene.objects.find((o) => o.id === id)?.footprint[0] ?? 40;
  const pieces: Piece[] = vm.stack.layers.map((layer) => ({
    id: layer.object_id,
    w: widthOf(layer.object_id),
    h: heightOf(layer.object_id),
    ghost: false,
    annotation: null,
  }));
  if (vm.ghost) {
    const worst = Math.min(...vm.ghost.margins);
    pieces.push({
      id: vm.ghost.candidate,
      w: widthOf(vm.ghost.candidate),
      h: heightOf(vm.ghost.candidate),
      ghost: true,
      annotation: `${vm.ghost.stable ? "stable" : "unstable"}, margin ${worst.toFixed(1)} mm`,
    });
  }
  const totalH = pieces.reduce((acc, p) => acc + p.h, 0);
  const maxW = pieces.reduce((acc, p) => Math.max(acc, p.w), 1);
  const scale = Math.min((height * 0.9) / Math.max(totalH, 1), (width * 0.6) / maxW);
  const bars: StackBar[] = [];
  let top = height - 10;
  for (const piece of pieces) {
    const h = piece.h * scale;
    const w = piece.w * scale;
    top -= h;
    bars.push({
      objectId: piece.id,
      x: width / 2 - w / 2,
      y: top,
      w,
      h,
      fill: fillFor(
        vm.scene.objects.find((o) => o.id === piece.id)?.color ?? "gray",
      ),
      ghost: piece.ghost,
      annotation: piece.annotation,
    });
  }
  return bars;
}

export function beliefBars(vm: ViewModel): BeliefBar[] {
  return beliefChart(vm);
}

// ---------------------------------------------------------------------------
// Canvas painting

export function drawTable(
  ctx: CanvasRenderingContext2D,
  layout: TableLayout,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#f4efe6";
  ctx.fillRect(0, 0, width, height);
  if (layout.target) {
    ctx.strokeStyle = "#9b8c6e";
    ctx.setLineDash([5, 4]);
    ctx.strokeRect(layout.target.x - 16, layout.target.y - 16, 32, 32);
    ctx.setLineDash([]);
  }
  for (const rect of layout.rects) {
    ctx.fillStyle = rect.fill;
    ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
    ctx.strokeStyle = "#333";
    ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
    ctx.fillStyle = "#222";
    ctx.font = "12px sans-serif";
    ctx.fillText(rect.label, rect.x, rect.y - 3);
  }
}

export function drawStack(
  ctx: CanvasRenderingContext2D,
  bars: StackBar[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#eef1f5";
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = "#666";
  ctx.beginPath();
  ctx.moveTo(10, height - 10);
  ctx.lineTo(width - 10, height - 10);
  ctx.stroke();
  for (const bar of bars) {
    ctx.globalAlpha = bar.ghost ? 0.45 : 1.0;
    ctx.fillStyle = bar.fill;
    ctx.fillRect(bar.x, bar.y, bar.w, bar.h);
    ctx.strokeStyle = bar.ghost ? "#555" : "#222";
    ctx.strokeRect(bar.x, bar.y, bar.w, bar.h);
    ctx.globalAlpha = 1.0;
    if (bar.annotation) {
      ctx.fillStyle = "#222";
      ctx.font = "12px sans-serif";
      ctx.fillText(bar.annotation, 8, Math.max(12, bar.y - 6));
    }
  }
}
