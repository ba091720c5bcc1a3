/**
 * Post-trial path plot: the traversed pointer path with the (now
 * revealable) target circle, start marker, and click/triad markers
 * placed where the path was when each cue fired.
 */

import { TrialSummary } from "./client.js";

export interface PlotMarker {
  kind: string;
  px: number;
  py: number;
}

export interface PlotModel {
  polyline: [number, number][];
  start: [number, number];
  target: { px: number; py: number; pr: number };
  markers: PlotMarker[];
  outcome: string;
  stats: { timeToTarget: number | null; pathLength: number; eventCount: number };
}

const WORKSPACE_EXTENT = 1.1; // draw slightly beyond the unit square

function project(x: number, y: number, width: number, height: number): [number, number] {
  const px = ((x + WORKSPACE_EXTENT) / (2 * WORKSPACE_EXTENT)) * width;
  const py = ((WORKSPACE_EXTENT - y) / (2 * WORKSPACE_EXTENT)) * height;
  return [px, py];
}

/** Path position at stream time t, linearly interpolated. */
function pathAt(path: [number, number, number, number][], t: number): [number, number] {
  if (path.length === 0) {
    return [0, 0];
  }
  const first = path[0]!;
  if (t <= first[0]) {
    return [first[1], first[2]];
  }
  for (let i = 1; i < path.length; i++) {
    const a = path[i - 1]!;
    const b = path[i]!;
    if (t <= b[0]) {
      const f = (t - a[0]) / (b[0] - a[0] || 1);
      return [a[1] + f * (b[1] - a[1]), a[2] + f * (b[2] - a[2])];
    }
  }
  const last = path[path.length - 1]!;
  return [last[1], last[2]];
}

export function buildPlotModel(summary: TrialSummary, width: number, height: number): PlotModel {
  const { record, path } = summary;
  const polyline = path.map(([, x, y]) => project(x, y, width, height));
  const startPos = record.start_position;
  const [tx, ty] = project(0, 0, width, height);

  const markers: PlotMarker[] = [];
  for (const event of record.events) {
    if (event.kind !== "click" && event.kind !== "triad") {
      continue;
    }
    const [x, y] = pathAt(path, event.time);
    const [px, py] = project(x, y, width, height);
    markers.push({ kind: event.kind, px, py });
  }

  return {
    polyline,
    start: project(startPos[0] ?? 0, startPos[1] ?? 0, width, height),
    target: {
      px: tx,
      py: ty,
      pr: (summary.targetRadius / (2 * WORKSPACE_EXTENT)) * width,
    },
    markers,
    outcome: record.outcome,
    stats: {
      timeToTarget: record.time_to_target,
      pathLength: record.path_length,
      eventCount: record.events.length,
    },
  };
}

/** Render onto a 2D canvas context (browser only; model building above
 * stays testable headlessly). */
export function drawPlot(
  ctx: CanvasRenderingContext2D,
  model: PlotModel,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(0, 0, width, height);

  ctx.beginPath();
  ctx.arc(model.target.px, model.target.py, model.target.pr, 0, 2 * Math.PI);
  ctx.fillStyle = "rgba(80, 200, 120, 0.4)";
  ctx.fill();
  ctx.strokeStyle = "#2e8b57";
  ctx.stroke();

  if (model.polyline.length > 1) {
    ctx.beginPath();
    const head = model.polyline[0]!;
    ctx.moveTo(head[0], head[1]);
    for (const [px, py] of model.polyline.slice(1)) {
      ctx.lineTo(px, py);
    }
    ctx.strokeStyle = "#4169e1";
    ctx.lineWidth = 1.5;
    ctx.stroke();
    ctx.lineWidth = 1;
  }

  ctx.fillStyle = "#d2691e";
  const [sx, sy] = model.start;
  ctx.beginPath();
  ctx.arc(sx, sy, 4, 0, 2 * Math.PI);
  ctx.fill();

  for (const marker of model.markers) {
    ctx.fillStyle = marker.kind === "click" ? "#dc143c" : "#9932cc";
    ctx.beginPath();
    ctx.arc(marker.px, marker.py, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}
