// Canvas rendering: top-view map (blimps, FOV wedges, trails, waypoints,
// leader highlight) and per-blimp camera panes with detection boxes.

import type { BlimpInfo, StateFrame } from "./protocol.js";

const ROLE_COLORS: Record<string, string> = {
  leader: "#ffd24a",
  follower: "#6fc3ff",
  searching: "#ff8c6b",
};

interface ViewTransform {
  toPx(x: number, y: number): [number, number];
  scale: number;
}

export function fitView(frame: StateFrame, width: number, height: number): ViewTransform {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  const include = (x: number, y: number) => {
    minX = Math.min(minX, x);
    maxX = Math.max(maxX, x);
    minY = Math.min(minY, y);
    maxY = Math.max(maxY, y);
  };
  for (const w of frame.waypoints) include(w.x, w.y);
  for (const b of frame.blimps) include(b.x, b.y);
  const margin = 2.0;
  minX -= margin;
  maxX += margin;
  minY -= margin;
  maxY += margin;
  const scale = Math.min(width / (maxX - minX), height / (maxY - minY));
  return {
    scale,
    // world y up -> canvas y down
    toPx: (x: number, y: number) => [(x - minX) * scale, height - (y - minY) * scale],
  };
}

export function drawTopView(
  ctx: CanvasRenderingContext2D,
  frame: StateFrame,
  trails: Map<number, Array<[number, number]>>,
  stale: boolean,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  const view = fitView(frame, width, height);

  // path
  ctx.strokeStyle = "#39414f";
  ctx.setLineDash([6, 6]);
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  frame.waypoints.forEach((w, k) => {
    const [px, py] = view.toPx(w.x, w.y);
    if (k === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.setLineDash([]);
  for (const w of frame.waypoints) {
    const [px, py] = view.toPx(w.x, w.y);
    ctx.fillStyle = w.turn === "none" ? "#566073" : "#c792ea";
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillStyle = "#8a93a6";
    ctx.font = "11px sans-serif";
    ctx.fillText(w.turn === "none" ? `wp${w.index}` : `wp${w.index} (${w.turn})`, px + 8, py - 6);
  }

  // trails
  for (const [id, pts] of trails) {
    if (pts.length < 2) continue;
    const blimp = frame.blimps.find((b) => b.id === id);
    ctx.strokeStyle = (blimp ? ROLE_COLORS[blimp.role] : "#666") + "55";
    ctx.lineWidth = 1;
    ctx.beginPath();
    pts.forEach(([x, y], k) => {
      const [px, py] = view.toPx(x, y);
      if (k === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }

  // blimps with FOV wedges
  for (const b of frame.blimps) {
    const [px, py] = view.toPx(b.x, b.y);
    const heading = -b.psi; // canvas y is flipped
    const half = b.camera.hfov / 2;
    const range = Math.min(b.camera.max_range, 3.0) * view.scale;

    ctx.fillStyle = ROLE_COLORS[b.role] + "18";
    ctx.strokeStyle = ROLE_COLORS[b.role] + "40";
    ctx.beginPath();
    ctx.moveTo(px, py);
    ctx.arc(px, py, range, heading - half, heading + half);
    ctx.closePath();
    ctx.fill();
    ctx.stroke();

    if (b.id === frame.leader) {
      ctx.strokeStyle = "#ffd24a";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(px, py, 14, 0, Math.PI * 2);
      ctx.stroke();
    }
    if (b.role === "searching") {
      ctx.strokeStyle = "#ff8c6b";
      ctx.setLineDash([3, 3]);
      ctx.beginPath();
      ctx.arc(px, py, 17, 0, Math.PI * 2);
      ctx.stroke();
      ctx.setLineDash([]);
    }

    // hull glyph: oriented triangle
    ctx.fillStyle = ROLE_COLORS[b.role];
    ctx.save();
    ctx.translate(px, py);
    ctx.rotate(heading);
    ctx.beginPath();
    ctx.moveTo(10, 0);
    ctx.lineTo(-7, 5.5);
    ctx.lineTo(-7, -5.5);
    ctx.closePath();
    ctx.fill();
    ctx.restore();

    ctx.fillStyle = "#dde3ee";
    ctx.font = "12px sans-serif";
    ctx.fillText(String(b.id), px + 12, py + 12);
  }

  if (stale) {
    ctx.fillStyle = "#10141cbb";
    ctx.fillRect(0, 0, width, height);
    ctx.fillStyle = "#ff8c6b";
    ctx.font = "16px sans-serif";
    ctx.fillText("connection stale", width / 2 - 60, height / 2);
  }
}

export interface BoxPx {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Detection rectangle in pane pixels; width scales with the projected
 * centerline length, so it halves when the distance doubles. */
export function detectionBox(
  d: { i: number; j: number; l: number },
  cam: { width: number; height: number },
  paneW: number,
  paneH: number,
): BoxPx {
  const sx = paneW / cam.width;
  const sy = paneH / cam.height;
  const w = d.l * sx;
  const h = Math.max(6, (d.l / 2.8) * sy);
  return { x: d.i * sx - w / 2, y: d.j * sy - h / 2, w, h };
}

export function drawCameraPane(
  ctx: CanvasRenderingContext2D,
  blimp: BlimpInfo,
  leader: number,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#060a10";
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = "#39414f";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);

  if (blimp.camera.detections.length === 0) {
    ctx.fillStyle = "#566073";
    ctx.font = "12px sans-serif";
    ctx.fillText("no target", width / 2 - 26, height / 2);
  }
  for (const d of blimp.camera.detections) {
    const box = detectionBox(d, blimp.camera, width, height);
    ctx.strokeStyle = d.target === leader ? "#ffd24a" : "#6fc3ff";
    ctx.lineWidth = 1.5;
    ctx.strokeRect(box.x, box.y, box.w, box.h);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.font = "11px sans-serif";
    ctx.fillText(`b${d.target}`, box.x, box.y - 3);
  }
  // crosshair at the principal point
  ctx.strokeStyle = "#39414f";
  ctx.beginPath();
  ctx.moveTo(width / 2, height / 2 - 5);
  ctx.lineTo(width / 2, height / 2 + 5);
  ctx.moveTo(width / 2 - 5, height / 2);
  ctx.lineTo(width / 2 + 5, height / 2);
  ctx.stroke();
}
