// Browser wiring: WebSocket lifecycle, input cadence, render loop, and the
// control strip (leader buttons, rotate, pause/resume, speed).

import { SteeringInput, STEER_CADENCE_MS } from "./input.js";
import {
  encodePause,
  encodeResume,
  encodeRotate,
  encodeSelectLeader,
  encodeSpeed,
  encodeSteer,
  parseServerMessage,
} from "./protocol.js";
import { drawCameraPane, drawTopView } from "./render.js";
import { ConsoleStore } from "./state.js";

const store = new ConsoleStore();
const input = new SteeringInput();
let socket: WebSocket | null = null;

function wsUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("ws") ?? "ws://127.0.0.1:8765";
}

function send(text: string): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    socket.send(text);
  } else {
    store.pushBanner("error", "not connected: command dropped", performance.now());
  }
}

function connect(): void {
  store.setConnection("connecting", performance.now());
  socket = new WebSocket(wsUrl());
  socket.onopen = () => store.setConnection("open", performance.now());
  socket.onmessage = (ev) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg) store.apply(msg, performance.now());
  };
  socket.onclose = () => {
    store.setConnection("closed", performance.now());
    setTimeout(connect, 1500);
  };
  socket.onerror = () => socket?.close();
}

function setupInput(): void {
  window.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    input.keyDown(ev.code);
  });
  window.addEventListener("keyup", (ev) => input.keyUp(ev.code));
  window.addEventListener("blur", () => input.clear());
  setInterval(() => {
    const axes = input.poll(performance.now());
    if (axes && store.connection === "open") {
      send(encodeSteer(axes, store.frame?.tick));
    }
  }, STEER_CADENCE_MS / 2);
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function renderControls(): void {
  const frame = store.frame;
  const strip = el<HTMLDivElement>("leader-buttons");
  if (!frame) return;
  if (strip.childElementCount !== frame.blimps.length) {
    strip.innerHTML = "";
    for (const b of frame.blimps) {
      const btn = document.createElement("button");
      btn.id = `select-${b.id}`;
      btn.textContent = `lead ${b.id}`;
      btn.onclick = () => send(encodeSelectLeader(b.id));
      strip.appendChild(btn);
    }
  }
  for (const b of frame.blimps) {
    const btn = document.getElementById(`select-${b.id}`);
    if (btn) btn.classList.toggle("leader", b.id === frame.leader);
  }
  el<HTMLButtonElement>("pause").textContent = frame.paused ? "resume" : "pause";
}

function renderBanners(): void {
  store.expireBanners(performance.now());
  const list = el<HTMLDivElement>("banners");
  list.innerHTML = "";
  for (const b of store.banners) {
    const div = document.createElement("div");
    div.className = `banner ${b.kind}`;
    div.textContent = b.text;
    list.appendChild(div);
  }
}

function renderStatus(): void {
  const f = store.frame;
  const status = el<HTMLDivElement>("status");
  if (!f) {
    status.textContent = `connection: ${store.connection}`;
    return;
  }
  const m = f.metrics;
  const done = f.done ? ` | run ${m.completed ? "completed" : "ended"}: ${m.end_reason}` : "";
  status.textContent =
    `connection: ${store.connection} | t=${f.t.toFixed(1)}s tick=${f.tick}` +
    ` | leader: ${f.leader} | area ${m.average_area.toFixed(2)} m2` +
    ` rmse ${m.area_rmse.toFixed(2)}${f.paused ? " | PAUSED" : ""}${done}`;
}

function renderCameraPanes(): void {
  const frame = store.frame;
  if (!frame) return;
  const row = el<HTMLDivElement>("camera-panes");
  for (const b of frame.blimps) {
    let pane = document.getElementById(`pane-${b.id}`) as HTMLCanvasElement | null;
    if (!pane) {
      const wrap = document.createElement("div");
      wrap.className = "pane";
      const label = document.createElement("div");
      label.className = "pane-label";
      label.id = `pane-label-${b.id}`;
      pane = document.createElement("canvas");
      pane.id = `pane-${b.id}`;
      pane.width = 200;
      pane.height = 150;
      wrap.appendChild(label);
      wrap.appendChild(pane);
      row.appendChild(wrap);
    }
    const label = el<HTMLDivElement>(`pane-label-${b.id}`);
    label.textContent = `blimp ${b.id} (${b.role})`;
    const ctx = pane.getContext("2d");
    if (ctx) drawCameraPane(ctx, b, frame.leader);
  }
}

function renderLoop(): void {
  const canvas = el<HTMLCanvasElement>("topview");
  const ctx = canvas.getContext("2d");
  const tick = () => {
    if (ctx && store.frame) {
      drawTopView(ctx, store.frame, store.trails, store.isStale(performance.now()));
      renderCameraPanes();
      renderControls();
    }
    renderBanners();
    renderStatus();
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);
}

function main(): void {
  el<HTMLButtonElement>("rotate-left").onclick = () => send(encodeRotate("left"));
  el<HTMLButtonElement>("rotate-right").onclick = () => send(encodeRotate("right"));
  el<HTMLButtonElement>("pause").onclick = () =>
    send(store.frame?.paused ? encodeResume() : encodePause());
  el<HTMLSelectElement>("speed").onchange = (ev) =>
    send(encodeSpeed(parseFloat((ev.target as HTMLSelectElement).value)));
  connect();
  setupInput();
  renderLoop();
}

main();
