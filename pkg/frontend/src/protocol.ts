// Wire protocol spoken with the simulator gateway. JSON text frames over a
// WebSocket; every message carries a version field.

export const PROTOCOL_VERSION = 1;

export interface Detection {
  target: number;
  i: number;
  j: number;
  l: number;
}

export interface CameraInfo {
  detections: Detection[];
  hfov: number;
  width: number;
  height: number;
  max_range: number;
}

export interface BlimpInfo {
  id: number;
  x: number;
  y: number;
  z: number;
  theta: number;
  psi: number;
  v_h: number;
  role: "leader" | "follower" | "searching";
  visible_targets: number[];
  camera: CameraInfo;
}

export interface WaypointInfo {
  index: number;
  x: number;
  y: number;
  z: number;
  turn: "none" | "left" | "right";
}

export interface AlertInfo {
  kind: string;
  blimp: number;
  tick: number;
  message: string;
}

export interface MetricsInfo {
  average_area: number;
  area_rmse: number;
  completed: boolean | null;
  end_reason: string;
}

export interface StateFrame {
  type: "state";
  version: number;
  tick: number;
  t: number;
  paused: boolean;
  speed_factor: number;
  leader: number;
  done: boolean;
  blimps: BlimpInfo[];
  waypoints: WaypointInfo[];
  alerts: AlertInfo[];
  metrics: MetricsInfo;
}

export interface Reply {
  type: "ack" | "reject";
  version: number;
  kind: string;
  reason?: string;
  client_tick?: number;
}

export type ServerMessage = StateFrame | Reply;

export interface SteerAxes {
  forward: number;
  yaw: number;
  vertical: number;
}

export function parseServerMessage(text: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const m = msg as Record<string, unknown>;
  if (m.version !== PROTOCOL_VERSION) return null;
  if (m.type === "state" && Array.isArray(m.blimps)) return m as unknown as StateFrame;
  if ((m.type === "ack" || m.type === "reject") && typeof m.kind === "string") {
    return m as unknown as Reply;
  }
  return null;
}

function cmd(kind: string, extra: Record<string, unknown> = {}): string {
  return JSON.stringify({ type: "cmd", version: PROTOCOL_VERSION, kind, ...extra });
}

export function encodeSteer(axes: SteerAxes, clientTick?: number): string {
  const clamp = (v: number) => Math.max(-1, Math.min(1, v));
  return cmd("steer", {
    forward: clamp(axes.forward),
    yaw: clamp(axes.yaw),
    vertical: clamp(axes.vertical),
    ...(clientTick === undefined ? {} : { client_tick: clientTick }),
  });
}

export function encodeSelectLeader(target: number): string {
  return cmd("select_leader", { target });
}

export function encodeRotate(direction: "left" | "right"): string {
  return cmd("rotate", { direction });
}

export function encodePause(): string {
  return cmd("pause");
}

export function encodeResume(): string {
  return cmd("resume");
}

export function encodeSpeed(factor: number): string {
  return cmd("speed", { factor });
}
