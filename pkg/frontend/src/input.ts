// Keyboard steering: held keys map to normalized axes; while any axis is
// active a steer command is produced at a fixed cadence, plus exactly one
// zero-steer on release (the gateway holds the last steering, so the
// release must be announced). No keys held means no steer traffic.

import type { SteerAxes } from "./protocol.js";

export const STEER_CADENCE_MS = 100; // 10 Hz while held

const FORWARD_KEYS = ["KeyW", "ArrowUp"];
const BACK_KEYS = ["KeyS", "ArrowDown"];
const LEFT_KEYS = ["KeyA", "ArrowLeft"];
const RIGHT_KEYS = ["KeyD", "ArrowRight"];
const UP_KEYS = ["KeyR"];
const DOWN_KEYS = ["KeyF"];

export class SteeringInput {
  private held = new Set<string>();
  private lastSent = -Infinity;
  private wasActive = false;

  keyDown(code: string): void {
    this.held.add(code);
  }

  keyUp(code: string): void {
    this.held.delete(code);
  }

  clear(): void {
    this.held.clear();
  }

  axes(): SteerAxes {
    const axis = (pos: string[], neg: string[]) => {
      let v = 0;
      if (pos.some((k) => this.held.has(k))) v += 1;
      if (neg.some((k) => this.held.has(k))) v -= 1;
      return v;
    };
    return {
      forward: axis(FORWARD_KEYS, BACK_KEYS),
      yaw: axis(LEFT_KEYS, RIGHT_KEYS),
      vertical: axis(UP_KEYS, DOWN_KEYS),
    };
  }

  /** Returns the steer to transmit now, or null when nothing is due. */
  poll(nowMs: number): SteerAxes | null {
    const a = this.axes();
    const active = a.forward !== 0 || a.yaw !== 0 || a.vertical !== 0;
    if (active) {
      if (nowMs - this.lastSent >= STEER_CADENCE_MS) {
        this.lastSent = nowMs;
        this.wasActive = true;
        return a;
      }
      this.wasActive = true;
      return null;
    }
    if (this.wasActive) {
      // one trailing zero command so the leader stops obeying stale input
      this.wasActive = false;
      this.lastSent = nowMs;
      return { forward: 0, yaw: 0, vertical: 0 };
    }
    return null;
  }
}
