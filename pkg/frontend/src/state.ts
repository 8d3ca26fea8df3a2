// Console state: the latest complete frame, connection status, alert
// banners, and position trails. The console is stateless with respect to
// physics: it renders only what the most recent frame says and never
// extrapolates, so closing and reopening it cannot change a run.

import type { ServerMessage, StateFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface Banner {
  kind: "error" | "info";
  text: string;
  at: number; // ms timestamp
}

const TRAIL_LENGTH = 600;
const BANNER_TTL_MS = 6000;

export class ConsoleStore {
  frame: StateFrame | null = null;
  connection: ConnectionStatus = "connecting";
  banners: Banner[] = [];
  trails = new Map<number, Array<[number, number]>>();
  lastFrameAt = 0;
  framesSeen = 0;

  setConnection(status: ConnectionStatus, now: number): void {
    this.connection = status;
    if (status === "closed") {
      this.pushBanner("error", "connection lost", now);
    }
  }

  apply(msg: ServerMessage, now: number): void {
    if (msg.type === "state") {
      this.frame = msg;
      this.framesSeen += 1;
      this.lastFrameAt = now;
      for (const b of msg.blimps) {
        let trail = this.trails.get(b.id);
        if (!trail) {
          trail = [];
          this.trails.set(b.id, trail);
        }
        trail.push([b.x, b.y]);
        if (trail.length > TRAIL_LENGTH) trail.splice(0, trail.length - TRAIL_LENGTH);
      }
      for (const a of msg.alerts) {
        this.pushBanner(
          a.kind === "leader_selection_error" || a.kind === "formation_break" ? "error" : "info",
          `${a.kind.replace(/_/g, " ")}: ${a.message}`,
          now,
        );
      }
      return;
    }
    // Command reply: every rejection surfaces exactly one banner.
    if (msg.type === "reject") {
      this.pushBanner("error", `${msg.kind} rejected: ${msg.reason ?? "unknown reason"}`, now);
    }
  }

  pushBanner(kind: Banner["kind"], text: string, now: number): void {
    this.banners.push({ kind, text, at: now });
    if (this.banners.length > 8) this.banners.splice(0, this.banners.length - 8);
  }

  expireBanners(now: number): void {
    this.banners = this.banners.filter((b) => now - b.at < BANNER_TTL_MS);
  }

  get leader(): number | null {
    return this.frame ? this.frame.leader : null;
  }

  isStale(now: number, maxAgeMs = 1500): boolean {
    return this.connection !== "open" || this.frame === null || now - this.lastFrameAt > maxAgeMs;
  }
}
