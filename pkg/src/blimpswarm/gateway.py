"""Live telemetry/command bridge between a running simulation and the
operator console.

One thread owns the simulation and paces it against the wall clock; console
connections exchange JSON text frames over WebSocket. Outbound state frames
are produced at a fixed rate decoupled from the tick rate and dropped
oldest-first when a client cannot keep up; command replies are never
dropped, and commands are applied only at tick boundaries. The simulation
never blocks on a slow or absent client.

Wire protocol (every message carries a version field):

  server -> client
    {"type": "state", "version": 1, "tick": n, "t": s, "paused": bool,
     "speed_factor": x, "leader": id, "done": bool,
     "blimps": [{"id", "x", "y", "z", "theta", "psi", "v_h", "role",
                 "visible_targets": [ids],
                 "camera": {"detections": [{"target", "i", "j", "l"}],
                            "hfov", "width", "height", "max_range"}}],
     "waypoints": [{"index", "x", "y", "z", "turn"}],
     "alerts": [{"kind", "blimp", "tick", "message"}],
     "metrics": {"average_area", "area_rmse", "completed", "end_reason"}}

  client -> server
    {"type": "cmd", "version": 1, "kind": "steer",
     "forward": f, "yaw": f, "vertical": f, "client_tick": n}
    {... "kind": "select_leader", "target": id}
    {... "kind": "rotate", "direction": "left" | "right"}
    {... "kind": "pause"} / {... "kind": "resume"}
    {... "kind": "speed", "factor": x}

  server reply (per command, in order)
    {"type": "ack", "version": 1, "kind": ..., "client_tick": n}
    {"type": "reject", "version": 1, "kind": ..., "reason": str,
     "client_tick": n}
"""

from __future__ import annotations

import json
import math
import threading
import time
from collections import deque
from typing import Optional

from websockets.sync.server import serve

from .coordination import RotateLeader, SelectLeader, Steer
from .simulation import Simulation

PROTOCOL_VERSION = 1

_LOOP_KINDS = ("pause", "resume", "speed")


def snapshot(sim: Simulation, alerts=(), paused=False, speed_factor=1.0) -> dict:
    """Complete, self-contained telemetry frame; shares no state with the
    live simulation."""
    cfg = sim.cfg
    blimps = []
    for s in sim.states:
        i = s.id
        detections = []
        visible = []
        for (a, b), obs in sim._obs.items():
            if a != i:
                continue
            visible.append(b)
            detections.append(
                {"target": b, "i": obs.i_p, "j": obs.j_p, "l": obs.l_f}
            )
        visible.sort()
        detections.sort(key=lambda d: d["target"])
        blimps.append(
            {
                "id": i,
                "x": s.pose.position.x,
                "y": s.pose.position.y,
                "z": s.pose.position.z,
                "theta": s.pose.pitch,
                "psi": s.pose.yaw,
                "v_h": s.v_h,
                "role": sim.coordinator.roles[i].value,
                "visible_targets": visible,
                "camera": {
                    "detections": detections,
                    "hfov": cfg.intrinsics.hfov,
                    "width": cfg.intrinsics.width,
                    "height": cfg.intrinsics.height,
                    "max_range": cfg.intrinsics.max_range,
                },
            }
        )
    return {
        "type": "state",
        "version": PROTOCOL_VERSION,
        "tick": sim.tick,
        "t": sim.tick * cfg.dt,
        "paused": paused,
        "speed_factor": speed_factor,
        "leader": sim.coordinator.current_leader,
        "done": sim.done,
        "blimps": blimps,
        "waypoints": [
            {"index": w.index, "x": w.position.x, "y": w.position.y, "z": w.position.z, "turn": w.turn.value}
            for w in cfg.waypoints
        ],
        "alerts": [
            {"kind": a.kind.value, "blimp": a.blimp, "tick": a.tick, "message": a.message}
            for a in alerts
        ],
        "metrics": running_metrics(sim),
    }


def running_metrics(sim: Simulation) -> dict:
    mean, rmse = sim.running_area_stats()
    return {
        "average_area": mean,
        "area_rmse": rmse,
        "completed": sim.completed if sim.done else None,
        "end_reason": sim.end_reason,
    }


def parse_command(text: str):
    """Validate one wire command. Returns (kind, payload, error); payload is
    a command object for simulation commands, or the parsed message for loop
    control. error is None when the command is acceptable."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError:
        return None, None, "malformed: not valid JSON"
    if not isinstance(msg, dict):
        return None, None, "malformed: expected an object"
    if msg.get("version") != PROTOCOL_VERSION:
        return msg.get("kind"), None, f"malformed: missing or wrong version (want {PROTOCOL_VERSION})"
    if msg.get("type") != "cmd":
        return msg.get("kind"), None, "malformed: type must be 'cmd'"
    kind = msg.get("kind")
    if kind == "steer":
        try:
            axes = [float(msg.get(k, 0.0)) for k in ("forward", "yaw", "vertical")]
        except (TypeError, ValueError):
            return kind, None, "malformed: steering axes must be numbers"
        if any(not math.isfinite(a) or abs(a) > 1.0 for a in axes):
            return kind, None, "malformed: steering axes must be within [-1, 1]"
        return kind, Steer(*axes), None
    if kind == "select_leader":
        target = msg.get("target")
        if not isinstance(target, int):
            return kind, None, "malformed: target must be an integer blimp id"
        return kind, SelectLeader(target), None
    if kind == "rotate":
        direction = msg.get("direction")
        if direction not in ("left", "right"):
            return kind, None, "malformed: direction must be 'left' or 'right'"
        return kind, RotateLeader(1 if direction == "left" else -1), None
    if kind in _LOOP_KINDS:
        if kind == "speed":
            factor = msg.get("factor")
            if not isinstance(factor, (int, float)) or not 0.1 <= float(factor) <= 10.0:
                return kind, None, "malformed: factor must be in [0.1, 10]"
        return kind, msg, None
    return kind, None, f"malformed: unknown kind {kind!r}"


class _ConnectionSink:
    """Per-connection outbound mailbox: replies are never dropped, state
    frames keep only the most recent few."""

    def __init__(self, max_frames: int = 2):
        self.lock = threading.Lock()
        self.ready = threading.Event()
        self.replies: deque = deque()
        self.frames: deque = deque(maxlen=max_frames)
        self.closed = False

    def put_reply(self, msg: dict) -> None:
        with self.lock:
            self.replies.append(msg)
        self.ready.set()

    def put_frame(self, msg: dict) -> None:
        with self.lock:
            self.frames.append(msg)
        self.ready.set()

    def drain(self) -> list:
        with self.lock:
            out = list(self.replies) + list(self.frames)
            self.replies.clear()
            self.frames.clear()
            self.ready.clear()
        return out

    def close(self) -> None:
        self.closed = True
        self.ready.set()


class GatewayServer:
    """WebSocket gateway around one simulation."""

    def __init__(
        self,
        sim: Simulation,
        host: str = "127.0.0.1",
        port: int = 8765,
        frame_hz: float = 20.0,
        speed_factor: float = 1.0,
        start_paused: bool = False,
    ):
        self.sim = sim
        self.host = host
        self.port = port
        self.frame_interval = 1.0 / frame_hz
        self.speed_factor = speed_factor
        self.paused = start_paused
        self._stop = threading.Event()
        self._sinks: set[_ConnectionSink] = set()
        self._sinks_lock = threading.Lock()
        self._pending_alerts: list = []
        self._frame_lock = threading.Lock()
        self._latest_frame: Optional[dict] = None
        self._server = None
        self._threads: list[threading.Thread] = []
        self.max_ticks = (
            int(round(sim.cfg.duration_s / sim.cfg.dt)) if sim.cfg.duration_s > 0 else None
        )

    # ------------------------------------------------------------- lifecycle

    def start(self) -> None:
        self._server = serve(self._handle_connection, self.host, self.port)
        if self.port == 0:
            self.port = self._server.socket.getsockname()[1]
        for fn in (self._sim_loop, self._broadcast_loop):
            th = threading.Thread(target=fn, daemon=True, name=fn.__name__)
            th.start()
            self._threads.append(th)
        th = threading.Thread(target=self._server.serve_forever, daemon=True, name="ws-accept")
        th.start()
        self._threads.append(th)

    def stop(self) -> None:
        self._stop.set()
        with self._sinks_lock:
            for sink in self._sinks:
                sink.close()
        if self._server is not None:
            self._server.shutdown()

    def run_forever(self) -> None:
        try:
            while not self._stop.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    # --------------------------------------------------------------- threads

    def _sim_loop(self) -> None:
        sim = self.sim
        dt = sim.cfg.dt
        next_tick = time.monotonic()
        while not self._stop.is_set():
            if self.paused or sim.done or (self.max_ticks is not None and sim.tick >= self.max_ticks):
                # Physics frozen; keep the published frame fresh so pause
                # state and alerts stay visible.
                self._refresh_frame()
                time.sleep(0.02)
                next_tick = time.monotonic()
                continue
            sim.step_tick()
            self._pending_alerts.extend(sim.alerts_for_frame)
            frame = snapshot(sim, alerts=(), paused=self.paused, speed_factor=self.speed_factor)
            with self._frame_lock:
                self._latest_frame = frame
            next_tick += dt / self.speed_factor
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_tick = time.monotonic()

    def _refresh_frame(self) -> None:
        frame = snapshot(self.sim, alerts=(), paused=self.paused, speed_factor=self.speed_factor)
        with self._frame_lock:
            self._latest_frame = frame

    def _broadcast_loop(self) -> None:
        while not self._stop.is_set():
            time.sleep(self.frame_interval)
            with self._frame_lock:
                frame = self._latest_frame
            if frame is None:
                continue
            alerts, self._pending_alerts = self._pending_alerts, []
            frame = dict(frame)
            frame["alerts"] = [
                {"kind": a.kind.value, "blimp": a.blimp, "tick": a.tick, "message": a.message}
                for a in alerts
            ]
            frame["paused"] = self.paused
            frame["speed_factor"] = self.speed_factor
            with self._sinks_lock:
                sinks = list(self._sinks)
            for sink in sinks:
                sink.put_frame(frame)

    # ----------------------------------------------------------- connections

    def _handle_connection(self, conn) -> None:
        sink = _ConnectionSink()
        with self._sinks_lock:
            self._sinks.add(sink)
        writer = threading.Thread(target=self._writer, args=(conn, sink), daemon=True)
        writer.start()
        try:
            for text in conn:
                self._handle_command(text, sink)
        except Exception:
            pass
        finally:
            sink.close()
            with self._sinks_lock:
                self._sinks.discard(sink)

    def _writer(self, conn, sink: _ConnectionSink) -> None:
        try:
            while not sink.closed:
                sink.ready.wait(timeout=0.5)
                for msg in sink.drain():
                    conn.send(json.dumps(msg))
        except Exception:
            sink.close()

    def _handle_command(self, text: str, sink: _ConnectionSink) -> None:
        kind, payload, error = parse_command(text)
        client_tick = None
        try:
            client_tick = json.loads(text).get("client_tick")
        except Exception:
            pass

        def reply(ok: bool, reason: str = "") -> None:
            msg = {
                "type": "ack" if ok else "reject",
                "version": PROTOCOL_VERSION,
                "kind": kind,
            }
            if not ok:
                msg["reason"] = reason
            if client_tick is not None:
                msg["client_tick"] = client_tick
            sink.put_reply(msg)

        if error is not None:
            reply(False, error)
            return
        if kind in _LOOP_KINDS:
            if kind == "pause":
                self.paused = True
            elif kind == "resume":
                self.paused = False
            else:
                self.speed_factor = float(payload["factor"])
            reply(True)
            return
        # Simulation commands apply at the next tick boundary; the reply is
        # sent once the command has actually been processed.
        if self.paused:
            reply(False, "simulation is paused")
            return
        self.sim.submit_command(payload, reply=reply)
