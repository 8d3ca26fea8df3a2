"""Deterministic tick loop: perception, coordination broadcast, control,
dynamics, logging, and the run-level success monitor.

Each tick, every ordered observer->target pair is rendered through the
camera model to rebuild the visibility graph; operator commands drain at the
tick boundary; the coordinator resolves switches and searches and broadcasts
directives; each blimp synthesizes one actuation command; the plant steps.
All randomness flows from a single seed through named substreams, so a run
is a pure function of (scenario, seed, operator script).

The scripted operator stands in for the human: it steers the leader along
the waypoint path, and at tagged sharp turns requests the turn-appropriate
leader switch, rotating the current leader toward the candidate until the
mutual-visibility gate accepts (the same procedure the live console drives
manually).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Protocol

import numpy as np

from .control import FollowerState, follower_tick, leader_tick
from .coordination import (
    Alert,
    AlertKind,
    Directive,
    DirectiveKind,
    RotateLeader,
    SelectLeader,
    Steer,
    SwarmCoordinator,
    SwitchRequest,
    VisibilityGraph,
    suggest_new_leader,
)
from .core import BlimpState, Pose, Role, Turn, Vec3, relative_bearing
from .dynamics import apply_disturbance, resolve_contacts, step
from .metrics import RunMetrics, area_from_xy, compute_metrics
from .perception import (
    ImageObservation,
    RelativeEstimate,
    SensorPipeline,
    estimate_relative,
    observe,
)
from .scenario import ScenarioConfig

# run.csv column order; kept in one place so exporters and loaders agree.
ROW_FIELDS = (
    "tick",
    "t",
    "id",
    "x",
    "y",
    "z",
    "theta",
    "psi",
    "v_h",
    "role",
    "d_hat",
    "psi_hat",
    "visible",
)


@dataclass
class RunLog:
    """Append-only per-tick table plus an event stream and run metadata."""

    n: int
    dt: float
    meta: dict
    rows: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def append_row(self, row: tuple) -> None:
        self.rows.append(row)

    def append_event(self, event: dict) -> None:
        self.events.append(event)

    def iter_tick_positions(self):
        for k in range(0, len(self.rows), self.n):
            chunk = self.rows[k : k + self.n]
            yield [(r[3], r[4]) for r in chunk]

    @property
    def tick_count(self) -> int:
        return len(self.rows) // self.n if self.n else 0


class Operator(Protocol):
    def commands_for_tick(self, sim: "Simulation") -> list:
        ...


class ScriptedCommands:
    """Replays a fixed (tick, command) script, e.g. recorded from a live
    console session."""

    def __init__(self, script):
        self.script = sorted(script, key=lambda item: item[0])
        self._next = 0

    def commands_for_tick(self, sim: "Simulation") -> list:
        out = []
        while self._next < len(self.script) and self.script[self._next][0] <= sim.tick:
            out.append(self.script[self._next][1])
            self._next += 1
        return out


class ScriptedOperator:
    """Waypoint autopilot plus the turn-time switch procedure."""

    CRUISE = "cruise"
    SWITCHING = "switching"
    DONE = "done"

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.mode = self.CRUISE
        self.wp_idx = 1 if len(cfg.waypoints) > 1 else 0
        self.candidate: Optional[int] = None
        self.switch_started = 0
        self.last_request = -(10**9)
        self.ramp_from: Optional[int] = None

    def _steer_towards(self, leader: BlimpState, target: Vec3, dist: float, tick: int) -> Steer:
        lc = self.cfg.leader
        bearing = relative_bearing(leader.pose, target)
        yaw = _clamp(lc.yaw_gain * bearing, -1.0, 1.0)
        # Carve through corners at speed, slowing only on final approach;
        # heading correction runs concurrently.
        v_ref = lc.cruise_speed * min(1.0, dist / lc.slow_radius)
        if abs(bearing) > math.pi / 2:
            v_ref = 0.0
        if self.ramp_from is not None and lc.accel_ramp > 0:
            cap = lc.accel_ramp * (tick - self.ramp_from) * self.cfg.dt
            if cap >= lc.cruise_speed:
                self.ramp_from = None
            else:
                v_ref = min(v_ref, cap)
        # Drag feedforward so the cruise speed is actually reached; the
        # proportional term handles transients.
        ff = self.cfg.plant.drag_h * v_ref / self.cfg.plant.limits.f_h_max
        forward = _clamp(ff + lc.speed_gain * (v_ref - leader.v_h), -1.0, 1.0)
        return Steer(forward=forward, yaw=yaw, vertical=0.0)

    def commands_for_tick(self, sim: "Simulation") -> list:
        if self.mode == self.DONE:
            return []
        cfg = self.cfg
        leader = sim.states[sim.coordinator.current_leader]

        if self.mode == self.SWITCHING:
            assert self.candidate is not None
            if sim.coordinator.current_leader == self.candidate:
                self.mode = self.CRUISE
                self.candidate = None
                self.ramp_from = sim.tick
            elif sim.tick - self.switch_started > int(cfg.leader.switch_timeout_s / cfg.dt):
                sim.log_event("switch_abandoned", candidate=self.candidate)
                self.mode = self.CRUISE
                self.candidate = None

        if self.mode == self.SWITCHING:
            cmds = []
            cand_pos = sim.states[self.candidate].pose.position
            try:
                bearing = relative_bearing(leader.pose, cand_pos)
            except ValueError:
                bearing = 0.0
            yaw = _clamp(cfg.leader.yaw_gain * 1.5 * bearing, -1.0, 1.0)
            forward = _clamp(cfg.leader.speed_gain * (0.0 - leader.v_h), -1.0, 1.0)
            cmds.append(Steer(forward=forward, yaw=yaw, vertical=0.0))
            if sim.tick - self.last_request >= int(cfg.leader.switch_retry_s / cfg.dt):
                cmds.append(SelectLeader(self.candidate))
                self.last_request = sim.tick
            return cmds

        wp = cfg.waypoints[self.wp_idx]
        dist = leader.pose.position.planar_distance_to(wp.position)
        if dist < cfg.leader.capture_radius:
            sim.log_event("waypoint_reached", waypoint=wp.index, turn=wp.turn.value)
            if self.wp_idx >= len(cfg.waypoints) - 1:
                # Final waypoint; the monitor declares the goal.
                self.mode = self.DONE
                return []
            self.wp_idx += 1
            if wp.turn != Turn.NONE and cfg.switch_enabled and cfg.n >= 3:
                self.candidate = suggest_new_leader(
                    sim.coordinator.current_leader, wp.turn, cfg.n
                )
                self.mode = self.SWITCHING
                self.switch_started = sim.tick
                self.last_request = -(10**9)
                return self.commands_for_tick(sim)
            wp = cfg.waypoints[self.wp_idx]
            dist = leader.pose.position.planar_distance_to(wp.position)

        return [self._steer_towards(leader, wp.position, dist, sim.tick)]


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


class Simulation:
    """One scenario run: owns all mutable state, advances tick by tick."""

    def __init__(
        self,
        cfg: ScenarioConfig,
        operator: Optional[Operator] = None,
        record_commands: bool = False,
    ):
        self.cfg = cfg
        self.operator = operator if operator is not None else ScriptedOperator(cfg)
        self.record_commands = record_commands
        self.tick = 0
        self.done = False
        self.completed = False
        self.failed = False
        self.end_reason = ""
        self.command_queue: list = []
        self.alerts_for_frame: list[Alert] = []
        self._area_count = 0
        self._area_sum = 0.0
        self._area_sumsq = 0.0
        self._vis = VisibilityGraph.from_edges(())
        self._obs: Dict[tuple[int, int], ImageObservation] = {}
        self._est: Dict[tuple[int, int], RelativeEstimate] = {}

        ss = np.random.SeedSequence(cfg.seed)
        children = ss.spawn(3 + 2 * cfg.n)
        spawn_rng = np.random.default_rng(children[0])
        self._drop_rng = np.random.default_rng(children[1])
        self._disturbance_rng = np.random.default_rng(children[2])
        self._obs_rngs = [np.random.default_rng(children[3 + i]) for i in range(cfg.n)]
        sensor_rngs = [np.random.default_rng(children[3 + cfg.n + i]) for i in range(cfg.n)]

        self.states: list[BlimpState] = self._spawn(spawn_rng)
        self.coordinator = SwarmCoordinator(
            n=cfg.n,
            initial_leader=0,
            scan_rate=cfg.search.scan_rate,
            search_timeout_ticks=cfg.search_timeout_ticks,
            loss_grace_ticks=cfg.loss_grace_ticks,
            auto_search=cfg.switch_enabled,
        )
        self.pipelines = [
            SensorPipeline(
                noise=cfg.noise.sensors,
                alpha=cfg.fusion_alpha,
                dt=cfg.dt,
                rng=sensor_rngs[i],
                v_limit=cfg.fusion_v_limit,
                v_leak=cfg.fusion_v_leak,
            )
            for i in range(cfg.n)
        ]
        self.controllers = [FollowerState() for _ in range(cfg.n)]
        self._last_directives: Dict[int, Directive] = {}
        self._last_psi: Dict[tuple[int, int], float] = {}
        self._loss_streak: Dict[int, int] = {i: 0 for i in range(cfg.n)}
        self._was_visible: Dict[int, bool] = {i: True for i in range(cfg.n)}
        self._rotate_pulse_ticks = 0
        self._rotate_direction = 0
        # Last commanded steering; holds until replaced (consoles command at
        # a lower cadence than the tick rate).
        self._steer_hold: Optional[Steer] = None

        self.log = RunLog(
            n=cfg.n,
            dt=cfg.dt,
            meta={
                "name": cfg.name,
                "n": cfg.n,
                "dt": cfg.dt,
                "seed": cfg.seed,
                "policy": cfg.policy,
                "duration_s": cfg.duration_s,
                "d_min": cfg.success.d_min,
                "d_max": cfg.success.d_max,
                "search_timeout_ticks": cfg.search_timeout_ticks,
                "loss_timeout_ticks": cfg.loss_timeout_ticks,
                "completed": False,
                "end_reason": "",
                "end_tick": 0,
            },
        )

    # ------------------------------------------------------------------ setup

    def _spawn(self, rng: np.random.Generator) -> list[BlimpState]:
        cfg = self.cfg
        if cfg.initial_poses is not None:
            return [
                BlimpState(
                    id=i,
                    pose=Pose(Vec3(x, y, z), pitch=0.0, yaw=yaw),
                    v_h=0.0,
                    v_z=0.0,
                    yaw_rate=0.0,
                    role=Role.LEADER if i == 0 else Role.FOLLOWER,
                )
                for i, (x, y, z, yaw) in enumerate(cfg.initial_poses)
            ]

        wp0 = cfg.waypoints[0].position
        wp1 = cfg.waypoints[1].position if len(cfg.waypoints) > 1 else wp0
        leader_yaw = math.atan2(wp1.y - wp0.y, wp1.x - wp0.x) if wp1 != wp0 else 0.0
        h = cfg.setpoints.h_setpoint
        states = [
            BlimpState(
                id=0,
                pose=Pose(Vec3(wp0.x, wp0.y, h), pitch=0.0, yaw=leader_yaw),
                v_h=0.0,
                v_z=0.0,
                yaw_rate=0.0,
                role=Role.LEADER,
            )
        ]
        arc = math.radians(cfg.spawn.arc_deg)
        jitter = math.radians(cfg.spawn.heading_jitter_deg)
        placed = [(wp0.x, wp0.y)]
        for i in range(1, cfg.n):
            for _ in range(64):
                bearing = leader_yaw + math.pi + float(rng.uniform(-arc / 2, arc / 2))
                dist = float(rng.uniform(cfg.spawn.distance_min, cfg.spawn.distance_max))
                x = wp0.x + dist * math.cos(bearing)
                y = wp0.y + dist * math.sin(bearing)
                if all(math.hypot(x - px, y - py) >= 2 * cfg.contact.keepout_radius + 0.05 for px, py in placed):
                    break
            placed.append((x, y))
            yaw = math.atan2(wp0.y - y, wp0.x - x)
            if jitter > 0:
                yaw += float(rng.uniform(-jitter, jitter))
            states.append(
                BlimpState(
                    id=i,
                    pose=Pose(Vec3(x, y, h), pitch=0.0, yaw=yaw),
                    v_h=0.0,
                    v_z=0.0,
                    yaw_rate=0.0,
                    role=Role.FOLLOWER,
                )
            )
        return states

    # ------------------------------------------------------------------ events

    def log_event(self, event_type: str, **extra) -> None:
        ev = {"tick": self.tick, "t": self.tick * self.cfg.dt, "type": event_type}
        ev.update(extra)
        self.log.append_event(ev)

    def _log_alerts(self) -> list[Alert]:
        alerts = self.coordinator.drain_alerts()
        for a in alerts:
            self.log_event(
                "alert", alert_kind=a.kind.value, blimp=a.blimp, alert_tick=a.tick, message=a.message
            )
        self.alerts_for_frame = alerts
        return alerts

    # ------------------------------------------------------------ command flow

    def submit_command(self, cmd, reply=None) -> None:
        """Queue an external (gateway) command for the next tick boundary;
        reply(accepted, reason) fires once the command has been applied."""
        self.command_queue.append((cmd, reply))

    def _scan_hint(self, blimp: int, target: Optional[int] = None) -> int:
        """Short scan direction toward the target: the searcher's own last
        sighting when it has one, otherwise the ground PC's aggregated
        picture of where the target sits (it relays every camera estimate,
        so it always has a recent fix on each hull)."""
        if target is None:
            target = self.coordinator.current_leader
        psi = self._last_psi.get((blimp, target))
        if psi is not None:
            return -1 if psi > 0 else 1
        try:
            bearing = relative_bearing(
                self.states[blimp].pose, self.states[target].pose.position
            )
        except ValueError:
            return 1
        return 1 if bearing > 0 else -1

    def _process_command(self, cmd) -> tuple[bool, str]:
        """Apply one operator command at the tick boundary. Returns
        (accepted, reason)."""
        if isinstance(cmd, Steer):
            if max(abs(cmd.forward), abs(cmd.yaw), abs(cmd.vertical)) > 1.0:
                return False, "malformed: steering axes must be within [-1, 1]"
            self._steer_hold = cmd
            self._rotate_pulse_ticks = 0
            if self.record_commands:
                self.log_event(
                    "command_applied",
                    kind="steer",
                    forward=cmd.forward,
                    yaw=cmd.yaw,
                    vertical=cmd.vertical,
                )
            return True, ""
        if isinstance(cmd, RotateLeader):
            if cmd.direction not in (-1, 1):
                return False, "malformed: rotate direction must be -1 or +1"
            self._rotate_direction = cmd.direction
            self._rotate_pulse_ticks = max(1, int(0.5 / self.cfg.dt))
            if self.record_commands:
                self.log_event("command_applied", kind="rotate", direction=cmd.direction)
            return True, ""
        if isinstance(cmd, SelectLeader):
            if cmd.id not in self.coordinator.roles:
                return False, f"unknown blimp {cmd.id}"
            if cmd.id == self.coordinator.current_leader:
                return False, "candidate is already the leader"
            if self.record_commands:
                self.log_event("command_applied", kind="select_leader", id=cmd.id)
            self.log_event(
                "switch_requested", candidate=cmd.id, current=self.coordinator.current_leader
            )
            self.coordinator.pending = SwitchRequest(new_leader=cmd.id, issued_at_tick=self.tick)
            err = self.coordinator.validate_switch(self._vis, cmd.id, self.tick)
            if err is not None:
                self.coordinator.pending = None
                self.log_event("switch_rejected", candidate=cmd.id, message=err.message)
                return False, err.message
            old = self.coordinator.current_leader
            hints = {
                b: self._scan_hint(b, cmd.id)
                for b in self.coordinator.roles
                if b not in (old, cmd.id)
            }
            self.coordinator.execute_switch(self._vis, cmd.id, self.tick, scan_hints=hints)
            self.controllers[old] = FollowerState()
            self.log_event(
                "switch_executed",
                new_leader=cmd.id,
                old_leader=old,
                searching=[b for b, r in self.coordinator.roles.items() if r == Role.SEARCHING],
            )
            return True, ""
        return False, f"malformed: unknown command {type(cmd).__name__}"

    # ------------------------------------------------------------------ ticking

    def _observe_all(self):
        cfg = self.cfg
        obs: Dict[tuple[int, int], ImageObservation] = {}
        est: Dict[tuple[int, int], RelativeEstimate] = {}
        edges = []
        for a in range(cfg.n):
            rng = self._obs_rngs[a]
            sa = self.states[a]
            for b in range(cfg.n):
                if a == b:
                    continue
                result = observe(
                    sa,
                    self.states[b],
                    self.states,
                    cfg.intrinsics,
                    cfg.geometry,
                    noise_px=cfg.noise.pixel_std,
                    rng=rng,
                    realistic_aspect=cfg.realistic_aspect,
                )
                if isinstance(result, ImageObservation):
                    obs[(a, b)] = result
                    est[(a, b)] = estimate_relative(result, cfg.calibration, cfg.intrinsics)
                    edges.append((a, b))
        return obs, est, VisibilityGraph.from_edges(edges)

    def step_tick(self) -> None:
        """Advance the whole swarm by one tick."""
        cfg = self.cfg
        self._obs, self._est, self._vis = self._observe_all()
        for pair, e in self._est.items():
            self._last_psi[pair] = e.psi
        sensors = [self.pipelines[i].update(self.states[i]) for i in range(cfg.n)]

        # Operator commands drain at the tick boundary, scripted first.
        for cmd in self.operator.commands_for_tick(self):
            self._process_command(cmd)
        queued, self.command_queue = self.command_queue, []
        for cmd, reply in queued:
            accepted, reason = self._process_command(cmd)
            if reply is not None:
                reply(accepted, reason)

        leader = self.coordinator.current_leader
        for b in range(cfg.n):
            if b == leader:
                continue
            sees = self._vis.sees(b, leader)
            if sees != self._was_visible.get(b, True):
                self.log_event(
                    "visibility_regained" if sees else "visibility_lost", blimp=b, target=leader
                )
                self._was_visible[b] = sees
            pre_role = self.coordinator.roles[b]
            self.coordinator.note_leader_visibility(b, sees, self.tick, self._scan_hint(b))
            if pre_role == Role.FOLLOWER and self.coordinator.roles[b] == Role.SEARCHING:
                self.log_event("search_started", blimp=b)

        steer = self._steer_hold
        if self._rotate_pulse_ticks > 0:
            self._rotate_pulse_ticks -= 1
            steer = Steer(forward=0.0, yaw=float(self._rotate_direction), vertical=0.0)

        pre_roles = dict(self.coordinator.roles)
        directives = self.coordinator.broadcast_tick(
            steer,
            self._vis,
            self.tick,
            rng=self._drop_rng if cfg.drop_probability > 0 else None,
            drop_probability=cfg.drop_probability,
        )
        for b, r in self.coordinator.roles.items():
            if pre_roles.get(b) == Role.SEARCHING and r == Role.FOLLOWER:
                self.log_event("search_acquired", blimp=b)
        for b, d in directives.items():
            self._last_directives[b] = d

        leader = self.coordinator.current_leader
        commands = []
        for i in range(cfg.n):
            directive = directives.get(i, self._last_directives.get(i))
            if directive is None:
                directive = Directive(DirectiveKind.FOLLOW, target=leader)
            if directive.kind == DirectiveKind.LEAD and i == leader:
                s = directive.steer or Steer()
                cmd, self.controllers[i] = leader_tick(
                    s.forward,
                    s.yaw,
                    s.vertical,
                    sensors[i],
                    cfg.setpoints,
                    cfg.gains,
                    cfg.plant.limits,
                    self.controllers[i],
                    cfg.dt,
                )
            elif directive.kind == DirectiveKind.SEARCH:
                cmd, self.controllers[i] = follower_tick(
                    None,
                    sensors[i],
                    cfg.setpoints,
                    cfg.gains,
                    cfg.plant.limits,
                    self.controllers[i],
                    cfg.dt,
                    search_yaw_rate=directive.search_yaw_rate,
                )
            else:
                target = directive.target if directive.target is not None else leader
                cmd, self.controllers[i] = follower_tick(
                    self._est.get((i, target)),
                    sensors[i],
                    cfg.setpoints,
                    cfg.gains,
                    cfg.plant.limits,
                    self.controllers[i],
                    cfg.dt,
                    search_yaw_rate=0.0,
                )
            commands.append(cmd)

        self._append_rows()
        self._check_run_state()

        for i in range(cfg.n):
            new_state = step(
                replace(self.states[i], role=self.coordinator.roles[i]), commands[i], cfg.plant
            )
            if cfg.noise.disturbance_accel > 0:
                new_state = apply_disturbance(
                    new_state, self._disturbance_rng, cfg.noise.disturbance_accel, cfg.dt
                )
            self.states[i] = new_state
        self.states = resolve_contacts(self.states, cfg.contact.keepout_radius)

        self._log_alerts()
        self.tick += 1

    def running_area_stats(self) -> tuple[float, float]:
        """Mean formation area so far and the RMS deviation about it (live
        display only; final metrics recompute canonically from the log)."""
        if self._area_count == 0:
            return 0.0, 0.0
        mean = self._area_sum / self._area_count
        var = max(self._area_sumsq / self._area_count - mean * mean, 0.0)
        return mean, math.sqrt(var)

    def _append_rows(self) -> None:
        leader = self.coordinator.current_leader
        t = self.tick * self.cfg.dt
        if self.cfg.n >= 3:
            area = area_from_xy(
                [s.pose.position.x for s in self.states],
                [s.pose.position.y for s in self.states],
            )
            self._area_count += 1
            self._area_sum += area
            self._area_sumsq += area * area
        for i in range(self.cfg.n):
            s = self.states[i]
            role = self.coordinator.roles[i]
            if i == leader:
                visible, d_hat, psi_hat = True, None, None
            else:
                visible = self._vis.sees(i, leader)
                e = self._est.get((i, leader))
                d_hat = e.d if e else None
                psi_hat = e.psi if e else None
            self.log.append_row(
                (
                    self.tick,
                    t,
                    i,
                    s.pose.position.x,
                    s.pose.position.y,
                    s.pose.position.z,
                    s.pose.pitch,
                    s.pose.yaw,
                    s.v_h,
                    role.value,
                    d_hat,
                    psi_hat,
                    visible,
                )
            )

    def _end_run(self, reason: str, completed: bool) -> None:
        if self.done:
            return
        self.done = True
        self.completed = completed
        self.end_reason = reason
        self.log.meta["completed"] = completed
        self.log.meta["end_reason"] = reason
        self.log.meta["end_tick"] = self.tick

    def _check_run_state(self) -> None:
        cfg = self.cfg
        leader = self.coordinator.current_leader

        goal = cfg.waypoints[-1].position
        if self.states[leader].pose.position.planar_distance_to(goal) < cfg.leader.capture_radius:
            self.log_event("goal_reached", waypoint=cfg.waypoints[-1].index)
            self._end_run("goal_reached", completed=not self.failed)
            return

        for b in range(cfg.n):
            role = self.coordinator.roles[b]
            if role == Role.LEADER:
                self._loss_streak[b] = 0
                continue
            # A blimp carried far beyond any plausible re-acquisition is
            # written off; the formation is unrecoverable and the run ends.
            true_dist = self.states[b].pose.position.planar_distance_to(
                self.states[leader].pose.position
            )
            if true_dist > cfg.success.unrecoverable_separation:
                self._break_formation(b, f"separated {true_dist:.2f} m, beyond recovery")
                self._end_run("formation_break", completed=False)
                return
            if role == Role.SEARCHING:
                self._loss_streak[b] = 0
                st = self.coordinator.search_state.get(b)
                if st is not None and st.ticks_in_search > cfg.search_timeout_ticks:
                    self._break_formation(b, "search exceeded its timeout")
                continue
            if self._vis.sees(b, leader):
                self._loss_streak[b] = 0
                e = self._est.get((b, leader))
                if e is not None and not cfg.success.d_min <= e.d <= cfg.success.d_max:
                    self._break_formation(b, f"estimated distance {e.d:.2f} m out of bounds")
            else:
                self._loss_streak[b] += 1
                if self._loss_streak[b] > cfg.loss_timeout_ticks:
                    self._break_formation(b, "leader lost and not re-acquired in time")

    def _break_formation(self, blimp: int, why: str) -> None:
        """Latch the failure; the run keeps flying (like the hardware runs
        did) until the separation becomes unrecoverable, the path ends, or
        the clock runs out."""
        if self.failed:
            return
        self.failed = True
        self.coordinator.alerts.append(
            Alert(AlertKind.FORMATION_BREAK, blimp=blimp, tick=self.tick, message=why)
        )
        self.log_event("formation_break", blimp=blimp, message=why)

    # ------------------------------------------------------------------ driving

    def run(self) -> tuple[RunLog, RunMetrics]:
        max_ticks = int(round(self.cfg.duration_s / self.cfg.dt))
        while not self.done and self.tick < max_ticks:
            self.step_tick()
        if not self.done:
            self._end_run(
                "formation_break" if self.failed else "duration_elapsed", completed=False
            )
        self.log.meta["end_tick"] = self.tick
        return self.log, compute_metrics(self.log)


def run_scenario(
    cfg: ScenarioConfig, operator: Optional[Operator] = None, record_commands: bool = False
) -> tuple[RunLog, RunMetrics]:
    """Run one scenario to completion headlessly."""
    sim = Simulation(cfg, operator=operator, record_commands=record_commands)
    return sim.run()
