"""Leader-switch protocol, role state machine, and the ground-PC broadcast.

Roles live in a SwarmCoordinator owned by the tick loop. A switch is only
executed when the current and candidate leaders hold each other in view in
the same tick's visibility graph (mutual visibility); a failed validation
emits exactly one leader-selection-error alert and changes nothing. On a
successful switch every role change lands atomically within one tick: the
old leader becomes a follower of the new one, and each uninvolved blimp
either follows immediately (new leader already in its field of view) or
enters a rotational search that ends the tick the new leader appears.

Turn-direction selection: at a left turn the next blimp index takes over,
at a right turn the one after next (modulo the swarm size, defined for
three or more blimps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional

import numpy as np

from .core import Role, Turn, Vec3


@dataclass(frozen=True)
class VisibilityGraph:
    """Directed observer->target edges for one tick, rebuilt every tick."""

    edges: frozenset

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]]) -> "VisibilityGraph":
        es = frozenset(edges)
        for a, b in es:
            if a == b:
                raise ValueError("self edges are not allowed")
        return cls(edges=es)

    def sees(self, observer: int, target: int) -> bool:
        return (observer, target) in self.edges

    def mutual(self, a: int, b: int) -> bool:
        return (a, b) in self.edges and (b, a) in self.edges


@dataclass(frozen=True)
class SwitchRequest:
    new_leader: int
    issued_at_tick: int
    requested_by: str = "operator"


class AlertKind(Enum):
    LEADER_SELECTION_ERROR = "leader_selection_error"
    FORMATION_BREAK = "formation_break"
    SEARCH_TIMEOUT = "search_timeout"


@dataclass(frozen=True)
class Alert:
    kind: AlertKind
    blimp: int
    tick: int
    message: str


@dataclass(frozen=True)
class Steer:
    """Normalized operator steering for the leader, each axis in [-1, 1]."""

    forward: float = 0.0
    yaw: float = 0.0
    vertical: float = 0.0


@dataclass(frozen=True)
class SelectLeader:
    """Operator request to hand leadership to a specific blimp."""

    id: int


@dataclass(frozen=True)
class RotateLeader:
    """Discrete rotate nudge for establishing visual contact; direction +1
    turns counter-clockwise, -1 clockwise."""

    direction: int


class DirectiveKind(Enum):
    LEAD = "lead"
    FOLLOW = "follow"
    SEARCH = "search"


@dataclass(frozen=True)
class Directive:
    kind: DirectiveKind
    steer: Optional[Steer] = None
    target: Optional[int] = None
    search_yaw_rate: float = 0.0


@dataclass
class SearchState:
    scan_direction: int
    ticks_in_search: int = 0
    timed_out: bool = False


def suggest_new_leader(current: int, turn: Turn, n: int) -> int:
    """Turn-direction leader selection: left -> next index, right -> the one
    after next, modulo the swarm size. Undefined below three blimps."""
    if n < 3:
        raise ValueError("leader suggestion rule requires at least 3 blimps")
    if turn == Turn.LEFT:
        return (current + 1) % n
    if turn == Turn.RIGHT:
        return (current + 2) % n
    raise ValueError("turn direction must be Left or Right")


def classify_turn(prev: Vec3, corner: Vec3, nxt: Vec3, tolerance: float = math.radians(15.0)) -> Turn:
    """Classify the corner of a path as a sharp turn.

    Sharp means the heading change is within tolerance of a right angle;
    the sign of the planar cross product of the two segments gives the side.
    """
    h1 = math.atan2(corner.y - prev.y, corner.x - prev.x)
    h2 = math.atan2(nxt.y - corner.y, nxt.x - corner.x)
    delta = h2 - h1
    delta = math.remainder(delta, math.tau)
    if abs(abs(delta) - math.pi / 2) >= tolerance:
        return Turn.NONE
    return Turn.LEFT if delta > 0 else Turn.RIGHT


class SwarmCoordinator:
    """Roles, switch state machine, search bookkeeping, and alert queue."""

    def __init__(
        self,
        n: int,
        initial_leader: int = 0,
        scan_rate: float = 0.6,
        search_timeout_ticks: int = 600,
        loss_grace_ticks: int = 50,
        auto_search: bool = True,
    ):
        if n < 2:
            raise ValueError("a swarm needs at least 2 blimps")
        if not 0 <= initial_leader < n:
            raise ValueError("initial leader out of range")
        if scan_rate <= 0:
            raise ValueError("scan_rate must be positive")
        self.n = n
        self.roles: Dict[int, Role] = {
            i: (Role.LEADER if i == initial_leader else Role.FOLLOWER) for i in range(n)
        }
        self.current_leader = initial_leader
        self.pending: Optional[SwitchRequest] = None
        self.alerts: list[Alert] = []
        self.search_state: Dict[int, SearchState] = {}
        self.scan_rate = scan_rate
        self.search_timeout_ticks = search_timeout_ticks
        self.loss_grace_ticks = loss_grace_ticks
        self.auto_search = auto_search
        self._loss_streak: Dict[int, int] = {i: 0 for i in range(n)}

    def check_single_leader(self) -> None:
        leaders = [b for b, r in self.roles.items() if r == Role.LEADER]
        if len(leaders) != 1 or leaders[0] != self.current_leader:
            raise RuntimeError(f"leader invariant violated: {leaders}")

    def validate_switch(self, vis: VisibilityGraph, candidate: int, tick: int) -> Optional[Alert]:
        """Mutual-visibility gate. Returns None when the switch may proceed;
        otherwise queues and returns exactly one leader-selection-error alert,
        leaving all roles unchanged."""
        if candidate == self.current_leader:
            raise ValueError("candidate must differ from the current leader")
        if candidate not in self.roles:
            raise ValueError(f"unknown blimp {candidate}")
        cur = self.current_leader
        if not vis.sees(cur, candidate):
            msg = f"current leader {cur} does not see candidate {candidate}"
        elif not vis.sees(candidate, cur):
            msg = f"candidate {candidate} does not see current leader {cur}"
        else:
            return None
        alert = Alert(AlertKind.LEADER_SELECTION_ERROR, blimp=candidate, tick=tick, message=msg)
        self.alerts.append(alert)
        return alert

    def execute_switch(
        self,
        vis: VisibilityGraph,
        candidate: int,
        tick: int,
        scan_hints: Optional[Dict[int, int]] = None,
    ) -> None:
        """Apply a validated switch atomically within the current tick.

        Re-checks mutual visibility and raises if called without a passing
        validation; this is what makes an unsafe switch structurally
        impossible. Uninvolved blimps that already see the candidate follow
        immediately; the rest enter search, scanning toward the hinted side
        (+1 counter-clockwise) for the new leader.
        """
        if not vis.mutual(self.current_leader, candidate):
            raise RuntimeError("execute_switch called without mutual visibility")
        old = self.current_leader
        self.roles[candidate] = Role.LEADER
        self.roles[old] = Role.FOLLOWER
        self.current_leader = candidate
        self.search_state.pop(candidate, None)
        self.search_state.pop(old, None)
        self._loss_streak[old] = 0
        self._loss_streak[candidate] = 0
        for b in self.roles:
            if b in (old, candidate):
                continue
            if vis.sees(b, candidate):
                self.roles[b] = Role.FOLLOWER
                self.search_state.pop(b, None)
            else:
                direction = (scan_hints or {}).get(b, 1) or 1
                self.roles[b] = Role.SEARCHING
                self.search_state[b] = SearchState(scan_direction=1 if direction > 0 else -1)
            self._loss_streak[b] = 0
        self.pending = None
        self.check_single_leader()

    def search_tick(self, blimp: int, vis: VisibilityGraph, tick: int) -> float:
        """Advance one searching blimp by a tick; returns its yaw-rate command.

        The role flips to follower on the tick the current leader enters the
        field of view. A search that outlasts one full rotation plus the
        field-of-view margin emits a single search-timeout alert and keeps
        scanning.
        """
        if self.roles.get(blimp) != Role.SEARCHING:
            raise ValueError(f"blimp {blimp} is not searching")
        if vis.sees(blimp, self.current_leader):
            self.roles[blimp] = Role.FOLLOWER
            del self.search_state[blimp]
            self._loss_streak[blimp] = 0
            return 0.0
        st = self.search_state[blimp]
        st.ticks_in_search += 1
        if st.ticks_in_search >= self.search_timeout_ticks and not st.timed_out:
            st.timed_out = True
            self.alerts.append(
                Alert(
                    AlertKind.SEARCH_TIMEOUT,
                    blimp=blimp,
                    tick=tick,
                    message=f"blimp {blimp} searched {st.ticks_in_search} ticks without re-acquisition",
                )
            )
        return self.scan_rate * st.scan_direction

    def note_leader_visibility(
        self, blimp: int, sees_leader: bool, tick: int, scan_hint: int = 1
    ) -> None:
        """Track per-follower visibility of the current leader and, when the
        full system is active, demote a follower to searching after the loss
        grace period."""
        if self.roles.get(blimp) != Role.FOLLOWER:
            return
        if sees_leader:
            self._loss_streak[blimp] = 0
            return
        self._loss_streak[blimp] += 1
        if self.auto_search and self._loss_streak[blimp] >= self.loss_grace_ticks:
            self.roles[blimp] = Role.SEARCHING
            self.search_state[blimp] = SearchState(scan_direction=1 if scan_hint > 0 else -1)
            self._loss_streak[blimp] = 0

    def drain_alerts(self) -> list[Alert]:
        out = self.alerts
        self.alerts = []
        return out

    def broadcast_tick(
        self,
        operator_steer: Optional[Steer],
        vis: VisibilityGraph,
        tick: int,
        rng: Optional[np.random.Generator] = None,
        drop_probability: float = 0.0,
    ) -> Dict[int, Directive]:
        """Assemble this tick's directive for every blimp.

        The leader receives the operator's steering (hold when absent),
        followers are told to follow the current leader, and searching blimps
        get their scan yaw-rate (searches advance here, so an acquisition
        flips the role and the directive in the same tick). Directives are
        delivered simultaneously; with a positive drop probability each one
        is independently dropped, reproducibly for a given generator.
        """
        directives: Dict[int, Directive] = {}
        for b in sorted(self.roles):
            role = self.roles[b]
            if role == Role.SEARCHING:
                yaw_cmd = self.search_tick(b, vis, tick)
                role = self.roles[b]
                if role == Role.SEARCHING:
                    directives[b] = Directive(DirectiveKind.SEARCH, search_yaw_rate=yaw_cmd)
                    continue
            if role == Role.LEADER:
                directives[b] = Directive(DirectiveKind.LEAD, steer=operator_steer or Steer())
            else:
                directives[b] = Directive(DirectiveKind.FOLLOW, target=self.current_leader)
        if drop_probability > 0.0:
            if rng is None:
                raise ValueError("rng required when drop_probability > 0")
            kept = {}
            for b in sorted(directives):
                if float(rng.random()) >= drop_probability:
                    kept[b] = directives[b]
            return kept
        return directives
