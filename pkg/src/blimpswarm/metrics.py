"""Formation metrics: triangle area series, area RMSE, and the run success
criterion.

The formation-stability number is the RMSE of the triangle area spanned by
consecutive blimps, measured against the run's own mean area (initial
formations are randomized, so there is no fixed desired area to compare
against). A run succeeds when every follower's estimated distance to its
leader stayed inside the configured band whenever it had the leader in
view, every visibility loss resolved in time (searches re-acquired within
the search timeout, plain losses within the loss timeout), and the leader
reached the goal waypoint.

All statistics are computed in one canonical order (per-tick shoelace area,
mean as sum/n in tick order) so that recomputation from an exported log
reproduces the in-run values bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Vec3


@dataclass(frozen=True)
class SegmentMetrics:
    label: str
    start_tick: int
    end_tick: int
    mean_area: float
    rmse: float


@dataclass(frozen=True)
class RunMetrics:
    completed: bool
    average_area: float
    area_rmse: float
    per_turn: tuple[SegmentMetrics, ...]
    end_reason: str = ""

    def to_dict(self) -> dict:
        return {
            "completed": self.completed,
            "average_area": self.average_area,
            "area_rmse": self.area_rmse,
            "end_reason": self.end_reason,
            "per_turn": [
                {
                    "label": s.label,
                    "start_tick": s.start_tick,
                    "end_tick": s.end_tick,
                    "mean_area": s.mean_area,
                    "rmse": s.rmse,
                }
                for s in self.per_turn
            ],
        }


def triangle_area(p1: Vec3, p2: Vec3, p3: Vec3) -> float:
    """Area of the ground-plane projection of three points (shoelace)."""
    return abs(p1.x * (p2.y - p3.y) + p2.x * (p3.y - p1.y) + p3.x * (p1.y - p2.y)) / 2.0


def area_from_xy(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Formation area from parallel coordinate lists of at least 3 blimps;
    for more than three, areas of consecutive triples are summed."""
    n = len(xs)
    if n < 3:
        raise ValueError("formation area needs at least 3 blimps")
    total = 0.0
    for k in range(n - 2):
        x1, x2, x3 = xs[k], xs[k + 1], xs[k + 2]
        y1, y2, y3 = ys[k], ys[k + 1], ys[k + 2]
        total += abs(x1 * (y2 - y3) + x2 * (y3 - y1) + x3 * (y1 - y2)) / 2.0
    return total


def area_series(log) -> list[float]:
    """One formation-area sample per logged tick."""
    if log.n < 3:
        raise ValueError("area series needs at least 3 blimps")
    out = []
    for states in log.iter_tick_positions():
        xs = [p[0] for p in states]
        ys = [p[1] for p in states]
        out.append(area_from_xy(xs, ys))
    return out


def area_rmse(series: Sequence[float], reference: Optional[float] = None) -> float:
    """Root-mean-square deviation of an area series from a reference area;
    the reference defaults to the series' own mean."""
    if len(series) == 0:
        raise ValueError("empty area series")
    if reference is None:
        reference = sum(series) / len(series)
    acc = 0.0
    for a in series:
        d = a - reference
        acc += d * d
    return math.sqrt(acc / len(series))


def success_check(log) -> bool:
    """Re-evaluate the success criterion from a complete run log.

    Mirrors the in-run monitor: per-tick distance-band check on every
    follower that has its leader in view, timeout checks on searching and
    lost intervals, and goal arrival.
    """
    cfg = log.meta
    d_min = cfg["d_min"]
    d_max = cfg["d_max"]
    search_timeout = cfg["search_timeout_ticks"]
    loss_timeout = cfg["loss_timeout_ticks"]
    rows_by_blimp: dict[int, list] = {}
    for row in log.rows:
        rows_by_blimp.setdefault(row[2], []).append(row)

    goal = any(ev["type"] == "goal_reached" for ev in log.events)
    if not goal:
        return False

    for rows in rows_by_blimp.values():
        streak = 0
        streak_role = None
        for row in rows:
            role = row[9]
            d_hat = row[10]
            visible = row[12]
            if role == "leader":
                streak = 0
                continue
            if visible:
                streak = 0
                if d_hat is not None and not d_min <= d_hat <= d_max:
                    return False
            else:
                if streak_role != role:
                    streak = 0
                streak += 1
                limit = search_timeout if role == "searching" else loss_timeout
                if streak > limit:
                    return False
            streak_role = role
    return True


def segment_metrics(series: Sequence[float], boundaries, reference: float) -> tuple[SegmentMetrics, ...]:
    """Per-segment means and RMSE between turn boundaries, all measured
    against the same full-run reference so segments are comparable."""
    if not series:
        return ()
    cuts = [0] + [b for b in boundaries if 0 < b < len(series)] + [len(series)]
    out = []
    for k in range(len(cuts) - 1):
        lo, hi = cuts[k], cuts[k + 1]
        chunk = series[lo:hi]
        if not chunk:
            continue
        label = f"segment_{k}"
        out.append(
            SegmentMetrics(
                label=label,
                start_tick=lo,
                end_tick=hi - 1,
                mean_area=sum(chunk) / len(chunk),
                rmse=area_rmse(chunk, reference),
            )
        )
    return tuple(out)


def compute_metrics(log) -> RunMetrics:
    """Canonical in-run metrics: full-run mean area, RMSE about it, and the
    per-segment breakdown delimited by turn-waypoint arrivals."""
    completed = bool(log.meta.get("completed", False))
    end_reason = str(log.meta.get("end_reason", ""))
    if log.n < 3 or not log.rows:
        return RunMetrics(
            completed=completed, average_area=0.0, area_rmse=0.0, per_turn=(), end_reason=end_reason
        )
    series = area_series(log)
    mean = sum(series) / len(series)
    rmse = area_rmse(series, mean)
    boundaries = [
        ev["tick"] for ev in log.events if ev["type"] == "waypoint_reached" and ev.get("turn") in ("left", "right")
    ]
    return RunMetrics(
        completed=completed,
        average_area=mean,
        area_rmse=rmse,
        per_turn=segment_metrics(series, boundaries, mean),
        end_reason=end_reason,
    )
