import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blimpswarm.core import Vec3
from blimpswarm.metrics import (
    area_from_xy,
    area_rmse,
    area_series,
    compute_metrics,
    success_check,
    triangle_area,
)
from blimpswarm.simulation import RunLog

coords = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def shoelace(p1, p2, p3):
    # Independent oracle.
    return abs((p2[0] - p1[0]) * (p3[1] - p1[1]) - (p3[0] - p1[0]) * (p2[1] - p1[1])) / 2.0


def make_log(positions_per_tick, events=(), meta_extra=None):
    """positions_per_tick: list of [(x, y), ...] with one entry per blimp."""
    n = len(positions_per_tick[0])
    meta = {
        "n": n,
        "dt": 0.02,
        "seed": 0,
        "policy": "switch",
        "d_min": 0.5,
        "d_max": 3.0,
        "search_timeout_ticks": 575,
        "loss_timeout_ticks": 600,
        "completed": True,
        "end_reason": "goal_reached",
    }
    meta.update(meta_extra or {})
    log = RunLog(n=n, dt=0.02, meta=meta)
    for tick, pts in enumerate(positions_per_tick):
        for i, (x, y) in enumerate(pts):
            log.append_row(
                (tick, tick * 0.02, i, x, y, 1.5, 0.0, 0.0, 0.0, "leader" if i == 0 else "follower", None if i == 0 else 1.5, None if i == 0 else 0.0, True)
            )
    log.events.extend(events)
    return log


class TestTriangleArea:
    def test_right_triangle(self):
        assert triangle_area(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)) == pytest.approx(0.5)

    def test_collinear_degenerate(self):
        assert triangle_area(Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(2, 2, 0)) == 0.0

    def test_equilateral(self):
        p3 = Vec3(0.5, math.sqrt(3) / 2, 0)
        assert triangle_area(Vec3(0, 0, 0), Vec3(1, 0, 0), p3) == pytest.approx(
            math.sqrt(3) / 4, abs=1e-12
        )

    def test_uses_ground_plane_projection(self):
        assert triangle_area(Vec3(0, 0, 5), Vec3(1, 0, -2), Vec3(0, 1, 9)) == pytest.approx(0.5)

    def test_matches_shoelace_oracle(self):
        rng = random.Random(42)
        for _ in range(1000):
            pts = [(rng.uniform(-50, 50), rng.uniform(-50, 50)) for _ in range(3)]
            got = triangle_area(*[Vec3(x, y, 0) for x, y in pts])
            assert got == pytest.approx(shoelace(*pts), abs=1e-12)

    @given(coords, coords, coords, coords, coords, coords)
    @settings(max_examples=80, deadline=None)
    def test_permutation_invariant(self, x1, y1, x2, y2, x3, y3):
        ps = [Vec3(x1, y1, 0), Vec3(x2, y2, 0), Vec3(x3, y3, 0)]
        a = triangle_area(*ps)
        assert triangle_area(ps[2], ps[0], ps[1]) == pytest.approx(a, rel=1e-9, abs=1e-9)
        assert triangle_area(ps[1], ps[0], ps[2]) == pytest.approx(a, rel=1e-9, abs=1e-9)

    @given(coords, coords, st.floats(-math.pi, math.pi))
    @settings(max_examples=80, deadline=None)
    def test_rigid_motion_invariant(self, dx, dy, rot):
        ps = [(0.0, 0.0), (2.0, 0.5), (0.7, 1.9)]
        base = triangle_area(*[Vec3(x, y, 0) for x, y in ps])
        c, s = math.cos(rot), math.sin(rot)
        moved = [Vec3(c * x - s * y + dx, s * x + c * y + dy, 0) for x, y in ps]
        assert triangle_area(*moved) == pytest.approx(base, rel=1e-6, abs=1e-6)


class TestAreaSeries:
    def test_static_formation_constant(self):
        pts = [(0, 0), (1, 0), (0, 1)]
        log = make_log([pts] * 5)
        assert area_series(log) == pytest.approx([0.5] * 5)

    def test_single_tick(self):
        log = make_log([[(0, 0), (1, 0), (0, 2)]])
        assert area_series(log) == pytest.approx([1.0])

    def test_matches_per_tick_triangle_calls(self):
        ticks = [
            [(0, 0), (1, 0), (0, 1)],
            [(0, 0), (2, 0), (0, 2)],
            [(1, 1), (3, 1), (1, 4)],
        ]
        log = make_log(ticks)
        expected = [triangle_area(*[Vec3(x, y, 0) for x, y in t]) for t in ticks]
        assert area_series(log) == pytest.approx(expected)

    def test_needs_three_blimps(self):
        log = make_log([[(0, 0), (1, 0)]])
        with pytest.raises(ValueError):
            area_series(log)

    def test_consecutive_triples_summed_for_larger_swarms(self):
        xs, ys = [0, 1, 0, 2], [0, 0, 1, 2]
        expected = shoelace((0, 0), (1, 0), (0, 1)) + shoelace((1, 0), (0, 1), (2, 2))
        assert area_from_xy(xs, ys) == pytest.approx(expected)


class TestAreaRmse:
    def test_constant_series_zero(self):
        assert area_rmse([2.0, 2.0, 2.0], 2.0) == 0.0

    def test_hand_arithmetic(self):
        assert area_rmse([1.0, 2.0, 3.0], 2.0) == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)

    def test_reference_defaults_to_mean(self):
        assert area_rmse([1.0, 3.0]) == pytest.approx(1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            area_rmse([])

    def test_zero_iff_constant_at_reference(self):
        assert area_rmse([1.0, 1.0001], 1.0) > 0


class TestSuccessCheck:
    GOAL = ({"tick": 4, "t": 0.08, "type": "goal_reached", "waypoint": 3},)

    def test_nominal_run_succeeds(self):
        log = make_log([[(0, 0), (-1.5, 0), (-1.5, 1)]] * 5, events=list(self.GOAL))
        assert success_check(log) is True

    def test_no_goal_fails(self):
        log = make_log([[(0, 0), (-1.5, 0), (-1.5, 1)]] * 5)
        assert success_check(log) is False

    def test_distance_violation_fails(self):
        log = make_log([[(0, 0), (-1.5, 0), (-1.5, 1)]] * 5, events=list(self.GOAL))
        row = list(log.rows[7])
        row[10] = 3.6  # out of [0.5, 3.0]
        log.rows[7] = tuple(row)
        assert success_check(log) is False

    def test_never_reacquired_loss_fails(self):
        log = make_log(
            [[(0, 0), (-1.5, 0), (-1.5, 1)]] * 8,
            events=list(self.GOAL),
            meta_extra={"loss_timeout_ticks": 3},
        )
        for k in range(8):
            row = list(log.rows[3 * k + 1])
            row[10] = None
            row[11] = None
            row[12] = False
            log.rows[3 * k + 1] = tuple(row)
        assert success_check(log) is False

    def test_sanctioned_search_with_reacquisition_passes(self):
        # 4 s of searching at dt=0.02 is 200 ticks, well inside the timeout.
        ticks = 300
        log = make_log(
            [[(0, 0), (-1.5, 0), (-1.5, 1)]] * ticks,
            events=list(self.GOAL),
            meta_extra={"search_timeout_ticks": 575},
        )
        for k in range(50, 250):
            row = list(log.rows[3 * k + 2])
            row[9] = "searching"
            row[10] = None
            row[11] = None
            row[12] = False
            log.rows[3 * k + 2] = tuple(row)
        assert success_check(log) is True

    def test_search_timeout_fails(self):
        ticks = 300
        log = make_log(
            [[(0, 0), (-1.5, 0), (-1.5, 1)]] * ticks,
            events=list(self.GOAL),
            meta_extra={"search_timeout_ticks": 100},
        )
        for k in range(50, 250):
            row = list(log.rows[3 * k + 2])
            row[9] = "searching"
            row[10] = None
            row[11] = None
            row[12] = False
            log.rows[3 * k + 2] = tuple(row)
        assert success_check(log) is False


class TestComputeMetrics:
    def test_segment_breakdown_uses_turn_events(self):
        pts_a = [[(0, 0), (1, 0), (0, 1)]] * 4
        pts_b = [[(0, 0), (2, 0), (0, 2)]] * 4
        events = [
            {"tick": 4, "t": 0.08, "type": "waypoint_reached", "waypoint": 1, "turn": "left"},
            {"tick": 7, "t": 0.14, "type": "goal_reached", "waypoint": 2},
        ]
        log = make_log(pts_a + pts_b, events=events)
        m = compute_metrics(log)
        assert m.completed is True
        assert m.average_area == pytest.approx((0.5 * 4 + 2.0 * 4) / 8)
        assert len(m.per_turn) == 2
        assert m.per_turn[0].mean_area == pytest.approx(0.5)
        assert m.per_turn[1].mean_area == pytest.approx(2.0)

    def test_empty_log_valid(self):
        log = RunLog(n=3, dt=0.02, meta={"completed": False, "end_reason": "duration_elapsed"})
        m = compute_metrics(log)
        assert m.completed is False
        assert m.average_area == 0.0 and m.area_rmse == 0.0


class TestSuccessMatchesRunOutcome:
    def test_success_check_agrees_with_monitor(self):
        from blimpswarm.scenario import resolve_scenario
        from blimpswarm.simulation import run_scenario

        base = resolve_scenario("default")
        for policy, seed in (("switch", 0), ("no-switch", 0), ("switch", 4)):
            log, metrics = run_scenario(base.with_overrides(seed=seed, policy=policy))
            assert success_check(log) == metrics.completed, (policy, seed)
