import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blimpswarm.core import BlimpState, Pose, Role, Vec3
from blimpswarm.dynamics import (
    HOVER,
    ActuationCmd,
    ActuationLimits,
    PlantParams,
    apply_disturbance,
    resolve_contacts,
    step,
    thrust_mix,
    unmix,
)

LIMITS = ActuationLimits(f_h_max=0.15, f_y_max=0.12, tau_max=0.05, theta_max=math.radians(15))


def params(dt=0.02, drag_h=0.25, **kw):
    defaults = dict(
        mass=0.35,
        drag_h=drag_h,
        drag_z=0.5,
        drag_yaw=0.04,
        yaw_inertia=0.02,
        pitch_tau=0.5,
        dt=dt,
        limits=LIMITS,
    )
    defaults.update(kw)
    return PlantParams(**defaults)


def state(v_h=0.0, v_z=0.0, yaw_rate=0.0, yaw=0.0, pitch=0.0, z=1.5):
    return BlimpState(
        id=0,
        pose=Pose(position=Vec3(0.0, 0.0, z), pitch=pitch, yaw=yaw),
        v_h=v_h,
        v_z=v_z,
        yaw_rate=yaw_rate,
        role=Role.FOLLOWER,
    )


class TestStep:
    def test_equilibrium_is_fixed_point(self):
        s = state()
        out = step(s, HOVER, params())
        assert out.pose == s.pose
        assert out.v_h == 0.0 and out.v_z == 0.0 and out.yaw_rate == 0.0

    def test_constant_thrust_matches_closed_form(self):
        # Zero drag, level hull: v(t) = (F/m) * t exactly under Euler with
        # constant acceleration.
        p = params(dt=0.01, drag_h=0.0)
        s = state()
        cmd = ActuationCmd(f_h=p.mass * 1.0, f_y=0.0, tau=0.0, theta_cmd=0.0)
        for _ in range(100):
            s = step(s, cmd, p)
        assert s.v_h == pytest.approx(1.0, abs=1e-6)

    def test_drag_decay_matches_exponential(self):
        # drag_h/m = 0.5 -> v(t) = exp(-0.5 t); compare at t = 2 s.
        p = params(dt=0.01, drag_h=0.5 * 0.35)
        s = state(v_h=1.0)
        for _ in range(200):
            s = step(s, HOVER, p)
        assert s.v_h == pytest.approx(math.exp(-1.0), abs=1e-3)

    def test_position_advances_along_heading(self):
        p = params()
        yaw = 0.7
        s = state(v_h=1.0, yaw=yaw)
        out = step(s, HOVER, p)
        dx = out.pose.position.x
        dy = out.pose.position.y
        assert math.atan2(dy, dx) == pytest.approx(yaw, abs=1e-9)

    def test_pitch_tracks_command_first_order(self):
        p = params()
        s = state()
        cmd = ActuationCmd(0.0, 0.0, 0.0, theta_cmd=0.2)
        for _ in range(int(5 * p.pitch_tau / p.dt)):
            s = step(s, cmd, p)
        assert s.pose.pitch == pytest.approx(0.2, abs=0.002)
        assert abs(s.pose.pitch) <= LIMITS.theta_max

    def test_floor_contact_clamps(self):
        p = params()
        s = state(v_z=-5.0, z=0.01)
        out = step(s, HOVER, p)
        assert out.pose.position.z == 0.0
        assert out.v_z == 0.0

    def test_cos_theta_factor_small_angle(self):
        # At the pitch clamp the horizontal acceleration differs from the
        # level-hull model by less than 3.5%.
        p = params(drag_h=0.0)
        cmd = ActuationCmd(f_h=0.1, f_y=0.0, tau=0.0, theta_cmd=LIMITS.theta_max)
        level = step(state(), ActuationCmd(0.1, 0.0, 0.0, 0.0), p).v_h
        pitched = step(state(pitch=LIMITS.theta_max), cmd, p).v_h
        assert level > 0
        assert abs(pitched - level) / level < 0.035

    def test_bit_exact_determinism(self):
        p = params()
        s = state(v_h=0.3, v_z=-0.1, yaw_rate=0.2, yaw=1.1, pitch=0.05)
        cmd = ActuationCmd(0.05, -0.02, 0.01, 0.1)
        a, b = step(s, cmd, p), step(s, cmd, p)
        assert a == b

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            params(dt=0.0)
        with pytest.raises(ValueError):
            params(dt=0.2)

    def test_rejects_non_finite_cmd(self):
        with pytest.raises(ValueError):
            ActuationCmd(float("nan"), 0, 0, 0)

    @given(
        st.floats(-1.0, 1.0),
        st.floats(-0.5, 0.5),
        st.floats(-1.0, 1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_dissipativity_without_commands(self, v_h, v_z, yaw_rate):
        p = params()
        s = state(v_h=v_h, v_z=v_z, yaw_rate=yaw_rate)
        out = step(s, HOVER, p)
        assert abs(out.v_h) <= abs(v_h) + 1e-12
        assert abs(out.v_z) <= abs(v_z) + 1e-12
        assert abs(out.yaw_rate) <= abs(yaw_rate) + 1e-12


class TestThrustMix:
    def test_zero_command_is_all_zero(self):
        r = thrust_mix(HOVER, params())
        assert (r.left_h, r.right_h, r.left_v, r.right_v) == (0.0, 0.0, 0.0, 0.0)

    def test_pure_thrust_is_symmetric(self):
        r = thrust_mix(ActuationCmd(0.1, 0.0, 0.0, 0.0), params())
        assert r.left_h == r.right_h > 0

    def test_vertical_split_equal(self):
        r = thrust_mix(ActuationCmd(0.0, 0.06, 0.0, 0.0), params())
        assert r.left_v == r.right_v == pytest.approx(0.5)

    def test_round_trip_recovers_commands(self):
        # Algebraic inverse: sum/difference un-mixing of unsaturated outputs.
        p = params()
        rng = np.random.default_rng(7)
        for _ in range(200):
            f_h = float(rng.uniform(-0.07, 0.07))
            tau = float(rng.uniform(-0.02, 0.02))
            f_y = float(rng.uniform(-0.1, 0.1))
            cmd = ActuationCmd(f_h, f_y, tau, 0.0)
            rot = thrust_mix(cmd, p)
            if max(abs(rot.left_h), abs(rot.right_h)) >= 1.0:
                continue
            got = unmix(rot, p)
            assert got[0] == pytest.approx(f_h, abs=1e-12)
            assert got[1] == pytest.approx(tau, abs=1e-12)
            assert got[2] == pytest.approx(f_y, abs=1e-12)

    def test_saturation_preserves_ratio_and_bounds(self):
        p = params()
        cmd = ActuationCmd(0.15, 0.0, 0.05, 0.0)
        r = thrust_mix(cmd, p)
        assert max(abs(r.left_h), abs(r.right_h)) <= 1.0 + 1e-12
        f_h, tau, _ = unmix(r, p)
        assert tau / f_h == pytest.approx(cmd.tau / cmd.f_h, rel=1e-9)


class TestDisturbance:
    def test_zero_magnitude_is_identity(self):
        s = state(v_h=0.2)
        rng = np.random.default_rng(0)
        assert apply_disturbance(s, rng, 0.0, 0.02) is s
        # no draws consumed
        assert float(rng.random()) == float(np.random.default_rng(0).random())

    def test_deterministic_given_seed(self):
        s = state(v_h=0.2)
        a = apply_disturbance(s, np.random.default_rng(42), 0.1, 0.02)
        b = apply_disturbance(s, np.random.default_rng(42), 0.1, 0.02)
        assert a == b

    def test_zero_mean_statistics(self):
        s = state()
        rng = np.random.default_rng(123)
        mag, dt, n = 0.5, 0.02, 100_000
        sigma = mag * dt
        deltas = np.array([apply_disturbance(s, rng, mag, dt).v_h for _ in range(n)])
        assert abs(deltas.mean()) < 3 * sigma / math.sqrt(n)
        assert np.max(np.abs(deltas)) <= 3 * sigma + 1e-12

    def test_rejects_negative_magnitude(self):
        with pytest.raises(ValueError):
            apply_disturbance(state(), np.random.default_rng(0), -1.0, 0.02)


class TestContacts:
    def test_separated_states_untouched(self):
        a = state()
        b = BlimpState(
            id=1, pose=Pose(Vec3(5, 0, 1.5), 0.0, 0.0), v_h=0, v_z=0, yaw_rate=0, role=Role.LEADER
        )
        out = resolve_contacts([a, b], 0.35)
        assert out[0] is a and out[1] is b

    def test_overlap_pushed_to_contact_distance(self):
        a = state()
        b = BlimpState(
            id=1, pose=Pose(Vec3(0.4, 0, 1.5), 0.0, 0.0), v_h=0, v_z=0, yaw_rate=0, role=Role.LEADER
        )
        out = resolve_contacts([a, b], 0.35)
        d = out[0].pose.position.planar_distance_to(out[1].pose.position)
        assert d == pytest.approx(0.7, abs=1e-9)
        # symmetric push
        assert out[0].pose.position.x == pytest.approx(-out[1].pose.position.x + 0.4, abs=1e-9)
