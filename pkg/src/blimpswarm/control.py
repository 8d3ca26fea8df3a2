"""Cascaded follower control stack.

Three loops compose one actuation command per tick:

  distance  -> reference forward velocity -> pitch command (two PIDs in
              cascade; pitch intent is realized as forward thrust through a
              fixed gain, and the plant's pitch lag supplies the coupling)
  altitude  -> vertical thrust (single PID on the altimeter)
  yaw       -> yaw torque (single PID on the estimated relative yaw, with a
              slew limit so yaw adjustments stay gentle)

Sign conventions of this artifact: the outer distance error is
(d_estimate - d_setpoint), so a target beyond the setpoint commands forward
motion; a positive relative yaw estimate (target right of image center)
commands negative, clockwise torque.

While the target is not visible the distance and yaw integrators freeze
(no windup during occlusions, smooth resume), forward thrust is zeroed, and
yaw authority is handed to the coordination layer's search command, realized
as a yaw-rate tracking loop. Altitude hold stays active throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .core import normalize_angle
from .dynamics import ActuationCmd, ActuationLimits
from .perception import RelativeEstimate, SensorReadings


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float
    i_limit: float
    out_min: float
    out_max: float

    def __post_init__(self):
        if self.out_min >= self.out_max:
            raise ValueError("out_min must be < out_max")
        if self.i_limit < 0:
            raise ValueError("i_limit must be >= 0")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    prev_output: float = 0.0
    initialized: bool = False


@dataclass(frozen=True)
class Setpoints:
    d_setpoint: float = 1.5
    h_setpoint: float = 1.5
    psi_setpoint: float = 0.0
    theta_max: float = math.radians(15.0)

    def __post_init__(self):
        if self.d_setpoint <= 0:
            raise ValueError("d_setpoint must be positive")
        if not 0 < self.theta_max < math.pi / 4:
            raise ValueError("theta_max must be in (0, pi/4)")


@dataclass(frozen=True)
class ControlGains:
    """Frozen per-loop gains plus the composition constants."""

    distance: PidGains
    velocity: PidGains
    height: PidGains
    yaw: PidGains
    # Forward thrust realizing the pitch intent, N per rad of theta_cmd.
    thrust_per_rad: float
    # Max change of the yaw torque output, N*m per second.
    tau_slew: float
    # P gain of the search-mode yaw-rate tracking loop, N*m per rad/s.
    yaw_rate_gain: float


@dataclass(frozen=True)
class FollowerState:
    outer: PidState = field(default_factory=PidState)
    inner: PidState = field(default_factory=PidState)
    height: PidState = field(default_factory=PidState)
    yaw: PidState = field(default_factory=PidState)
    prev_tau: float = 0.0


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def pid_step(gains: PidGains, st: PidState, error: float, dt: float) -> tuple[float, PidState]:
    """One discrete PID update.

    Trapezoidal integral with an anti-windup clamp, derivative on the error
    (zero on the first call), output saturated to [out_min, out_max]. Raises
    on non-finite error or non-positive dt, leaving the state untouched.
    """
    if not math.isfinite(error):
        raise ValueError(f"non-finite error: {error}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    prev = error if not st.initialized else st.prev_error
    integral = st.integral + 0.5 * dt * (error + prev)
    integral = _clamp(integral, -gains.i_limit, gains.i_limit)
    deriv = 0.0 if not st.initialized else (error - prev) / dt
    out = _clamp(gains.kp * error + gains.ki * integral + gains.kd * deriv, gains.out_min, gains.out_max)
    return out, PidState(integral=integral, prev_error=error, prev_output=out, initialized=True)


def distance_controller(
    d_hat: float,
    sp: Setpoints,
    gains: ControlGains,
    outer: PidState,
    inner: PidState,
    v_h_current: float,
    dt: float,
) -> tuple[float, PidState, PidState]:
    """Distance-to-pitch cascade: returns (theta_cmd, outer, inner)."""
    if d_hat <= 0:
        raise ValueError("d_hat must be positive")
    v_ref, outer = pid_step(gains.distance, outer, d_hat - sp.d_setpoint, dt)
    theta_cmd, inner = pid_step(gains.velocity, inner, v_ref - v_h_current, dt)
    return _clamp(theta_cmd, -sp.theta_max, sp.theta_max), outer, inner


def height_controller(
    h: float, sp: Setpoints, gains: ControlGains, st: PidState, dt: float
) -> tuple[float, PidState]:
    """Altitude hold: returns (f_y, state)."""
    if h < 0:
        raise ValueError("altitude must be >= 0")
    return pid_step(gains.height, st, sp.h_setpoint - h, dt)


def yaw_controller(
    psi_hat: float,
    sp: Setpoints,
    gains: ControlGains,
    st: PidState,
    prev_tau: float,
    dt: float,
) -> tuple[float, PidState]:
    """Relative-yaw regulation with a torque slew limit: returns (tau, state)."""
    if abs(psi_hat) > math.pi / 2 + 1e-12:
        raise ValueError("psi_hat outside estimator range [-pi/2, pi/2]")
    tau, st = pid_step(gains.yaw, st, normalize_angle(sp.psi_setpoint) - psi_hat, dt)
    lo = prev_tau - gains.tau_slew * dt
    hi = prev_tau + gains.tau_slew * dt
    return _clamp(tau, lo, hi), st


def follower_tick(
    est: Optional[RelativeEstimate],
    sensors: SensorReadings,
    sp: Setpoints,
    gains: ControlGains,
    limits: ActuationLimits,
    states: FollowerState,
    dt: float,
    search_yaw_rate: float = 0.0,
) -> tuple[ActuationCmd, FollowerState]:
    """Compose one follower actuation command.

    With an estimate, all three loops run. Without one, forward thrust and
    pitch are zeroed, the distance/yaw integrators are left untouched, and
    yaw tracks the search command (zero when not searching, which actively
    damps residual rotation).
    """
    f_y, height_st = height_controller(sensors.altitude, sp, gains, states.height, dt)
    f_y = _clamp(f_y, -limits.f_y_max, limits.f_y_max)

    if est is None:
        tau = _clamp(
            gains.yaw_rate_gain * (search_yaw_rate - sensors.yaw_rate),
            -limits.tau_max,
            limits.tau_max,
        )
        cmd = ActuationCmd(f_h=0.0, f_y=f_y, tau=tau, theta_cmd=0.0)
        return cmd, replace(states, height=height_st, prev_tau=tau)

    theta_cmd, outer_st, inner_st = distance_controller(
        est.d, sp, gains, states.outer, states.inner, sensors.v_h_est, dt
    )
    f_h = _clamp(gains.thrust_per_rad * theta_cmd, -limits.f_h_max, limits.f_h_max)
    tau, yaw_st = yaw_controller(est.psi, sp, gains, states.yaw, states.prev_tau, dt)
    tau = _clamp(tau, -limits.tau_max, limits.tau_max)

    cmd = ActuationCmd(f_h=f_h, f_y=f_y, tau=tau, theta_cmd=theta_cmd)
    return cmd, FollowerState(
        outer=outer_st, inner=inner_st, height=height_st, yaw=yaw_st, prev_tau=tau
    )


def leader_tick(
    forward: float,
    yaw: float,
    vertical: float,
    sensors: SensorReadings,
    sp: Setpoints,
    gains: ControlGains,
    limits: ActuationLimits,
    states: FollowerState,
    dt: float,
) -> tuple[ActuationCmd, FollowerState]:
    """Map normalized operator steering onto the leader's actuators.

    Horizontal thrust and yaw torque scale the steering axes directly;
    altitude is held autonomously with the vertical axis as an additive bias.
    """
    f_y, height_st = height_controller(sensors.altitude, sp, gains, states.height, dt)
    f_y = _clamp(f_y + vertical * limits.f_y_max, -limits.f_y_max, limits.f_y_max)
    tau = _clamp(yaw * limits.tau_max, -limits.tau_max, limits.tau_max)
    cmd = ActuationCmd(
        f_h=_clamp(forward * limits.f_h_max, -limits.f_h_max, limits.f_h_max),
        f_y=f_y,
        tau=tau,
        theta_cmd=0.0,
    )
    return cmd, replace(states, height=height_st, prev_tau=tau)
