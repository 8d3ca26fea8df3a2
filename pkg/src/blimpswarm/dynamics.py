"""Discrete-time plant model for one blimp.

Horizontal acceleration is coupled to the pitch angle,

    v_h' = cos(theta) * (v_0' + F_h / m),      v_0' = -(drag_h / m) * v_h,

so thrust only translates fully into forward acceleration while the hull is
level. Vertical and yaw axes are first-order linear-drag models; pitch is
commanded and tracked by a first-order lag (the inner attitude loop is not
modeled explicitly). Integration is semi-implicit Euler at a fixed dt:
velocities update first, positions advance with the updated values. The
update is a pure function of its inputs, so identical inputs give bit-exact
identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import BlimpState, Pose, Vec3


@dataclass(frozen=True)
class ActuationLimits:
    f_h_max: float
    f_y_max: float
    tau_max: float
    theta_max: float

    def __post_init__(self):
        if min(self.f_h_max, self.f_y_max, self.tau_max, self.theta_max) <= 0:
            raise ValueError("actuation limits must be positive")


@dataclass(frozen=True)
class ActuationCmd:
    """Per-tick actuation request: forward thrust, net vertical thrust,
    yaw torque, and commanded pitch angle."""

    f_h: float
    f_y: float
    tau: float
    theta_cmd: float

    def __post_init__(self):
        for v in (self.f_h, self.f_y, self.tau, self.theta_cmd):
            if not math.isfinite(v):
                raise ValueError(f"non-finite actuation command: {self}")

    def clamped(self, limits: ActuationLimits) -> "ActuationCmd":
        return ActuationCmd(
            f_h=_clamp(self.f_h, -limits.f_h_max, limits.f_h_max),
            f_y=_clamp(self.f_y, -limits.f_y_max, limits.f_y_max),
            tau=_clamp(self.tau, -limits.tau_max, limits.tau_max),
            theta_cmd=_clamp(self.theta_cmd, -limits.theta_max, limits.theta_max),
        )


HOVER = ActuationCmd(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PlantParams:
    mass: float
    drag_h: float
    drag_z: float
    drag_yaw: float
    yaw_inertia: float
    pitch_tau: float
    dt: float
    limits: ActuationLimits
    # Net buoyant force minus weight, N; zero for a neutrally ballasted hull.
    buoyancy_offset: float = 0.0

    def __post_init__(self):
        if min(self.mass, self.yaw_inertia, self.pitch_tau) <= 0:
            raise ValueError("mass, inertia, and time constants must be positive")
        if min(self.drag_h, self.drag_z, self.drag_yaw) < 0:
            raise ValueError("drag coefficients must be >= 0")
        if not 0 < self.dt <= 0.1:
            raise ValueError(f"dt must be in (0, 0.1], got {self.dt}")


@dataclass(frozen=True)
class RotorSpeeds:
    """Normalized rotor drive levels in [-1, 1] after saturation."""

    left_h: float
    right_h: float
    left_v: float
    right_v: float


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def step(state: BlimpState, cmd: ActuationCmd, params: PlantParams) -> BlimpState:
    """Advance one blimp by one fixed time step.

    The floor is treated as a hard stop: altitude never goes below zero and
    downward velocity is zeroed on contact.
    """
    dt = params.dt
    m = params.mass

    theta = state.pose.pitch + dt * (cmd.theta_cmd - state.pose.pitch) / params.pitch_tau
    theta = _clamp(theta, -params.limits.theta_max, params.limits.theta_max)

    yaw_rate = state.yaw_rate + dt * (cmd.tau - params.drag_yaw * state.yaw_rate) / params.yaw_inertia
    yaw = state.pose.yaw + dt * yaw_rate

    v_h = state.v_h + dt * math.cos(theta) * ((cmd.f_h - params.drag_h * state.v_h) / m)
    v_z = state.v_z + dt * (cmd.f_y + params.buoyancy_offset - params.drag_z * state.v_z) / m

    pos = state.pose.position
    cy = math.cos(yaw)
    sy = math.sin(yaw)
    x = pos.x + dt * v_h * cy
    y = pos.y + dt * v_h * sy
    z = pos.z + dt * v_z
    if z <= 0.0:
        z = 0.0
        if v_z < 0.0:
            v_z = 0.0

    return replace(
        state,
        pose=Pose(position=Vec3(x, y, z), pitch=theta, yaw=yaw),
        v_h=v_h,
        v_z=v_z,
        yaw_rate=yaw_rate,
    )


def thrust_mix(cmd: ActuationCmd, params: PlantParams) -> RotorSpeeds:
    """Map an actuation command onto the four rotors.

    The two horizontal rotors realize forward thrust and yaw torque
    differentially (the right rotor leads for positive, counter-clockwise
    torque); the two vertical rotors split the net vertical thrust equally.
    When the differential pair would exceed its drive range, both sides are
    scaled by the same factor so the torque-to-thrust ratio is preserved.
    """
    lim = params.limits
    u_f = cmd.f_h / lim.f_h_max
    u_t = cmd.tau / lim.tau_max
    left = u_f - u_t
    right = u_f + u_t
    peak = max(abs(left), abs(right))
    if peak > 1.0:
        left /= peak
        right /= peak
    u_v = _clamp(cmd.f_y / lim.f_y_max, -1.0, 1.0)
    return RotorSpeeds(left_h=left, right_h=right, left_v=u_v, right_v=u_v)


def unmix(rotors: RotorSpeeds, params: PlantParams) -> tuple[float, float, float]:
    """Invert thrust_mix for unsaturated outputs: (f_h, tau, f_y)."""
    lim = params.limits
    f_h = 0.5 * (rotors.left_h + rotors.right_h) * lim.f_h_max
    tau = 0.5 * (rotors.right_h - rotors.left_h) * lim.tau_max
    f_y = 0.5 * (rotors.left_v + rotors.right_v) * lim.f_y_max
    return f_h, tau, f_y


def resolve_contacts(states: list[BlimpState], envelope_radius: float) -> list[BlimpState]:
    """Push overlapping hulls apart so envelopes never interpenetrate.

    Planar disc contact: any pair closer than two envelope radii is displaced
    symmetrically along the line between them to contact distance. Velocities
    are untouched (blimp collisions are soft, slow bumps). Deterministic; a
    coincident pair separates along +x.
    """
    min_d = 2.0 * envelope_radius
    pos = [(s.pose.position.x, s.pose.position.y) for s in states]
    moved = [False] * len(states)
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            dx = pos[j][0] - pos[i][0]
            dy = pos[j][1] - pos[i][1]
            d = math.hypot(dx, dy)
            if d >= min_d:
                continue
            if d < 1e-9:
                ux, uy = 1.0, 0.0
            else:
                ux, uy = dx / d, dy / d
            push = 0.5 * (min_d - d)
            pos[i] = (pos[i][0] - push * ux, pos[i][1] - push * uy)
            pos[j] = (pos[j][0] + push * ux, pos[j][1] + push * uy)
            moved[i] = moved[j] = True
    out = []
    for k, s in enumerate(states):
        if not moved[k]:
            out.append(s)
            continue
        p = s.pose.position
        out.append(
            replace(s, pose=Pose(position=Vec3(pos[k][0], pos[k][1], p.z), pitch=s.pose.pitch, yaw=s.pose.yaw))
        )
    return out


def apply_disturbance(
    state: BlimpState, rng: np.random.Generator, magnitude: float, dt: float
) -> BlimpState:
    """Perturb the velocity state with zero-mean bounded noise.

    magnitude is an acceleration scale (m/s^2 on the translational channels,
    rad/s^2 on yaw); each channel receives a normal increment with standard
    deviation magnitude*dt, clipped to three sigma. Deterministic for a given
    generator state; magnitude 0 returns the state unchanged without
    consuming any draws.
    """
    if magnitude < 0:
        raise ValueError("disturbance magnitude must be >= 0")
    if magnitude == 0.0:
        return state
    sigma = magnitude * dt
    d = rng.normal(0.0, sigma, size=3)
    d = np.clip(d, -3.0 * sigma, 3.0 * sigma)
    return replace(
        state,
        v_h=state.v_h + float(d[0]),
        v_z=state.v_z + float(d[1]),
        yaw_rate=state.yaw_rate + float(d[2]),
    )
