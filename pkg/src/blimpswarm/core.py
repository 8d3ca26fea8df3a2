"""Shared domain types and frame conventions.

World frame is right-handed with z up; yaw is measured counter-clockwise
from +x and kept in (-pi, pi]. Pitch is positive nose-up. Roll is not
modeled. Altitude h is the z coordinate above a flat floor. All angles are
radians, lengths meters, masses kilograms.

Everything here is a plain immutable value; states are advanced by
returning new instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Role(Enum):
    LEADER = "leader"
    FOLLOWER = "follower"
    SEARCHING = "searching"


class Turn(Enum):
    NONE = "none"
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite vector components: {self}")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def planar_distance_to(self, other: "Vec3") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass(frozen=True)
class Pose:
    """Position plus pitch/yaw attitude. Yaw is normalized on construction."""

    position: Vec3
    pitch: float
    yaw: float

    def __post_init__(self):
        if not (math.isfinite(self.pitch) and math.isfinite(self.yaw)):
            raise ValueError("non-finite attitude")
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    def forward_xy(self) -> tuple[float, float]:
        return math.cos(self.yaw), math.sin(self.yaw)


@dataclass(frozen=True)
class BlimpGeometry:
    """Physical envelope of one blimp.

    length is the envelope centerline |AB| that the cameras measure;
    envelope_radius is the sphere used for occlusion tests.
    """

    length: float
    envelope_radius: float
    mass: float
    neutral_buoyancy: bool = True

    def __post_init__(self):
        if self.length <= 0 or self.mass <= 0 or self.envelope_radius <= 0:
            raise ValueError("geometry parameters must be positive")


@dataclass(frozen=True)
class BlimpState:
    """Full kinematic state of one agent.

    v_h is the horizontal body-frame speed along the heading; there is no
    sideslip degree of freedom. h (altitude) is position.z.
    """

    id: int
    pose: Pose
    v_h: float
    v_z: float
    yaw_rate: float
    role: Role

    def __post_init__(self):
        if not (math.isfinite(self.v_h) and math.isfinite(self.v_z) and math.isfinite(self.yaw_rate)):
            raise ValueError("non-finite velocities")
        if self.pose.position.z < 0:
            raise ValueError("altitude must be >= 0")

    @property
    def h(self) -> float:
        return self.pose.position.z


@dataclass(frozen=True)
class Waypoint:
    index: int
    position: Vec3
    turn: Turn = Turn.NONE


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    if not math.isfinite(a):
        raise ValueError(f"non-finite angle: {a}")
    r = math.remainder(a, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


def relative_bearing(observer: Pose, target: Vec3) -> float:
    """Signed angle from the observer's forward axis to the observer->target ray.

    Positive means the target is to the observer's left (counter-clockwise).
    Raises ValueError when the target is planar-coincident with the observer,
    where the bearing is undefined.
    """
    dx = target.x - observer.position.x
    dy = target.y - observer.position.y
    if dx * dx + dy * dy < 1e-24:
        raise ValueError("bearing undefined for coincident positions")
    return normalize_angle(math.atan2(dy, dx) - observer.yaw)
