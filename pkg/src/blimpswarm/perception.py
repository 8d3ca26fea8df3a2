"""Simulated sensing: geometric monocular camera, relative-position
estimator, laser altimeter, IMU channels, and a constant-gain fusion filter.

Camera frame convention: z forward along the hull heading, x right, y down.
The projection plane is kept vertical (pitch and roll are assumed small), so
a level target at the observer's altitude projects onto the horizontal
centerline of the image.

The default renderer places the target's centerline parallel to the image
plane, which makes the length-ratio estimator exact in the noiseless case.
With realistic_aspect=True the true, yaw-dependent centerline is projected
instead, so the estimator's foreshortening model error becomes measurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .core import BlimpGeometry, BlimpState


@dataclass(frozen=True)
class CameraIntrinsics:
    f: float
    i0: float
    j0: float
    width: int
    height: int
    hfov: float
    max_range: float

    def __post_init__(self):
        if self.f <= 0:
            raise ValueError("focal length must be positive")
        if not 0 <= self.i0 <= self.width:
            raise ValueError("principal point outside image")
        if not 0 < self.hfov < math.pi:
            raise ValueError("hfov must be in (0, pi)")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")


@dataclass(frozen=True)
class CameraCalibration:
    """One-shot length calibration: at distance d0 the target of true length
    length0 projected to l_f0 pixels."""

    d0: float
    l_f0: float
    length0: float

    def __post_init__(self):
        if min(self.d0, self.l_f0, self.length0) <= 0:
            raise ValueError("calibration values must be positive")


@dataclass(frozen=True)
class ImageObservation:
    target: int
    i_p: float
    j_p: float
    l_f: float


class NotVisibleReason(Enum):
    OUT_OF_FOV = "out_of_fov"
    OUT_OF_RANGE = "out_of_range"
    OCCLUDED = "occluded"
    BEHIND_CAMERA = "behind_camera"


@dataclass(frozen=True)
class NotVisible:
    reason: NotVisibleReason


@dataclass(frozen=True)
class RelativeEstimate:
    """Estimated target offset in the observer's camera frame.

    x right, y down, z forward (all meters); d is the planar distance
    sqrt(x^2 + z^2) and psi = arcsin(x/d) the relative yaw, positive when
    the target sits right of the image center.
    """

    x: float
    y: float
    z: float
    d: float
    psi: float


@dataclass(frozen=True)
class SensorReadings:
    altitude: float
    pitch: float
    yaw_rate: float
    v_h_est: float


Observation = Union[ImageObservation, NotVisible]


def calibrate_focal(cal: CameraCalibration) -> float:
    """Focal length in pixels from the one-shot length calibration."""
    return cal.d0 * cal.l_f0 / cal.length0


def camera_frame_offset(observer: BlimpState, target_pos) -> tuple[float, float, float]:
    """World offset observer->target expressed in the observer's camera frame."""
    rel_x = target_pos.x - observer.pose.position.x
    rel_y = target_pos.y - observer.pose.position.y
    rel_z = target_pos.z - observer.pose.position.z
    cy = math.cos(observer.pose.yaw)
    sy = math.sin(observer.pose.yaw)
    x_c = rel_x * sy - rel_y * cy
    y_c = -rel_z
    z_c = rel_x * cy + rel_y * sy
    return x_c, y_c, z_c


def _segment_hits_sphere(ox, oy, oz, tx, ty, tz, cx, cy, cz, radius) -> bool:
    dx, dy, dz = tx - ox, ty - oy, tz - oz
    wx, wy, wz = cx - ox, cy - oy, cz - oz
    seg_sq = dx * dx + dy * dy + dz * dz
    if seg_sq == 0.0:
        return False
    t = (wx * dx + wy * dy + wz * dz) / seg_sq
    t = 0.0 if t < 0.0 else 1.0 if t > 1.0 else t
    px, py, pz = wx - t * dx, wy - t * dy, wz - t * dz
    return px * px + py * py + pz * pz < radius * radius


def observe(
    observer: BlimpState,
    target: BlimpState,
    others: Sequence[BlimpState],
    intr: CameraIntrinsics,
    geom: BlimpGeometry,
    noise_px: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    realistic_aspect: bool = False,
) -> Observation:
    """Render the target hull through the observer's pinhole camera.

    Returns an ImageObservation (center pixel and projected centerline
    length), or NotVisible when the target is behind the camera, outside the
    field of view or image bounds, beyond detection range, or when any other
    hull's envelope sphere cuts the observer->target sight line. Visibility
    is decided geometrically before noise, so pixel noise never changes the
    visibility outcome.
    """
    if observer.id == target.id:
        raise ValueError("observer and target must differ")

    x_c, y_c, z_c = camera_frame_offset(observer, target.pose.position)
    if z_c <= 1e-9:
        return NotVisible(NotVisibleReason.BEHIND_CAMERA)
    if abs(math.atan2(x_c, z_c)) > intr.hfov / 2:
        return NotVisible(NotVisibleReason.OUT_OF_FOV)
    dist = math.sqrt(x_c * x_c + y_c * y_c + z_c * z_c)
    if dist > intr.max_range:
        return NotVisible(NotVisibleReason.OUT_OF_RANGE)

    op = observer.pose.position
    tp = target.pose.position
    for other in others:
        if other.id in (observer.id, target.id):
            continue
        c = other.pose.position
        if _segment_hits_sphere(op.x, op.y, op.z, tp.x, tp.y, tp.z, c.x, c.y, c.z, geom.envelope_radius):
            return NotVisible(NotVisibleReason.OCCLUDED)

    i_p = intr.i0 + intr.f * x_c / z_c
    j_p = intr.j0 + intr.f * y_c / z_c
    if not (0.0 <= i_p <= intr.width and 0.0 <= j_p <= intr.height):
        return NotVisible(NotVisibleReason.OUT_OF_FOV)

    if realistic_aspect:
        # True centerline endpoints along the target's own heading.
        ux = 0.5 * geom.length * math.cos(target.pose.yaw)
        uy = 0.5 * geom.length * math.sin(target.pose.yaw)
        ends = []
        for sgn in (-1.0, 1.0):
            ex, ey, ez = camera_frame_offset(
                observer,
                type(tp)(tp.x + sgn * ux, tp.y + sgn * uy, tp.z),
            )
            if ez <= 1e-9:
                return NotVisible(NotVisibleReason.BEHIND_CAMERA)
            ends.append((intr.i0 + intr.f * ex / ez, intr.j0 + intr.f * ey / ez))
        (ia, ja), (ib, jb) = ends
        l_f = math.hypot(ib - ia, jb - ja)
    else:
        # Centerline held parallel to the image plane: projection at the
        # target's depth, independent of its yaw.
        l_f = intr.f * geom.length / z_c

    if noise_px > 0.0:
        if rng is None:
            raise ValueError("rng required when noise_px > 0")
        n = rng.normal(0.0, noise_px, size=3)
        i_p = min(max(i_p + float(n[0]), 0.0), float(intr.width))
        j_p = min(max(j_p + float(n[1]), 0.0), float(intr.height))
        l_f = max(l_f + float(n[2]), 1e-6)

    return ImageObservation(target=target.id, i_p=i_p, j_p=j_p, l_f=l_f)


def estimate_relative(
    obs: ImageObservation, cal: CameraCalibration, intr: CameraIntrinsics
) -> RelativeEstimate:
    """Length-ratio relative position estimate from a single observation.

    Depth comes from the calibrated projected length, z = d0 * l_f0 / l_f;
    the lateral and vertical offsets scale the pixel offsets from the
    principal point by length0 / l_f.
    """
    if obs.l_f <= 0:
        raise ValueError("projected length must be positive")
    z = cal.d0 * cal.l_f0 / obs.l_f
    x = cal.length0 * (obs.i_p - intr.i0) / obs.l_f
    y = cal.length0 * (obs.j_p - intr.j0) / obs.l_f
    d = math.sqrt(x * x + z * z)
    psi = math.asin(x / d)
    return RelativeEstimate(x=x, y=y, z=z, d=d, psi=psi)


def read_altimeter(state: BlimpState, noise_m: float, rng: Optional[np.random.Generator] = None) -> float:
    """Laser altimeter sample: altitude plus zero-mean noise, clamped >= 0."""
    if noise_m < 0:
        raise ValueError("noise must be >= 0")
    h = state.h
    if noise_m > 0.0:
        if rng is None:
            raise ValueError("rng required when noise_m > 0")
        h += float(rng.normal(0.0, noise_m))
    return max(h, 0.0)


def fuse(history: Sequence[SensorReadings], alpha: float) -> SensorReadings:
    """Constant-gain exponential smoothing over a raw sample history.

    Each channel is smoothed independently: y <- (1 - alpha) * y + alpha * x,
    seeded with the first sample. alpha = 1 reproduces the latest sample.
    The raw v_h channel is expected to carry the IMU-acceleration integration
    produced upstream (see SensorPipeline).
    """
    if not history:
        raise ValueError("empty sensor history")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    alt, pitch, yr, vh = (
        history[0].altitude,
        history[0].pitch,
        history[0].yaw_rate,
        history[0].v_h_est,
    )
    for s in history[1:]:
        alt += alpha * (s.altitude - alt)
        pitch += alpha * (s.pitch - pitch)
        yr += alpha * (s.yaw_rate - yr)
        vh += alpha * (s.v_h_est - vh)
    return SensorReadings(altitude=alt, pitch=pitch, yaw_rate=yr, v_h_est=vh)


@dataclass(frozen=True)
class SensorNoise:
    altimeter_std: float = 0.0
    pitch_std: float = 0.0
    gyro_std: float = 0.0
    accel_std: float = 0.0


class SensorPipeline:
    """Per-blimp sensor simulation and fusion state.

    Produces raw altimeter/IMU samples from the true state, integrates the
    measured forward acceleration into a leaky, clamped velocity estimate
    (there is no velocity sensor), and exponentially smooths every channel
    with the same gain used by fuse().
    """

    def __init__(
        self,
        noise: SensorNoise,
        alpha: float,
        dt: float,
        rng: np.random.Generator,
        v_limit: float = 2.0,
        v_leak: float = 0.05,
    ):
        if not 0 < alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        self.noise = noise
        self.alpha = alpha
        self.dt = dt
        self.rng = rng
        self.v_limit = v_limit
        self.v_leak = v_leak
        self._v_int = 0.0
        self._prev_v_h: Optional[float] = None
        self._fused: Optional[SensorReadings] = None

    def update(self, state: BlimpState) -> SensorReadings:
        n = self.noise
        accel_true = 0.0 if self._prev_v_h is None else (state.v_h - self._prev_v_h) / self.dt
        self._prev_v_h = state.v_h

        a_meas = accel_true + (float(self.rng.normal(0.0, n.accel_std)) if n.accel_std > 0 else 0.0)
        v = (1.0 - self.v_leak * self.dt) * self._v_int + a_meas * self.dt
        self._v_int = min(max(v, -self.v_limit), self.v_limit)

        raw = SensorReadings(
            altitude=read_altimeter(state, n.altimeter_std, self.rng),
            pitch=state.pose.pitch
            + (float(self.rng.normal(0.0, n.pitch_std)) if n.pitch_std > 0 else 0.0),
            yaw_rate=state.yaw_rate
            + (float(self.rng.normal(0.0, n.gyro_std)) if n.gyro_std > 0 else 0.0),
            v_h_est=self._v_int,
        )
        if self._fused is None:
            self._fused = raw
        else:
            a = self.alpha
            p = self._fused
            self._fused = SensorReadings(
                altitude=p.altitude + a * (raw.altitude - p.altitude),
                pitch=p.pitch + a * (raw.pitch - p.pitch),
                yaw_rate=p.yaw_rate + a * (raw.yaw_rate - p.yaw_rate),
                v_h_est=p.v_h_est + a * (raw.v_h_est - p.v_h_est),
            )
        return self._fused
