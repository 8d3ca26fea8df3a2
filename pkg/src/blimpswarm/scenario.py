"""Scenario configuration: INI schema, validating loader, derived objects.

A scenario file fully determines a run (together with the seed): swarm size,
physics, camera, gains, setpoints, noise, the waypoint path, the switch
policy, and the success thresholds. Every physical quantity must be spelled
out in the file; the loader rejects missing required keys by name instead of
silently defaulting them. The full schema is documented in the README.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .control import ControlGains, PidGains, Setpoints
from .core import BlimpGeometry, Turn, Vec3, Waypoint
from .coordination import classify_turn
from .dynamics import ActuationLimits, PlantParams
from .perception import CameraCalibration, CameraIntrinsics, SensorNoise

POLICY_SWITCH = "switch"
POLICY_NO_SWITCH = "no-switch"


class ConfigError(ValueError):
    """Scenario file rejected; the message names the offending section/key."""


@dataclass(frozen=True)
class NoiseConfig:
    pixel_std: float
    sensors: SensorNoise
    disturbance_accel: float


@dataclass(frozen=True)
class LeaderConfig:
    cruise_speed: float
    capture_radius: float
    slow_radius: float
    yaw_gain: float
    speed_gain: float
    switch_retry_s: float
    switch_timeout_s: float
    # Acceleration ramp applied after a completed switch, m/s^2; a fresh
    # leader is brought up to speed progressively.
    accel_ramp: float


@dataclass(frozen=True)
class SearchConfig:
    scan_rate: float
    loss_grace_s: float
    loss_timeout_s: float
    # One full rotation plus half the field of view, expressed in seconds.
    timeout_s: float


@dataclass(frozen=True)
class SuccessConfig:
    d_min: float
    d_max: float
    # Separation beyond which a lost blimp is written off and the run ends.
    unrecoverable_separation: float


@dataclass(frozen=True)
class SpawnConfig:
    distance_min: float
    distance_max: float
    arc_deg: float
    heading_jitter_deg: float


@dataclass(frozen=True)
class ContactConfig:
    # Minimum center-to-center clearance enforced between hulls; at least
    # the physical contact distance, usually more (rotor wash margin).
    keepout_radius: float


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    n: int
    seed: int
    duration_s: float
    policy: str
    dt: float
    geometry: BlimpGeometry
    plant: PlantParams
    intrinsics: CameraIntrinsics
    calibration: CameraCalibration
    realistic_aspect: bool
    noise: NoiseConfig
    fusion_alpha: float
    fusion_v_limit: float
    fusion_v_leak: float
    setpoints: Setpoints
    gains: ControlGains
    contact: ContactConfig
    leader: LeaderConfig
    search: SearchConfig
    success: SuccessConfig
    spawn: SpawnConfig
    waypoints: tuple[Waypoint, ...]
    initial_poses: Optional[tuple[tuple[float, float, float, float], ...]] = None
    drop_probability: float = 0.0

    def with_overrides(
        self,
        seed: Optional[int] = None,
        policy: Optional[str] = None,
        duration_s: Optional[float] = None,
    ) -> "ScenarioConfig":
        from dataclasses import replace

        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        if policy is not None:
            if policy not in (POLICY_SWITCH, POLICY_NO_SWITCH):
                raise ConfigError(f"policy must be '{POLICY_SWITCH}' or '{POLICY_NO_SWITCH}'")
            cfg = replace(cfg, policy=policy)
        if duration_s is not None:
            if duration_s < 0:
                raise ConfigError("duration must be >= 0")
            cfg = replace(cfg, duration_s=duration_s)
        return cfg

    @property
    def switch_enabled(self) -> bool:
        return self.policy == POLICY_SWITCH

    @property
    def search_timeout_ticks(self) -> int:
        return max(1, math.ceil(self.search.timeout_s / self.dt))

    @property
    def loss_grace_ticks(self) -> int:
        return max(1, math.ceil(self.search.loss_grace_s / self.dt))

    @property
    def loss_timeout_ticks(self) -> int:
        return max(1, math.ceil(self.search.loss_timeout_s / self.dt))


_MISSING = object()


class _SectionReader:
    def __init__(self, parser: configparser.ConfigParser, section: str):
        self.parser = parser
        self.section = section

    def _raw(self, key: str, required: bool):
        if self.parser.has_option(self.section, key):
            return self.parser.get(self.section, key)
        if required:
            raise ConfigError(f"[{self.section}] {key}: required key missing")
        return _MISSING

    def get_float(self, key: str, required: bool = True, default: float = 0.0) -> float:
        raw = self._raw(key, required)
        if raw is _MISSING:
            return default
        try:
            v = float(raw)
        except ValueError:
            raise ConfigError(f"[{self.section}] {key}: not a number: {raw!r}") from None
        if not math.isfinite(v):
            raise ConfigError(f"[{self.section}] {key}: must be finite")
        return v

    def get_int(self, key: str, required: bool = True, default: int = 0) -> int:
        raw = self._raw(key, required)
        if raw is _MISSING:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"[{self.section}] {key}: not an integer: {raw!r}") from None

    def get_bool(self, key: str, required: bool = True, default: bool = False) -> bool:
        raw = self._raw(key, required)
        if raw is _MISSING:
            return default
        lowered = str(raw).strip().lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"[{self.section}] {key}: not a boolean: {raw!r}")

    def get_str(self, key: str, required: bool = True, default: str = "") -> str:
        raw = self._raw(key, required)
        return default if raw is _MISSING else str(raw)


def _require_section(parser: configparser.ConfigParser, name: str) -> _SectionReader:
    if not parser.has_section(name):
        raise ConfigError(f"[{name}]: required section missing")
    return _SectionReader(parser, name)


def _parse_pid(parser: configparser.ConfigParser, section: str) -> PidGains:
    r = _require_section(parser, section)
    try:
        return PidGains(
            kp=r.get_float("kp"),
            ki=r.get_float("ki"),
            kd=r.get_float("kd"),
            i_limit=r.get_float("i_limit"),
            out_min=r.get_float("out_min"),
            out_max=r.get_float("out_max"),
        )
    except ValueError as e:
        raise ConfigError(f"[{section}]: {e}") from None


def _parse_waypoints(raw: str, altitude: float) -> list[Vec3]:
    points = []
    for chunk in raw.replace("\n", "|").split("|"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) not in (2, 3):
            raise ConfigError(f"[path] waypoints: expected 'x, y[, z]' entries, got {chunk!r}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"[path] waypoints: not numeric: {chunk!r}") from None
        z = vals[2] if len(vals) == 3 else altitude
        points.append(Vec3(vals[0], vals[1], z))
    if len(points) < 2:
        raise ConfigError("[path] waypoints: at least two waypoints required")
    return points


def build_waypoints(points: list[Vec3], turn_tolerance_deg: float) -> tuple[Waypoint, ...]:
    """Index the path and tag sharp corners with their turn direction."""
    tol = math.radians(turn_tolerance_deg)
    wps = []
    for k, p in enumerate(points):
        turn = Turn.NONE
        if 0 < k < len(points) - 1:
            turn = classify_turn(points[k - 1], p, points[k + 1], tolerance=tol)
        wps.append(Waypoint(index=k, position=p, turn=turn))
    return tuple(wps)


def load_config(path) -> ScenarioConfig:
    """Load and validate a scenario file, raising ConfigError with the
    offending section and key on any schema violation."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"scenario file not found: {p}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(p, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except (configparser.Error, UnicodeDecodeError) as e:
        raise ConfigError(f"scenario file not parseable: {e}") from None
    return parse_config(parser)


def parse_config(parser: configparser.ConfigParser) -> ScenarioConfig:
    scenario = _require_section(parser, "scenario")
    name = scenario.get_str("name", required=False, default="scenario")
    n = scenario.get_int("n")
    if n < 2:
        raise ConfigError("[scenario] n: at least 2 blimps required")
    seed = scenario.get_int("seed", required=False, default=0)
    duration = scenario.get_float("duration_s")
    if duration < 0:
        raise ConfigError("[scenario] duration_s: must be >= 0")
    policy = scenario.get_str("policy", required=False, default=POLICY_SWITCH)
    if policy not in (POLICY_SWITCH, POLICY_NO_SWITCH):
        raise ConfigError(f"[scenario] policy: must be '{POLICY_SWITCH}' or '{POLICY_NO_SWITCH}'")

    world = _require_section(parser, "world")
    dt = world.get_float("dt")
    disturbance = world.get_float("disturbance_accel", required=False, default=0.0)
    drop_probability = world.get_float("directive_drop_probability", required=False, default=0.0)
    if not 0 <= drop_probability < 1:
        raise ConfigError("[world] directive_drop_probability: must be in [0, 1)")

    geo = _require_section(parser, "geometry")
    plant_r = _require_section(parser, "plant")
    try:
        geometry = BlimpGeometry(
            length=geo.get_float("length"),
            envelope_radius=geo.get_float("envelope_radius"),
            mass=plant_r.get_float("mass"),
            neutral_buoyancy=geo.get_bool("neutral_buoyancy", required=False, default=True),
        )
    except ValueError as e:
        raise ConfigError(f"[geometry]: {e}") from None

    theta_max = math.radians(plant_r.get_float("theta_max_deg"))
    try:
        limits = ActuationLimits(
            f_h_max=plant_r.get_float("f_h_max"),
            f_y_max=plant_r.get_float("f_y_max"),
            tau_max=plant_r.get_float("tau_max"),
            theta_max=theta_max,
        )
        plant = PlantParams(
            mass=geometry.mass,
            drag_h=plant_r.get_float("drag_h"),
            drag_z=plant_r.get_float("drag_z"),
            drag_yaw=plant_r.get_float("drag_yaw"),
            yaw_inertia=plant_r.get_float("yaw_inertia"),
            pitch_tau=plant_r.get_float("pitch_tau"),
            dt=dt,
            limits=limits,
            buoyancy_offset=0.0
            if geometry.neutral_buoyancy
            else plant_r.get_float("buoyancy_offset"),
        )
    except ValueError as e:
        raise ConfigError(f"[plant]: {e}") from None

    cam = _require_section(parser, "camera")
    width = cam.get_int("width")
    height = cam.get_int("height")
    hfov = math.radians(cam.get_float("hfov_deg"))
    cal_distance = cam.get_float("cal_distance")
    if cal_distance <= 0:
        raise ConfigError("[camera] cal_distance: must be positive")
    if not 0 < hfov < math.pi:
        raise ConfigError("[camera] hfov_deg: must be in (0, 180)")
    focal = (width / 2.0) / math.tan(hfov / 2.0)
    try:
        intrinsics = CameraIntrinsics(
            f=focal,
            i0=width / 2.0,
            j0=height / 2.0,
            width=width,
            height=height,
            hfov=hfov,
            max_range=cam.get_float("max_range"),
        )
        calibration = CameraCalibration(
            d0=cal_distance,
            l_f0=focal * geometry.length / cal_distance,
            length0=geometry.length,
        )
    except ValueError as e:
        raise ConfigError(f"[camera]: {e}") from None
    realistic_aspect = cam.get_bool("realistic_aspect", required=False, default=False)

    noise_r = _require_section(parser, "noise")
    noise = NoiseConfig(
        pixel_std=noise_r.get_float("pixel_std"),
        sensors=SensorNoise(
            altimeter_std=noise_r.get_float("altimeter_std"),
            pitch_std=noise_r.get_float("pitch_std", required=False, default=0.0),
            gyro_std=noise_r.get_float("gyro_std", required=False, default=0.0),
            accel_std=noise_r.get_float("accel_std", required=False, default=0.0),
        ),
        disturbance_accel=disturbance,
    )
    if noise.pixel_std < 0 or noise.sensors.altimeter_std < 0:
        raise ConfigError("[noise]: standard deviations must be >= 0")

    fusion = _require_section(parser, "fusion")
    alpha = fusion.get_float("alpha")
    if not 0 < alpha <= 1:
        raise ConfigError("[fusion] alpha: must be in (0, 1]")
    fusion_v_limit = fusion.get_float("v_limit", required=False, default=2.0)
    fusion_v_leak = fusion.get_float("v_leak", required=False, default=0.05)

    sp_r = _require_section(parser, "setpoints")
    try:
        setpoints = Setpoints(
            d_setpoint=sp_r.get_float("distance"),
            h_setpoint=sp_r.get_float("altitude"),
            psi_setpoint=sp_r.get_float("relative_yaw", required=False, default=0.0),
            theta_max=theta_max,
        )
    except ValueError as e:
        raise ConfigError(f"[setpoints]: {e}") from None

    ctl = _require_section(parser, "control")
    gains = ControlGains(
        distance=_parse_pid(parser, "pid.distance"),
        velocity=_parse_pid(parser, "pid.velocity"),
        height=_parse_pid(parser, "pid.height"),
        yaw=_parse_pid(parser, "pid.yaw"),
        thrust_per_rad=ctl.get_float("thrust_per_rad"),
        tau_slew=ctl.get_float("tau_slew"),
        yaw_rate_gain=ctl.get_float("yaw_rate_gain"),
    )

    leader_r = _require_section(parser, "leader")
    leader = LeaderConfig(
        cruise_speed=leader_r.get_float("cruise_speed"),
        capture_radius=leader_r.get_float("capture_radius"),
        slow_radius=leader_r.get_float("slow_radius"),
        yaw_gain=leader_r.get_float("yaw_gain"),
        speed_gain=leader_r.get_float("speed_gain"),
        switch_retry_s=leader_r.get_float("switch_retry_s", required=False, default=1.0),
        switch_timeout_s=leader_r.get_float("switch_timeout_s", required=False, default=25.0),
        accel_ramp=leader_r.get_float("accel_ramp", required=False, default=0.0),
    )

    search_r = _require_section(parser, "search")
    scan_rate = search_r.get_float("scan_rate")
    if scan_rate <= 0:
        raise ConfigError("[search] scan_rate: must be positive")
    search = SearchConfig(
        scan_rate=scan_rate,
        loss_grace_s=search_r.get_float("loss_grace_s"),
        loss_timeout_s=search_r.get_float("loss_timeout_s"),
        # One rotation plus field-of-view margin, padded for the rate
        # loop's tracking shortfall.
        timeout_s=1.2 * (math.tau + hfov / 2.0) / scan_rate,
    )

    succ = _require_section(parser, "success")
    success = SuccessConfig(
        d_min=succ.get_float("d_min"),
        d_max=succ.get_float("d_max"),
        unrecoverable_separation=succ.get_float(
            "unrecoverable_separation", required=False, default=2.0 * cam.get_float("max_range")
        ),
    )
    if not 0 < success.d_min < success.d_max:
        raise ConfigError("[success]: requires 0 < d_min < d_max")
    if success.unrecoverable_separation <= success.d_max:
        raise ConfigError("[success] unrecoverable_separation: must exceed d_max")

    contact = ContactConfig(
        keepout_radius=geo.get_float(
            "keepout_radius", required=False, default=geometry.envelope_radius
        )
    )
    if contact.keepout_radius < geometry.envelope_radius:
        raise ConfigError("[geometry] keepout_radius: must be >= envelope_radius")

    spawn_r = _require_section(parser, "formation")
    spawn = SpawnConfig(
        distance_min=spawn_r.get_float("spawn_distance_min"),
        distance_max=spawn_r.get_float("spawn_distance_max"),
        arc_deg=spawn_r.get_float("spawn_arc_deg"),
        heading_jitter_deg=spawn_r.get_float("heading_jitter_deg", required=False, default=0.0),
    )
    if not 0 < spawn.distance_min <= spawn.distance_max:
        raise ConfigError("[formation]: requires 0 < spawn_distance_min <= spawn_distance_max")

    path_r = _require_section(parser, "path")
    points = _parse_waypoints(path_r.get_str("waypoints"), setpoints.h_setpoint)
    turn_tolerance = path_r.get_float("turn_tolerance_deg", required=False, default=15.0)
    waypoints = build_waypoints(points, turn_tolerance)

    initial_poses = None
    if parser.has_section("initial"):
        poses = []
        for i in range(n):
            key = f"blimp{i}"
            if not parser.has_option("initial", key):
                raise ConfigError(f"[initial] {key}: required when [initial] is present")
            parts = [s.strip() for s in parser.get("initial", key).split(",")]
            if len(parts) != 4:
                raise ConfigError(f"[initial] {key}: expected 'x, y, z, yaw_deg'")
            try:
                x, y, z, yaw_deg = (float(s) for s in parts)
            except ValueError:
                raise ConfigError(f"[initial] {key}: not numeric") from None
            poses.append((x, y, z, math.radians(yaw_deg)))
        initial_poses = tuple(poses)

    return ScenarioConfig(
        name=name,
        n=n,
        seed=seed,
        duration_s=duration,
        policy=policy,
        dt=dt,
        geometry=geometry,
        plant=plant,
        intrinsics=intrinsics,
        calibration=calibration,
        realistic_aspect=realistic_aspect,
        noise=noise,
        fusion_alpha=alpha,
        fusion_v_limit=fusion_v_limit,
        fusion_v_leak=fusion_v_leak,
        setpoints=setpoints,
        gains=gains,
        contact=contact,
        leader=leader,
        search=search,
        success=success,
        spawn=spawn,
        waypoints=waypoints,
        initial_poses=initial_poses,
        drop_probability=drop_probability,
    )


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario file shipped with the package (e.g. 'default')."""
    res = resources.files("blimpswarm").joinpath("scenarios", f"{name}.ini")
    with resources.as_file(res) as p:
        if not p.exists():
            raise ConfigError(f"no bundled scenario named {name!r}")
        return Path(p)


def resolve_scenario(spec: str) -> ScenarioConfig:
    """Accept either a filesystem path or the name of a bundled scenario."""
    p = Path(spec)
    if p.exists():
        return load_config(p)
    try:
        return load_config(bundled_scenario_path(spec))
    except ConfigError:
        raise ConfigError(f"scenario file not found: {spec}") from None
