"""Indoor blimp swarm simulator: leader-follower formation flight with
dynamic leader switching, monocular relative-position estimation, cascaded
PID follower control, a headless experiment harness, and a live operator
gateway."""

from .control import (
    ControlGains,
    FollowerState,
    PidGains,
    PidState,
    Setpoints,
    distance_controller,
    follower_tick,
    height_controller,
    pid_step,
    yaw_controller,
)
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
    classify_turn,
    suggest_new_leader,
)
from .core import (
    BlimpGeometry,
    BlimpState,
    Pose,
    Role,
    Turn,
    Vec3,
    Waypoint,
    normalize_angle,
    relative_bearing,
)
from .dynamics import (
    ActuationCmd,
    ActuationLimits,
    PlantParams,
    RotorSpeeds,
    apply_disturbance,
    step,
    thrust_mix,
    unmix,
)
from .metrics import RunMetrics, area_rmse, area_series, compute_metrics, success_check, triangle_area
from .perception import (
    CameraCalibration,
    CameraIntrinsics,
    ImageObservation,
    NotVisible,
    NotVisibleReason,
    RelativeEstimate,
    SensorNoise,
    SensorPipeline,
    SensorReadings,
    calibrate_focal,
    estimate_relative,
    fuse,
    observe,
    read_altimeter,
)
from .runlog_io import export_runlog, load_runlog, write_summary
from .scenario import ConfigError, ScenarioConfig, bundled_scenario_path, load_config, resolve_scenario
from .simulation import RunLog, ScriptedCommands, ScriptedOperator, Simulation, run_scenario

__version__ = "0.1.0"
