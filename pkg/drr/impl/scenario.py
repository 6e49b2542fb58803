"""Scenario Impl's.

The complete description of a simulated experiment.
"""

from __future__ import annotations

import math
import typing
from dataclasses import dataclass, field

from drr.core import polygon_contains
from drr.impl.config import PlannerConfig, RecoveryConfig, TrackerConfig
from drr.impl.geometry import Polygon, Pose2, Vec2
from drr.impl.payload import PayloadObject, reject_unknown_keys
from drr.impl.robot import FrameMode, RobotParams
from drr.impl.trajectory import WaypointList

__all__ = ("Scenario",)

_SCENARIO_KEYS: typing.Final[frozenset[str]] = frozenset(
    {
        "robot",
        "recovery",
        "planner",
        "tracker",
        "obstacles",
        "waypoints",
        "start",
        "sim_dt",
        "control_hz",
        "max_sim_time",
        "seed",
        "trials",
        "pose_jitter",
        "sensor_noise",
        "detection_threshold",
        "frame_mode",
        "log_every",
        "stop_stiffness_ratio",
    }
)


@dataclass(frozen=True, slots=True)
class Scenario(PayloadObject):
    """Scenario.

    A robot, its controllers, a world of polygonal obstacles and the route
    to follow through it.
    """

    waypoints: WaypointList
    """The route to follow."""

    obstacles: tuple[Polygon, ...] = ()
    """The obstacles."""

    params: RobotParams = field(default_factory=RobotParams)
    """The robot parameters."""

    recovery: RecoveryConfig = field(default_factory=RecoveryConfig)
    """The recovery controller configuration."""

    planner: PlannerConfig = field(default_factory=PlannerConfig)
    """The replanner configuration."""

    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    """The nominal tracker configuration."""

    start: Pose2 | None = None
    """The start pose; the first waypoint, facing +x, when omitted."""

    sim_dt: float = 0.001
    """The plant integration step, in s."""

    control_hz: float = 100.0
    """The control rate, in Hz."""

    max_sim_time: float = 60.0
    """The simulated time after which a run times out, in s."""

    seed: int = 0
    """The base seed of the trials."""

    trials: int = 1
    """The amount of trials of a batch run."""

    pose_jitter: float = 0.0
    """The standard deviation of the start position jitter, in m."""

    sensor_noise: float = 0.0
    """The standard deviation of the arm compression noise, in m."""

    detection_threshold: float = 0.002
    """The arm compression that counts as a collision, in m."""

    frame_mode: FrameMode = FrameMode.SENSOR
    """Where the collision frame normal comes from."""

    log_every: int = 1
    """Log one step out of this many."""

    stop_stiffness_ratio: float = 20.0
    """The stiffness of the chassis stop, relative to the arm spring."""

    def __post_init__(self) -> None:
        if self.start is None:
            start = Pose2(self.waypoints.points[0], 0.0)
            object.__setattr__(self, "start", start)
        if self.sim_dt <= 0.0 or self.control_hz <= 0.0:
            raise ValueError("sim_dt and control_hz must be positive.")
        if self.sim_dt > 1.0 / self.control_hz:
            raise ValueError("sim_dt must not exceed the control period.")
        steps = 1.0 / (self.control_hz * self.sim_dt)
        if abs(steps - round(steps)) > 1e-6:
            raise ValueError("The control period must be a whole number of steps.")
        if self.max_sim_time <= 0.0:
            raise ValueError("max_sim_time must be positive.")
        if self.trials < 1:
            raise ValueError("trials must be at least 1.")
        if self.pose_jitter < 0.0 or self.sensor_noise < 0.0:
            raise ValueError("Noise levels must not be negative.")
        if self.detection_threshold <= 0.0:
            raise ValueError("detection_threshold must be positive.")
        if self.log_every < 1:
            raise ValueError("log_every must be at least 1.")
        if self.stop_stiffness_ratio <= 0.0:
            raise ValueError("stop_stiffness_ratio must be positive.")

        for poly in self.obstacles:
            if polygon_contains(poly, self.start_pose.position):
                raise ValueError("The start lies inside an obstacle.")

    @property
    def start_pose(self) -> Pose2:
        """The start pose, defaults filled."""
        if self.start is None:
            return Pose2(self.waypoints.points[0], 0.0)

        return self.start

    @property
    def steps_per_tick(self) -> int:
        """The plant steps per control period."""
        return round(1.0 / (self.control_hz * self.sim_dt))

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> Scenario:
        """Build a scenario from payload.

        Raises
        ------
        ParseError
            Raised when a key is unknown, or `waypoints` is missing.
        ValidationError
            Raised when a nested record violates an invariant.
        """
        reject_unknown_keys(payload, _SCENARIO_KEYS)
        values: dict[str, typing.Any] = {
            "waypoints": WaypointList.from_payload(payload["waypoints"]),
            "obstacles": tuple(
                Polygon.from_payload(p) for p in payload.get("obstacles", ())
            ),
        }
        for key, record in (
            ("robot", RobotParams),
            ("recovery", RecoveryConfig),
            ("planner", PlannerConfig),
            ("tracker", TrackerConfig),
        ):
            if key in payload:
                values["params" if key == "robot" else key] = record.from_payload(
                    payload[key]
                )

        if "start" in payload:
            start = payload["start"]
            reject_unknown_keys(start, ("position", "heading"), where="start")
            x, y = start["position"]
            values["start"] = Pose2(
                Vec2(float(x), float(y)), float(start.get("heading", 0.0))
            )

        for key in (
            "sim_dt",
            "control_hz",
            "max_sim_time",
            "pose_jitter",
            "sensor_noise",
            "detection_threshold",
            "stop_stiffness_ratio",
        ):
            if key in payload:
                values[key] = float(payload[key])
        for key in ("seed", "trials", "log_every"):
            if key in payload:
                value = payload[key]
                if isinstance(value, bool) or not isinstance(value, int):
                    raise TypeError(f"{key} must be an integer.")
                values[key] = value
        if "frame_mode" in payload:
            values["frame_mode"] = FrameMode(payload["frame_mode"])

        return Scenario(**values)

    def dump(self) -> dict[str, typing.Any]:
        """The canonical payload; parsing it back gives an equal scenario."""
        start = self.start_pose
        return {
            "robot": self.params.dump(),
            "recovery": self.recovery.dump(),
            "planner": self.planner.dump(),
            "tracker": self.tracker.dump(),
            "obstacles": [poly.dump() for poly in self.obstacles],
            "waypoints": self.waypoints.dump(),
            "start": {"position": start.position.dump(), "heading": start.heading},
            "sim_dt": self.sim_dt,
            "control_hz": self.control_hz,
            "max_sim_time": self.max_sim_time,
            "seed": self.seed,
            "trials": self.trials,
            "pose_jitter": self.pose_jitter,
            "sensor_noise": self.sensor_noise,
            "detection_threshold": self.detection_threshold,
            "frame_mode": self.frame_mode.value,
            "log_every": self.log_every,
            "stop_stiffness_ratio": self.stop_stiffness_ratio,
        }

    @property
    def control_period(self) -> float:
        """The control period, in s."""
        return 1.0 / self.control_hz

    @property
    def horizon_ticks(self) -> int:
        """The control periods spanned by one recovery."""
        return max(1, math.ceil(self.recovery.T * self.control_hz - 1e-9))
