"""Implementation.

The records the library passes around.
"""

from drr.impl.config import PlannerConfig
from drr.impl.config import RecoveryConfig
from drr.impl.config import TrackerConfig
from drr.impl.geometry import Polygon
from drr.impl.geometry import Pose2
from drr.impl.geometry import Rot2
from drr.impl.geometry import Vec2
from drr.impl.geometry import wrap_angle
from drr.impl.payload import PayloadObject
from drr.impl.recovery import BodyCommand
from drr.impl.recovery import RecoveryEpisode
from drr.impl.recovery import RecoveryFallback
from drr.impl.recovery import RecoveryPlan
from drr.impl.recovery import RecoveryState
from drr.impl.robot import ArmProbe
from drr.impl.robot import ArmReading
from drr.impl.robot import CollisionEvent
from drr.impl.robot import CollisionFrame
from drr.impl.robot import FrameMode
from drr.impl.robot import RobotParams
from drr.impl.scenario import Scenario
from drr.impl.trajectory import Segment
from drr.impl.trajectory import Trajectory
from drr.impl.trajectory import WaypointList
from drr.impl.world import Metrics
from drr.impl.world import Mode
from drr.impl.world import SimLog
from drr.impl.world import StepRecord
from drr.impl.world import WorldState

__all__ = (  # noqa: RUF022
    # .config
    "PlannerConfig",
    "RecoveryConfig",
    "TrackerConfig",
    # .geometry
    "Polygon",
    "Pose2",
    "Rot2",
    "Vec2",
    "wrap_angle",
    # .payload
    "PayloadObject",
    # .recovery
    "BodyCommand",
    "RecoveryEpisode",
    "RecoveryFallback",
    "RecoveryPlan",
    "RecoveryState",
    # .robot
    "ArmProbe",
    "ArmReading",
    "CollisionEvent",
    "CollisionFrame",
    "FrameMode",
    "RobotParams",
    # .scenario
    "Scenario",
    # .trajectory
    "Segment",
    "Trajectory",
    "WaypointList",
    # .world
    "Metrics",
    "Mode",
    "SimLog",
    "StepRecord",
    "WorldState",
)
