"""Deformation recovery and replanning for collision-resilient planar robots.

A compliant arm robot that collides on purpose: the impact is modelled, a
recovery controller detaches the robot from the obstacle, and the route is
replanned from where the robot ended up.
"""

from drr.__metadata__ import (
    __author__,
    __author_email__,
    __license__,
    __maintainer__,
    __url__,
    __version__,
)
from drr.errors import (
    ContactError,
    DegenerateDeformationError,
    DRRError,
    GeometryError,
    MaxIterError,
    NegativeRadicandError,
    NonPositiveDurationError,
    OutOfRangeError,
    ParseError,
    PlanExpiredError,
    PlannerFailureError,
    PositiveOffsetError,
    QpError,
    QpInfeasibleError,
    RecoveryError,
    ReplanError,
    ScenarioError,
    SimulationError,
    SingularKktError,
    ValidationError,
)
from drr.events import (
    CollisionDetectedEvent,
    DRREvent,
    GoalReachedEvent,
    RecoveryFinishedEvent,
    RecoveryStartedEvent,
    ReplannedEvent,
    TimeoutEvent,
    WaypointsAdjustedEvent,
)
from drr.handler.abc import BaseCollisionHandler
from drr.handler.base import DRRHandler, PreplannedHandler
from drr.impl.config import PlannerConfig, RecoveryConfig, TrackerConfig
from drr.impl.geometry import Polygon, Pose2, Rot2, Vec2
from drr.impl.recovery import (
    BodyCommand,
    RecoveryEpisode,
    RecoveryFallback,
    RecoveryPlan,
    RecoveryState,
)
from drr.impl.robot import (
    ArmProbe,
    ArmReading,
    CollisionEvent,
    CollisionFrame,
    FrameMode,
    RobotParams,
)
from drr.impl.scenario import Scenario
from drr.impl.trajectory import Segment, Trajectory, WaypointList
from drr.impl.world import Metrics, Mode, SimLog, StepRecord, WorldState
from drr.qp import QpProblem, QpSolution, QpStatus
from drr.replan import AdjustBranch
from drr.sim import Simulator, run_drr, run_preplanned

__all__ = (  # noqa: RUF022
    # metadata
    "__author__",
    "__author_email__",
    "__license__",
    "__maintainer__",
    "__url__",
    "__version__",
    # errors
    "ContactError",
    "DegenerateDeformationError",
    "DRRError",
    "GeometryError",
    "MaxIterError",
    "NegativeRadicandError",
    "NonPositiveDurationError",
    "OutOfRangeError",
    "ParseError",
    "PlanExpiredError",
    "PlannerFailureError",
    "PositiveOffsetError",
    "QpError",
    "QpInfeasibleError",
    "RecoveryError",
    "ReplanError",
    "ScenarioError",
    "SimulationError",
    "SingularKktError",
    "ValidationError",
    # events
    "CollisionDetectedEvent",
    "DRREvent",
    "GoalReachedEvent",
    "RecoveryFinishedEvent",
    "RecoveryStartedEvent",
    "ReplannedEvent",
    "TimeoutEvent",
    "WaypointsAdjustedEvent",
    # handlers
    "BaseCollisionHandler",
    "DRRHandler",
    "PreplannedHandler",
    # impl
    "ArmProbe",
    "ArmReading",
    "BodyCommand",
    "CollisionEvent",
    "CollisionFrame",
    "FrameMode",
    "Metrics",
    "Mode",
    "PlannerConfig",
    "Polygon",
    "Pose2",
    "RecoveryConfig",
    "RecoveryEpisode",
    "RecoveryFallback",
    "RecoveryPlan",
    "RecoveryState",
    "RobotParams",
    "Rot2",
    "Scenario",
    "Segment",
    "SimLog",
    "StepRecord",
    "TrackerConfig",
    "Trajectory",
    "Vec2",
    "WaypointList",
    "WorldState",
    # qp
    "QpProblem",
    "QpSolution",
    "QpStatus",
    # replan
    "AdjustBranch",
    # sim
    "Simulator",
    "run_drr",
    "run_preplanned",
)
