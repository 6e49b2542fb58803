"""Events.

The events recorded by the simulator while a run unfolds.
"""

from __future__ import annotations

import enum
import typing
from dataclasses import dataclass, fields

from drr.impl.geometry import Vec2

__all__ = (
    "CollisionDetectedEvent",
    "DRREvent",
    "GoalReachedEvent",
    "RecoveryFinishedEvent",
    "RecoveryStartedEvent",
    "ReplannedEvent",
    "TimeoutEvent",
    "WaypointsAdjustedEvent",
)


def _dump_value(value: typing.Any) -> typing.Any:
    if isinstance(value, Vec2):
        return value.dump()
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return [_dump_value(v) for v in typing.cast(tuple[typing.Any, ...], value)]

    return value


@dataclass(frozen=True, slots=True)
class DRREvent:
    """DRR Event.

    The base event, stamped with the simulation time.
    """

    t: float
    """The simulation time of the event, in s."""

    def dump(self) -> dict[str, typing.Any]:
        """The event as a JSON-lines record."""
        record: dict[str, typing.Any] = {
            "kind": "event",
            "type": type(self).__name__,
        }
        for f in fields(self):
            record[f.name] = _dump_value(getattr(self, f.name))

        return record


@dataclass(frozen=True, slots=True)
class CollisionDetectedEvent(DRREvent):
    """Collision Detected Event.

    Dispatched when an arm compression crosses the detection threshold.
    """

    arms: tuple[int, ...]
    """The colliding arms."""

    segment_index: int
    """The segment being tracked."""

    tau_c: float
    """The time spent in that segment, in s."""

    position: Vec2
    """The robot position."""

    velocity: Vec2
    """The robot world velocity."""


@dataclass(frozen=True, slots=True)
class RecoveryStartedEvent(DRREvent):
    """Recovery Started Event.

    Dispatched once the recovery plan of a collision is ready.
    """

    normal: Vec2
    """The collision frame normal."""

    theta: float
    """The contact angle."""

    x0: float
    """The initial normal offset, in m."""

    vT: Vec2
    """The terminal velocity the plan reaches, in the collision frame."""

    fallback: str
    """Which fallback produced the plan."""


@dataclass(frozen=True, slots=True)
class RecoveryFinishedEvent(DRREvent):
    """Recovery Finished Event.

    Dispatched at the end of the recovery horizon, with the collision frame
    velocities at both ends of the recovery.
    """

    v_in: Vec2
    """The velocity at detection, in the collision frame."""

    v_out: Vec2
    """The velocity at the end of the recovery, in the collision frame."""

    compression: float
    """The largest arm compression at the end of the recovery, in m."""


@dataclass(frozen=True, slots=True)
class WaypointsAdjustedEvent(DRREvent):
    """Waypoints Adjusted Event.

    Dispatched after the waypoint adjustment of a collision.
    """

    branch: str
    """The adjustment that fired."""

    points: tuple[Vec2, ...]
    """The remaining route, starting at the robot."""


@dataclass(frozen=True, slots=True)
class ReplannedEvent(DRREvent):
    """Replanned Event.

    Dispatched when a new trajectory replaces the tracked one.
    """

    duration: float
    """The duration of the new trajectory, in s."""

    segments: int
    """The amount of segments."""

    cost: float
    """The objective value of the new trajectory."""


@dataclass(frozen=True, slots=True)
class GoalReachedEvent(DRREvent):
    """Goal Reached Event.

    Dispatched when the robot comes within tolerance of its goal.
    """

    position: Vec2
    """The robot position."""


@dataclass(frozen=True, slots=True)
class TimeoutEvent(DRREvent):
    """Timeout Event.

    Dispatched when the simulation time runs out before the goal is reached.
    """

    goal_error: float
    """The distance left to the goal, in m."""
