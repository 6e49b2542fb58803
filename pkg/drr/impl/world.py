"""World Impl's.

The simulated world state, the step log and the run metrics.
"""

from __future__ import annotations

import enum
import typing
from dataclasses import dataclass, field

from drr.impl.geometry import Pose2, Vec2
from drr.impl.payload import PayloadObject

if typing.TYPE_CHECKING:
    from drr.events import DRREvent

__all__ = ("Metrics", "Mode", "SimLog", "StepRecord", "WorldState")


class Mode(str, enum.Enum):
    """Mode.

    The phase of the detect, recover and replan loop.
    """

    TRACKING = "TRACKING"
    """Following the nominal trajectory."""
    RECOVERING = "RECOVERING"
    """Executing a recovery plan."""
    REPLANNING = "REPLANNING"
    """Holding still while a new trajectory is computed."""


@dataclass(frozen=True, slots=True)
class WorldState:
    """World state.

    The full state of the simulated robot at one instant.
    """

    pose: Pose2
    """The pose."""

    vel: Vec2
    """The world velocity, in m/s."""

    omega: float = 0.0
    """The yaw rate, in rad/s."""

    arm_lengths: tuple[float, ...] = ()
    """The spring length of every arm, in m."""

    arm_rates: tuple[float, ...] = ()
    """The spring length rate of every arm, in m/s."""

    t: float = 0.0
    """The simulation time, in s."""

    mode: Mode = Mode.TRACKING
    """The loop phase."""


@dataclass(frozen=True, slots=True)
class StepRecord(PayloadObject):
    """Step record.

    One line of the step log.
    """

    t: float
    """The simulation time, in s."""

    x: float
    """The x position, in m."""

    y: float
    """The y position, in m."""

    heading: float
    """The heading, in rad."""

    vx: float
    """The x velocity, in m/s."""

    vy: float
    """The y velocity, in m/s."""

    compressions: tuple[float, ...]
    """The compression `ls - l` of every arm, in m."""

    mode: Mode
    """The loop phase."""

    ax: float
    """The commanded x acceleration, in m/s^2."""

    ay: float
    """The commanded y acceleration, in m/s^2."""

    @property
    def position(self) -> Vec2:
        """The position."""
        return Vec2(self.x, self.y)

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> StepRecord:
        return StepRecord(
            t=float(payload["t"]),
            x=float(payload["x"]),
            y=float(payload["y"]),
            heading=float(payload["heading"]),
            vx=float(payload["vx"]),
            vy=float(payload["vy"]),
            compressions=tuple(float(c) for c in payload["compressions"]),
            mode=Mode(payload["mode"]),
            ax=float(payload["ax"]),
            ay=float(payload["ay"]),
        )

    def dump(self) -> dict[str, typing.Any]:
        """The record as a JSON-lines object."""
        return {
            "kind": "step",
            "t": self.t,
            "x": self.x,
            "y": self.y,
            "heading": self.heading,
            "vx": self.vx,
            "vy": self.vy,
            "compressions": list(self.compressions),
            "mode": self.mode.value,
            "ax": self.ax,
            "ay": self.ay,
        }


@dataclass(slots=True)
class SimLog:
    """Simulation log.

    Everything a run recorded.
    """

    records: list[StepRecord] = field(default_factory=list)
    """The step records, in time order."""

    events: list[DRREvent] = field(default_factory=list)
    """The events, in time order."""

    goal: Vec2 | None = None
    """The goal the run aimed at."""

    t_end: float | None = None
    """The arrival time, if the goal was reached."""

    arm_count: int = 4
    """The amount of arms of the robot."""

    @property
    def reached(self) -> bool:
        """Whether the goal was reached."""
        return self.t_end is not None


@dataclass(frozen=True, slots=True)
class Metrics(PayloadObject):
    """Metrics.

    The summary of one run.
    """

    T_end: float
    """The arrival time, or the last logged time without arrival, in s."""

    path_length: float
    """The travelled distance, in m."""

    control_energy: float
    """The integral of the squared commanded acceleration, in m^2/s^3."""

    collisions: int
    """The amount of detected collisions."""

    goal_error: float
    """The final distance to the goal, in m."""

    reached: bool = False
    """Whether the goal was reached."""

    def __post_init__(self) -> None:
        if min(self.T_end, self.path_length, self.control_energy, self.goal_error) < 0.0:
            raise ValueError("Metrics must not be negative.")
        if self.collisions < 0:
            raise ValueError("Metrics must not be negative.")

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> Metrics:
        return Metrics(
            T_end=float(payload["T_end"]),
            path_length=float(payload["path_length"]),
            control_energy=float(payload["control_energy"]),
            collisions=int(payload["collisions"]),
            goal_error=float(payload["goal_error"]),
            reached=bool(payload.get("reached", False)),
        )

    def dump(self) -> dict[str, typing.Any]:
        """The metrics as a report row."""
        return {
            "T_end": self.T_end,
            "path_length": self.path_length,
            "control_energy": self.control_energy,
            "collisions": self.collisions,
            "goal_error": self.goal_error,
            "reached": self.reached,
        }
