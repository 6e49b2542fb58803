"""Config Impl's.

The tunable settings of the recovery controller, the replanner and the
nominal tracker.
"""

from __future__ import annotations

import math
import typing
from dataclasses import asdict, dataclass, fields

from drr.impl.payload import PayloadObject, reject_unknown_keys

__all__ = ("PlannerConfig", "RecoveryConfig", "TrackerConfig")


def _read_fields(
    cls: type[typing.Any], payload: typing.Any, where: str
) -> dict[str, typing.Any]:
    names = {f.name: f for f in fields(cls)}
    reject_unknown_keys(payload, names, where=where)
    values: dict[str, typing.Any] = {}
    for name, value in payload.items():
        kind = type(getattr(cls(), name))
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError(f"{where}.{name} must be a boolean.")
            values[name] = value
        else:
            values[name] = kind(value)

    return values


@dataclass(frozen=True, slots=True)
class RecoveryConfig(PayloadObject):
    """Recovery configuration.

    The horizon, discretization and weights of the recovery controller.
    """

    T: float = 0.5
    """The recovery horizon, in s."""

    f: float = 10.0
    """The discretization rate, in Hz."""

    gamma: float = 1.0
    """The state weight; penalizes the displacement during recovery."""

    h: float = 1.0
    """The virtual input weight."""

    K_r: float = 2.0
    """The heading gain."""

    K_omega: float = 1.0
    """The yaw rate gain."""

    release: float = 0.5
    """The least share of the spring's restoring acceleration kept during contact."""

    v_max: float = 0.7
    """The maximum post-impact speed, in m/s."""

    def __post_init__(self) -> None:
        if self.T <= 0.0 or self.f <= 0.0:
            raise ValueError("T and f must be positive.")
        steps = self.T * self.f
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ValueError("T * f must be a positive integer.")
        if self.gamma < 0.0:
            raise ValueError("gamma must not be negative.")
        if self.h <= 0.0:
            raise ValueError("h must be positive.")
        if self.K_r <= 0.0 or self.K_omega <= 0.0:
            raise ValueError("K_r and K_omega must be positive.")
        if not 0.0 < self.release <= 1.0:
            raise ValueError("release must lie in (0, 1].")
        if self.v_max <= 0.0:
            raise ValueError("v_max must be positive.")

    @property
    def N(self) -> int:
        """The amount of discretization steps."""
        return round(self.T * self.f)

    @property
    def dt(self) -> float:
        """The discretization step, in s."""
        return 1.0 / self.f

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> RecoveryConfig:
        return RecoveryConfig(**_read_fields(cls, payload, "recovery"))

    def dump(self) -> dict[str, typing.Any]:
        """The canonical payload."""
        return asdict(self)


@dataclass(frozen=True, slots=True)
class PlannerConfig(PayloadObject):
    """Planner configuration.

    The polynomial objective, the speed limits and the waypoint adjustment
    settings of the replanner.
    """

    j: int = 3
    """The derivative order of the objective; 3 is minimum jerk."""

    order: int = 5
    """The polynomial degree of every segment."""

    epsilon_explore: float = 0.5
    """The exploration distance of an inserted waypoint, in m."""

    explore_sign: int = 1
    """The side of the tangent the exploration waypoint goes to, `1` or `-1`."""

    v_max: float = 0.7
    """The maximum planned speed, in m/s."""

    a_max: float = 1.0
    """The maximum planned acceleration, in m/s^2."""

    clearance: float = 0.0
    """The clearance used when simplifying paths, in m."""

    min_segment_duration: float = 0.05
    """The floor applied to every segment duration, in s."""

    simplify: bool = False
    """Whether the initial waypoints are simplified first."""

    def __post_init__(self) -> None:
        if not 1 <= self.j <= 4:
            raise ValueError("j must be between 1 and 4.")
        if self.order < 2 * self.j - 1:
            raise ValueError("order must be at least 2j - 1.")
        if self.epsilon_explore <= 0.0:
            raise ValueError("epsilon_explore must be positive.")
        if self.explore_sign not in (1, -1):
            raise ValueError("explore_sign must be 1 or -1.")
        if self.v_max <= 0.0 or self.a_max <= 0.0:
            raise ValueError("v_max and a_max must be positive.")
        if self.clearance < 0.0:
            raise ValueError("clearance must not be negative.")
        if self.min_segment_duration <= 0.0:
            raise ValueError("min_segment_duration must be positive.")

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> PlannerConfig:
        return PlannerConfig(**_read_fields(cls, payload, "planner"))

    def dump(self) -> dict[str, typing.Any]:
        """The canonical payload."""
        return asdict(self)


@dataclass(frozen=True, slots=True)
class TrackerConfig(PayloadObject):
    """Tracker configuration.

    The gains of the nominal PD tracker and the goal test.
    """

    K_p: float = 4.0
    """The position gain."""

    K_d: float = 4.0
    """The velocity gain."""

    K_heading: float = 2.0
    """The heading hold gain."""

    goal_tolerance: float = 0.05
    """The distance to the final waypoint that counts as arrival, in m."""

    def __post_init__(self) -> None:
        if self.K_p < 0.0 or self.K_d < 0.0 or self.K_heading < 0.0:
            raise ValueError("Tracker gains must not be negative.")
        if not (self.goal_tolerance > 0.0 and math.isfinite(self.goal_tolerance)):
            raise ValueError("goal_tolerance must be positive.")

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> TrackerConfig:
        return TrackerConfig(**_read_fields(cls, payload, "tracker"))

    def dump(self) -> dict[str, typing.Any]:
        """The canonical payload."""
        return asdict(self)
