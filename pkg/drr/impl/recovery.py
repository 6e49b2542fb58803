"""Recovery Impl's.

The recovery plan and the commands it produces.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from drr.impl.geometry import Vec2
from drr.impl.robot import CollisionEvent, CollisionFrame

__all__ = (
    "BodyCommand",
    "RecoveryEpisode",
    "RecoveryFallback",
    "RecoveryPlan",
    "RecoveryState",
)


class RecoveryFallback(str, enum.Enum):
    """Recovery fallback.

    Which terminal target the recovery plan ended up using.
    """

    NONE = "none"
    """The requested terminal velocity."""
    ZERO_VELOCITY = "zero_velocity"
    """The terminal velocity was replaced with zero."""
    PASSIVE = "passive"
    """No plan was feasible; the pre-tensioned spring pushes the robot off."""


@dataclass(frozen=True, slots=True)
class BodyCommand:
    """Body command.

    A commanded body acceleration and yaw rate.
    """

    a_in: Vec2
    """The body acceleration, in the world frame, in m/s^2."""

    u_theta: float = 0.0
    """The yaw rate, in rad/s."""

    @classmethod
    def idle(cls) -> BodyCommand:
        """The zero command."""
        return cls(Vec2(0.0, 0.0), 0.0)


@dataclass(frozen=True)
class RecoveryPlan:
    """Recovery plan.

    The discretized optimal state and virtual input sequences of the
    recovery controller, expressed in the collision frame. A state is
    `[x, y, v_x, v_y]`, an input `[nu_x, nu_y]`.
    """

    x0: float
    """The initial normal offset, in m; never positive."""

    v0: Vec2
    """The velocity at detection, in the collision frame."""

    vT: Vec2
    """The terminal velocity target, in the collision frame."""

    states: npt.NDArray[np.float64]
    """The `(N + 1, 4)` state sequence."""

    controls: npt.NDArray[np.float64]
    """The `(N, 2)` virtual input sequence."""

    dt: float
    """The discretization step, in s."""

    theta: float = 0.0
    """The contact angle the plan was built for."""

    heading_d: float = 0.0
    """The heading held during recovery, in rad."""

    fallback: RecoveryFallback = RecoveryFallback.NONE
    """Which fallback produced this plan."""

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=np.float64)
        controls = np.asarray(self.controls, dtype=np.float64)
        if states.ndim != 2 or states.shape[1] != 4:
            raise ValueError("States must be an (N + 1, 4) array.")
        if controls.ndim != 2 or controls.shape[1] != 2:
            raise ValueError("Controls must be an (N, 2) array.")
        if states.shape[0] != controls.shape[0] + 1:
            raise ValueError("There must be one more state than controls.")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive.")

        object.__setattr__(self, "states", states)
        object.__setattr__(self, "controls", controls)

    @property
    def N(self) -> int:
        """The amount of steps."""
        return self.controls.shape[0]

    @property
    def horizon(self) -> float:
        """The duration of the plan, in s."""
        return self.N * self.dt

    @property
    def passive(self) -> bool:
        """Whether the plan leaves the recovery to the spring alone."""
        return self.fallback is RecoveryFallback.PASSIVE


@dataclass(frozen=True, slots=True)
class RecoveryState:
    """Recovery state.

    The live state of the robot expressed in the collision frame.
    """

    x: float
    """The normal offset, in m."""

    y: float
    """The tangential offset, in m."""

    v_x: float
    """The normal velocity, in m/s."""

    v_y: float
    """The tangential velocity, in m/s."""

    heading: float = 0.0
    """The world heading, in rad."""

    omega: float = 0.0
    """The yaw rate, in rad/s."""

    in_contact: bool = True
    """Whether an arm still touches the obstacle."""


@dataclass(frozen=True, slots=True)
class RecoveryEpisode:
    """Recovery episode.

    A collision being recovered from: the event, its frame and its plan.
    """

    event: CollisionEvent
    """The detected collision."""

    frame: CollisionFrame
    """The collision frame."""

    plan: RecoveryPlan
    """The recovery plan."""
