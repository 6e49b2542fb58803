"""Robot Impl's.

The compliant arm robot, its sensor readings and collision records.
"""

from __future__ import annotations

import enum
import math
import typing
from dataclasses import dataclass, field

from drr.impl.geometry import Pose2, Rot2, Vec2
from drr.impl.payload import PayloadObject, reject_unknown_keys

__all__ = (
    "ArmProbe",
    "ArmReading",
    "CollisionEvent",
    "CollisionFrame",
    "FrameMode",
    "RobotParams",
)


def _default_arm_dirs() -> tuple[Vec2, ...]:
    return (Vec2(1.0, 0.0), Vec2(0.0, 1.0), Vec2(-1.0, 0.0), Vec2(0.0, -1.0))


_MM: typing.Final[float] = 1e-3

_ROBOT_KEYS: typing.Final[frozenset[str]] = frozenset(
    {
        "m",
        "k",
        "k_n_per_mm",
        "c",
        "l0",
        "l0_mm",
        "ls",
        "ls_mm",
        "le",
        "le_mm",
        "rho",
        "rho_mm",
        "mu",
        "arm_dirs",
        "g",
        "a_in_max",
        "sigma_max",
        "sigma_max_deg",
    }
)


class FrameMode(str, enum.Enum):
    """Frame mode.

    How the collision frame normal is obtained.
    """

    SENSOR = "sensor"
    """From the compound deformation measured by the arms."""
    GROUND_TRUTH = "ground_truth"
    """From the outward normal of the contacted obstacle face."""


@dataclass(frozen=True, slots=True)
class RobotParams(PayloadObject):
    """Robot parameters.

    The defaults are the constants of the reference hardware platform.
    """

    m: float = 6.0
    """The mass, in kg."""

    k: float = 2310.0
    """The arm spring constant, in N/m."""

    c: float = 100.0
    """The arm damping coefficient, in N*s/m."""

    l0: float = 0.0415
    """The neutral spring length, in m."""

    ls: float = 0.030
    """The pre-tensioned spring length, in m."""

    le: float = 0.015
    """The spring length at maximum load, in m."""

    rho: float = 0.3
    """The robot radius, in m."""

    mu: float = 0.3
    """The Coulomb friction coefficient."""

    arm_dirs: tuple[Vec2, ...] = field(default_factory=_default_arm_dirs)
    """The arm axes, as unit vectors in the body frame."""

    g: float = 9.81
    """The gravitational acceleration, in m/s^2."""

    a_in_max: float = 5.0
    """The maximum commanded body acceleration, in m/s^2."""

    sigma_max: float = math.radians(3.0)
    """The maximum tilt angle before the robot flips, in rad."""

    def __post_init__(self) -> None:
        if not (self.le < self.ls < self.l0):
            raise ValueError("Spring lengths must satisfy le < ls < l0.")
        if min(self.k, self.m, self.rho) <= 0.0:
            raise ValueError("k, m and rho must be positive.")
        if self.c < 0.0 or self.mu < 0.0:
            raise ValueError("c and mu must not be negative.")
        if self.a_in_max <= 0.0:
            raise ValueError("a_in_max must be positive.")
        if not -math.pi / 2 < self.sigma_max < math.pi / 2:
            raise ValueError("sigma_max must lie in (-pi/2, pi/2).")
        if not self.arm_dirs:
            raise ValueError("At least one arm is required.")
        for index, axis in enumerate(self.arm_dirs):
            if abs(axis.norm() - 1.0) > 1e-9:
                raise ValueError(f"Arm {index} axis is not unit norm.")
            for other in self.arm_dirs[index + 1 :]:
                if (axis - other).norm() < 1e-9:
                    raise ValueError("Arm axes must be pairwise distinct.")

    @property
    def travel(self) -> float:
        """The compression travel `ls - le`, in m."""
        return self.ls - self.le

    @property
    def pretension_accel(self) -> float:
        """The pre-tension term `(k/m)(ls - l0)`, in m/s^2; negative."""
        return self.k / self.m * (self.ls - self.l0)

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> RobotParams:
        """Build robot parameters from payload.

        Hardware units are accepted next to SI ones: `k_n_per_mm`, `*_mm`
        lengths and `sigma_max_deg`.

        Raises
        ------
        ParseError
            Raised when an unknown key is present.
        """
        reject_unknown_keys(payload, _ROBOT_KEYS, where="robot")
        values: dict[str, typing.Any] = {}
        for key in ("m", "k", "c", "l0", "ls", "le", "rho", "mu", "g"):
            if key in payload:
                values[key] = float(payload[key])
        for key in ("l0", "ls", "le", "rho"):
            if f"{key}_mm" in payload:
                values[key] = float(payload[f"{key}_mm"]) * _MM
        if "k_n_per_mm" in payload:
            values["k"] = float(payload["k_n_per_mm"]) / _MM
        if "a_in_max" in payload:
            values["a_in_max"] = float(payload["a_in_max"])
        if "sigma_max" in payload:
            values["sigma_max"] = float(payload["sigma_max"])
        if "sigma_max_deg" in payload:
            values["sigma_max"] = math.radians(float(payload["sigma_max_deg"]))
        if "arm_dirs" in payload:
            values["arm_dirs"] = tuple(
                Vec2(float(x), float(y)) for x, y in payload["arm_dirs"]
            )

        return RobotParams(**values)

    def dump(self) -> dict[str, typing.Any]:
        """The canonical, SI unit payload."""
        return {
            "m": self.m,
            "k": self.k,
            "c": self.c,
            "l0": self.l0,
            "ls": self.ls,
            "le": self.le,
            "rho": self.rho,
            "mu": self.mu,
            "arm_dirs": [axis.dump() for axis in self.arm_dirs],
            "g": self.g,
            "a_in_max": self.a_in_max,
            "sigma_max": self.sigma_max,
        }


@dataclass(frozen=True, slots=True)
class ArmReading:
    """Arm reading.

    A Hall sensor measurement of one arm.
    """

    arm_index: int
    """The index of the arm in [RobotParams.arm_dirs][drr.impl.robot.RobotParams.arm_dirs]."""

    deflection_body: Vec2
    """The deflection `l - ls` in the body frame, pointing from the centre toward the obstacle."""

    @property
    def magnitude(self) -> float:
        """The compression, in m."""
        return self.deflection_body.norm()


@dataclass(frozen=True, slots=True)
class ArmProbe:
    """Arm probe.

    The geometric state of one arm against the obstacles.
    """

    length: float
    """The spring length, clamped to [le, ls]."""

    raw_length: float
    """The spring length before clamping; below `le` when over-compressed."""

    normal: Vec2 | None = None
    """The outward normal of the contacted face, if any."""

    rate_factor: float = 0.0
    """`1 / cos(phi)`, mapping the face normal velocity to the arm rate."""

    @property
    def in_contact(self) -> bool:
        """Whether the arm tip touches an obstacle."""
        return self.normal is not None

    @property
    def over_compressed(self) -> bool:
        """Whether the arm was pushed past its maximum load length."""
        return self.raw_length < self.length


@dataclass(frozen=True, slots=True)
class CollisionEvent:
    """Collision event.

    A detected collision, frozen at its detection instant.
    """

    t_c: float
    """The collision instant, in s."""

    readings: tuple[ArmReading, ...]
    """The readings of every arm over the detection threshold."""

    segment_index: int = 0
    """The trajectory segment the collision happened on."""

    tau_c: float = 0.0
    """The time into that segment, in s."""

    pose_at_impact: Pose2 = field(default_factory=lambda: Pose2(Vec2(0.0, 0.0)))
    """The robot pose at detection."""

    vel_at_impact: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))
    """The world velocity at detection, in m/s."""

    def __post_init__(self) -> None:
        if not self.readings:
            raise ValueError("A collision needs at least one reading.")
        if self.tau_c < 0.0:
            raise ValueError("tau_c must not be negative.")

    @property
    def arm_indices(self) -> frozenset[int]:
        """The indices of the colliding arms."""
        return frozenset(reading.arm_index for reading in self.readings)


@dataclass(frozen=True, slots=True)
class CollisionFrame:
    """Collision frame.

    The local frame `{n, t}` built at detection, fixed for the whole
    recovery. Its origin is the robot centre at detection.
    """

    origin: Vec2
    """The robot centre at detection, in world coordinates."""

    n: Vec2
    """The unit normal, pointing away from the obstacle."""

    theta: float = 0.0
    """The signed angle from `n` to the tip to centre deformation direction."""

    def __post_init__(self) -> None:
        if abs(self.n.norm() - 1.0) > 1e-9:
            raise ValueError("The frame normal must be a unit vector.")
        if not -math.pi / 2 < self.theta < math.pi / 2:
            raise ValueError("theta must lie in (-pi/2, pi/2).")

    @property
    def t(self) -> Vec2:
        """The unit tangent, `n` rotated by +90 degrees."""
        return self.n.perp()

    @property
    def rot_wc(self) -> Rot2:
        """The frame to world rotation."""
        return Rot2.from_direction(self.n)
