"""Contact.

The visco-elastic arm model, the simulated Hall effect sensing, collision
detection and the collision frame.
"""

from __future__ import annotations

import math
import typing

import numpy as np
from loguru import logger

from drr.core import polygon_contains
from drr.errors import DegenerateDeformationError
from drr.impl.geometry import Polygon, Pose2, Rot2, Vec2
from drr.impl.robot import (
    ArmProbe,
    ArmReading,
    CollisionEvent,
    CollisionFrame,
    FrameMode,
    RobotParams,
)

__all__ = (
    "arm_compression",
    "arm_rate",
    "build_frame",
    "compound_deformation",
    "contact_angle",
    "contact_force",
    "detect",
    "friction_force",
    "probe_arm",
    "sense",
)

_MIN_COS: typing.Final[float] = 1e-6
_ZERO_DEFORMATION: typing.Final[float] = 1e-12


def _ray_exit(
    origin: Vec2, direction: Vec2, poly: Polygon
) -> tuple[float, Vec2] | None:
    """The nearest edge hit by a ray, as (distance, outward normal)."""
    best: tuple[float, Vec2] | None = None
    for index, (a, b) in enumerate(poly.edges()):
        edge = b - a
        denom = direction.cross(edge)
        if abs(denom) < 1e-15:
            continue

        offset = a - origin
        s = offset.cross(edge) / denom
        u = offset.cross(direction) / denom
        if s < 0.0 or u < -1e-12 or u > 1.0 + 1e-12:
            continue
        if best is None or s < best[0]:
            best = (s, poly.outward_normal(index))

    return best


def probe_arm(
    pose: Pose2,
    arm_index: int,
    params: RobotParams,
    obstacles: typing.Sequence[Polygon],
) -> ArmProbe:
    """Probe one arm against the obstacles.

    The arm tip rests on the circle of radius `rho`. When the tip lies in an
    obstacle, the compression is the distance from the tip back along the
    arm axis to the face it crossed, so an oblique contact compresses the
    arm by `penetration / cos(phi)`.

    Parameters
    ----------
    pose
        The robot pose.
    arm_index
        The arm to probe.
    params
        The robot parameters.
    obstacles
        The obstacles.

    Returns
    -------
    ArmProbe
        The arm state; the deepest contact wins when several obstacles are hit.
    """
    axis = pose.rotation.apply(params.arm_dirs[arm_index])
    tip = pose.position + axis * params.rho

    compression = 0.0
    normal: Vec2 | None = None
    rate_factor = 0.0
    for poly in obstacles:
        if not polygon_contains(poly, tip):
            continue

        hit = _ray_exit(tip, -axis, poly)
        if hit is None:
            continue

        distance, face_normal = hit
        if normal is None or distance > compression:
            cos_phi = max(-face_normal.dot(axis), _MIN_COS)
            compression = distance
            normal = face_normal
            rate_factor = 1.0 / cos_phi

    raw_length = params.ls - compression
    return ArmProbe(
        length=max(params.le, raw_length),
        raw_length=raw_length,
        normal=normal,
        rate_factor=rate_factor,
    )


def arm_compression(
    pose: Pose2,
    arm_index: int,
    params: RobotParams,
    obstacles: typing.Sequence[Polygon],
) -> float:
    """The current spring length of an arm.

    Example
    -------
    ```py
    wall = Polygon.rectangle(1.0, -1.0, 2.0, 1.0)
    arm_compression(Pose2(Vec2(0.712, 0.0)), 0, RobotParams(), [wall])  # 0.018
    ```

    Returns
    -------
    float
        `ls` when the tip is free, otherwise `ls` minus the compression,
        clamped at `le`. Over-compression is reported by
        [probe_arm][drr.contact.probe_arm].
    """
    probe = probe_arm(pose, arm_index, params, obstacles)
    if probe.over_compressed:
        logger.trace(
            "Arm {} over-compressed by {:.4f} m.",
            arm_index,
            probe.length - probe.raw_length,
        )

    return probe.length


def arm_rate(probe: ArmProbe, vel: Vec2) -> float:
    """The spring length rate of a probed arm, in m/s; zero when free."""
    if probe.normal is None:
        return 0.0

    return probe.normal.dot(vel) * probe.rate_factor


def contact_force(l: float, l_dot: float, params: RobotParams) -> float:  # noqa: E741
    """The Voigt force of an arm.

    Example
    -------
    ```py
    contact_force(0.030, 0.0, RobotParams())  # 26.565
    ```

    Parameters
    ----------
    l
        The spring length, in m.
    l_dot
        The spring length rate, in m/s.
    params
        The robot parameters.

    Returns
    -------
    float
        `k (l0 - l) - c l_dot` while the tip touches an obstacle, never
        negative; zero once the arm rests on its retainer (`l > ls`).
    """
    if l > params.ls:
        return 0.0

    return max(0.0, params.k * (params.l0 - l) - params.c * l_dot)


def friction_force(
    normal_force: float, face_normal: Vec2, vel: Vec2, params: RobotParams
) -> Vec2:
    """The Coulomb friction opposing the sliding along a contacted face.

    `sign(0) = 0`, so no friction acts without tangential motion.
    """
    tangent = face_normal.perp()
    sliding = float(np.sign(tangent.dot(vel)))
    return tangent * (-params.mu * normal_force * sliding)


def sense(
    true_lengths: typing.Sequence[float],
    params: RobotParams,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
) -> list[ArmReading]:
    """Read the Hall effect sensors.

    Parameters
    ----------
    true_lengths
        The spring length of every arm.
    params
        The robot parameters.
    noise_std
        The standard deviation of the zero-mean gaussian noise added to each
        compression, in m.
    rng
        The noise generator; required when `noise_std` is positive.

    Returns
    -------
    list[ArmReading]
        One reading per arm, `(ls - l)` along the arm axis.

    Raises
    ------
    ValueError
        Raised when the lengths do not match the arms.
    """
    if len(true_lengths) != len(params.arm_dirs):
        raise ValueError("There must be one length per arm.")

    readings: list[ArmReading] = []
    for index, (length, axis) in enumerate(zip(true_lengths, params.arm_dirs)):
        compression = params.ls - length
        if noise_std > 0.0:
            if rng is None:
                raise ValueError("A generator is required for sensor noise.")
            compression = min(
                max(compression + float(rng.normal(0.0, noise_std)), 0.0),
                params.travel,
            )

        readings.append(ArmReading(index, axis * compression))

    return readings


def detect(
    readings: typing.Sequence[ArmReading],
    threshold: float,
    *,
    t_c: float = 0.0,
    segment_index: int = 0,
    tau_c: float = 0.0,
    pose: Pose2 | None = None,
    vel: Vec2 | None = None,
) -> CollisionEvent | None:
    """Detect a collision.

    Parameters
    ----------
    readings
        The sensor readings.
    threshold
        The compression threshold, in m.
    t_c
        The time of the readings.
    segment_index
        The trajectory segment being tracked.
    tau_c
        The time spent in that segment.
    pose
        The robot pose at the readings.
    vel
        The robot world velocity at the readings.

    Returns
    -------
    CollisionEvent | None
        An event with every arm at or over the threshold, if any.

    Raises
    ------
    ValueError
        Raised when the threshold is not positive.
    """
    if threshold <= 0.0:
        raise ValueError("The detection threshold must be positive.")

    hits = tuple(r for r in readings if r.magnitude >= threshold)
    if not hits:
        return None

    logger.trace(
        "Detected a collision on arms {} at t={:.3f}.",
        [r.arm_index for r in hits],
        t_c,
    )
    return CollisionEvent(
        t_c=t_c,
        readings=hits,
        segment_index=segment_index,
        tau_c=tau_c,
        pose_at_impact=pose if pose is not None else Pose2(Vec2(0.0, 0.0)),
        vel_at_impact=vel if vel is not None else Vec2(0.0, 0.0),
    )


def compound_deformation(readings: typing.Sequence[ArmReading]) -> Vec2:
    """The vector sum of the readings, in the body frame.

    Raises
    ------
    ValueError
        Raised when there are no readings.
    """
    if not readings:
        raise ValueError("At least one reading is required.")

    total = Vec2(0.0, 0.0)
    for reading in readings:
        total = total + reading.deflection_body

    return total


def contact_angle(n: Vec2, deformation_world: Vec2) -> float:
    """The signed angle from a frame normal to the tip to centre direction.

    Raises
    ------
    DegenerateDeformationError
        Raised when the deformation is zero, or points into the obstacle.
    """
    if deformation_world.norm() <= _ZERO_DEFORMATION:
        raise DegenerateDeformationError("The compound deformation is zero.")

    u = -deformation_world.normalized()
    theta = math.atan2(n.cross(u), n.dot(u))
    if abs(theta) >= math.pi / 2:
        raise DegenerateDeformationError(
            "The deformation does not point away from the contacted face."
        )

    return theta


def build_frame(
    event: CollisionEvent,
    params: RobotParams,
    mode: FrameMode = FrameMode.SENSOR,
    obstacles: typing.Sequence[Polygon] = (),
) -> CollisionFrame:
    """Build the collision frame of an event.

    Parameters
    ----------
    event
        The detected collision.
    params
        The robot parameters.
    mode
        Where the normal comes from. In [SENSOR][drr.impl.robot.FrameMode.SENSOR]
        mode it is the negated compound deformation, and `theta` is zero. In
        [GROUND_TRUTH][drr.impl.robot.FrameMode.GROUND_TRUTH] mode it is the
        outward normal of the face touched by the most compressed arm.
    obstacles
        The obstacles; only used in ground truth mode.

    Returns
    -------
    CollisionFrame
        The frame, with its origin at the robot centre at detection.

    Raises
    ------
    DegenerateDeformationError
        Raised when the compound deformation is zero, or no contacted face is found.
    """
    rot_wb: Rot2 = event.pose_at_impact.rotation
    deformation = rot_wb.apply(compound_deformation(event.readings))
    if deformation.norm() <= _ZERO_DEFORMATION:
        raise DegenerateDeformationError("The compound deformation is zero.")

    origin = event.pose_at_impact.position
    if mode is FrameMode.SENSOR:
        return CollisionFrame(origin, -deformation.normalized(), 0.0)

    deepest = max(event.readings, key=lambda r: r.magnitude)
    probe = probe_arm(event.pose_at_impact, deepest.arm_index, params, obstacles)
    if probe.normal is None:
        raise DegenerateDeformationError(
            f"Arm {deepest.arm_index} does not touch any obstacle."
        )

    theta = contact_angle(probe.normal, deformation)
    logger.debug(
        "Ground truth frame with normal {} and theta {:.4f}.",
        probe.normal.dump(),
        theta,
    )
    return CollisionFrame(origin, probe.normal, theta)
