"""Replan.

The post-impact replanner: waypoint adjustment, the piecewise polynomial
minimum effort trajectory, trapezoidal time allocation, time scaling, path
simplification and the flip avoidance speed bound.
"""

from __future__ import annotations

import enum
import math
import typing

import numpy as np
import numpy.typing as npt
from loguru import logger
from numpy.polynomial import polynomial as npoly

from drr.core import line_of_sight, transform_from_frame, transform_to_frame
from drr.errors import (
    NegativeRadicandError,
    NonPositiveDurationError,
    QpInfeasibleError,
    SingularKktError,
)
from drr.impl.config import PlannerConfig
from drr.impl.geometry import Polygon, Vec2
from drr.impl.robot import CollisionFrame, RobotParams
from drr.impl.trajectory import Segment, Trajectory, WaypointList
from drr.qp import solve_equality_qp

__all__ = (
    "AdjustBranch",
    "adjust_waypoints",
    "adjustment_branch",
    "allocate_times",
    "classify_adjustment",
    "cost_matrix",
    "derivative_row",
    "evaluate",
    "max_safe_speed",
    "plan_route",
    "plan_trajectory",
    "sample",
    "scale_time",
    "segment_time_after_collision",
    "simplify_path",
    "trajectory_cost",
    "trapezoid_duration",
)

FloatArray: typing.TypeAlias = npt.NDArray[np.float64]

SAMPLES_PER_SEGMENT: typing.Final[int] = 100
"""The samples per segment used to measure the peak speed and acceleration."""


class AdjustBranch(str, enum.Enum):
    """Adjust branch.

    The edit applied to the waypoint list after a collision.
    """

    NONE = "none"
    """The next waypoint is already ahead of the robot."""
    CLAMP = "clamp"
    """The next waypoint is pulled out to the robot's normal offset."""
    CLAMP_INSERT = "clamp_insert"
    """The next waypoint is pushed behind the obstacle and an exploration waypoint is inserted."""
    INSERT = "insert"
    """An exploration waypoint is inserted."""


# Waypoint adjustment:


def classify_adjustment(
    next_x: float, robot_x: float, rho: float
) -> AdjustBranch:
    """Pick the adjustment from collision frame normal offsets.

    Parameters
    ----------
    next_x
        The normal offset of the next waypoint.
    robot_x
        The normal offset of the robot after recovery.
    rho
        The robot radius.
    """
    if -rho <= next_x < robot_x:
        return AdjustBranch.CLAMP
    if -2.0 * rho <= next_x < -rho:
        return AdjustBranch.CLAMP_INSERT
    if next_x < -2.0 * rho:
        return AdjustBranch.INSERT

    return AdjustBranch.NONE


def adjustment_branch(
    wl: WaypointList, i_c: int, p_r_world: Vec2, frame: CollisionFrame, rho: float
) -> AdjustBranch:
    """The adjustment the waypoint after a collision segment calls for.

    Raises
    ------
    ValueError
        Raised when there is no waypoint after the collision segment.
    """
    if not 0 <= i_c < len(wl) - 1:
        raise ValueError("There is no waypoint after the collision segment.")

    rot = frame.rot_wc
    robot = transform_to_frame(frame.origin, rot, p_r_world)
    nxt = transform_to_frame(frame.origin, rot, wl.points[i_c + 1])
    return classify_adjustment(nxt.x, robot.x, rho)


def adjust_waypoints(
    wl: WaypointList,
    i_c: int,
    p_r_world: Vec2,
    frame: CollisionFrame,
    rho: float,
    cfg: PlannerConfig,
) -> WaypointList:
    """Adjust the waypoints after a collision.

    The next waypoint is examined in the collision frame. When it lies just
    behind the robot it is pulled out to the robot's offset; when it lies
    behind the obstacle an exploration waypoint, `epsilon_explore` along the
    tangent from the robot, is inserted before it.

    Example
    -------
    ```py
    frame = CollisionFrame(Vec2(0, 0), Vec2(1, 0))
    wl = WaypointList((Vec2(0, 0), Vec2(-0.1, 1.0)))
    adjust_waypoints(wl, 0, Vec2(0, 0.05), frame, 0.3, PlannerConfig()).points
    # (Vec2(0.0, 0.0), Vec2(0.0, 1.0))
    ```

    Parameters
    ----------
    wl
        The waypoint list being tracked.
    i_c
        The segment the collision happened on.
    p_r_world
        The robot position after recovery.
    frame
        The collision frame.
    rho
        The robot radius.
    cfg
        The planner configuration.

    Returns
    -------
    WaypointList
        The world frame list. Times are kept when no waypoint was inserted.

    Raises
    ------
    ValueError
        Raised when there is no waypoint after the collision segment.
    """
    branch = adjustment_branch(wl, i_c, p_r_world, frame, rho)
    rot = frame.rot_wc
    robot = transform_to_frame(frame.origin, rot, p_r_world)
    nxt = transform_to_frame(frame.origin, rot, wl.points[i_c + 1])
    logger.debug(
        "Waypoint {} sits at {} in the collision frame: {}.",
        i_c + 1,
        nxt.dump(),
        branch.value,
    )

    points = list(wl.points)
    if branch is AdjustBranch.CLAMP:
        nxt = Vec2(robot.x, nxt.y)
    elif branch is AdjustBranch.CLAMP_INSERT:
        nxt = Vec2(-2.0 * rho, nxt.y)

    points[i_c + 1] = transform_from_frame(frame.origin, rot, nxt)
    if branch in (AdjustBranch.CLAMP_INSERT, AdjustBranch.INSERT):
        offset = cfg.explore_sign * cfg.epsilon_explore
        p_add = Vec2(robot.x, robot.y + offset)
        points.insert(i_c + 1, transform_from_frame(frame.origin, rot, p_add))
        return WaypointList(tuple(points))

    return WaypointList(tuple(points), wl.times)


def simplify_path(
    wl: WaypointList, obstacles: typing.Sequence[Polygon], clearance: float
) -> WaypointList:
    """Drop the interior waypoints that can be skipped.

    From each kept waypoint, the farthest waypoint still in line of sight is
    kept next. Neighbours are always reachable, so the result is a
    subsequence holding both endpoints.
    """
    kept = [0]
    last = len(wl) - 1
    while kept[-1] < last:
        current = kept[-1]
        reach = current + 1
        for candidate in range(last, current + 1, -1):
            if line_of_sight(
                wl.points[current], wl.points[candidate], obstacles, clearance
            ):
                reach = candidate
                break
        kept.append(reach)

    points = tuple(wl.points[i] for i in kept)
    times = None if wl.times is None else tuple(wl.times[i] for i in kept)
    if len(points) < len(wl):
        logger.debug("Simplified {} waypoints to {}.", len(wl), len(points))

    return WaypointList(points, times)


# Time allocation:


def trapezoid_duration(length: float, v_max: float, a_max: float) -> float:
    """The time to travel a leg from rest to rest.

    The leg is traversed with a trapezoidal speed profile, or a triangular
    one when it is too short to reach `v_max`.

    Raises
    ------
    ValueError
        Raised when the limits are not positive.
    """
    if v_max <= 0.0 or a_max <= 0.0:
        raise ValueError("v_max and a_max must be positive.")

    if length >= v_max * v_max / a_max:
        return length / v_max + v_max / a_max

    return 2.0 * math.sqrt(length / a_max)


def allocate_times(
    wl: WaypointList, v_max: float, a_max: float, *, start_time: float = 0.0
) -> WaypointList:
    """Assign arrival times to the waypoints.

    Example
    -------
    ```py
    wl = WaypointList((Vec2(0, 0), Vec2(1, 0)))
    allocate_times(wl, 0.5, 5.0).times  # (0.0, 2.1)
    ```

    Raises
    ------
    ValueError
        Raised when two consecutive waypoints coincide.
    """
    times = [start_time]
    for a, b in zip(wl.points, wl.points[1:]):
        length = (b - a).norm()
        if length == 0.0:
            raise ValueError("Consecutive waypoints must be distinct.")
        times.append(times[-1] + trapezoid_duration(length, v_max, a_max))

    return wl.with_times(times)


def segment_time_after_collision(wl: WaypointList, i_c: int, t_c: float) -> float:
    """The time left in the collision segment.

    Raises
    ------
    NonPositiveDurationError
        Raised when the collision happened at or after the end of the segment.
    ValueError
        Raised when the list has no times.
    """
    if wl.times is None:
        raise ValueError("The waypoint list has no times.")

    duration = wl.times[i_c + 1] - t_c
    if duration <= 0.0:
        raise NonPositiveDurationError(duration)

    return duration


# Polynomial trajectories:


def derivative_row(t: float, order: int, alpha: int) -> FloatArray:
    """The row mapping monomial coefficients to the `alpha`-th derivative at `t`."""
    row = np.zeros(order + 1)
    for n in range(alpha, order + 1):
        row[n] = math.perm(n, alpha) * t ** (n - alpha)

    return row


def cost_matrix(duration: float, order: int, j: int) -> FloatArray:
    """The exact Hessian of `integral (d^j p / dt^j)^2` over one segment.

    Returns
    -------
    FloatArray
        `Q` such that the integral equals `c^T Q c`.
    """
    Q = np.zeros((order + 1, order + 1))
    for a in range(j, order + 1):
        for b in range(j, order + 1):
            power = a + b - 2 * j + 1
            Q[a, b] = (
                math.perm(a, j) * math.perm(b, j) * duration**power / power
            )

    return Q


class _Constraints:
    """Equality rows shared by both axes, with per axis right hand sides."""

    __slots__ = ("_rows", "_rhs", "_width")

    def __init__(self, width: int) -> None:
        self._width = width
        self._rows: list[FloatArray] = []
        self._rhs: list[tuple[float, float]] = []

    def add(
        self,
        entries: typing.Iterable[tuple[int, FloatArray]],
        value: Vec2,
    ) -> None:
        row = np.zeros(self._width)
        for offset, block in entries:
            row[offset : offset + block.size] += block
        self._rows.append(row)
        self._rhs.append((value.x, value.y))

    def __len__(self) -> int:
        return len(self._rows)

    def matrices(self) -> tuple[FloatArray, FloatArray]:
        return np.array(self._rows), np.array(self._rhs)


def _route_durations(
    wl: WaypointList, start_segment: int, floor: float
) -> list[float]:
    if wl.times is None:
        raise ValueError("The waypoint list has no times.")

    times = wl.times[start_segment:]
    return [max(b - a, floor) for a, b in zip(times, times[1:])]


def plan_trajectory(
    wl: WaypointList,
    start_pos: Vec2,
    start_vel: Vec2,
    cfg: PlannerConfig,
    *,
    end_derivs: typing.Sequence[Vec2] | None = None,
    start_derivs: typing.Sequence[Vec2] = (),
    start_segment: int = 0,
) -> Trajectory:
    """Plan the minimum effort trajectory through the waypoints.

    Both axes are solved independently under the same equality rows: the
    start position and velocity, the end position and derivatives, every
    waypoint after the start segment and the continuity of the derivatives
    up to `j - 1` at every joint.

    Parameters
    ----------
    wl
        The timed waypoint list.
    start_pos
        The start position; replaces waypoint `start_segment`.
    start_vel
        The start velocity; imposed when `j >= 2`.
    cfg
        The planner configuration.
    end_derivs
        The end derivatives `1 .. j - 1`; zero by default.
    start_derivs
        Additional start derivatives, from the acceleration upward.
    start_segment
        The segment the trajectory starts on.

    Returns
    -------
    Trajectory
        The trajectory; its waypoints carry times relative to its start.

    Raises
    ------
    QpInfeasibleError
        Raised when the segments have too few coefficients for the
        constraints, or the constraints are inconsistent.
    """
    j, order = cfg.j, cfg.order
    width = order + 1
    points = [start_pos, *wl.points[start_segment + 1 :]]
    durations = _route_durations(wl, start_segment, cfg.min_segment_duration)
    segments = len(durations)
    if segments < 1:
        raise ValueError("At least one segment is required.")
    if len(start_derivs) > max(j - 2, 0):
        raise ValueError("Too many start derivatives for the objective order.")

    ends = list(end_derivs) if end_derivs is not None else []
    ends += [Vec2(0.0, 0.0)] * (j - 1 - len(ends))

    rows = _Constraints(segments * width)
    rows.add([(0, derivative_row(0.0, order, 0))], points[0])
    if j >= 2:
        rows.add([(0, derivative_row(0.0, order, 1))], start_vel)
    for alpha, value in enumerate(start_derivs, start=2):
        rows.add([(0, derivative_row(0.0, order, alpha))], value)

    for index in range(segments - 1):
        here, there = index * width, (index + 1) * width
        duration = durations[index]
        waypoint = points[index + 1]
        rows.add([(here, derivative_row(duration, order, 0))], waypoint)
        rows.add([(there, derivative_row(0.0, order, 0))], waypoint)
        for alpha in range(1, j):
            rows.add(
                [
                    (here, derivative_row(duration, order, alpha)),
                    (there, -derivative_row(0.0, order, alpha)),
                ],
                Vec2(0.0, 0.0),
            )

    last = (segments - 1) * width
    rows.add([(last, derivative_row(durations[-1], order, 0))], points[-1])
    for alpha, value in enumerate(ends[: j - 1], start=1):
        rows.add([(last, derivative_row(durations[-1], order, alpha))], value)

    if len(rows) > segments * width:
        raise QpInfeasibleError(
            f"{len(rows)} constraints for {segments * width} coefficients."
        )

    Q = np.zeros((segments * width, segments * width))
    for index, duration in enumerate(durations):
        block = slice(index * width, (index + 1) * width)
        Q[block, block] = cost_matrix(duration, order, j)

    A, rhs = rows.matrices()
    try:
        x = solve_equality_qp(2.0 * Q, np.zeros(segments * width), A, rhs[:, 0]).x
        y = solve_equality_qp(2.0 * Q, np.zeros(segments * width), A, rhs[:, 1]).x
    except SingularKktError as e:
        raise QpInfeasibleError(
            f"Singular KKT system of size {e.size} (rank {e.rank})."
        ) from e

    pieces = tuple(
        Segment(
            tuple(float(c) for c in x[i * width : (i + 1) * width]),
            tuple(float(c) for c in y[i * width : (i + 1) * width]),
            durations[i],
        )
        for i in range(segments)
    )
    times = np.concatenate([[0.0], np.cumsum(durations)])
    logger.debug(
        "Planned {} segments over {:.3f} s.", segments, float(times[-1])
    )
    return Trajectory(
        pieces,
        j=j,
        waypoints=WaypointList(tuple(points), tuple(float(t) for t in times)),
    )


def evaluate(traj: Trajectory, t: float, derivative: int = 0) -> Vec2:
    """Evaluate a trajectory derivative.

    Raises
    ------
    OutOfRangeError
        Raised when `t` lies outside of the trajectory.
    """
    index, local = traj.locate(t)
    return traj.segments[index].evaluate(local, derivative)


def sample(
    traj: Trajectory,
    per_segment: int = SAMPLES_PER_SEGMENT,
    derivative: int = 0,
) -> FloatArray:
    """Sample a derivative evenly on every segment, endpoints included.

    Returns
    -------
    FloatArray
        A `(segments * per_segment, 2)` array.
    """
    if per_segment < 2:
        raise ValueError("At least 2 samples per segment are required.")

    rows: list[FloatArray] = []
    for segment in traj.segments:
        ts = np.linspace(0.0, segment.duration, per_segment)
        cx = npoly.polyder(
            np.asarray(segment.coeffs_x), derivative
        )
        cy = npoly.polyder(
            np.asarray(segment.coeffs_y), derivative
        )
        rows.append(
            np.column_stack(
                [
                    npoly.polyval(ts, cx),
                    npoly.polyval(ts, cy),
                ]
            )
        )

    return np.vstack(rows)


def trajectory_cost(traj: Trajectory) -> float:
    """The value of the minimum effort objective of a trajectory."""
    total = 0.0
    for segment in traj.segments:
        Q = cost_matrix(segment.duration, segment.order, traj.j)
        cx = np.asarray(segment.coeffs_x)
        cy = np.asarray(segment.coeffs_y)
        total += float(cx @ Q @ cx + cy @ Q @ cy)

    return total


def scale_time(traj: Trajectory, v_max: float, a_max: float) -> Trajectory:
    """Slow a trajectory down until it respects the limits.

    Every duration is stretched by the same factor `kappa >= 1`. Speeds
    shrink by `kappa` and accelerations by `kappa^2`, so the path itself
    is unchanged.

    Raises
    ------
    ValueError
        Raised when the limits are not positive.
    """
    if v_max <= 0.0 or a_max <= 0.0:
        raise ValueError("v_max and a_max must be positive.")

    speed = float(np.max(np.linalg.norm(sample(traj, derivative=1), axis=1)))
    accel = float(np.max(np.linalg.norm(sample(traj, derivative=2), axis=1)))
    kappa = max(1.0, speed / v_max, math.sqrt(accel / a_max))
    if kappa == 1.0:
        return traj

    logger.debug(
        "Scaling time by {:.3f} (peak speed {:.3f}, peak accel {:.3f}).",
        kappa,
        speed,
        accel,
    )
    waypoints = traj.waypoints
    if waypoints is not None and waypoints.times is not None:
        waypoints = waypoints.with_times([t * kappa for t in waypoints.times])

    return Trajectory(
        tuple(segment.scaled(kappa) for segment in traj.segments),
        j=traj.j,
        waypoints=waypoints,
    )


def _dedupe(points: typing.Sequence[Vec2]) -> tuple[Vec2, ...]:
    kept = [points[0]]
    for point in points[1:]:
        if (point - kept[-1]).norm() > 1e-9:
            kept.append(point)

    return tuple(kept)


def plan_route(
    wl: WaypointList,
    cfg: PlannerConfig,
    obstacles: typing.Sequence[Polygon] = (),
    *,
    start_vel: Vec2 | None = None,
) -> Trajectory:
    """Plan a trajectory through a route, starting and ending at rest.

    Only the waypoints constrain the trajectory; obstacles are used by the
    optional simplification alone.

    Raises
    ------
    ValueError
        Raised when the route collapses to a single point.
    QpInfeasibleError
        Raised when the trajectory cannot be planned.
    """
    route = WaypointList(_dedupe(wl.points))
    if cfg.simplify:
        route = simplify_path(route, obstacles, cfg.clearance)

    timed = allocate_times(route, cfg.v_max, cfg.a_max)
    rest = Vec2(0.0, 0.0)
    traj = plan_trajectory(
        timed,
        timed.points[0],
        start_vel if start_vel is not None else rest,
        cfg,
        start_derivs=[rest] * max(cfg.j - 2, 0),
    )
    return scale_time(traj, cfg.v_max, cfg.a_max)


# Flip avoidance:


def max_safe_speed(params: RobotParams) -> float:
    """The fastest impact the robot survives without flipping.

    An energy balance between the kinetic energy, the spring travel, the
    tilt of the chassis and the commanded acceleration over the travel.

    Example
    -------
    ```py
    max_safe_speed(RobotParams())  # 0.5753...
    ```

    Raises
    ------
    NegativeRadicandError
        Raised when the parameters admit no safe speed.
    """
    spring = (
        params.k
        * ((params.le - params.l0) ** 2 - (params.ls - params.l0) ** 2)
        / (2.0 * params.m)
    )
    tilt = params.g * (params.rho - params.ls + params.le) * math.sin(params.sigma_max)
    drive = params.a_in_max * (params.ls - params.le)
    radicand = spring + tilt + drive
    if radicand < 0.0:
        raise NegativeRadicandError(radicand)

    return math.sqrt(radicand)
