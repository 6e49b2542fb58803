"""Handler impl`s.

The detect, recover and replan handler, and the handler that ignores
collisions.
"""

from __future__ import annotations

import typing

from loguru import logger

from drr import errors
from drr.contact import build_frame
from drr.events import RecoveryStartedEvent, ReplannedEvent, WaypointsAdjustedEvent
from drr.handler.abc import BaseCollisionHandler
from drr.impl.geometry import Vec2
from drr.impl.recovery import RecoveryEpisode
from drr.impl.trajectory import WaypointList
from drr.recovery import recover, terminal_velocity
from drr.replan import (
    adjust_waypoints,
    adjustment_branch,
    allocate_times,
    plan_trajectory,
    scale_time,
    segment_time_after_collision,
    trajectory_cost,
)

if typing.TYPE_CHECKING:
    from drr.impl.robot import CollisionEvent
    from drr.impl.trajectory import Trajectory
    from drr.sim import Simulator

__all__ = ("DRRHandler", "PreplannedHandler")


def _kept_times(
    route: WaypointList, i_c: int, t_c: float
) -> list[float] | None:
    """The relative times of the rest of a route, first segment shortened."""
    if route.times is None:
        return None

    try:
        first = segment_time_after_collision(route, i_c, t_c)
    except errors.NonPositiveDurationError:
        logger.debug("The collision segment had no time left; reallocating.")
        return None

    times = [0.0, first]
    for a, b in zip(route.times[i_c + 1 :], route.times[i_c + 2 :]):
        times.append(times[-1] + (b - a))

    return times


class DRRHandler(BaseCollisionHandler):
    """Deformation recovery and replanning handler.

    Every collision is recovered from with a planned detachment, after which
    the waypoints are adjusted around the obstacle and a new trajectory is
    planned from where the robot ended up.
    """

    __slots__ = ()

    def __init__(self, sim: Simulator) -> None:
        self._sim = sim

    @property
    def reactive(self) -> bool:
        return True

    def on_collision(self, event: CollisionEvent) -> RecoveryEpisode | None:
        scenario = self._sim.scenario
        try:
            frame = build_frame(
                event, scenario.params, scenario.frame_mode, scenario.obstacles
            )
        except errors.ContactError as e:
            logger.warning("Ignoring collision at t={:.3f}: {!r}", event.t_c, e)
            return None

        route = self._sim.route
        i_c = min(event.segment_index, len(route) - 2)
        vT = Vec2(0.0, 0.0)
        if route.times is not None:
            try:
                vT = terminal_velocity(
                    event.pose_at_impact.position,
                    route.points[i_c + 1],
                    event.tau_c,
                    route.times[i_c + 1] - route.times[i_c],
                    frame,
                    scenario.recovery.v_max,
                )
            except ValueError:
                logger.debug("Collision after its segment ended; recovering to rest.")

        try:
            plan = recover(event, frame, scenario.params, scenario.recovery, vT)
        except errors.RecoveryError as e:
            logger.warning("Ignoring collision at t={:.3f}: {!r}", event.t_c, e)
            return None

        self._sim.emit(
            RecoveryStartedEvent(
                t=event.t_c,
                normal=frame.n,
                theta=frame.theta,
                x0=plan.x0,
                vT=plan.vT,
                fallback=plan.fallback.value,
            )
        )
        return RecoveryEpisode(event, frame, plan)

    def on_recovered(
        self,
        episode: RecoveryEpisode,
        position: Vec2,
        velocity: Vec2,
        t_start: float,
    ) -> Trajectory:
        scenario = self._sim.scenario
        cfg = scenario.planner
        route = self._sim.route
        i_c = min(episode.event.segment_index, len(route) - 2)

        branch = adjustment_branch(
            route, i_c, position, episode.frame, scenario.params.rho
        )
        adjusted = adjust_waypoints(
            route, i_c, position, episode.frame, scenario.params.rho, cfg
        )
        rest = [p for p in adjusted.points[i_c + 1 :] if (p - position).norm() > 1e-9]
        if not rest:
            raise errors.PlannerFailureError("Nothing is left of the route.")

        remaining = WaypointList((position, *rest))
        times = None
        if len(adjusted) == len(route) and len(rest) == len(route) - i_c - 1:
            times = _kept_times(route, i_c, episode.event.t_c)

        self._sim.emit(
            WaypointsAdjustedEvent(
                t=self._sim.t, branch=branch.value, points=remaining.points
            )
        )

        attempts = [allocate_times(remaining, cfg.v_max, cfg.a_max)]
        if times is not None:
            attempts.insert(0, remaining.with_times(times))

        traj: Trajectory | None = None
        for timed in attempts:
            try:
                traj = plan_trajectory(timed, position, velocity, cfg)
                break
            except errors.QpError as e:
                logger.warning("Replanning failed ({!r}); reallocating times.", e)

        if traj is None:
            raise errors.PlannerFailureError("No trajectory through the adjusted route.")

        traj = scale_time(traj, cfg.v_max, cfg.a_max)
        self._sim.emit(
            ReplannedEvent(
                t=self._sim.t,
                duration=traj.duration,
                segments=len(traj.segments),
                cost=trajectory_cost(traj),
            )
        )
        logger.info(
            "Replanned {} segments over {:.2f}s starting at t={:.3f}.",
            len(traj.segments),
            traj.duration,
            t_start,
        )
        return traj


class PreplannedHandler(BaseCollisionHandler):
    """Preplanned handler.

    Ignores every collision and keeps tracking the original trajectory.
    """

    __slots__ = ()

    def __init__(self, sim: Simulator) -> None:
        self._sim = sim

    @property
    def reactive(self) -> bool:
        return False

    def on_collision(self, event: CollisionEvent) -> RecoveryEpisode | None:
        return None

    def on_recovered(
        self,
        episode: RecoveryEpisode,
        position: Vec2,
        velocity: Vec2,
        t_start: float,
    ) -> Trajectory:
        raise errors.PlannerFailureError("A preplanned run never recovers.")
