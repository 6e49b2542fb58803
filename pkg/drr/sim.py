"""Sim.

The 2D simulator: the compliant arm plant, the nominal tracker and the
detect, recover and replan loop driving them.
"""

from __future__ import annotations

import math
import typing
from dataclasses import replace

import numpy as np
from loguru import logger

from drr import errors
from drr.contact import (
    arm_rate,
    build_frame,
    contact_force,
    detect,
    friction_force,
    probe_arm,
    sense,
)
from drr.events import (
    CollisionDetectedEvent,
    GoalReachedEvent,
    RecoveryFinishedEvent,
    TimeoutEvent,
)
from drr.handler import BaseCollisionHandler, DRRHandler, PreplannedHandler
from drr.impl.config import RecoveryConfig, TrackerConfig
from drr.impl.geometry import Polygon, Pose2, Vec2, wrap_angle
from drr.impl.recovery import BodyCommand, RecoveryEpisode, RecoveryState
from drr.impl.robot import ArmProbe, CollisionEvent, FrameMode, RobotParams
from drr.impl.scenario import Scenario
from drr.impl.trajectory import Trajectory, WaypointList
from drr.impl.world import Metrics, Mode, SimLog, StepRecord, WorldState
from drr.recovery import command_at, recover
from drr.replan import evaluate, plan_route

if typing.TYPE_CHECKING:
    from drr.events import DRREvent

__all__ = (
    "Simulator",
    "impact_trial",
    "metrics",
    "run_drr",
    "run_preplanned",
    "step",
    "track",
)

_BROAD_MARGIN: typing.Final[float] = 0.005
"""The slack around the robot radius within which obstacles are probed, in m."""

_CONTACT_TOL: typing.Final[float] = 5e-4
"""The compression below which an arm counts as free, in m."""

_ZERO: typing.Final[Vec2] = Vec2(0.0, 0.0)


def _touching(world: WorldState, ls: float) -> bool:
    return any(ls - length > _CONTACT_TOL for length in world.arm_lengths)


# Plant:


def _near(
    position: Vec2, obstacles: typing.Sequence[Polygon], reach: float
) -> tuple[Polygon, ...]:
    """The obstacles whose bounding box lies within `reach` of a point."""
    near: list[Polygon] = []
    for poly in obstacles:
        x_min, y_min, x_max, y_max = poly.bounds
        dx = max(x_min - position.x, 0.0, position.x - x_max)
        dy = max(y_min - position.y, 0.0, position.y - y_max)
        if math.hypot(dx, dy) <= reach:
            near.append(poly)

    return tuple(near)


def _probe_all(
    pose: Pose2, params: RobotParams, obstacles: typing.Sequence[Polygon]
) -> tuple[ArmProbe, ...]:
    if not obstacles:
        free = ArmProbe(params.ls, params.ls)
        return (free,) * len(params.arm_dirs)

    return tuple(
        probe_arm(pose, index, params, obstacles)
        for index in range(len(params.arm_dirs))
    )


def _contact_accel(
    pose: Pose2,
    vel: Vec2,
    scenario: Scenario,
    obstacles: typing.Sequence[Polygon],
) -> Vec2:
    """The acceleration the arms in contact exert on the body.

    Each arm pushes back along its axis with its Voigt force, stiffened by
    the chassis stop once pushed past `le`, and Coulomb friction acts on the
    normal share of that force.
    """
    params = scenario.params
    total = _ZERO
    for index, probe in enumerate(_probe_all(pose, params, obstacles)):
        if probe.normal is None:
            continue

        axis = pose.rotation.apply(params.arm_dirs[index])
        force = contact_force(probe.length, arm_rate(probe, vel), params)
        if probe.over_compressed:
            stop = scenario.stop_stiffness_ratio * params.k
            force += stop * (probe.length - probe.raw_length)

        total = total + axis * (-force / params.m)
        friction = friction_force(force / probe.rate_factor, probe.normal, vel, params)
        total = total + friction / params.m

    return total


def step(
    world: WorldState,
    cmd: BodyCommand,
    scenario: Scenario,
    dt: float | None = None,
) -> WorldState:
    """Advance the plant by one step.

    The body is a point mass driven by the command and by the arms in
    contact, integrated with a fourth order Runge-Kutta scheme. The heading
    follows the commanded yaw rate.

    Example
    -------
    ```py
    world = WorldState(Pose2(Vec2(0, 0)), Vec2(0.3, 0))
    step(world, BodyCommand.idle(), scenario, 0.1).pose.position  # Vec2(0.03, 0.0)
    ```

    Parameters
    ----------
    world
        The current state.
    cmd
        The command, held over the step.
    scenario
        The scenario holding the robot and the obstacles.
    dt
        The step, in s; `scenario.sim_dt` when omitted.

    Returns
    -------
    WorldState
        The next state, with the arm lengths and rates refreshed.
    """
    dt = scenario.sim_dt if dt is None else dt
    params = scenario.params
    p, v = world.pose.position, world.vel
    heading = world.pose.heading
    reach = params.rho + _BROAD_MARGIN + v.norm() * dt
    near = _near(p, scenario.obstacles, reach)

    if near:

        def accel(pos: Vec2, vel: Vec2) -> Vec2:
            return cmd.a_in + _contact_accel(Pose2(pos, heading), vel, scenario, near)

        k1p, k1v = v, accel(p, v)
        k2p = v + k1v * (dt / 2)
        k2v = accel(p + k1p * (dt / 2), k2p)
        k3p = v + k2v * (dt / 2)
        k3v = accel(p + k2p * (dt / 2), k3p)
        k4p = v + k3v * dt
        k4v = accel(p + k3p * dt, k4p)
        p = p + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (dt / 6)
        v = v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6)
    else:
        p = p + v * dt + cmd.a_in * (dt * dt / 2)
        v = v + cmd.a_in * dt

    pose = Pose2(p, heading + cmd.u_theta * dt)
    probes = _probe_all(pose, params, _near(p, scenario.obstacles, reach))
    return WorldState(
        pose=pose,
        vel=v,
        omega=cmd.u_theta,
        arm_lengths=tuple(probe.length for probe in probes),
        arm_rates=tuple(arm_rate(probe, v) for probe in probes),
        t=world.t + dt,
        mode=world.mode,
    )


# Tracking:


def track(
    traj: Trajectory,
    state: WorldState,
    cfg: TrackerConfig,
    params: RobotParams,
    *,
    t_start: float = 0.0,
    heading_d: float = 0.0,
) -> BodyCommand:
    """The nominal tracking command.

    A PD law on the reference position and velocity, with the reference
    acceleration fed forward. Past its end, the trajectory holds its last
    point at rest.

    Example
    -------
    ```py
    # the robot 0.1 m behind a static reference
    track(traj, state, TrackerConfig(), RobotParams()).a_in  # Vec2(0.4, 0.0)
    ```

    Parameters
    ----------
    traj
        The trajectory to track.
    state
        The current state.
    cfg
        The tracker gains.
    params
        The robot parameters.
    t_start
        The simulation time the trajectory started at.
    heading_d
        The heading to hold.
    """
    elapsed = state.t - t_start
    t = min(max(elapsed, 0.0), traj.duration)
    p_ref = evaluate(traj, t)
    v_ref, a_ref = _ZERO, _ZERO
    if 0.0 <= elapsed < traj.duration:
        v_ref = evaluate(traj, t, 1)
        a_ref = evaluate(traj, t, 2)

    a = a_ref + (p_ref - state.pose.position) * cfg.K_p + (v_ref - state.vel) * cfg.K_d
    norm = a.norm()
    if norm > params.a_in_max:
        a = a * (params.a_in_max / norm)

    u_theta = -cfg.K_heading * math.sin(wrap_angle(state.pose.heading - heading_d))
    return BodyCommand(a, u_theta)


# Metrics:


def metrics(log: SimLog) -> Metrics:
    """Summarize a run.

    The control energy is the left Riemann sum of the squared commanded
    acceleration over the logged steps.

    Example
    -------
    ```py
    # +1 m/s^2 for 1 s, then -1 m/s^2 for 1 s
    metrics(log).control_energy  # 2.0
    ```
    """
    collisions = sum(isinstance(e, CollisionDetectedEvent) for e in log.events)
    if not log.records:
        return Metrics(0.0, 0.0, 0.0, collisions, 0.0, log.reached)

    xy = np.array([(r.x, r.y) for r in log.records], dtype=np.float64)
    t = np.array([r.t for r in log.records], dtype=np.float64)
    a2 = np.array([r.ax**2 + r.ay**2 for r in log.records], dtype=np.float64)

    path_length = float(np.sum(np.linalg.norm(np.diff(xy, axis=0), axis=1)))
    energy = float(np.sum(a2[:-1] * np.diff(t)))
    last = log.records[-1]
    goal_error = (last.position - log.goal).norm() if log.goal is not None else 0.0
    T_end = log.t_end if log.t_end is not None else last.t
    return Metrics(T_end, path_length, energy, collisions, goal_error, log.reached)


# Simulator:


class Simulator:
    """Simulator.

    Runs one trial of a scenario: the nominal trajectory is tracked at the
    control rate while the plant and the contact sensors run at the plant
    rate. What happens on a collision is left to the handler.

    Example
    -------
    ```py
    log, result = Simulator(scenario, seed=3).run()
    ```

    Parameters
    ----------
    scenario
        The scenario to simulate.
    handler
        The collision handler type.
    seed
        The noise seed; the scenario seed when omitted.
    """

    __slots__ = (
        "_episode",
        "_handler",
        "_log",
        "_route",
        "_scenario",
        "_seed",
        "_t",
        "_t_start",
        "_trajectory",
    )

    def __init__(
        self,
        scenario: Scenario,
        *,
        handler: type[BaseCollisionHandler] = DRRHandler,
        seed: int | None = None,
    ) -> None:
        self._scenario = scenario
        self._seed = scenario.seed if seed is None else seed
        self._handler = handler(self)
        self._log = SimLog(arm_count=len(scenario.params.arm_dirs))
        self._route: WaypointList | None = None
        self._trajectory: Trajectory | None = None
        self._t_start = 0.0
        self._t = 0.0
        self._episode: RecoveryEpisode | None = None

    @property
    def scenario(self) -> Scenario:
        """The simulated scenario."""
        return self._scenario

    @property
    def handler(self) -> BaseCollisionHandler:
        """The collision handler."""
        return self._handler

    @property
    def log(self) -> SimLog:
        """The log recorded so far."""
        return self._log

    @property
    def t(self) -> float:
        """The current simulation time, in s."""
        return self._t

    @property
    def trajectory(self) -> Trajectory:
        """The trajectory being tracked.

        Raises
        ------
        SimulationError
            Raised when the run has not started.
        """
        if self._trajectory is None:
            raise errors.SimulationError("The run has not started.")

        return self._trajectory

    @property
    def route(self) -> WaypointList:
        """The waypoints of the tracked trajectory, in simulation time.

        Raises
        ------
        SimulationError
            Raised when the run has not started.
        """
        if self._route is None:
            raise errors.SimulationError("The run has not started.")

        return self._route

    def emit(self, event: DRREvent) -> None:
        """Record an event."""
        logger.debug("t={:.3f} {}", event.t, type(event).__name__)
        self._log.events.append(event)

    def _install(self, traj: Trajectory, t_start: float) -> None:
        self._trajectory = traj
        self._t_start = t_start
        waypoints = traj.waypoints
        if waypoints is None or waypoints.times is None:
            raise errors.SimulationError("A tracked trajectory needs timed waypoints.")

        self._route = waypoints.shifted(t_start)

    def _detected(self, event: CollisionEvent) -> None:
        self.emit(
            CollisionDetectedEvent(
                t=event.t_c,
                arms=tuple(sorted(event.arm_indices)),
                segment_index=event.segment_index,
                tau_c=event.tau_c,
                position=event.pose_at_impact.position,
                velocity=event.vel_at_impact,
            )
        )
        logger.info(
            "Collision on arms {} at t={:.3f}.", sorted(event.arm_indices), event.t_c
        )

    def _frame_state(self, world: WorldState, episode: RecoveryEpisode) -> RecoveryState:
        frame = episode.frame
        rot_cw = frame.rot_wc.inverse()
        rel = rot_cw.apply(world.pose.position - frame.origin)
        vel = rot_cw.apply(world.vel)
        return RecoveryState(
            x=episode.plan.x0 + rel.x,
            y=rel.y,
            v_x=vel.x,
            v_y=vel.y,
            heading=world.pose.heading,
            omega=world.omega,
            in_contact=_touching(world, self._scenario.params.ls),
        )

    def _record(self, world: WorldState, cmd: BodyCommand) -> None:
        ls = self._scenario.params.ls
        self._log.records.append(
            StepRecord(
                t=world.t,
                x=world.pose.position.x,
                y=world.pose.position.y,
                heading=world.pose.heading,
                vx=world.vel.x,
                vy=world.vel.y,
                compressions=tuple(ls - length for length in world.arm_lengths),
                mode=world.mode,
                ax=cmd.a_in.x,
                ay=cmd.a_in.y,
            )
        )

    def run(self) -> tuple[SimLog, Metrics]:
        """Run the trial.

        Returns
        -------
        tuple[SimLog, Metrics]
            The log and its summary.

        Raises
        ------
        PlannerFailureError
            Raised when the nominal trajectory, or a replanned one, cannot
            be planned.
        """
        sc = self._scenario
        params = sc.params
        rng = np.random.default_rng(self._seed)
        spt = sc.steps_per_tick

        start = sc.start_pose
        if sc.pose_jitter > 0.0:
            dx, dy = rng.normal(0.0, sc.pose_jitter, 2)
            start = Pose2(start.position + Vec2(float(dx), float(dy)), start.heading)

        try:
            traj = plan_route(sc.waypoints, sc.planner, sc.obstacles)
        except (errors.QpError, ValueError) as e:
            raise errors.PlannerFailureError(f"Nominal trajectory: {e!r}") from e

        self._install(traj, 0.0)
        goal = self.route.goal
        self._log.goal = goal
        heading_d = start.heading

        reach = params.rho + _BROAD_MARGIN
        probes = _probe_all(start, params, _near(start.position, sc.obstacles, reach))
        world = WorldState(
            pose=start,
            vel=_ZERO,
            arm_lengths=tuple(probe.length for probe in probes),
            arm_rates=(0.0,) * len(probes),
        )
        logger.info(
            "Running {} steps of {}s toward {} (seed {}).",
            math.floor(sc.max_sim_time / sc.sim_dt + 1e-9),
            sc.sim_dt,
            goal.dump(),
            self._seed,
        )

        mode = Mode.TRACKING
        phase = 0
        cmd = BodyCommand.idle()
        pending: Trajectory | None = None
        was_detected = False
        bottomed = False
        total_steps = math.floor(sc.max_sim_time / sc.sim_dt + 1e-9)

        for n in range(total_steps + 1):
            t = n * sc.sim_dt
            self._t = t
            world = replace(world, t=t, mode=mode)

            event = None
            # Noisy sensors are read once per tick unless an arm is compressed.
            compressed = any(length < params.ls for length in world.arm_lengths)
            noisy_read = sc.sensor_noise > 0.0 and (n - phase) % spt == 0
            if mode is not Mode.REPLANNING and (compressed or noisy_read):
                readings = sense(
                    world.arm_lengths,
                    params,
                    sc.sensor_noise,
                    rng if sc.sensor_noise > 0.0 else None,
                )
                i_c, tau_c = self.route.segment_at(t)
                event = detect(
                    readings,
                    sc.detection_threshold,
                    t_c=t,
                    segment_index=i_c,
                    tau_c=tau_c,
                    pose=world.pose,
                    vel=world.vel,
                )

            if event is not None:
                if mode is Mode.TRACKING and (self._handler.reactive or not was_detected):
                    self._detected(event)
                    episode = self._handler.on_collision(event)
                    if episode is not None:
                        self._episode = episode
                        mode, phase = Mode.RECOVERING, n
                elif (
                    mode is Mode.RECOVERING
                    and self._episode is not None
                    and not event.arm_indices <= self._episode.event.arm_indices
                ):
                    self._detected(event)
                    episode = self._handler.on_collision(event)
                    if episode is not None:
                        logger.info("New contact during recovery; restarting it.")
                        self._episode = episode
                        phase = n
            was_detected = event is not None

            if (n - phase) % spt == 0:
                ticks = (n - phase) // spt
                if mode is Mode.RECOVERING and self._episode is not None:
                    episode = self._episode
                    if ticks >= sc.horizon_ticks:
                        v_out = episode.frame.rot_wc.inverse().apply(world.vel)
                        self.emit(
                            RecoveryFinishedEvent(
                                t=t,
                                v_in=episode.plan.v0,
                                v_out=v_out,
                                compression=max(params.ls - length for length in world.arm_lengths),
                            )
                        )
                        period = sc.control_period
                        pending = self._handler.on_recovered(
                            episode,
                            world.pose.position + world.vel * period,
                            world.vel,
                            t + period,
                        )
                        self._episode = None
                        mode, phase = Mode.REPLANNING, n
                        cmd = BodyCommand.idle()
                    else:
                        cmd = command_at(
                            episode.plan,
                            t - episode.event.t_c,
                            self._frame_state(world, episode),
                            episode.frame,
                            params,
                            sc.recovery,
                        )
                elif mode is Mode.REPLANNING:
                    if pending is not None:
                        self._install(pending, t)
                        goal = self.route.goal
                        pending = None
                    mode = Mode.TRACKING
                    cmd = track(
                        self.trajectory,
                        world,
                        sc.tracker,
                        params,
                        t_start=self._t_start,
                        heading_d=heading_d,
                    )
                else:
                    cmd = track(
                        self.trajectory,
                        world,
                        sc.tracker,
                        params,
                        t_start=self._t_start,
                        heading_d=heading_d,
                    )
                world = replace(world, mode=mode)

            reached = (
                mode is not Mode.RECOVERING
                and (world.pose.position - goal).norm() <= sc.tracker.goal_tolerance
            )
            if reached or n == total_steps or n % sc.log_every == 0:
                self._record(world, cmd)

            if reached:
                self._log.t_end = t
                self._log.goal = goal
                self.emit(GoalReachedEvent(t=t, position=world.pose.position))
                logger.info("Goal reached at t={:.3f}.", t)
                break

            if n < total_steps:
                world = step(world, cmd, sc)
                if any(length <= params.le for length in world.arm_lengths):
                    if not bottomed:
                        logger.warning(
                            "An arm bottomed out at t={:.3f}; the chassis stop is engaged.",
                            world.t,
                        )
                    bottomed = True
                else:
                    bottomed = False
        else:
            self._log.goal = goal
            error = (world.pose.position - goal).norm()
            self.emit(TimeoutEvent(t=self._t, goal_error=error))
            logger.info("Timed out {:.3f}m from the goal.", error)

        return self._log, metrics(self._log)


def run_drr(scenario: Scenario, seed: int | None = None) -> tuple[SimLog, Metrics]:
    """Run a trial with deformation recovery and replanning."""
    return Simulator(scenario, handler=DRRHandler, seed=seed).run()


def run_preplanned(
    scenario: Scenario, seed: int | None = None
) -> tuple[SimLog, Metrics]:
    """Run a trial that ignores collisions."""
    return Simulator(scenario, handler=PreplannedHandler, seed=seed).run()


# Impact trials:


def impact_trial(
    speed: float,
    incidence: float,
    *,
    params: RobotParams | None = None,
    cfg: RecoveryConfig | None = None,
    threshold: float = 0.002,
    sim_dt: float = 0.001,
) -> RecoveryFinishedEvent:
    """Drive the robot into a wall and recover from the impact.

    The robot coasts into the face `x = 0` of a wall, and the recovery aims
    at the mirrored incoming velocity, capped at the recovery speed limit.

    Example
    -------
    ```py
    result = impact_trial(0.5, math.radians(45))
    result.v_out.x >= 0.0  # True
    ```

    Parameters
    ----------
    speed
        The approach speed, in m/s.
    incidence
        The angle between the approach and the wall normal, in rad.
    params
        The robot parameters.
    cfg
        The recovery configuration.
    threshold
        The detection threshold, in m.
    sim_dt
        The plant step, in s.

    Returns
    -------
    RecoveryFinishedEvent
        The collision frame velocities at detection and at the end of the
        recovery, and the compression left.

    Raises
    ------
    SimulationError
        Raised when the robot never reaches the wall.
    """
    params = params if params is not None else RobotParams()
    cfg = cfg if cfg is not None else RecoveryConfig()
    wall = Polygon.rectangle(0.0, -5.0, 1.0, 5.0)
    start = Vec2(-params.rho - 0.005, 0.0)
    scenario = Scenario(
        waypoints=WaypointList((start, start + Vec2(-1.0, 0.0))),
        obstacles=(wall,),
        params=params,
        recovery=cfg,
        sim_dt=sim_dt,
        control_hz=100.0,
        detection_threshold=threshold,
        frame_mode=FrameMode.SENSOR,
    )

    idle = BodyCommand.idle()
    world = WorldState(
        pose=Pose2(start),
        vel=Vec2(speed * math.cos(incidence), speed * math.sin(incidence)),
        arm_lengths=(params.ls,) * len(params.arm_dirs),
        arm_rates=(0.0,) * len(params.arm_dirs),
    )
    event: CollisionEvent | None = None
    for _ in range(math.ceil(2.0 / sim_dt)):
        world = step(world, idle, scenario)
        event = detect(
            sense(world.arm_lengths, params),
            threshold,
            t_c=world.t,
            pose=world.pose,
            vel=world.vel,
        )
        if event is not None:
            break

    if event is None:
        raise errors.SimulationError("The robot never reached the wall.")

    frame = build_frame(event, params, FrameMode.SENSOR)
    rot_cw = frame.rot_wc.inverse()
    v_in = rot_cw.apply(event.vel_at_impact)
    vT = Vec2(abs(v_in.x), v_in.y)
    if vT.norm() > cfg.v_max:
        vT = vT * (cfg.v_max / vT.norm())

    plan = recover(event, frame, params, cfg, vT)
    episode = RecoveryEpisode(event, frame, plan)
    spt = scenario.steps_per_tick
    cmd = idle
    for n in range(round(plan.horizon / sim_dt)):
        if n % spt == 0:
            rel = rot_cw.apply(world.pose.position - frame.origin)
            vel = rot_cw.apply(world.vel)
            state = RecoveryState(
                x=plan.x0 + rel.x,
                y=rel.y,
                v_x=vel.x,
                v_y=vel.y,
                heading=world.pose.heading,
                omega=world.omega,
                in_contact=_touching(world, params.ls),
            )
            cmd = command_at(episode.plan, n * sim_dt, state, frame, params, cfg)
        world = step(world, cmd, scenario)

    return RecoveryFinishedEvent(
        t=world.t,
        v_in=v_in,
        v_out=rot_cw.apply(world.vel),
        compression=max(params.ls - length for length in world.arm_lengths),
    )
