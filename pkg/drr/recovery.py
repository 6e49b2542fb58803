"""Recovery.

The deformation recovery controller. After a collision the controller plans,
over a fixed horizon, the virtual inputs of the feedback linearized contact
dynamics that detach the robot and hand it to the replanner with a chosen
velocity.

All the planning happens in the collision frame: `x` along the normal (never
positive while the arm touches) and `y` along the tangent.
"""

from __future__ import annotations

import math
import typing

import numpy as np
import numpy.typing as npt
from loguru import logger

from drr.contact import compound_deformation
from drr.errors import PlanExpiredError, PositiveOffsetError, QpError
from drr.impl.config import RecoveryConfig
from drr.impl.geometry import Rot2, Vec2
from drr.impl.recovery import (
    BodyCommand,
    RecoveryFallback,
    RecoveryPlan,
    RecoveryState,
)
from drr.impl.robot import CollisionEvent, CollisionFrame, RobotParams
from drr.qp import QpProblem, solve_qp

__all__ = (
    "command_at",
    "discrete_model",
    "feedback_linearize",
    "frame_dynamics",
    "initial_offset",
    "orientation_control",
    "plan_recovery",
    "recover",
    "terminal_velocity",
)

FloatArray: typing.TypeAlias = npt.NDArray[np.float64]

_OFFSET_TOL: typing.Final[float] = 1e-9
_GRADIENT_TOL: typing.Final[float] = 1e-12
_SLIDING_TOL: typing.Final[float] = 1e-9


def _sign(value: float) -> float:
    if abs(value) <= _SLIDING_TOL:
        return 0.0

    return math.copysign(1.0, value)


def initial_offset(readings_body: Vec2, rot_wb: Rot2, frame: CollisionFrame) -> float:
    """The initial normal offset of the recovery.

    The body frame deformation is brought to the world with `rot_wb`, then
    to the collision frame; its normal component is the offset.

    Parameters
    ----------
    readings_body
        The compound deformation, in the body frame.
    rot_wb
        The body to world rotation at detection.
    frame
        The collision frame.

    Returns
    -------
    float
        The offset, in `[-(ls - le), 0]`.

    Raises
    ------
    PositiveOffsetError
        Raised when the offset is positive.
    """
    world = rot_wb.apply(readings_body)
    x0 = frame.rot_wc.inverse().apply(world).x
    if x0 > _OFFSET_TOL:
        raise PositiveOffsetError(x0)

    return min(x0, 0.0)


def terminal_velocity(
    p_c_world: Vec2,
    p_next_world: Vec2,
    tau_c: float,
    dt_segment: float,
    frame: CollisionFrame,
    v_max: float,
) -> Vec2:
    """The velocity the recovery should end with.

    The average velocity that would still reach the next waypoint in time,
    expressed in the collision frame. Its normal component is clamped so it
    never points into the obstacle, and the whole vector is rescaled to
    `v_max` when faster.

    Example
    -------
    ```py
    frame = CollisionFrame(Vec2(0, 0), Vec2(1, 0))
    terminal_velocity(Vec2(0, 0), Vec2(1, 0), 0.0, 2.0, frame, 0.7)  # Vec2(0.5, 0.0)
    ```

    Raises
    ------
    ValueError
        Raised when `tau_c` is not before the end of the segment.
    """
    remaining = dt_segment - tau_c
    if remaining <= 0.0:
        raise ValueError("The collision must happen before the end of its segment.")

    raw = frame.rot_wc.inverse().apply((p_next_world - p_c_world) / remaining)
    clamped = Vec2(max(raw.x, 0.0), raw.y)
    speed = clamped.norm()
    if speed > v_max:
        clamped = clamped * (v_max / speed)

    return clamped


def discrete_model(
    params: RobotParams, dt: float
) -> tuple[FloatArray, FloatArray]:
    """The forward Euler model `s[k+1] = Phi s[k] + B nu[k]`.

    Returns
    -------
    tuple[FloatArray, FloatArray]
        `Phi = I + F dt` and `B = G dt`.
    """
    F = np.array(
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-params.k / params.m, 0.0, -params.c / params.m, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )
    G = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return np.eye(4) + F * dt, G * dt


def _condense(
    Phi: FloatArray, B: FloatArray, s0: FloatArray, N: int
) -> tuple[list[FloatArray], list[FloatArray]]:
    """Express every state as `S[k] @ nu + c[k]`."""
    S: list[FloatArray] = [np.zeros((4, 2 * N))]
    c: list[FloatArray] = [s0.copy()]
    for k in range(N):
        S_next = Phi @ S[k]
        S_next[:, 2 * k : 2 * k + 2] += B
        S.append(S_next)
        c.append(Phi @ c[k])

    return S, c


def plan_recovery(
    x0: float,
    v0: Vec2,
    vT: Vec2,
    theta: float,
    params: RobotParams,
    cfg: RecoveryConfig,
    *,
    heading_d: float = 0.0,
) -> RecoveryPlan:
    """Plan the recovery.

    The inputs are condensed out of the dynamics, so the quadratic program
    runs over the `2N` virtual inputs only. The contact bound is applied at
    every interior knot the inputs can influence; the terminal knot is held
    at `x = 0` with the target velocity, and `y` is left free.

    Parameters
    ----------
    x0
        The initial normal offset, in m.
    v0
        The velocity at detection, in the collision frame.
    vT
        The terminal velocity, in the collision frame.
    theta
        The contact angle.
    params
        The robot parameters.
    cfg
        The recovery configuration.
    heading_d
        The heading to hold.

    Returns
    -------
    RecoveryPlan
        The optimal plan.

    Raises
    ------
    ValueError
        Raised when `x0` lies outside of the contact band, or `vT` points into the obstacle.
    QpInfeasibleError
        Raised when the terminal target cannot be reached within the band.
    MaxIterError
        Raised when the solver ran out of iterations.
    """
    lower = -params.travel * math.cos(theta)
    if x0 > 0.0 or x0 < lower - _OFFSET_TOL:
        raise ValueError(f"x0 = {x0} lies outside of [{lower}, 0].")
    if vT.x < 0.0:
        raise ValueError("The terminal velocity must not point into the obstacle.")

    N, dt = cfg.N, cfg.dt
    Phi, B = discrete_model(params, dt)
    s0 = np.array([x0, 0.0, v0.x, v0.y])
    S, c = _condense(Phi, B, s0, N)

    Gamma = cfg.gamma * np.diag([1.0, 1.0, 0.0, 0.0])
    P = 2.0 * dt * cfg.h * np.eye(2 * N)
    q = np.zeros(2 * N)
    for k in range(N):
        P += 2.0 * dt * S[k].T @ Gamma @ S[k]
        q += 2.0 * dt * S[k].T @ Gamma @ c[k]

    terminal = [0, 2, 3]
    A = S[N][terminal, :]
    b = np.array([0.0, vT.x, vT.y]) - c[N][terminal]

    rows: list[FloatArray] = []
    lo: list[float] = []
    hi: list[float] = []
    for k in range(1, N):
        gradient = S[k][0]
        if np.max(np.abs(gradient)) <= _GRADIENT_TOL:
            continue
        rows.append(gradient)
        lo.append(lower - c[k][0])
        hi.append(-c[k][0])

    C = np.array(rows) if rows else np.zeros((0, 2 * N))
    problem = QpProblem(
        P=0.5 * (P + P.T), q=q, A=A, b=b, C=C, lo=np.array(lo), hi=np.array(hi)
    )
    solution = solve_qp(problem)
    solution.raise_for_status()

    nu = solution.x
    states = np.array([S[k] @ nu + c[k] for k in range(N + 1)])
    logger.debug(
        "Planned a recovery from x0={:.4f} to vT={} in {} iterations.",
        x0,
        vT.dump(),
        solution.iterations,
    )
    return RecoveryPlan(
        x0=x0,
        v0=v0,
        vT=vT,
        states=states,
        controls=nu.reshape(N, 2),
        dt=dt,
        theta=theta,
        heading_d=heading_d,
    )


def _passive_plan(
    x0: float,
    v0: Vec2,
    theta: float,
    params: RobotParams,
    cfg: RecoveryConfig,
    heading_d: float,
) -> RecoveryPlan:
    Phi, _ = discrete_model(params, cfg.dt)
    states = [np.array([x0, 0.0, v0.x, v0.y])]
    for _ in range(cfg.N):
        states.append(Phi @ states[-1])

    return RecoveryPlan(
        x0=x0,
        v0=v0,
        vT=Vec2(float(states[-1][2]), float(states[-1][3])),
        states=np.array(states),
        controls=np.zeros((cfg.N, 2)),
        dt=cfg.dt,
        theta=theta,
        heading_d=heading_d,
        fallback=RecoveryFallback.PASSIVE,
    )


def recover(
    event: CollisionEvent,
    frame: CollisionFrame,
    params: RobotParams,
    cfg: RecoveryConfig,
    vT: Vec2,
) -> RecoveryPlan:
    """Plan the recovery of a detected collision.

    When the requested terminal velocity is out of reach, the plan is
    retried with the robot coming to rest on the surface, and when that
    fails as well, the robot is left to the pre-tensioned spring.

    Parameters
    ----------
    event
        The collision.
    frame
        Its collision frame.
    params
        The robot parameters.
    cfg
        The recovery configuration.
    vT
        The requested terminal velocity, in the collision frame.

    Returns
    -------
    RecoveryPlan
        The plan; its `fallback` tells which target was used.

    Raises
    ------
    PositiveOffsetError
        Raised when the frame and the readings disagree.
    """
    x0 = initial_offset(
        compound_deformation(event.readings), event.pose_at_impact.rotation, frame
    )
    x0 = max(x0, -params.travel * math.cos(frame.theta))
    v0 = frame.rot_wc.inverse().apply(event.vel_at_impact)
    heading_d = event.pose_at_impact.heading

    try:
        return plan_recovery(x0, v0, vT, frame.theta, params, cfg, heading_d=heading_d)
    except QpError as e:
        logger.warning("Recovery to vT={} failed ({!r}); retrying at rest.", vT.dump(), e)

    try:
        plan = plan_recovery(
            x0, v0, Vec2(0.0, 0.0), frame.theta, params, cfg, heading_d=heading_d
        )
    except QpError as e:
        logger.warning("Recovery at rest failed ({!r}); leaving it to the spring.", e)
        return _passive_plan(x0, v0, frame.theta, params, cfg, heading_d)

    return RecoveryPlan(
        x0=plan.x0,
        v0=plan.v0,
        vT=plan.vT,
        states=plan.states,
        controls=plan.controls,
        dt=plan.dt,
        theta=plan.theta,
        heading_d=plan.heading_d,
        fallback=RecoveryFallback.ZERO_VELOCITY,
    )


def _coupling(state: RecoveryState, theta: float, params: RobotParams) -> float:
    """The friction and obliquity term of the tangential contact dynamics."""
    s = _sign(state.v_y)
    gain = params.mu * s + math.tan(theta)
    f0 = params.mu * params.k * s * (params.ls - params.l0) * math.cos(theta)
    return (params.k * gain * state.x + f0) / params.m + params.c * gain * state.v_x / params.m


def frame_dynamics(
    state: RecoveryState, u: Vec2, theta: float, params: RobotParams
) -> Vec2:
    """The contact dynamics in the collision frame, as `(dv_x, dv_y)`.

    This is the model the controller cancels; `u` excludes the pre-tension
    compensation.
    """
    dv_x = -params.k / params.m * state.x - params.c / params.m * state.v_x + u.x
    return Vec2(dv_x, u.y - _coupling(state, theta, params))


def feedback_linearize(
    nu: Vec2, state: RecoveryState, theta: float, params: RobotParams
) -> Vec2:
    """Map a virtual input to the actual input.

    The sliding sign is zero for `|v_y| <= 1e-9`, so no friction is
    compensated without tangential motion.

    Example
    -------
    ```py
    params = RobotParams(mu=0.0)
    feedback_linearize(Vec2(1, 2), RecoveryState(-0.01, 0, 0.1, 0.2), 0.0, params)
    # Vec2(x=1.0, y=2.0)
    ```

    Raises
    ------
    ValueError
        Raised when `|theta| >= pi / 2`.
    """
    if abs(theta) >= math.pi / 2:
        raise ValueError("theta must lie in (-pi/2, pi/2).")

    return Vec2(nu.x, nu.y + _coupling(state, theta, params))


def orientation_control(
    heading: float, heading_d: float, omega_z: float, cfg: RecoveryConfig
) -> float:
    """The yaw rate command holding the heading of the collision instant."""
    return -cfg.K_r * math.sin(heading - heading_d) - cfg.K_omega * omega_z


def _clamp(a: Vec2, limit: float) -> Vec2:
    norm = a.norm()
    if norm > limit:
        return a * (limit / norm)

    return a


def command_at(
    plan: RecoveryPlan,
    t_rel: float,
    state: RecoveryState,
    frame: CollisionFrame,
    params: RobotParams,
    cfg: RecoveryConfig,
) -> BodyCommand:
    """The command of a recovery plan at a time.

    While an arm touches the obstacle the virtual input of the current step
    is linearized against the live state and the pre-tension compensation is
    added along the normal. The normal input is floored so that at least
    `cfg.release` of the spring's restoring acceleration remains, which keeps
    the arm from being held compressed. Once the arm is free the planned acceleration of
    the step is followed instead, never pointing back into the surface. A
    passive plan commands no acceleration at all.

    Parameters
    ----------
    plan
        The recovery plan.
    t_rel
        The time since the collision, in s.
    state
        The live state, in the collision frame.
    frame
        The collision frame.
    params
        The robot parameters.
    cfg
        The recovery configuration.

    Returns
    -------
    BodyCommand
        The world frame command, with the acceleration clamped to `a_in_max`.

    Raises
    ------
    PlanExpiredError
        Raised when `t_rel` lies past the horizon.
    ValueError
        Raised when `t_rel` is negative.
    """
    if t_rel > plan.horizon + _OFFSET_TOL:
        raise PlanExpiredError(t_rel, plan.horizon)
    if t_rel < 0.0:
        raise ValueError("t_rel must not be negative.")

    u_theta = orientation_control(state.heading, plan.heading_d, state.omega, cfg)
    if plan.passive:
        return BodyCommand(Vec2(0.0, 0.0), u_theta)

    step = min(math.floor(t_rel / plan.dt + 1e-9), plan.N - 1)
    nu = Vec2(float(plan.controls[step, 0]), float(plan.controls[step, 1]))
    if state.in_contact:
        # The spring keeps at least `release` of its restoring acceleration.
        floor = (params.c * state.v_x + (1.0 - cfg.release) * params.k * state.x) / params.m
        nu = Vec2(max(nu.x, floor), nu.y)
        u = feedback_linearize(nu, state, plan.theta, params)
        a_frame = Vec2(u.x + params.pretension_accel, u.y)
    else:
        x, _, v_x, _ = plan.states[step]
        planned = -params.k / params.m * x - params.c / params.m * v_x + nu.x
        a_frame = Vec2(max(float(planned), 0.0), nu.y)

    a_world = frame.rot_wc.apply(a_frame)
    return BodyCommand(_clamp(a_world, params.a_in_max), u_theta)
