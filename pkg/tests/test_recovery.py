import math
import typing

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from drr import errors, recovery
from drr.impl.config import RecoveryConfig
from drr.impl.geometry import Pose2, Rot2, Vec2
from drr.impl.recovery import RecoveryFallback, RecoveryPlan, RecoveryState
from drr.impl.robot import ArmReading, CollisionEvent, CollisionFrame, RobotParams

FACING_X = CollisionFrame(Vec2(0.0, 0.0), Vec2(1.0, 0.0))
"""A frame whose axes match the world."""

AGAINST_X = CollisionFrame(Vec2(0.0, 0.0), Vec2(-1.0, 0.0))
"""The frame of a wall in front of a robot facing +x."""

REST = RecoveryState(0.0, 0.0, 0.0, 0.0)


def _plan(controls: list[list[float]], **kwargs: typing.Any) -> RecoveryPlan:
    return RecoveryPlan(
        x0=0.0,
        v0=Vec2(0.0, 0.0),
        vT=Vec2(0.0, 0.0),
        states=np.zeros((len(controls) + 1, 4)),
        controls=np.array(controls),
        dt=0.1,
        **kwargs,
    )


class TestInitialOffset:
    def test_front_arm(self):
        x0 = recovery.initial_offset(Vec2(0.012, 0.0), Rot2(0.0), AGAINST_X)

        assert x0 == pytest.approx(-0.012)

    def test_no_deformation(self):
        assert recovery.initial_offset(Vec2(0.0, 0.0), Rot2(0.0), AGAINST_X) == 0.0

    def test_yawed_body(self):
        x0 = recovery.initial_offset(Vec2(0.0, -0.012), Rot2(math.pi / 2), AGAINST_X)

        assert x0 == pytest.approx(-0.012)

    def test_positive(self):
        with pytest.raises(errors.PositiveOffsetError) as exc:
            recovery.initial_offset(Vec2(0.012, 0.0), Rot2(0.0), FACING_X)

        assert exc.value.value == pytest.approx(0.012)


class TestTerminalVelocity:
    def test_below_caps(self):
        vT = recovery.terminal_velocity(
            Vec2(0.0, 0.0), Vec2(1.0, 0.0), 0.0, 2.0, FACING_X, 0.7
        )

        assert vT.x == pytest.approx(0.5)
        assert vT.y == pytest.approx(0.0)

    def test_normal_clamp(self):
        vT = recovery.terminal_velocity(
            Vec2(0.0, 0.0), Vec2(-0.2, 0.3), 1.0, 2.0, FACING_X, 0.7
        )

        assert vT.x == 0.0
        assert vT.y == pytest.approx(0.3)

    def test_renormalized(self):
        vT = recovery.terminal_velocity(
            Vec2(0.0, 0.0), Vec2(0.8, 0.6), 0.0, 1.0, FACING_X, 0.7
        )

        assert vT.x == pytest.approx(0.56)
        assert vT.y == pytest.approx(0.42)

    def test_rotated_frame(self):
        vT = recovery.terminal_velocity(
            Vec2(0.0, 0.0), Vec2(-1.0, 0.0), 0.0, 2.0, AGAINST_X, 0.7
        )

        assert vT.x == pytest.approx(0.5)
        assert vT.y == pytest.approx(0.0, abs=1e-12)

    def test_segment_over(self):
        with pytest.raises(ValueError):
            recovery.terminal_velocity(
                Vec2(0.0, 0.0), Vec2(1.0, 0.0), 2.0, 2.0, FACING_X, 0.7
            )


class TestPlanRecovery:
    def test_zero(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = recovery.plan_recovery(
            0.0, Vec2(0.0, 0.0), Vec2(0.0, 0.0), 0.0, params, recovery_config
        )

        assert plan.N == 5
        assert plan.horizon == pytest.approx(0.5)
        assert plan.fallback is RecoveryFallback.NONE
        np.testing.assert_allclose(plan.states, 0.0, atol=1e-9)
        np.testing.assert_allclose(plan.controls, 0.0, atol=1e-9)

    def test_impact(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = recovery.plan_recovery(
            -0.012, Vec2(-0.5, 0.0), Vec2(0.3, 0.0), 0.0, params, recovery_config
        )

        x_T, _, vx_T, vy_T = plan.states[-1]
        assert x_T == pytest.approx(0.0, abs=1e-6)
        assert vx_T == pytest.approx(0.3, abs=1e-6)
        assert vy_T == pytest.approx(0.0, abs=1e-6)
        np.testing.assert_allclose(plan.states[:, 1], 0.0, atol=1e-9)

        # The first knot only depends on the initial state.
        band = plan.states[2:, 0]
        assert np.all(band >= -params.travel - 1e-7)
        assert np.all(band <= 1e-7)

    def test_dynamics_hold(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = recovery.plan_recovery(
            -0.01, Vec2(-0.2, 0.1), Vec2(0.2, 0.2), 0.0, params, recovery_config
        )
        Phi, B = recovery.discrete_model(params, plan.dt)

        for k in range(plan.N):
            np.testing.assert_allclose(
                plan.states[k + 1], Phi @ plan.states[k] + B @ plan.controls[k], atol=1e-9
            )

    @settings(max_examples=20, deadline=None)
    @given(
        st.floats(-0.015, 0.0),
        st.floats(-0.6, 0.6),
        st.floats(-0.6, 0.6),
        st.floats(0.0, 0.5),
        st.floats(-0.5, 0.5),
    )
    def test_mirror_symmetry(
        self, x0: float, v0x: float, v0y: float, vTx: float, vTy: float
    ):
        params, cfg = RobotParams(), RecoveryConfig()
        plan = recovery.plan_recovery(x0, Vec2(v0x, v0y), Vec2(vTx, vTy), 0.0, params, cfg)
        mirror = recovery.plan_recovery(
            x0, Vec2(v0x, -v0y), Vec2(vTx, -vTy), 0.0, params, cfg
        )

        np.testing.assert_allclose(mirror.controls[:, 0], plan.controls[:, 0], atol=1e-6)
        np.testing.assert_allclose(mirror.controls[:, 1], -plan.controls[:, 1], atol=1e-6)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(-0.015, 0.0),
        st.floats(-0.6, 0.6),
        st.floats(-0.6, 0.6),
        st.floats(0.0, 0.7),
        st.floats(-0.7, 0.7),
    )
    def test_band_and_target(
        self, x0: float, v0x: float, v0y: float, vTx: float, vTy: float
    ):
        params, cfg = RobotParams(), RecoveryConfig()
        plan = recovery.plan_recovery(x0, Vec2(v0x, v0y), Vec2(vTx, vTy), 0.0, params, cfg)

        # Knot 1 is set by x0 and v0 alone, so the band starts at knot 2.
        band = plan.states[2:, 0]
        assert np.all(band <= 1e-6)
        assert np.all(band >= -params.travel - 1e-6)
        x_T, _, vx_T, vy_T = plan.states[-1]
        assert abs(x_T) <= 1e-6
        assert abs(vx_T - vTx) <= 1e-6
        assert abs(vy_T - vTy) <= 1e-6

    def test_matches_continuous_plant(self, params: RobotParams):
        cfg = RecoveryConfig(T=0.05, f=1000.0)
        plan = recovery.plan_recovery(
            -0.0005, Vec2(-0.02, 0.01), Vec2(0.02, 0.01), 0.0, params, cfg
        )
        Phi, B = recovery.discrete_model(params, plan.dt)

        block = np.zeros((6, 6))
        block[:4, :4] = (Phi - np.eye(4)) / plan.dt
        block[:4, 4:] = B / plan.dt
        exact = expm(block * plan.dt)
        s = plan.states[0]
        for k in range(plan.N):
            s = exact[:4, :4] @ s + exact[:4, 4:] @ plan.controls[k]
            np.testing.assert_allclose(s, plan.states[k + 1], atol=1e-3)

    @settings(max_examples=50, deadline=None)
    @given(
        st.floats(-0.015, 0.0),
        st.floats(-0.5, 0.5),
        st.floats(0.0, 0.5),
        st.floats(0.1, 10.0),
    )
    def test_input_weight_monotone(self, x0: float, v0x: float, vTx: float, h: float):
        params = RobotParams()
        light = recovery.plan_recovery(
            x0, Vec2(v0x, 0.1), Vec2(vTx, 0.0), 0.0, params, RecoveryConfig(h=h)
        )
        heavy = recovery.plan_recovery(
            x0, Vec2(v0x, 0.1), Vec2(vTx, 0.0), 0.0, params, RecoveryConfig(h=2.0 * h)
        )

        effort = float(np.sum(light.controls**2))
        assert float(np.sum(heavy.controls**2)) <= effort * (1.0 + 1e-6) + 1e-9

    def test_positive_offset(self, params: RobotParams, recovery_config: RecoveryConfig):
        with pytest.raises(ValueError):
            recovery.plan_recovery(
                0.01, Vec2(0.0, 0.0), Vec2(0.0, 0.0), 0.0, params, recovery_config
            )

    def test_inward_target(self, params: RobotParams, recovery_config: RecoveryConfig):
        with pytest.raises(ValueError):
            recovery.plan_recovery(
                -0.01, Vec2(0.0, 0.0), Vec2(-0.1, 0.0), 0.0, params, recovery_config
            )


class TestFeedbackLinearize:
    @given(
        st.floats(-0.015, 0.0),
        st.floats(-1.0, 1.0),
        st.floats(-1.0, 1.0),
        st.floats(-5.0, 5.0),
        st.floats(-5.0, 5.0),
    )
    def test_no_friction_no_obliquity(
        self, x: float, v_x: float, v_y: float, nu_x: float, nu_y: float
    ):
        params = RobotParams(mu=0.0)
        u = recovery.feedback_linearize(
            Vec2(nu_x, nu_y), RecoveryState(x, 0.0, v_x, v_y), 0.0, params
        )

        assert u == Vec2(nu_x, nu_y)

    def test_no_sliding(self, params: RobotParams):
        theta = 0.3
        state = RecoveryState(-0.01, 0.0, -0.2, 0.0)
        u = recovery.feedback_linearize(Vec2(1.0, 2.0), state, theta, params)

        tan = math.tan(theta)
        expected = 2.0 + params.k * tan * state.x / params.m + params.c * tan * state.v_x / params.m
        assert u.x == 1.0
        assert u.y == pytest.approx(expected)

    def test_sliding(self, params: RobotParams):
        theta, x, v_x, v_y = 0.2, -0.01, -0.3, 0.2
        u = recovery.feedback_linearize(
            Vec2(0.0, 0.0), RecoveryState(x, 0.0, v_x, v_y), theta, params
        )

        k, c, m, mu = 2310.0, 100.0, 6.0, 0.3
        friction = mu * k * (0.030 - 0.0415) * math.cos(theta)
        expected = (
            (mu + math.tan(theta)) * (k * x + c * v_x) / m + friction / m
        )
        assert u.y == pytest.approx(expected)

    def test_cancels_frame_dynamics(self, params: RobotParams):
        state = RecoveryState(-0.008, 0.0, 0.1, -0.3)
        nu = Vec2(0.4, -0.7)
        u = recovery.feedback_linearize(nu, state, 0.25, params)
        dv = recovery.frame_dynamics(state, u, 0.25, params)

        assert dv.y == pytest.approx(nu.y)
        assert dv.x == pytest.approx(
            -params.k / params.m * state.x - params.c / params.m * state.v_x + nu.x
        )

    @settings(max_examples=1000, deadline=None)
    @given(
        st.floats(-0.015, 0.0),
        st.floats(-1.0, 1.0),
        st.floats(-1.0, 1.0),
        st.floats(-5.0, 5.0),
        st.floats(-5.0, 5.0),
        st.floats(-1.2, 1.2),
    )
    def test_linearizes_exactly(
        self, x: float, v_x: float, v_y: float, nu_x: float, nu_y: float, theta: float
    ):
        params = RobotParams()
        state = RecoveryState(x, 0.0, v_x, v_y)
        u = recovery.feedback_linearize(Vec2(nu_x, nu_y), state, theta, params)
        dv = recovery.frame_dynamics(state, u, theta, params)

        assert dv.y == pytest.approx(nu_y, abs=1e-9)
        assert dv.x == pytest.approx(
            -params.k / params.m * x - params.c / params.m * v_x + nu_x, abs=1e-9
        )

    def test_round_off_sliding(self, params: RobotParams):
        state = RecoveryState(-0.01, 0.0, -0.3, 2.7e-17)
        u = recovery.feedback_linearize(Vec2(0.0, 0.7), state, 0.0, params)

        assert u == Vec2(0.0, 0.7)

    def test_grazing(self, params: RobotParams):
        with pytest.raises(ValueError):
            recovery.feedback_linearize(Vec2(0.0, 0.0), REST, math.pi / 2, params)


class TestOrientationControl:
    def test_at_setpoint(self, recovery_config: RecoveryConfig):
        assert recovery.orientation_control(0.4, 0.4, 0.0, recovery_config) == 0.0

    def test_heading_error(self, recovery_config: RecoveryConfig):
        assert recovery.orientation_control(
            0.1, 0.0, 0.0, recovery_config
        ) == pytest.approx(-0.19967, abs=1e-5)

    def test_damping(self, recovery_config: RecoveryConfig):
        assert recovery.orientation_control(
            0.0, 0.0, 0.5, recovery_config
        ) == pytest.approx(-0.5)


class TestCommandAt:
    def test_pretension_compensation(self, recovery_config: RecoveryConfig):
        params = RobotParams(mu=0.0)
        plan = recovery.plan_recovery(
            0.0, Vec2(0.0, 0.0), Vec2(0.0, 0.0), 0.0, params, recovery_config
        )
        cmd = recovery.command_at(plan, 0.0, REST, AGAINST_X, params, recovery_config)

        expected = AGAINST_X.rot_wc.apply(Vec2(params.k / params.m * (params.ls - params.l0), 0.0))
        assert cmd.a_in.x == pytest.approx(expected.x, abs=1e-6)
        assert cmd.a_in.y == pytest.approx(expected.y, abs=1e-6)
        assert cmd.u_theta == 0.0

    def test_indexing(self, recovery_config: RecoveryConfig):
        params = RobotParams(mu=0.0)
        plan = _plan([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [0.0, 0.0], [0.0, 0.0]])

        first = recovery.command_at(plan, 0.0, REST, FACING_X, params, recovery_config)
        second = recovery.command_at(plan, 0.15, REST, FACING_X, params, recovery_config)
        assert first.a_in.x == pytest.approx(1.0 + params.pretension_accel)
        assert second.a_in.x == pytest.approx(2.0 + params.pretension_accel)

    def test_release_floor(self, recovery_config: RecoveryConfig):
        params = RobotParams(mu=0.0)
        plan = _plan([[-3.0, 0.0]] * 5)
        pressed = RecoveryState(-0.002, 0.0, 0.0, 0.0)
        cmd = recovery.command_at(plan, 0.0, pressed, FACING_X, params, recovery_config)

        floor = (1.0 - recovery_config.release) * params.k * pressed.x / params.m
        assert cmd.a_in.x == pytest.approx(floor + params.pretension_accel)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(-0.015, 0.0),
        st.floats(-0.7, 0.7),
        st.floats(-0.7, 0.7),
        st.floats(-20.0, 20.0),
    )
    def test_spring_keeps_pushing(self, x: float, v_x: float, v_y: float, nu_x: float):
        params, cfg = RobotParams(mu=0.0), RecoveryConfig()
        plan = _plan([[nu_x, 0.0]] * 5)
        cmd = recovery.command_at(
            plan, 0.0, RecoveryState(x, 0.0, v_x, v_y), FACING_X, params, cfg
        )
        assume(cmd.a_in.x < params.a_in_max - 1e-9)

        accel = (
            cmd.a_in.x
            - params.pretension_accel
            - (params.k * x + params.c * v_x) / params.m
        )
        assert accel >= -cfg.release * params.k / params.m * x - 1e-9

    def test_round_off_sliding(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = _plan([[0.0, 0.5]] * 5)
        still = RecoveryState(-0.005, 0.0, -0.3, 0.0)
        jitter = RecoveryState(-0.005, 0.0, -0.3, 2.7e-17)

        a = recovery.command_at(plan, 0.0, still, FACING_X, params, recovery_config)
        b = recovery.command_at(plan, 0.0, jitter, FACING_X, params, recovery_config)
        assert b.a_in == a.a_in
        assert b.a_in.y == pytest.approx(0.5)

    def test_detached(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = _plan([[-3.0, 0.5]] * 5)
        free = RecoveryState(0.01, 0.0, 0.2, 0.0, in_contact=False)
        cmd = recovery.command_at(plan, 0.0, free, FACING_X, params, recovery_config)

        assert cmd.a_in.x == 0.0
        assert cmd.a_in.y == pytest.approx(0.5)

    def test_detached_never_pushes_back(
        self, params: RobotParams, recovery_config: RecoveryConfig
    ):
        plan = _plan([[0.0, 0.0]] * 5)
        free = RecoveryState(0.0005, 0.0, 0.05, 0.0, in_contact=False)
        pressed = RecoveryState(0.0, 0.0, 0.0, 0.0)

        assert recovery.command_at(
            plan, 0.3, free, AGAINST_X, params, recovery_config
        ).a_in == Vec2(0.0, 0.0)
        # In contact the same plan pushes into the wall, along +x.
        assert recovery.command_at(
            plan, 0.3, pressed, AGAINST_X, params, recovery_config
        ).a_in.x == pytest.approx(-params.pretension_accel)

    def test_clamped(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = _plan([[40.0, 30.0]] * 5)
        free = RecoveryState(0.0, 0.0, 0.0, 0.0, in_contact=False)
        cmd = recovery.command_at(plan, 0.0, free, FACING_X, params, recovery_config)

        assert cmd.a_in.norm() == pytest.approx(params.a_in_max)
        assert cmd.a_in.x == pytest.approx(4.0)

    def test_passive(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = _plan([[1.0, 1.0]] * 5, fallback=RecoveryFallback.PASSIVE)
        cmd = recovery.command_at(plan, 0.2, REST, FACING_X, params, recovery_config)

        assert cmd.a_in == Vec2(0.0, 0.0)

    def test_out_of_horizon(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = _plan([[0.0, 0.0]] * 5)

        with pytest.raises(errors.PlanExpiredError) as exc:
            recovery.command_at(plan, 0.6, REST, FACING_X, params, recovery_config)
        assert exc.value.horizon == pytest.approx(0.5)

        with pytest.raises(ValueError):
            recovery.command_at(plan, -0.1, REST, FACING_X, params, recovery_config)

        recovery.command_at(plan, 0.5, REST, FACING_X, params, recovery_config)


class TestRecover:
    def _event(self, vel: Vec2) -> CollisionEvent:
        return CollisionEvent(
            t_c=1.0,
            readings=(ArmReading(0, Vec2(0.012, 0.0)),),
            pose_at_impact=Pose2(Vec2(0.0, 0.0), 0.0),
            vel_at_impact=vel,
        )

    def test_recover(self, params: RobotParams, recovery_config: RecoveryConfig):
        plan = recovery.recover(
            self._event(Vec2(0.3, 0.0)), AGAINST_X, params, recovery_config, Vec2(0.3, 0.0)
        )

        assert plan.fallback is RecoveryFallback.NONE
        assert plan.x0 == pytest.approx(-0.012)
        assert plan.v0.x == pytest.approx(-0.3)
        assert plan.states[-1][2] == pytest.approx(0.3, abs=1e-6)

    def test_passive_fallback(self, params: RobotParams):
        cfg = RecoveryConfig(T=0.1, f=10.0)
        plan = recovery.recover(
            self._event(Vec2(0.3, 0.0)), AGAINST_X, params, cfg, Vec2(0.3, 0.0)
        )

        assert plan.fallback is RecoveryFallback.PASSIVE
        assert plan.passive
        np.testing.assert_allclose(plan.controls, 0.0)

    def test_disagreeing_frame(self, params: RobotParams, recovery_config: RecoveryConfig):
        with pytest.raises(errors.PositiveOffsetError):
            recovery.recover(
                self._event(Vec2(0.3, 0.0)), FACING_X, params, recovery_config, Vec2(0.0, 0.0)
            )
