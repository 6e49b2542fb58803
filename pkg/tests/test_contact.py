import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drr import contact, errors
from drr.impl.geometry import Polygon, Pose2, Vec2
from drr.impl.robot import ArmReading, CollisionEvent, FrameMode, RobotParams

FACE = Polygon.rectangle(1.0, -1.0, 2.0, 1.0)
"""A wall whose face `x = 1` looks toward -x."""

FLOOR = Polygon.rectangle(-1.0, -2.0, 1.0, 0.0)
"""A block whose face `y = 0` looks toward +y."""


def _reading(arm: int, x: float, y: float) -> ArmReading:
    return ArmReading(arm, Vec2(x, y))


class TestArmCompression:
    def test_free(self, params: RobotParams):
        pose = Pose2(Vec2(0.0, 0.0))

        for arm in range(4):
            assert contact.arm_compression(pose, arm, params, [FACE]) == params.ls

    def test_perpendicular(self, params: RobotParams):
        pose = Pose2(Vec2(1.0 - (params.rho - 0.012), 0.0))

        assert contact.arm_compression(pose, 0, params, [FACE]) == pytest.approx(
            params.ls - 0.012, abs=1e-12
        )
        assert contact.arm_compression(pose, 1, params, [FACE]) == params.ls

    def test_over_compressed(self, params: RobotParams):
        pose = Pose2(Vec2(1.0 - (params.rho - 0.02), 0.0))
        probe = contact.probe_arm(pose, 0, params, [FACE])

        assert probe.over_compressed
        assert probe.length == params.le
        assert probe.raw_length == pytest.approx(params.ls - 0.02, abs=1e-12)
        assert contact.arm_compression(pose, 0, params, [FACE]) == params.le

    def test_oblique(self, params: RobotParams):
        phi = 0.2
        pose = Pose2(Vec2(1.005 - params.rho * math.cos(phi), 0.0), phi)
        probe = contact.probe_arm(pose, 0, params, [FACE])

        assert probe.in_contact
        assert probe.normal == Vec2(-1.0, 0.0)
        assert probe.rate_factor == pytest.approx(1.0 / math.cos(phi))
        assert probe.length == pytest.approx(params.ls - 0.005 / math.cos(phi))

    def test_arm_rate(self, params: RobotParams):
        pose = Pose2(Vec2(1.0 - (params.rho - 0.005), 0.0))
        probe = contact.probe_arm(pose, 0, params, [FACE])

        assert contact.arm_rate(probe, Vec2(0.1, 0.0)) == pytest.approx(-0.1)
        assert contact.arm_rate(probe, Vec2(0.0, 0.1)) == pytest.approx(0.0)

        free = contact.probe_arm(Pose2(Vec2(0.0, 0.0)), 0, params, [FACE])
        assert contact.arm_rate(free, Vec2(0.1, 0.0)) == 0.0


class TestForces:
    def test_first_touch(self, params: RobotParams):
        assert contact.contact_force(0.030, 0.0, params) == pytest.approx(26.565)

    def test_neutral_length(self, params: RobotParams):
        assert contact.contact_force(params.l0, 0.0, params) == 0.0

    def test_voigt(self, params: RobotParams):
        assert contact.contact_force(0.020, -0.1, params) == pytest.approx(59.665)

    def test_rebound_never_pulls(self, params: RobotParams):
        assert contact.contact_force(0.029, 10.0, params) == 0.0

    @given(st.floats(0.015, 0.05), st.floats(-5.0, 5.0))
    def test_never_negative(self, length: float, rate: float):
        assert contact.contact_force(length, rate, RobotParams()) >= 0.0

    def test_friction(self, params: RobotParams):
        normal = Vec2(-1.0, 0.0)

        sliding = contact.friction_force(10.0, normal, Vec2(0.0, 0.5), params)
        assert sliding.x == pytest.approx(0.0)
        assert sliding.y == pytest.approx(-3.0)

        assert contact.friction_force(10.0, normal, Vec2(0.3, 0.0), params) == Vec2(
            0.0, 0.0
        )


class TestSense:
    def test_rest(self, params: RobotParams):
        readings = contact.sense([params.ls] * 4, params)

        assert [r.deflection_body for r in readings] == [Vec2(0.0, 0.0)] * 4

    def test_front_arm(self, params: RobotParams):
        readings = contact.sense([params.ls - 0.012, params.ls, params.ls, params.ls], params)

        assert readings[0].arm_index == 0
        assert readings[0].deflection_body.x == pytest.approx(0.012)
        assert readings[0].deflection_body.y == 0.0

    def test_independent_arms(self, params: RobotParams):
        readings = contact.sense(
            [params.ls - 0.01, params.ls - 0.01, params.ls, params.ls], params
        )

        assert readings[0].deflection_body.x == pytest.approx(0.01)
        assert readings[1].deflection_body.y == pytest.approx(0.01)
        assert readings[1].deflection_body.x == 0.0

    @given(st.floats(0.0, 0.01), st.floats(-0.5, 0.5))
    def test_inverts_compression(self, depth: float, phi: float):
        params = RobotParams()
        pose = Pose2(Vec2(1.0 + depth - params.rho * math.cos(phi), 0.0), phi)
        lengths = [contact.arm_compression(pose, arm, params, [FACE]) for arm in range(4)]
        readings = contact.sense(lengths, params)

        assert readings[0].deflection_body.x == pytest.approx(depth / math.cos(phi), abs=1e-9)
        assert readings[0].deflection_body.y == 0.0
        assert [r.magnitude for r in readings[1:]] == [0.0] * 3

    def test_noise_stays_in_travel(self, params: RobotParams):
        rng = np.random.default_rng(3)

        for _ in range(50):
            readings = contact.sense([params.ls] * 4, params, 0.01, rng)
            for r in readings:
                assert 0.0 <= r.magnitude <= params.travel + 1e-12

    def test_noise_needs_generator(self, params: RobotParams):
        with pytest.raises(ValueError):
            contact.sense([params.ls] * 4, params, 0.001)

    def test_length_mismatch(self, params: RobotParams):
        with pytest.raises(ValueError):
            contact.sense([params.ls] * 3, params)


class TestDetect:
    def test_below_threshold(self):
        assert contact.detect([_reading(0, 0.001, 0.0)], 0.002) is None

    def test_single_arm(self):
        event = contact.detect(
            [_reading(0, 0.005, 0.0), _reading(1, 0.0, 0.001)], 0.002, t_c=1.5
        )

        assert event is not None
        assert event.t_c == 1.5
        assert event.arm_indices == frozenset({0})

    def test_multi_arm(self):
        event = contact.detect([_reading(0, 0.004, 0.0), _reading(1, 0.0, 0.006)], 0.002)

        assert event is not None
        assert event.arm_indices == frozenset({0, 1})

    @given(
        st.lists(st.floats(0.0, 0.015), min_size=4, max_size=4),
        st.floats(1e-4, 0.015),
        st.floats(1e-4, 0.015),
    )
    def test_monotone_in_threshold(self, magnitudes: list[float], low: float, high: float):
        low, high = min(low, high), max(low, high)
        readings = [_reading(arm, m, 0.0) for arm, m in enumerate(magnitudes)]

        strict = contact.detect(readings, high)
        loose = contact.detect(readings, low)

        if strict is not None:
            assert loose is not None
            assert strict.arm_indices <= loose.arm_indices

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            contact.detect([], 0.0)


class TestCompoundDeformation:
    def test_single(self):
        assert contact.compound_deformation([_reading(0, 0.012, 0.0)]) == Vec2(0.012, 0.0)

    def test_sum(self):
        assert contact.compound_deformation(
            [_reading(0, 0.01, 0.0), _reading(1, 0.0, 0.01)]
        ) == Vec2(0.01, 0.01)

    def test_sandwich(self):
        assert contact.compound_deformation(
            [_reading(0, 0.01, 0.0), _reading(2, -0.01, 0.0)]
        ) == Vec2(0.0, 0.0)

    def test_empty(self):
        with pytest.raises(ValueError):
            contact.compound_deformation([])


class TestBuildFrame:
    def test_sensor_single_arm(self, params: RobotParams):
        event = CollisionEvent(0.0, (_reading(0, 0.012, 0.0),))
        frame = contact.build_frame(event, params)

        assert frame.n == Vec2(-1.0, 0.0)
        assert frame.t.x == pytest.approx(0.0)
        assert frame.t.y == pytest.approx(-1.0)
        assert frame.theta == 0.0
        assert frame.origin == Vec2(0.0, 0.0)

    def test_sensor_corner(self, params: RobotParams):
        event = CollisionEvent(0.0, (_reading(0, 0.01, 0.0), _reading(1, 0.0, 0.01)))
        frame = contact.build_frame(event, params)

        assert frame.n.x == pytest.approx(-math.sqrt(0.5))
        assert frame.n.y == pytest.approx(-math.sqrt(0.5))

    def test_sensor_uses_heading(self, params: RobotParams):
        pose = Pose2(Vec2(0.0, 0.0), math.pi / 2)
        event = CollisionEvent(0.0, (_reading(0, 0.012, 0.0),), pose_at_impact=pose)
        frame = contact.build_frame(event, params)

        assert frame.n.x == pytest.approx(0.0, abs=1e-12)
        assert frame.n.y == pytest.approx(-1.0)

    def test_sandwich_is_degenerate(self, params: RobotParams):
        event = CollisionEvent(0.0, (_reading(0, 0.01, 0.0), _reading(2, -0.01, 0.0)))

        with pytest.raises(errors.DegenerateDeformationError):
            contact.build_frame(event, params)

    def test_ground_truth(self, params: RobotParams):
        heading = 0.1
        pose = Pose2(Vec2(0.0, 0.29), heading)
        event = CollisionEvent(0.0, (_reading(3, 0.0, -0.012),), pose_at_impact=pose)
        frame = contact.build_frame(event, params, FrameMode.GROUND_TRUTH, [FLOOR])

        assert frame.n == Vec2(0.0, 1.0)
        assert frame.theta == pytest.approx(heading)
        assert frame.origin == Vec2(0.0, 0.29)

    def test_ground_truth_without_contact(self, params: RobotParams):
        event = CollisionEvent(0.0, (_reading(0, 0.012, 0.0),))

        with pytest.raises(errors.DegenerateDeformationError):
            contact.build_frame(event, params, FrameMode.GROUND_TRUTH, [FACE])

    def test_contact_angle_rejects_inward(self):
        with pytest.raises(errors.DegenerateDeformationError):
            contact.contact_angle(Vec2(-1.0, 0.0), Vec2(-0.01, 0.0))
