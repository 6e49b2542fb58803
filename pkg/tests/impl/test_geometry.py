import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from drr import errors
from drr.impl.geometry import Polygon, Pose2, Rot2, Vec2, wrap_angle
from tests import payloads

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_vec2():
    a = Vec2(3.0, 4.0)

    assert a.x == 3.0
    assert a.y == 4.0
    assert a.norm() == 5.0
    assert a + Vec2(1.0, 1.0) == Vec2(4.0, 5.0)
    assert a - Vec2(1.0, 1.0) == Vec2(2.0, 3.0)
    assert a * 2.0 == Vec2(6.0, 8.0)
    assert 2.0 * a == Vec2(6.0, 8.0)
    assert a / 2.0 == Vec2(1.5, 2.0)
    assert -a == Vec2(-3.0, -4.0)
    assert a.dot(Vec2(1.0, 0.0)) == 3.0
    assert Vec2(1.0, 0.0).cross(Vec2(0.0, 1.0)) == 1.0
    assert Vec2(1.0, 0.0).perp() == Vec2(0.0, 1.0)
    assert a.normalized() == Vec2(0.6, 0.8)
    assert tuple(a) == (3.0, 4.0)
    assert a.dump() == [3.0, 4.0]
    assert Vec2.from_array(a.to_array()) == a


def test_vec2_rejects_non_finite():
    with pytest.raises(ValueError):
        Vec2(math.nan, 0.0)

    with pytest.raises(ValueError):
        Vec2(0.0, math.inf)


def test_vec2_zero_normalized():
    with pytest.raises(errors.GeometryError):
        Vec2(0.0, 0.0).normalized()


@given(finite, finite, st.floats(-10.0, 10.0))
def test_rot2_preserves_norm(x: float, y: float, angle: float):
    v = Vec2(x, y)
    rotated = Rot2(angle).apply(v)

    assert rotated.norm() == pytest.approx(v.norm(), abs=1e-9)
    back = Rot2(angle).inverse().apply(rotated)
    assert back.x == pytest.approx(x, abs=1e-9)
    assert back.y == pytest.approx(y, abs=1e-9)


def test_rot2():
    quarter = Rot2(math.pi / 2)

    assert quarter.x_axis.x == pytest.approx(0.0, abs=1e-12)
    assert quarter.x_axis.y == pytest.approx(1.0)
    assert quarter.y_axis.x == pytest.approx(-1.0)
    assert (quarter @ quarter).angle == pytest.approx(math.pi)
    assert quarter.matrix() @ [1.0, 0.0] == pytest.approx([0.0, 1.0])
    assert Rot2.from_direction(Vec2(0.0, 2.0)).angle == pytest.approx(math.pi / 2)


@given(st.floats(-100.0, 100.0))
def test_wrap_angle_range(angle: float):
    wrapped = wrap_angle(angle)

    assert -math.pi < wrapped <= math.pi
    assert math.sin(wrapped) == pytest.approx(math.sin(angle), abs=1e-9)
    assert math.cos(wrapped) == pytest.approx(math.cos(angle), abs=1e-9)


def test_wrap_angle_boundary():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_pose2():
    pose = Pose2(Vec2(1.0, 2.0), 3 * math.pi)

    assert pose.position == Vec2(1.0, 2.0)
    assert pose.heading == pytest.approx(math.pi)
    assert pose.rotation.angle == pose.heading
    assert Pose2(Vec2(0.0, 0.0)).heading == 0.0


def test_polygon():
    square = Polygon.from_payload(payloads.SQUARE_PAYLOAD)

    assert len(square.vertices) == 4
    assert square.signed_area == 1.0
    assert square.bounds == (0.0, 0.0, 1.0, 1.0)
    assert len(list(square.edges())) == 4
    assert square.outward_normal(0) == Vec2(0.0, -1.0)
    assert square.outward_normal(1) == Vec2(1.0, 0.0)
    assert square.outward_normal(2) == Vec2(0.0, 1.0)
    assert square.outward_normal(3) == Vec2(-1.0, 0.0)
    assert square.dump() == payloads.SQUARE_PAYLOAD
    assert square == Polygon.rectangle(0.0, 0.0, 1.0, 1.0)


def test_polygon_clockwise():
    with pytest.raises(errors.ValidationError):
        Polygon.from_payload(list(reversed(payloads.SQUARE_PAYLOAD)))


def test_polygon_self_intersecting():
    with pytest.raises(ValueError):
        Polygon(
            (Vec2(0.0, 0.0), Vec2(1.0, 1.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0))
        )


def test_polygon_too_few_vertices():
    with pytest.raises(ValueError):
        Polygon((Vec2(0.0, 0.0), Vec2(1.0, 0.0)))


def test_polygon_bad_payload():
    with pytest.raises(errors.ParseError):
        Polygon.from_payload(b"[[0, 0], [1, 0]")
