"""Core.

Planar frames and polygon predicates shared by the contact model, the
replanner and the simulator.
"""

from __future__ import annotations

import math
import typing

from drr.impl.geometry import Polygon, Rot2, Vec2

__all__ = (
    "line_of_sight",
    "point_segment_distance",
    "polygon_contains",
    "rotate",
    "segment_polygon_distance",
    "segments_intersect",
    "transform_from_frame",
    "transform_to_frame",
)

_BOUNDARY_TOL: typing.Final[float] = 1e-12


def rotate(r: Rot2, v: Vec2) -> Vec2:
    """Rotate a vector.

    Example
    -------
    ```py
    rotate(Rot2(math.pi / 2), Vec2(1, 0))  # Vec2(x=0.0, y=1.0)
    ```
    """
    return r.apply(v)


def transform_to_frame(origin: Vec2, r: Rot2, p_world: Vec2) -> Vec2:
    """Express a world point in a frame.

    Parameters
    ----------
    origin
        The frame origin, in world coordinates.
    r
        The frame to world rotation.
    p_world
        The point to transform.

    Returns
    -------
    Vec2
        `r^T (p_world - origin)`.
    """
    return r.inverse().apply(p_world - origin)


def transform_from_frame(origin: Vec2, r: Rot2, p_frame: Vec2) -> Vec2:
    """Express a frame point in the world; the inverse of [transform_to_frame][drr.core.transform_to_frame]."""
    return origin + r.apply(p_frame)


def point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    """The euclidean distance between a point and a segment."""
    ab = b - a
    length_sq = ab.dot(ab)
    if length_sq == 0.0:
        return (p - a).norm()

    s = min(1.0, max(0.0, (p - a).dot(ab) / length_sq))
    return (p - (a + ab * s)).norm()


def segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool:
    """Whether two closed segments share at least one point."""
    d1 = (d - c).cross(a - c)
    d2 = (d - c).cross(b - c)
    d3 = (b - a).cross(c - a)
    d4 = (b - a).cross(d - a)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    return (
        point_segment_distance(a, c, d) <= _BOUNDARY_TOL
        or point_segment_distance(b, c, d) <= _BOUNDARY_TOL
        or point_segment_distance(c, a, b) <= _BOUNDARY_TOL
        or point_segment_distance(d, a, b) <= _BOUNDARY_TOL
    )


def polygon_contains(poly: Polygon, p: Vec2) -> bool:
    """Whether a point lies in a polygon.

    Boundary points count as inside, which is what contact needs.

    Parameters
    ----------
    poly
        The polygon to test against.
    p
        The point to test.

    Returns
    -------
    bool
        True if the point is inside or on the boundary.
    """
    x_min, y_min, x_max, y_max = poly.bounds
    if p.x < x_min or p.x > x_max or p.y < y_min or p.y > y_max:
        return False

    winding = 0
    for a, b in poly.edges():
        if point_segment_distance(p, a, b) <= _BOUNDARY_TOL:
            return True

        if a.y <= p.y:
            if b.y > p.y and (b - a).cross(p - a) > 0:
                winding += 1
        elif b.y <= p.y and (b - a).cross(p - a) < 0:
            winding -= 1

    return winding != 0


def segment_polygon_distance(a: Vec2, b: Vec2, poly: Polygon) -> float:
    """The distance between a segment and a polygon; zero when they overlap."""
    if polygon_contains(poly, a) or polygon_contains(poly, b):
        return 0.0

    best = math.inf
    for c, d in poly.edges():
        if segments_intersect(a, b, c, d):
            return 0.0

        best = min(
            best,
            point_segment_distance(a, c, d),
            point_segment_distance(b, c, d),
            point_segment_distance(c, a, b),
            point_segment_distance(d, a, b),
        )

    return best


def line_of_sight(
    a: Vec2, b: Vec2, obstacles: typing.Sequence[Polygon], clearance: float
) -> bool:
    """Whether the segment between two points is free.

    The segment is inflated by `clearance`; touching an inflated obstacle
    blocks the line of sight.

    Parameters
    ----------
    a
        The first endpoint.
    b
        The second endpoint.
    obstacles
        The obstacles to test against.
    clearance
        The inflation radius, in meters.

    Returns
    -------
    bool
        True if no obstacle comes closer than `clearance` to the segment.

    Raises
    ------
    ValueError
        Raised when the clearance is negative.
    """
    if clearance < 0.0:
        raise ValueError("Clearance must not be negative.")

    for poly in obstacles:
        if segment_polygon_distance(a, b, poly) <= clearance:
            return False

    return True
