"""Geometry Impl's.

The planar geometry records shared by every module.
"""

from __future__ import annotations

import math
import typing
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from drr.errors import GeometryError
from drr.impl.payload import PayloadObject

__all__ = ("Polygon", "Pose2", "Rot2", "Vec2", "wrap_angle")


def wrap_angle(angle: float) -> float:
    """Wrap an angle into the half-open interval (-pi, pi]."""
    wrapped = math.remainder(angle, math.tau)
    if wrapped <= -math.pi:
        wrapped += math.tau

    return wrapped


@dataclass(frozen=True, slots=True)
class Vec2:
    """Vector.

    A planar vector, used for positions, velocities and deformations.
    """

    x: float
    """The x component."""

    y: float
    """The y component."""

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vector components must be finite: {self!r}")

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, scalar: float) -> Vec2:
        return Vec2(self.x * scalar, self.y * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> Vec2:
        return Vec2(self.x / scalar, self.y / scalar)

    def __neg__(self) -> Vec2:
        return Vec2(-self.x, -self.y)

    def __iter__(self) -> typing.Iterator[float]:
        yield self.x
        yield self.y

    def dot(self, other: Vec2) -> float:
        """The dot product with another vector."""
        return self.x * other.x + self.y * other.y

    def cross(self, other: Vec2) -> float:
        """The z component of the cross product with another vector."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        """The euclidean norm."""
        return math.hypot(self.x, self.y)

    def normalized(self) -> Vec2:
        """The unit vector with the same direction.

        Raises
        ------
        GeometryError
            Raised when the vector is zero.
        """
        length = self.norm()
        if length == 0.0:
            raise GeometryError("Cannot normalize a zero vector.")

        return Vec2(self.x / length, self.y / length)

    def perp(self) -> Vec2:
        """The vector rotated by +90 degrees."""
        return Vec2(-self.y, self.x)

    def to_array(self) -> npt.NDArray[np.float64]:
        """The vector as a numpy array."""
        return np.array([self.x, self.y], dtype=np.float64)

    @classmethod
    def from_array(cls, array: typing.Sequence[float]) -> Vec2:
        """Build a vector from any two element sequence."""
        return cls(float(array[0]), float(array[1]))

    def dump(self) -> list[float]:
        """The vector as a JSON compatible list."""
        return [self.x, self.y]


@dataclass(frozen=True, slots=True)
class Rot2:
    """Rotation.

    A planar rotation, stored as its angle and materialized on demand.
    """

    angle: float
    """The rotation angle, in radians."""

    @classmethod
    def from_direction(cls, direction: Vec2) -> Rot2:
        """The rotation that maps the x axis onto the given direction."""
        return cls(math.atan2(direction.y, direction.x))

    def matrix(self) -> npt.NDArray[np.float64]:
        """The 2x2 rotation matrix."""
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]], dtype=np.float64)

    def apply(self, v: Vec2) -> Vec2:
        """Rotate a vector."""
        c, s = math.cos(self.angle), math.sin(self.angle)
        return Vec2(c * v.x - s * v.y, s * v.x + c * v.y)

    def inverse(self) -> Rot2:
        """The inverse rotation."""
        return Rot2(-self.angle)

    def __matmul__(self, other: Rot2) -> Rot2:
        return Rot2(self.angle + other.angle)

    @property
    def x_axis(self) -> Vec2:
        """The image of the x axis."""
        return Vec2(math.cos(self.angle), math.sin(self.angle))

    @property
    def y_axis(self) -> Vec2:
        """The image of the y axis."""
        return Vec2(-math.sin(self.angle), math.cos(self.angle))


@dataclass(frozen=True, slots=True)
class Pose2:
    """Pose.

    The position and heading of the robot in the world frame.
    """

    position: Vec2
    """The position, in meters."""

    heading: float = 0.0
    """The heading, in radians, wrapped to (-pi, pi]."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def rotation(self) -> Rot2:
        """The body to world rotation."""
        return Rot2(self.heading)


@dataclass(frozen=True, slots=True)
class Polygon(PayloadObject):
    """Polygon.

    A simple, counter-clockwise polygonal obstacle.
    """

    vertices: tuple[Vec2, ...]
    """The vertices, in counter-clockwise order."""

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise ValueError("A polygon needs at least 3 vertices.")

        if self.signed_area <= 0.0:
            raise ValueError("Polygon vertices must be counter-clockwise.")

        if not self._is_simple():
            raise ValueError("Polygon edges must not intersect.")

    @property
    def signed_area(self) -> float:
        """The signed (shoelace) area."""
        total = 0.0
        for a, b in self.edges():
            total += a.cross(b)

        return 0.5 * total

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """The bounding box, as (min x, min y, max x, max y)."""
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def edges(self) -> typing.Iterator[tuple[Vec2, Vec2]]:
        """Iterate the edges, as (start, end) pairs."""
        count = len(self.vertices)
        for index in range(count):
            yield self.vertices[index], self.vertices[(index + 1) % count]

    def outward_normal(self, index: int) -> Vec2:
        """The outward unit normal of an edge."""
        a = self.vertices[index]
        b = self.vertices[(index + 1) % len(self.vertices)]
        d = b - a
        return Vec2(d.y, -d.x).normalized()

    def _is_simple(self) -> bool:
        edges = list(self.edges())
        count = len(edges)
        for i in range(count):
            for j in range(i + 1, count):
                # adjacent edges share a vertex
                if j == i + 1 or (i == 0 and j == count - 1):
                    continue
                if _segments_touch(*edges[i], *edges[j]):
                    return False

        return True

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> Polygon:
        """Build a polygon from a list of [x, y] pairs.

        Raises
        ------
        TypeError
            Raised when a vertex is not a pair of numbers.
        """
        return Polygon(tuple(Vec2(float(x), float(y)) for x, y in payload))

    def dump(self) -> list[list[float]]:
        """The polygon as a JSON compatible list of vertices."""
        return [v.dump() for v in self.vertices]

    @classmethod
    def rectangle(
        cls, x_min: float, y_min: float, x_max: float, y_max: float
    ) -> Polygon:
        """Build an axis aligned rectangle."""
        return cls(
            (
                Vec2(x_min, y_min),
                Vec2(x_max, y_min),
                Vec2(x_max, y_max),
                Vec2(x_min, y_max),
            )
        )


def _orientation(a: Vec2, b: Vec2, c: Vec2) -> float:
    return (b - a).cross(c - a)


def _segments_touch(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool:
    d1 = _orientation(c, d, a)
    d2 = _orientation(c, d, b)
    d3 = _orientation(a, b, c)
    d4 = _orientation(a, b, d)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def _on(p: Vec2, q: Vec2, r: Vec2) -> bool:
        return (
            min(p.x, q.x) <= r.x <= max(p.x, q.x)
            and min(p.y, q.y) <= r.y <= max(p.y, q.y)
        )

    return (
        (d1 == 0 and _on(c, d, a))
        or (d2 == 0 and _on(c, d, b))
        or (d3 == 0 and _on(a, b, c))
        or (d4 == 0 and _on(a, b, d))
    )
