"""Trajectory Impl's.

Waypoint lists and piecewise polynomial trajectories.
"""

from __future__ import annotations

import bisect
import typing
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from drr.errors import OutOfRangeError
from drr.impl.geometry import Vec2
from drr.impl.payload import PayloadObject, reject_unknown_keys

__all__ = ("Segment", "Trajectory", "WaypointList")

_DOMAIN_TOL: typing.Final[float] = 1e-9


@dataclass(frozen=True, slots=True)
class WaypointList(PayloadObject):
    """Waypoint list.

    The ordered world frame waypoints of a route, with optional arrival
    times.
    """

    points: tuple[Vec2, ...]
    """The waypoints, in m."""

    times: tuple[float, ...] | None = None
    """The arrival time of every waypoint, in s."""

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("A waypoint list needs at least 2 points.")

        if self.times is not None:
            if len(self.times) != len(self.points):
                raise ValueError("There must be one time per waypoint.")
            for earlier, later in zip(self.times, self.times[1:]):
                if later <= earlier:
                    raise ValueError("Waypoint times must be strictly increasing.")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def goal(self) -> Vec2:
        """The final waypoint."""
        return self.points[-1]

    def with_times(self, times: typing.Sequence[float] | None) -> WaypointList:
        """A copy of this list with other arrival times."""
        return WaypointList(self.points, None if times is None else tuple(times))

    def shifted(self, offset: float) -> WaypointList:
        """A copy with every arrival time moved by `offset` seconds."""
        if self.times is None:
            return self

        return self.with_times([t + offset for t in self.times])

    def segment_at(self, t: float) -> tuple[int, float]:
        """The segment a time falls into, and the time spent in it.

        Times before the first waypoint map to segment 0, and times past
        the last one to the final segment.

        Raises
        ------
        ValueError
            Raised when the list carries no times.
        """
        if self.times is None:
            raise ValueError("The waypoint list has no times.")

        index = bisect.bisect_right(self.times, t) - 1
        index = min(max(index, 0), len(self.points) - 2)
        return index, max(0.0, t - self.times[index])

    @classmethod
    def _from_payload(cls, payload: typing.Any) -> WaypointList:
        """Build a waypoint list.

        Both a bare list of `[x, y]` pairs and an object with `points` and
        optional `times` are accepted.
        """
        if isinstance(payload, typing.Mapping):
            reject_unknown_keys(payload, ("points", "times"), where="waypoints")
            raw_times = payload.get("times")
            times = None if raw_times is None else tuple(float(t) for t in raw_times)
            points = payload["points"]
        else:
            times = None
            points = payload

        return WaypointList(tuple(Vec2(float(x), float(y)) for x, y in points), times)

    def dump(self) -> dict[str, typing.Any]:
        """The canonical payload."""
        return {
            "points": [p.dump() for p in self.points],
            "times": None if self.times is None else list(self.times),
        }


@dataclass(frozen=True, slots=True)
class Segment:
    """Segment.

    One polynomial piece; coefficients are in ascending powers of the local
    time.
    """

    coeffs_x: tuple[float, ...]
    """The x coefficients."""

    coeffs_y: tuple[float, ...]
    """The y coefficients."""

    duration: float
    """The duration, in s."""

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("Segment durations must be positive.")
        if len(self.coeffs_x) != len(self.coeffs_y):
            raise ValueError("Both axes need the same amount of coefficients.")

    @property
    def order(self) -> int:
        """The polynomial degree."""
        return len(self.coeffs_x) - 1

    def evaluate(self, t: float, derivative: int = 0) -> Vec2:
        """Evaluate a derivative at a local time."""
        cx = P.polyder(np.asarray(self.coeffs_x, dtype=np.float64), derivative)
        cy = P.polyder(np.asarray(self.coeffs_y, dtype=np.float64), derivative)
        return Vec2(float(P.polyval(t, cx)), float(P.polyval(t, cy)))

    def scaled(self, kappa: float) -> Segment:
        """The same path traversed `kappa` times slower."""
        factors = kappa ** -np.arange(len(self.coeffs_x), dtype=np.float64)
        return Segment(
            tuple(float(c) for c in np.asarray(self.coeffs_x) * factors),
            tuple(float(c) for c in np.asarray(self.coeffs_y) * factors),
            self.duration * kappa,
        )


@dataclass(frozen=True, slots=True)
class Trajectory:
    """Trajectory.

    A piecewise polynomial in the plane, starting at local time zero.
    """

    segments: tuple[Segment, ...]
    """The polynomial pieces, in order."""

    j: int = 3
    """The derivative order the trajectory minimizes."""

    waypoints: WaypointList | None = None
    """The waypoints the trajectory was planned through."""

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("A trajectory needs at least one segment.")

    @property
    def order(self) -> int:
        """The polynomial degree of the segments."""
        return self.segments[0].order

    @property
    def durations(self) -> tuple[float, ...]:
        """The segment durations, in s."""
        return tuple(segment.duration for segment in self.segments)

    @property
    def duration(self) -> float:
        """The total duration, in s."""
        return float(sum(self.durations))

    @property
    def start(self) -> Vec2:
        """The start position."""
        return self.segments[0].evaluate(0.0)

    @property
    def end(self) -> Vec2:
        """The end position."""
        last = self.segments[-1]
        return last.evaluate(last.duration)

    def locate(self, t: float) -> tuple[int, float]:
        """The segment a time falls into, and the local time in it.

        Raises
        ------
        OutOfRangeError
            Raised when `t` lies outside of `[0, duration]`.
        """
        total = self.duration
        if t < -_DOMAIN_TOL or t > total + _DOMAIN_TOL:
            raise OutOfRangeError(t, total)

        elapsed = 0.0
        for index, segment in enumerate(self.segments):
            if t <= elapsed + segment.duration or index == len(self.segments) - 1:
                return index, min(max(t - elapsed, 0.0), segment.duration)
            elapsed += segment.duration

        raise OutOfRangeError(t, total)  # pragma: no cover
