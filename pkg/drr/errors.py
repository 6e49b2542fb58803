"""All of the drr errors."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = (
    "ContactError",
    "DRRError",
    "DegenerateDeformationError",
    "GeometryError",
    "MaxIterError",
    "NegativeRadicandError",
    "NonPositiveDurationError",
    "OutOfRangeError",
    "ParseError",
    "PlanExpiredError",
    "PlannerFailureError",
    "PositiveOffsetError",
    "QpError",
    "QpInfeasibleError",
    "RecoveryError",
    "ReplanError",
    "ScenarioError",
    "SimulationError",
    "SingularKktError",
    "ValidationError",
)


class DRRError(Exception):
    """The base drr error."""


# Geometry:


class GeometryError(DRRError):
    """Raised when a geometric primitive cannot be built."""


# QP:


class QpError(DRRError):
    """The base error for the quadratic program solvers."""


@dataclass(slots=True, frozen=True)
class SingularKktError(QpError):
    """Raised when the KKT matrix of an equality constrained problem is rank deficient.

    This usually means redundant or inconsistent equality constraints.
    """

    size: int
    """The dimension of the KKT matrix."""

    rank: int
    """The numerical rank of the KKT matrix."""


@dataclass(slots=True, frozen=True)
class QpInfeasibleError(QpError):
    """Raised when the constraints of a problem cannot be satisfied."""

    reason: str
    """The reason the problem is infeasible."""


@dataclass(slots=True, frozen=True)
class MaxIterError(QpError):
    """Raised when the active set loop ran out of iterations."""

    iterations: int
    """The amount of iterations performed."""


# Contact:


class ContactError(DRRError):
    """The base contact error."""


class DegenerateDeformationError(ContactError):
    """Raised when no collision frame can be built from the deformation.

    Either the compound deformation vector is zero, or no contacted face
    could be found in ground truth mode.
    """


# Recovery:


class RecoveryError(DRRError):
    """The base recovery error."""


@dataclass(slots=True, frozen=True)
class PositiveOffsetError(RecoveryError):
    """Raised when the initial normal offset is positive.

    Signals that the frame normal and the arm readings disagree in sign.
    """

    value: float
    """The offending offset, in meters."""


@dataclass(slots=True, frozen=True)
class PlanExpiredError(RecoveryError):
    """Raised when a recovery plan is queried past its horizon."""

    t_rel: float
    """The requested time, relative to the collision."""

    horizon: float
    """The horizon of the plan."""


# Replan:


class ReplanError(DRRError):
    """The base replanning error."""


@dataclass(slots=True, frozen=True)
class OutOfRangeError(ReplanError):
    """Raised when a trajectory is evaluated outside of its domain."""

    t: float
    """The requested time."""

    duration: float
    """The total duration of the trajectory."""


@dataclass(slots=True, frozen=True)
class NonPositiveDurationError(ReplanError):
    """Raised when the remaining time of the collision segment is not positive."""

    duration: float
    """The computed duration."""


@dataclass(slots=True, frozen=True)
class NegativeRadicandError(ReplanError):
    """Raised when the safe speed bound has a negative radicand."""

    radicand: float
    """The value under the square root."""


# Simulation:


class SimulationError(DRRError):
    """The base simulation error."""


@dataclass(slots=True, frozen=True)
class PlannerFailureError(SimulationError):
    """Raised when no trajectory could be planned, even after the fallbacks."""

    reason: str
    """The reason the planner failed."""


# Scenario:


class ScenarioError(DRRError):
    """The base scenario file error."""


@dataclass(slots=True, frozen=True)
class ParseError(ScenarioError):
    """Raised when a scenario document could not be parsed."""

    reason: str
    """The reason the document was rejected."""

    line: int | None = None
    """The line of the error, if known."""

    column: int | None = None
    """The column of the error, if known."""

    field: str | None = None
    """The offending field, if known."""

    def __str__(self) -> str:
        where: list[str] = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.column is not None:
            where.append(f"column {self.column}")
        if self.field is not None:
            where.append(f"field {self.field!r}")

        if where:
            return f"{self.reason} ({', '.join(where)})"

        return self.reason


@dataclass(slots=True, frozen=True)
class ValidationError(ScenarioError):
    """Raised when a parsed scenario violates an invariant."""

    reason: str
    """The violated invariant."""

    field: str | None = None
    """The offending field, if known."""

    def __str__(self) -> str:
        if self.field is not None:
            return f"{self.reason} (field {self.field!r})"

        return self.reason
