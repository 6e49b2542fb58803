"""Handler Abc's.

The collision handler abstract class.
"""

from __future__ import annotations

import abc
import typing

if typing.TYPE_CHECKING:
    from drr.impl.geometry import Vec2
    from drr.impl.recovery import RecoveryEpisode
    from drr.impl.robot import CollisionEvent
    from drr.impl.trajectory import Trajectory
    from drr.sim import Simulator


class BaseCollisionHandler(abc.ABC):
    """Collision handler base.

    Decides what the simulator does when its robot hits something.

    !!! note
        All custom collision handlers **must** subclass this.

    Parameters
    ----------
    sim
        The simulator the handler drives.
    """

    __slots__ = ("_sim",)

    @abc.abstractmethod
    def __init__(self, sim: Simulator): ...

    @property
    @abc.abstractmethod
    def reactive(self) -> bool:
        """Whether collisions are acted upon.

        A handler that does not react is only told about the first step of
        each contact.
        """

    @abc.abstractmethod
    def on_collision(self, event: CollisionEvent) -> RecoveryEpisode | None:
        """Respond to a detected collision.

        Parameters
        ----------
        event
            The collision.

        Returns
        -------
        RecoveryEpisode | None
            The recovery to execute, or `None` to keep tracking.
        """

    @abc.abstractmethod
    def on_recovered(
        self,
        episode: RecoveryEpisode,
        position: Vec2,
        velocity: Vec2,
        t_start: float,
    ) -> Trajectory:
        """Plan the trajectory that follows a recovery.

        Parameters
        ----------
        episode
            The finished recovery.
        position
            The position the new trajectory starts from.
        velocity
            The world velocity the new trajectory starts with.
        t_start
            The simulation time the new trajectory starts at.

        Returns
        -------
        Trajectory
            The new trajectory, in local time, with timed waypoints.

        Raises
        ------
        PlannerFailureError
            Raised when no trajectory could be planned.
        """
