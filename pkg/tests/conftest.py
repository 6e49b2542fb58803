from __future__ import annotations

import typing

import pytest

from drr.impl.config import PlannerConfig, RecoveryConfig, TrackerConfig
from drr.impl.geometry import Polygon, Vec2
from drr.impl.robot import RobotParams
from drr.impl.scenario import Scenario
from drr.impl.trajectory import WaypointList
from tests import payloads

UNIT_SQUARE: typing.Final[Polygon] = Polygon.rectangle(0.0, 0.0, 1.0, 1.0)

WALL: typing.Final[Polygon] = Polygon.rectangle(0.0, -5.0, 1.0, 5.0)
"""A wall whose face `x = 0` looks toward -x."""


@pytest.fixture
def params() -> RobotParams:
    return RobotParams()


@pytest.fixture
def recovery_config() -> RecoveryConfig:
    return RecoveryConfig()


@pytest.fixture
def planner_config() -> PlannerConfig:
    return PlannerConfig()


@pytest.fixture
def tracker_config() -> TrackerConfig:
    return TrackerConfig()


@pytest.fixture
def wall_scenario() -> Scenario:
    start = Vec2(-0.5, 0.0)
    return Scenario(
        waypoints=WaypointList((start, Vec2(-1.5, 0.0))),
        obstacles=(WALL,),
    )


@pytest.fixture
def empty_world() -> Scenario:
    return Scenario.from_payload(payloads.EMPTY_WORLD_PAYLOAD)


@pytest.fixture
def case_1() -> Scenario:
    return Scenario.from_payload(payloads.CASE_1_PAYLOAD)


@pytest.fixture
def case_2() -> Scenario:
    return Scenario.from_payload(payloads.CASE_2_PAYLOAD)
