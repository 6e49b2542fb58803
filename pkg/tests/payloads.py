import typing

PayloadT: typing.TypeAlias = typing.Final[typing.Mapping[str, typing.Any]]

__all__ = (  # noqa: RUF022
    # robot payloads
    "ROBOT_PAYLOAD",
    "ROBOT_MM_PAYLOAD",
    # config payloads
    "RECOVERY_PAYLOAD",
    "PLANNER_PAYLOAD",
    "TRACKER_PAYLOAD",
    # geometry payloads
    "SQUARE_PAYLOAD",
    "WAYPOINTS_PAYLOAD",
    "TIMED_WAYPOINTS_PAYLOAD",
    # step payloads
    "STEP_PAYLOAD",
    "METRICS_PAYLOAD",
    # scenario payloads
    "MINIMAL_SCENARIO_PAYLOAD",
    "EMPTY_WORLD_PAYLOAD",
    "CASE_1_PAYLOAD",
    "CASE_2_PAYLOAD",
)

ROBOT_PAYLOAD: PayloadT = {
    "m": 6.0,
    "k": 2310.0,
    "c": 100.0,
    "l0": 0.0415,
    "ls": 0.030,
    "le": 0.015,
    "rho": 0.3,
    "mu": 0.3,
    "arm_dirs": [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
    "g": 9.81,
    "a_in_max": 5.0,
}

ROBOT_MM_PAYLOAD: PayloadT = {
    "k_n_per_mm": 2.31,
    "l0_mm": 41.5,
    "ls_mm": 30.0,
    "le_mm": 15.0,
    "rho_mm": 300.0,
    "sigma_max_deg": 3.0,
}

RECOVERY_PAYLOAD: PayloadT = {
    "T": 0.5,
    "f": 10.0,
    "gamma": 1.0,
    "h": 1.0,
    "K_r": 2.0,
    "K_omega": 1.0,
    "release": 0.5,
    "v_max": 0.7,
}

PLANNER_PAYLOAD: PayloadT = {
    "j": 3,
    "order": 5,
    "epsilon_explore": 0.5,
    "explore_sign": 1,
    "v_max": 0.7,
    "a_max": 1.0,
    "clearance": 0.0,
    "min_segment_duration": 0.05,
    "simplify": False,
}

TRACKER_PAYLOAD: PayloadT = {
    "K_p": 4.0,
    "K_d": 4.0,
    "K_heading": 2.0,
    "goal_tolerance": 0.05,
}

SQUARE_PAYLOAD: typing.Final[list[list[float]]] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [1.0, 1.0],
    [0.0, 1.0],
]

WAYPOINTS_PAYLOAD: typing.Final[list[list[float]]] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [1.0, 1.0],
]

TIMED_WAYPOINTS_PAYLOAD: PayloadT = {
    "points": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
    "times": [0.0, 2.0, 4.0],
}

STEP_PAYLOAD: PayloadT = {
    "kind": "step",
    "t": 0.25,
    "x": 0.1,
    "y": -0.2,
    "heading": 0.0,
    "vx": 0.3,
    "vy": 0.0,
    "compressions": [0.004, 0.0, 0.0, 0.0],
    "mode": "RECOVERING",
    "ax": 1.5,
    "ay": -0.5,
}

METRICS_PAYLOAD: PayloadT = {
    "T_end": 12.5,
    "path_length": 4.2,
    "control_energy": 3.1,
    "collisions": 1,
    "goal_error": 0.03,
    "reached": True,
}

MINIMAL_SCENARIO_PAYLOAD: PayloadT = {
    "waypoints": [[0.0, 0.0], [4.0, 0.0]],
    "obstacles": [],
}

EMPTY_WORLD_PAYLOAD: PayloadT = {
    "waypoints": [[0.0, 0.0], [4.0, 0.0]],
    "obstacles": [],
    "max_sim_time": 30.0,
    "seed": 7,
}

CASE_1_PAYLOAD: PayloadT = {
    "waypoints": [[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]],
    "obstacles": [[[1.05, -1.0], [1.35, -1.0], [1.35, 1.0], [1.05, 1.0]]],
    "max_sim_time": 30.0,
}

CASE_2_PAYLOAD: PayloadT = {
    "waypoints": [[0.0, 0.0], [2.0, 0.0]],
    "obstacles": [[[0.9, -0.15], [1.1, -0.15], [1.1, 0.15], [0.9, 0.15]]],
    "planner": {"epsilon_explore": 1.0, "v_max": 0.5},
    "max_sim_time": 25.0,
}
