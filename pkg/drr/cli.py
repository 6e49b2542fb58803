"""CLI.

Scenario loading, batch execution, and log and metric emission.
"""

from __future__ import annotations

import argparse
import csv
import os
import pathlib
import sys
import typing
from dataclasses import dataclass, field

import numpy as np
import orjson
from loguru import logger

from drr import errors
from drr.__metadata__ import __version__
from drr.handler import BaseCollisionHandler, DRRHandler, PreplannedHandler
from drr.impl.scenario import Scenario
from drr.impl.world import Metrics, SimLog, StepRecord
from drr.replan import max_safe_speed
from drr.sim import Simulator

__all__ = (
    "LOG_LEVEL_ENV",
    "RunReport",
    "TrialRow",
    "configure_logging",
    "export_csv",
    "main",
    "parse_scenario",
    "read_log",
    "run",
    "write_log",
)

LOG_LEVEL_ENV: typing.Final[str] = "DRR_LOG_LEVEL"
"""The environment variable holding the default log level."""

_LOG_LEVELS: typing.Final[tuple[str, ...]] = ("error", "info", "debug")

_HANDLERS: typing.Final[dict[str, type[BaseCollisionHandler]]] = {
    "drr": DRRHandler,
    "preplanned": PreplannedHandler,
}

_METRIC_FIELDS: typing.Final[tuple[str, ...]] = (
    "T_end",
    "path_length",
    "control_energy",
    "collisions",
    "goal_error",
    "reached",
)

EXIT_OK: typing.Final[int] = 0
EXIT_INVALID: typing.Final[int] = 1
EXIT_SIM_FAILURE: typing.Final[int] = 2


def configure_logging(level: str | None = None) -> None:
    """Send the logs to stderr.

    Parameters
    ----------
    level
        One of `error`, `info` or `debug`. Taken from `DRR_LOG_LEVEL` when
        omitted, and `info` when that is unset too.

    Raises
    ------
    ValueError
        Raised when the level is unknown.
    """
    level = (level or os.environ.get(LOG_LEVEL_ENV) or "info").lower()
    if level not in _LOG_LEVELS:
        raise ValueError(f"Unknown log level {level!r}.")

    logger.remove()
    logger.add(
        sys.stderr,
        level=level.upper(),
        format="<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <7}</level> | {name}:{line} - {message}",
    )


def parse_scenario(path: str | os.PathLike[str]) -> Scenario:
    """Read a scenario file.

    Raises
    ------
    OSError
        Raised when the file cannot be read.
    ParseError
        Raised when the file is not valid JSON, or holds an unknown key.
    ValidationError
        Raised when a value violates an invariant.
    """
    data = pathlib.Path(path).read_bytes()
    scenario = Scenario.from_payload(data)
    logger.debug("Parsed scenario {} with {} obstacles.", path, len(scenario.obstacles))
    return scenario


# Logs:


def write_log(log: SimLog, path: str | os.PathLike[str], ls: float) -> None:
    """Write a run log as JSON lines.

    The first line describes the robot, followed by the step and event
    records in time order.
    """
    entries: list[tuple[float, int, dict[str, typing.Any]]] = [
        (record.t, 0, record.dump()) for record in log.records
    ]
    entries.extend((event.t, 1, event.dump()) for event in log.events)
    entries.sort(key=lambda entry: (entry[0], entry[1]))

    meta = {
        "kind": "meta",
        "arms": log.arm_count,
        "ls": ls,
        "goal": log.goal.dump() if log.goal is not None else None,
        "t_end": log.t_end,
    }
    with pathlib.Path(path).open("wb") as fp:
        fp.write(orjson.dumps(meta) + b"\n")
        for _, _, entry in entries:
            fp.write(orjson.dumps(entry) + b"\n")


def read_log(path: str | os.PathLike[str]) -> SimLog:
    """Read the step records of a JSON lines log.

    Event lines are skipped.

    Raises
    ------
    OSError
        Raised when the file cannot be read.
    ParseError
        Raised when a line is not valid JSON, or a step line is malformed.
    """
    log = SimLog()
    with pathlib.Path(path).open("rb") as fp:
        for number, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            try:
                entry = orjson.loads(line)
            except orjson.JSONDecodeError as e:
                raise errors.ParseError(e.msg, line=number, column=e.colno) from e

            kind = entry.get("kind") if isinstance(entry, dict) else None
            if kind == "meta":
                log.arm_count = int(entry["arms"])
                log.t_end = entry.get("t_end")
            elif kind == "step":
                log.records.append(StepRecord.from_payload(entry))

    return log


def export_csv(
    log_path: str | os.PathLike[str], csv_path: str | os.PathLike[str]
) -> int:
    """Export the step records of a log to CSV.

    Returns
    -------
    int
        The amount of data rows written.
    """
    log = read_log(log_path)
    header = [
        "t",
        "x",
        "y",
        "heading",
        "vx",
        "vy",
        *(f"arm{i + 1}" for i in range(log.arm_count)),
        "mode",
        "ax",
        "ay",
    ]
    with pathlib.Path(csv_path).open("w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(header)
        for r in log.records:
            writer.writerow(
                [r.t, r.x, r.y, r.heading, r.vx, r.vy, *r.compressions, r.mode.value, r.ax, r.ay]
            )

    logger.info("Exported {} rows to {}.", len(log.records), csv_path)
    return len(log.records)


# Batch runs:


@dataclass(frozen=True, slots=True)
class TrialRow:
    """Trial row.

    The outcome of one trial of a batch.
    """

    trial: int
    """The trial index."""

    seed: int
    """The seed the trial ran with."""

    metrics: Metrics | None = None
    """The metrics, unless the trial failed."""

    error: str | None = None
    """Why the trial failed, if it did."""

    def dump(self) -> dict[str, typing.Any]:
        row: dict[str, typing.Any] = {"trial": self.trial, "seed": self.seed}
        if self.metrics is not None:
            row.update(self.metrics.dump())
        if self.error is not None:
            row["error"] = self.error

        return row


@dataclass(frozen=True, slots=True)
class RunReport:
    """Run report.

    The per trial metrics of a batch and their aggregates.
    """

    mode: str
    """The collision handling mode."""

    rows: tuple[TrialRow, ...]
    """One row per trial."""

    mean: dict[str, float] = field(default_factory=dict)
    """The mean of every metric over the successful trials."""

    std: dict[str, float] = field(default_factory=dict)
    """The population standard deviation of every metric."""

    @property
    def failures(self) -> int:
        """The amount of failed trials."""
        return sum(row.metrics is None for row in self.rows)

    @classmethod
    def aggregate(cls, mode: str, rows: typing.Sequence[TrialRow]) -> RunReport:
        """Build a report, computing the aggregates from the rows."""
        done = [row.metrics for row in rows if row.metrics is not None]
        mean: dict[str, float] = {}
        std: dict[str, float] = {}
        if done:
            for name in _METRIC_FIELDS:
                values = np.array([float(getattr(m, name)) for m in done])
                mean[name] = float(np.mean(values))
                std[name] = float(np.std(values))

        return cls(mode, tuple(rows), mean, std)

    def dump(self) -> dict[str, typing.Any]:
        return {
            "mode": self.mode,
            "trials": len(self.rows),
            "failures": self.failures,
            "rows": [row.dump() for row in self.rows],
            "mean": self.mean,
            "std": self.std,
        }


def run(
    scenario: Scenario,
    trials: int | None = None,
    seed: int | None = None,
    *,
    out: str | os.PathLike[str] | None = None,
    mode: str = "drr",
) -> RunReport:
    """Run a batch of trials.

    Trial `i` runs with seed `seed + i`. A failing trial is recorded in its
    row and the batch carries on.

    Parameters
    ----------
    scenario
        The scenario.
    trials
        The amount of trials; the scenario's when omitted.
    seed
        The base seed; the scenario's when omitted.
    out
        The directory receiving `trial_NNN.jsonl` logs and `report.json`.
        Nothing is written when omitted.
    mode
        `drr`, or `preplanned` to ignore collisions.

    Raises
    ------
    ValueError
        Raised when `trials` is below 1, or the mode is unknown.
    """
    trials = scenario.trials if trials is None else trials
    seed = scenario.seed if seed is None else seed
    if trials < 1:
        raise ValueError("trials must be at least 1.")
    if mode not in _HANDLERS:
        raise ValueError(f"Unknown mode {mode!r}.")

    directory = pathlib.Path(out) if out is not None else None
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)

    rows: list[TrialRow] = []
    for index in range(trials):
        trial_seed = seed + index
        logger.info("Trial {} of {} (seed {}).", index + 1, trials, trial_seed)
        sim = Simulator(scenario, handler=_HANDLERS[mode], seed=trial_seed)
        try:
            log, result = sim.run()
        except (errors.DRRError, ValueError) as e:
            logger.error("Trial {} failed: {!r}", index, e)
            log, result = sim.log, None
            rows.append(TrialRow(index, trial_seed, error=repr(e)))
        else:
            rows.append(TrialRow(index, trial_seed, metrics=result))

        if directory is not None:
            write_log(log, directory / f"trial_{index:03d}.jsonl", scenario.params.ls)

    report = RunReport.aggregate(mode, rows)
    if directory is not None:
        (directory / "report.json").write_bytes(
            orjson.dumps(report.dump(), option=orjson.OPT_INDENT_2)
        )

    return report


# Entry point:


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drr", description="Deformation recovery and replanning simulator."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        choices=_LOG_LEVELS,
        default=None,
        help=f"Log verbosity; defaults to ${LOG_LEVEL_ENV}, then info.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="Run a batch of trials.")
    run_cmd.add_argument("--scenario", required=True, type=pathlib.Path)
    run_cmd.add_argument("--trials", type=int, default=None)
    run_cmd.add_argument("--seed", type=int, default=None)
    run_cmd.add_argument("--out", type=pathlib.Path, default=pathlib.Path("runs"))
    run_cmd.add_argument("--mode", choices=tuple(_HANDLERS), default="drr")

    export_cmd = commands.add_parser("export", help="Export a trial log to CSV.")
    export_cmd.add_argument("--log", required=True, type=pathlib.Path)
    export_cmd.add_argument("--csv", required=True, type=pathlib.Path)

    vmax_cmd = commands.add_parser("vmax", help="Print the flip free impact speed.")
    vmax_cmd.add_argument("--scenario", required=True, type=pathlib.Path)

    return parser


def main(argv: typing.Sequence[str] | None = None) -> int:
    """Run the command line interface.

    Returns
    -------
    int
        0 on success, 1 on an invalid input, 2 on a simulation failure.
    """
    args = _parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
    except ValueError as e:
        print(e, file=sys.stderr)
        return EXIT_INVALID

    try:
        if args.command == "export":
            export_csv(args.log, args.csv)
            return EXIT_OK

        scenario = parse_scenario(args.scenario)
        if args.command == "vmax":
            print(f"{max_safe_speed(scenario.params):.6f}")
            return EXIT_OK

        report = run(scenario, args.trials, args.seed, out=args.out, mode=args.mode)
    except (errors.ScenarioError, OSError, ValueError) as e:
        logger.error("{}", e)
        return EXIT_INVALID
    except errors.NegativeRadicandError as e:
        logger.error("No flip free speed exists: {!r}", e)
        return EXIT_SIM_FAILURE

    logger.info(
        "{} of {} trials succeeded; report in {}.",
        len(report.rows) - report.failures,
        len(report.rows),
        args.out,
    )
    return EXIT_SIM_FAILURE if report.failures else EXIT_OK
