"""Event logs (JSON lines) and trajectory tables (CSV) of completed runs."""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence, TextIO

import numpy as np

from impulsive.mechanics.engine import ImpactEvent, SimulationResult
from impulsive.mechanics.geometry import TimelikeVelocity

logger = logging.getLogger(__name__)

#: Written as the `format` of the header record of every event log.
EVENT_LOG_FORMAT = "impulsive-mechanics/events"
EVENT_LOG_VERSION = 1

#: The keys of an event record, in the order they are written.
EVENT_FIELDS = (
    "index",
    "time",
    "point",
    "kind",
    "constraints",
    "law",
    "p_left",
    "active",
    "impulse",
    "p_right",
    "broken",
    "energy",
    "diagnostics",
)


def _floats(values: Iterable[float]) -> list[float]:
    return [float(v) for v in values]


def event_record(event: ImpactEvent) -> dict[str, Any]:
    """The JSON-compatible record of *event*. Floats are kept at full precision."""

    return {
        "index": event.index,
        "time": float(event.time),
        "point": _floats(event.point.x),
        "kind": event.kind,
        "constraints": list(event.constraints),
        "law": event.law,
        "p_left": _floats(event.p_left.p),
        "active": _floats(event.active.V),
        "impulse": _floats(event.impulse.V),
        "p_right": _floats(event.p_right.p),
        "broken": sorted(event.broken),
        "energy": {
            name: {
                "K_left": energy.K_left,
                "K_right": energy.K_right,
                "ratio": energy.ratio,
                "residual": energy.residual,
            }
            for name, energy in sorted(event.energy.items())
        },
        "diagnostics": {key: float(value) for key, value in sorted(event.diagnostics.items())},
    }


def header_record(scenario: str, coordinates: Sequence[str], frames: Sequence[str]) -> dict[str, Any]:
    return {
        "format": EVENT_LOG_FORMAT,
        "version": EVENT_LOG_VERSION,
        "scenario": scenario,
        "coordinates": list(coordinates),
        "frames": list(frames),
        "fields": list(EVENT_FIELDS),
    }


def write_event_log(
    fp: TextIO, events: Iterable[ImpactEvent], scenario: str, coordinates: Sequence[str], frames: Sequence[str]
) -> int:
    """Write the header record followed by one line per event. Returns the number of events written."""

    fp.write(json.dumps(header_record(scenario, coordinates, frames)) + "\n")
    count = 0
    for event in events:
        fp.write(json.dumps(event_record(event)) + "\n")
        count += 1
    return count


def read_event_log(fp: TextIO) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    """Return the header and the event records of a log written by :func:`write_event_log`."""

    lines = [line for line in fp.read().splitlines() if line.strip()]
    if not lines:
        raise ValueError("event log is empty")
    header = json.loads(lines[0])
    if header.get("format") != EVENT_LOG_FORMAT:
        raise ValueError(f"not an event log: format {header.get('format')!r}")
    return header, [json.loads(line) for line in lines[1:]]


def trajectory_header(coordinates: Sequence[str]) -> list[str]:
    return ["t", *coordinates, *(f"{c}dot" for c in coordinates)]


def write_trajectory(fp: TextIO, trajectory: Iterable[TimelikeVelocity], coordinates: Sequence[str]) -> int:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(trajectory_header(coordinates))
    count = 0
    for p in trajectory:
        writer.writerow([repr(float(p.base.t)), *(repr(float(v)) for v in np.concatenate([p.base.x, p.p]))])
        count += 1
    return count


def trajectory_table(trajectory: Iterable[TimelikeVelocity], coordinates: Sequence[str]) -> str:
    """The trajectory as CSV text, for `run --plot`."""

    buffer = io.StringIO()
    write_trajectory(buffer, trajectory, coordinates)
    return buffer.getvalue()


def write_logs(
    result: SimulationResult,
    directory: Path,
    scenario: str,
    coordinates: Sequence[str],
    frames: Sequence[str] = (),
    events_name: str = "events.jsonl",
    trajectory_name: str = "trajectory.csv",
) -> tuple[Path, Path]:
    """Write the event log and the trajectory of *result* into *directory*, creating it if needed.

    :return: The paths of the event log and of the trajectory file.
    """

    directory.mkdir(parents=True, exist_ok=True)
    events_path = directory / events_name
    trajectory_path = directory / trajectory_name
    with events_path.open("w", encoding="utf-8", newline="\n") as fp:
        count = write_event_log(fp, result.events, scenario, coordinates, frames)
    with trajectory_path.open("w", encoding="utf-8", newline="") as fp:
        samples = write_trajectory(fp, result.trajectory, coordinates)
    logger.info("wrote %d events to %s and %d samples to %s", count, events_path, samples, trajectory_path)
    return events_path, trajectory_path
