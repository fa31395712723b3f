import csv
import io
import json
from pathlib import Path

import pytest

from impulsive.mechanics.scenario import (
    EVENT_FIELDS,
    load_scenario,
    read_event_log,
    trajectory_header,
    write_event_log,
    write_logs,
)

DATA = Path(__file__).parent / "data"


def test__write_event_log__without_events_writes_only_the_header() -> None:
    result = load_scenario(DATA / "free_fall.toml").run()
    buffer = io.StringIO()
    assert write_event_log(buffer, result.events, "free_fall", ["z"], []) == 0
    assert len(buffer.getvalue().splitlines()) == 1
    header, events = read_event_log(io.StringIO(buffer.getvalue()))
    assert events == []
    assert header["scenario"] == "free_fall"
    assert header["coordinates"] == ["z"]
    assert header["fields"] == list(EVENT_FIELDS)


def test__write_logs__event_records_keep_every_field(tempdir: Path) -> None:
    scenario = load_scenario("disk_wall")
    result = scenario.run()
    events_path, trajectory_path = write_logs(
        result, tempdir / "disk_wall", scenario.name, scenario.system.coordinates, scenario.system.diagnostic_frames
    )
    assert events_path == tempdir / "disk_wall" / "events.jsonl"
    assert trajectory_path == tempdir / "disk_wall" / "trajectory.csv"

    with events_path.open(encoding="utf-8") as fp:
        header, events = read_event_log(fp)
    assert header["frames"] == ["static", "h0"]
    assert len(events) == 1
    record = events[0]
    assert list(record) == list(EVENT_FIELDS)
    assert record["law"] == "disk_wall_breakable"
    assert record["constraints"] == ["S"]
    assert record["broken"] == []
    assert record["p_right"] == pytest.approx([-1.0, 2.0], abs=1e-9)
    assert sorted(record["energy"]) == ["h0", "static"]
    assert record["energy"]["static"]["ratio"] == pytest.approx(1.0)
    # Floats survive at full precision.
    assert record["time"] == result.events[0].time


def test__write_logs__trajectory_table(tempdir: Path) -> None:
    scenario = load_scenario("glass")
    result = scenario.run()
    _, trajectory_path = write_logs(result, tempdir, scenario.name, scenario.system.coordinates)
    with trajectory_path.open(encoding="utf-8", newline="") as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == trajectory_header(["x", "z"]) == ["t", "x", "z", "xdot", "zdot"]
    assert len(rows) == len(result.trajectory) + 1
    assert [float(v) for v in rows[1]] == [0.0, 0.0, 1.0, 0.5, -1.0]
    assert float(rows[-1][0]) == pytest.approx(2.0)


def test__read_event_log__rejects_other_files() -> None:
    with pytest.raises(ValueError, match="empty"):
        read_event_log(io.StringIO(""))
    with pytest.raises(ValueError, match="not an event log"):
        read_event_log(io.StringIO(json.dumps({"format": "something-else"}) + "\n"))
