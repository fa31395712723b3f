import tempfile
from pathlib import Path
from typing import Iterator

import pytest


@pytest.fixture
def tempdir() -> Iterator[Path]:
    with tempfile.TemporaryDirectory() as tempdir:
        yield Path(tempdir)


@pytest.fixture
def no_color(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep termcolor from adding escape sequences to captured output."""

    monkeypatch.setenv("ANSI_COLORS_DISABLED", "1")
    monkeypatch.setenv("NO_COLOR", "1")
