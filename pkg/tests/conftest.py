from __future__ import annotations

import socket
import threading
import time
from datetime import datetime, timedelta, timezone

import pytest
import uvicorn

from essencetrack import builtin_kernel, open_store
from essencetrack.events import truncate_to_millis
from essencetrack.progress import Project

REFERENCE_INSTANT = datetime(2013, 4, 3, 14, 1, 27, 7000, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def kernel():
    return builtin_kernel()


@pytest.fixture
def store(tmp_path, kernel):
    return open_store(tmp_path / "data", kernel)


@pytest.fixture
def fixed_clock():
    """Clock pinned to 2013-04-03T14:01:27.007Z."""
    return lambda: REFERENCE_INSTANT


@pytest.fixture
def ticking_clock():
    """Clock advancing 1 ms per call, starting at the pinned instant."""

    def make(start: datetime = REFERENCE_INSTANT):
        state = {"n": -1}

        def clock() -> datetime:
            state["n"] += 1
            return start + timedelta(milliseconds=state["n"])

        return clock

    return make


def make_project(project_id: str = "p1", owner: str | None = "user-1", **states) -> Project:
    return Project(
        id=project_id,
        owner=owner,
        name="Test project",
        description="A project used in tests.",
        created_at=truncate_to_millis(datetime(2013, 4, 1, tzinfo=timezone.utc)),
        alpha_states=dict(states),
    )


class LiveServer:
    """Uvicorn running in a background thread on an ephemeral port."""

    def __init__(self, app):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.bind(("127.0.0.1", 0))
        self.port = self._sock.getsockname()[1]
        self.base_url = f"http://127.0.0.1:{self.port}"
        config = uvicorn.Config(app, log_level="warning")
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(
            target=self._server.run, kwargs={"sockets": [self._sock]}, daemon=True
        )

    def __enter__(self) -> "LiveServer":
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("live server failed to start")
            time.sleep(0.01)
        return self

    def __exit__(self, *exc) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)
