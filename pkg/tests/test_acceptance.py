"""End-to-end acceptance checks, one per contract-level guarantee.

Each test prints one ``[ACCEPTANCE] <name>: PASS|FAIL`` line (run with ``-s``
or ``-rA`` to see them on success). The suite needs no browser and no network
beyond loopback.
"""

from __future__ import annotations

import csv
import io
import json
import random
import signal
import subprocess
import threading
import time
from datetime import timedelta
from fractions import Fraction

import httpx

from essencetrack.events import EventLog, format_timestamp
from essencetrack.kernel import builtin_kernel, find_alpha
from essencetrack.progress import (
    clear_alpha_state,
    compute_snapshot,
    set_alpha_state,
)
from essencetrack.service import create_app
from essencetrack.store import open_store

from .conftest import REFERENCE_INSTANT, LiveServer, make_project
from .test_cli import free_port, serve_args, wait_for_http
from .test_progress import brute_force

TOLERANCE = 1e-9


def _report(name: str, passed: bool) -> None:
    print(f"[ACCEPTANCE] {name}: {'PASS' if passed else 'FAIL'}", flush=True)


# ---------------------------------------------------------------------------
# 1. Kernel shape
# ---------------------------------------------------------------------------

def test_kernel_shape():
    ok = False
    start = time.perf_counter()
    try:
        kernel = builtin_kernel()
        assert [c.id for c in kernel.concerns] == ["Customer", "Solution", "Endeavor"]
        assert kernel.alpha_ids() == [
            "Opportunity",
            "Stakeholders",
            "Requirements",
            "SoftwareSystem",
            "Work",
            "Team",
            "WayOfWorking",
        ]
        requirements = find_alpha(kernel, "Requirements")
        assert [s.id for s in requirements.states] == [
            "Conceived",
            "Bounded",
            "Coherent",
            "Acceptable",
            "Addressed",
            "Fulfilled",
        ]
        assert time.perf_counter() - start < 1.0
        ok = True
    finally:
        _report("kernel-shape", ok)


# ---------------------------------------------------------------------------
# 2. Completion oracle
# ---------------------------------------------------------------------------

def test_completion_oracle():
    ok = False
    start = time.perf_counter()
    try:
        kernel = builtin_kernel()
        cases = 0
        for alpha in kernel.alphas():
            for state in alpha.states:
                project = make_project(**{alpha.id: state.id})
                snapshot = compute_snapshot(kernel, project)
                alpha_pct, concern_pct, project_pct = brute_force(
                    kernel, project.alpha_states
                )
                for alpha_id, expected in alpha_pct.items():
                    assert abs(
                        snapshot.alpha_completion[alpha_id] - float(expected)
                    ) <= TOLERANCE
                for concern_id, expected in concern_pct.items():
                    assert abs(
                        snapshot.concern_completion[concern_id] - float(expected)
                    ) <= TOLERANCE
                assert abs(snapshot.project_completion - float(project_pct)) <= TOLERANCE
                cases += 1
        assert cases == 41
        assert time.perf_counter() - start < 1.0
        ok = True
    finally:
        _report("completion-oracle", ok)


# ---------------------------------------------------------------------------
# 3. Reference event reproduction
# ---------------------------------------------------------------------------

def test_reference_event_reproduction():
    ok = False
    try:
        kernel = builtin_kernel()
        clock = lambda: REFERENCE_INSTANT  # noqa: E731
        _, event, _ = set_alpha_state(
            kernel, make_project(), "Requirements", "Conceived", clock
        )
        observed = (format_timestamp(event.timestamp), event.subject, event.value)
        assert observed == (
            "2013-04-03T14:01:27.007Z",
            "Requirements.State",
            "Conceived",
        )

        log = EventLog()
        log.add_project("p1")
        log.record_event(event)
        text = log.export_csv("p1")
        assert '"2013-04-03T14:01:27.007Z","Requirements.State","Conceived"\r\n' in text
        assert text == (
            'timestamp,subject,value\r\n'
            '"2013-04-03T14:01:27.007Z","Requirements.State","Conceived"\r\n'
        )
        ok = True
    finally:
        _report("reference-event-reproduction", ok)


# ---------------------------------------------------------------------------
# 4. Replay property
# ---------------------------------------------------------------------------

def test_replay_property():
    ok = False
    start = time.perf_counter()
    try:
        kernel = builtin_kernel()
        alphas = list(kernel.alphas())
        rng = random.Random(20130403)
        for sequence_no in range(1000):
            base = REFERENCE_INSTANT + timedelta(seconds=sequence_no)
            tick = {"n": -1}

            def clock():
                tick["n"] += 1
                return base + timedelta(milliseconds=tick["n"])

            log = EventLog()
            log.add_project("p1")
            project = make_project()
            shadow: dict[str, str] = {}
            op_count = rng.randrange(1, 51)

            for _ in range(op_count):
                alpha = rng.choice(alphas)
                if shadow and rng.random() < 0.25:
                    project, event, snapshot = clear_alpha_state(
                        kernel, project, alpha.id, clock
                    )
                    shadow.pop(alpha.id, None)
                else:
                    state = rng.choice(alpha.states)
                    project, event, snapshot = set_alpha_state(
                        kernel, project, alpha.id, state.id, clock
                    )
                    shadow[alpha.id] = state.id
                log.record_event(event)
                # Incremental result vs. recomputation from independent state.
                assert project.alpha_states == shadow
                assert snapshot == compute_snapshot(kernel, make_project(**shadow))

            events = log.list_events("p1")
            assert len(events) == op_count
            assert [e.seq for e in events] == list(range(1, op_count + 1))

            rows = list(csv.reader(io.StringIO(log.export_csv("p1"), newline="")))
            assert rows[0] == ["timestamp", "subject", "value"]
            assert len(rows) == op_count + 1
            for row, event in zip(rows[1:], events):
                assert row == [format_timestamp(event.timestamp), event.subject, event.value]

        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"replay took {elapsed:.1f}s"
        ok = True
    finally:
        _report("replay-property", ok)


# ---------------------------------------------------------------------------
# 5. Concurrency
# ---------------------------------------------------------------------------

def _collect(base_url: str, project_id: str, count: int,
             ready: threading.Event, out: list) -> None:
    timeout = httpx.Timeout(5.0, read=30.0)
    with httpx.Client(base_url=base_url, timeout=timeout) as client:
        with client.stream("GET", f"/api/projects/{project_id}/subscribe") as response:
            if response.status_code != 200:
                return
            ready.set()
            for line in response.iter_lines():
                if not line:
                    continue
                out.append(json.loads(line))
                if len(out) >= count:
                    return


def test_concurrent_writers_and_subscribers(tmp_path):
    ok = False
    start = time.perf_counter()
    try:
        kernel = builtin_kernel()
        store = open_store(tmp_path / "data", kernel)
        app = create_app(store, max_pending_notices=256)
        requirements = find_alpha(kernel, "Requirements")
        state_ids = [s.id for s in requirements.states]

        with LiveServer(app) as server:
            received: list[list] = [[], []]
            ready = [threading.Event(), threading.Event()]
            subscribers = [
                threading.Thread(
                    target=_collect,
                    args=(server.base_url, "demo", 100, ready[i], received[i]),
                    daemon=True,
                )
                for i in range(2)
            ]
            for thread in subscribers:
                thread.start()
            for event in ready:
                assert event.wait(timeout=10)

            failures: list[int] = []

            def writer(worker: int) -> None:
                with httpx.Client(base_url=server.base_url, timeout=30.0) as client:
                    for i in range(10):
                        response = client.post(
                            "/api/projects/demo/alphas/Requirements/state",
                            json={"state_id": state_ids[(worker + i) % len(state_ids)]},
                        )
                        if response.status_code != 200:
                            failures.append(response.status_code)

            writers = [threading.Thread(target=writer, args=(w,)) for w in range(10)]
            for thread in writers:
                thread.start()
            for thread in writers:
                thread.join(timeout=30)
                assert not thread.is_alive()
            assert failures == []

            events = httpx.get(
                f"{server.base_url}/api/projects/demo/events", timeout=10.0
            ).json()
            assert [e["seq"] for e in events] == list(range(1, 101))
            timestamps = [e["timestamp"] for e in events]
            assert timestamps == sorted(timestamps)

            for thread in subscribers:
                thread.join(timeout=30)
                assert not thread.is_alive()

        orders = [[n["event"]["seq"] for n in bucket] for bucket in received]
        assert orders[0] == list(range(1, 101))
        assert orders[0] == orders[1]
        assert received[0] == received[1]

        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"concurrency run took {elapsed:.1f}s"
        ok = True
    finally:
        _report("concurrency", ok)


# ---------------------------------------------------------------------------
# 6. Durability across a hard kill
# ---------------------------------------------------------------------------

def test_durability_across_kill(tmp_path):
    ok = False
    try:
        kernel = builtin_kernel()
        data_dir = tmp_path / "data"
        port = free_port()
        process = subprocess.Popen(
            serve_args(port, data_dir),
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        committed = 0
        expected_states: dict[str, str] = {}
        try:
            wait_for_http(port, process)
            alphas = list(kernel.alphas())
            with httpx.Client(
                base_url=f"http://127.0.0.1:{port}", timeout=10.0
            ) as client:
                for i in range(25):
                    alpha = alphas[i % len(alphas)]
                    state = alpha.states[i % len(alpha.states)]
                    response = client.post(
                        f"/api/projects/demo/alphas/{alpha.id}/state",
                        json={"state_id": state.id},
                    )
                    assert response.status_code == 200
                    committed += 1
                    expected_states[alpha.id] = state.id
        finally:
            process.send_signal(signal.SIGKILL)
            process.wait(timeout=20)

        # Reopen validates invariants; any partial record would raise.
        store = open_store(data_dir, kernel)
        events = store.list_events("demo")
        assert len(events) == committed == 25
        assert [e.seq for e in events] == list(range(1, 26))
        assert store.get_project("demo").alpha_states == expected_states
        rows = list(csv.reader(io.StringIO(store.export_csv("demo"), newline="")))
        assert len(rows) == 26
        ok = True
    finally:
        _report("durability", ok)


# ---------------------------------------------------------------------------
# 7. Auth isolation
# ---------------------------------------------------------------------------

def test_auth_isolation(tmp_path):
    ok = False
    try:
        store = open_store(tmp_path / "data", builtin_kernel())
        app = create_app(store)
        with LiveServer(app) as server:
            with httpx.Client(base_url=server.base_url, timeout=15.0) as client:
                def login(email: str) -> dict[str, str]:
                    assert (
                        client.post(
                            "/api/register",
                            json={"email": email, "password": "longenough"},
                        ).status_code
                        == 201
                    )
                    response = client.post(
                        "/api/login", json={"email": email, "password": "longenough"}
                    )
                    assert response.status_code == 200
                    return {"Authorization": f"Bearer {response.json()['token']}"}

                ada = login("ada@example.org")
                bob = login("bob@example.org")

                project_id = client.post(
                    "/api/projects", json={"name": "Private"}, headers=ada
                ).json()["id"]
                assert (
                    client.post(
                        f"/api/projects/{project_id}/alphas/Requirements/state",
                        json={"state_id": "Conceived"},
                        headers=ada,
                    ).status_code
                    == 200
                )

                # Every route of Ada's project answers 403 to Bob.
                prefix = f"/api/projects/{project_id}"
                checks = [
                    client.get(prefix, headers=bob),
                    client.patch(prefix, json={"name": "Hijack"}, headers=bob),
                    client.post(
                        f"{prefix}/alphas/Requirements/state",
                        json={"state_id": "Bounded"},
                        headers=bob,
                    ),
                    client.get(f"{prefix}/snapshot", headers=bob),
                    client.get(f"{prefix}/events", headers=bob),
                    client.get(f"{prefix}/events.csv", headers=bob),
                    client.get(f"{prefix}/subscribe", headers=bob),
                    client.delete(prefix, headers=bob),
                ]
                assert [r.status_code for r in checks] == [403] * len(checks)
                # Nothing leaked or changed.
                owned = client.get(prefix, headers=ada).json()
                assert owned["name"] == "Private"
                assert owned["alpha_states"] == {"Requirements": "Conceived"}

                # The demo project answers 200 everywhere with no token at all.
                demo_checks = [
                    client.get("/api/projects/demo"),
                    client.patch("/api/projects/demo", json={"description": "open"}),
                    client.post(
                        "/api/projects/demo/alphas/Requirements/state",
                        json={"state_id": "Conceived"},
                    ),
                    client.get("/api/projects/demo/snapshot"),
                    client.get("/api/projects/demo/events"),
                    client.get("/api/projects/demo/events.csv"),
                ]
                assert [r.status_code for r in demo_checks] == [200] * len(demo_checks)
                with client.stream("GET", "/api/projects/demo/subscribe") as stream:
                    assert stream.status_code == 200
        ok = True
    finally:
        _report("auth-isolation", ok)
