"""HTTP service: auth, project CRUD, state changes, snapshots, CSV export,
and a live change stream.

Every committed state change is pushed to all subscribers of its project as one
newline-delimited JSON notice carrying the event and the recomputed snapshot.
Mutations to one project are funneled through a per-project writer lock, and a
notice is never published before its event is durable in the store. Slow
subscribers never block writers: a full delivery queue disconnects them.
"""

from __future__ import annotations

import asyncio
import json
import secrets
import time
from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, AsyncIterator

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import FileResponse, JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .events import Event, UnknownProject, format_timestamp, utcnow
from .kernel import kernel_to_dict
from .progress import (
    Clock,
    CompletionSnapshot,
    InvalidProject,
    Project,
    UnknownAlpha,
    UnknownState,
    clear_alpha_state,
    compute_snapshot,
    set_alpha_state,
)
from .store import (
    DEMO_PROJECT_ID,
    BadCredentials,
    DemoProjectProtected,
    DuplicateEmail,
    Store,
    User,
    WeakPassword,
)

SESSION_TTL = timedelta(hours=24)


@dataclass
class Session:
    """Bearer-token session; expired or unknown tokens are rejected everywhere."""

    token: str
    user_id: str
    expires_at: datetime


class SessionManager:
    """In-memory token registry. Tokens carry 256 bits of entropy; re-login renews."""

    def __init__(self, clock: Clock = utcnow, ttl: timedelta = SESSION_TTL) -> None:
        self._clock = clock
        self._ttl = ttl
        self._sessions: dict[str, Session] = {}

    def create(self, user_id: str) -> Session:
        session = Session(
            token=secrets.token_urlsafe(32),
            user_id=user_id,
            expires_at=self._clock() + self._ttl,
        )
        self._sessions[session.token] = session
        return session

    def resolve(self, token: str) -> str | None:
        session = self._sessions.get(token)
        if session is None:
            return None
        if session.expires_at <= self._clock():
            del self._sessions[token]
            return None
        return session.user_id


_DISCONNECT = object()


class Broadcaster:
    """Per-project fan-out of committed change notices.

    Each subscriber owns a bounded queue; publishing never blocks. A queue that
    overflows is dropped from the registry, drained, and handed a disconnect
    sentinel, forcing that subscriber to resubscribe and re-fetch the snapshot.
    """

    def __init__(self, max_pending: int = 64) -> None:
        self._max_pending = max_pending
        self._subscribers: dict[str, set[asyncio.Queue]] = defaultdict(set)

    def subscribe(self, project_id: str) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue(maxsize=self._max_pending)
        self._subscribers[project_id].add(queue)
        return queue

    def unsubscribe(self, project_id: str, queue: asyncio.Queue) -> None:
        self._subscribers[project_id].discard(queue)
        if not self._subscribers[project_id]:
            self._subscribers.pop(project_id, None)

    def subscriber_count(self, project_id: str) -> int:
        return len(self._subscribers.get(project_id, ()))

    def publish(self, project_id: str, payload: str) -> None:
        for queue in list(self._subscribers.get(project_id, ())):
            try:
                queue.put_nowait(payload)
            except asyncio.QueueFull:
                self.unsubscribe(project_id, queue)
                while True:
                    try:
                        queue.get_nowait()
                    except asyncio.QueueEmpty:
                        break
                queue.put_nowait(_DISCONNECT)


@dataclass(frozen=True)
class RateLimit:
    """Token bucket parameters, applied per client address to mutating routes."""

    capacity: float = 200.0
    refill_per_second: float = 100.0


class TokenBucketLimiter:
    def __init__(self, limit: RateLimit, timer=time.monotonic) -> None:
        self._limit = limit
        self._timer = timer
        self._buckets: dict[str, tuple[float, float]] = {}

    def allow(self, key: str) -> bool:
        now = self._timer()
        tokens, last = self._buckets.get(key, (self._limit.capacity, now))
        tokens = min(self._limit.capacity, tokens + (now - last) * self._limit.refill_per_second)
        if tokens < 1.0:
            self._buckets[key] = (tokens, now)
            return False
        self._buckets[key] = (tokens - 1.0, now)
        return True


# ---------------------------------------------------------------------------
# Request bodies
# ---------------------------------------------------------------------------

class Credentials(BaseModel):
    email: str = Field(min_length=1)
    password: str


class ProjectCreate(BaseModel):
    name: str = Field(min_length=1)
    description: str = ""


class ProjectPatch(BaseModel):
    name: str | None = Field(default=None, min_length=1)
    description: str | None = None


class StateChange(BaseModel):
    # state_id null requests a clear back to the no-state condition.
    state_id: str | None = None


# ---------------------------------------------------------------------------
# App factory
# ---------------------------------------------------------------------------

def create_app(
    store: Store,
    *,
    clock: Clock = utcnow,
    session_ttl: timedelta = SESSION_TTL,
    rate_limit: RateLimit | None = RateLimit(),
    max_pending_notices: int = 64,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around an open store.

    ``clock`` feeds event timestamps and session expiry; tests inject fixed
    clocks. ``rate_limit`` None disables throttling. ``static_dir``, when given,
    serves the browser app at ``/`` and ``/demo``.
    """
    app = FastAPI(title="essencetrack", docs_url=None, redoc_url=None)
    kernel = store.kernel
    kernel_document = kernel_to_dict(kernel)
    sessions = SessionManager(clock=clock, ttl=session_ttl)
    broadcaster = Broadcaster(max_pending=max_pending_notices)
    limiter = TokenBucketLimiter(rate_limit) if rate_limit is not None else None
    project_locks: dict[str, asyncio.Lock] = defaultdict(asyncio.Lock)

    app.state.store = store
    app.state.sessions = sessions
    app.state.broadcaster = broadcaster

    # -- plumbing ----------------------------------------------------------

    def current_user(request: Request) -> User | None:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            return None
        user_id = sessions.resolve(header[7:].strip())
        if user_id is None:
            return None
        return store.get_user(user_id)

    def require_user(request: Request) -> User:
        user = current_user(request)
        if user is None:
            raise HTTPException(status_code=401, detail="authentication required")
        return user

    def load_project(project_id: str) -> Project:
        return store.get_project(project_id)  # UnknownProject -> 404 via handler

    def check_access(request: Request, project: Project) -> None:
        # The demo project is readable and writable by anyone, token or not.
        if project.id == DEMO_PROJECT_ID:
            return
        user = require_user(request)
        if project.owner != user.id:
            raise HTTPException(status_code=403, detail="not your project")

    def throttle(request: Request) -> None:
        if limiter is None:
            return
        client = request.client.host if request.client else "unknown"
        if not limiter.allow(client):
            raise HTTPException(status_code=429, detail="rate limit exceeded")

    def _error_handler(status_code: int):
        async def handler(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(status_code=status_code, content={"detail": str(exc)})

        return handler

    for exc_type, status in (
        (DuplicateEmail, 409),
        (WeakPassword, 422),
        (BadCredentials, 401),
        (UnknownProject, 404),
        (UnknownAlpha, 404),
        (UnknownState, 404),
        (DemoProjectProtected, 403),
        (InvalidProject, 422),
    ):
        app.add_exception_handler(exc_type, _error_handler(status))

    # -- auth ----------------------------------------------------------------

    @app.post("/api/register", status_code=201)
    async def register(body: Credentials, request: Request) -> dict:
        throttle(request)
        try:
            user = await asyncio.to_thread(store.register_user, body.email, body.password)
        except ValueError as exc:
            # Whitespace-only emails pass the body schema but fail the store.
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"id": user.id, "email": user.email}

    @app.post("/api/login")
    async def login(body: Credentials, request: Request) -> dict:
        throttle(request)
        user = await asyncio.to_thread(store.verify_login, body.email, body.password)
        session = sessions.create(user.id)
        return {"token": session.token, "expires_at": format_timestamp(session.expires_at)}

    # -- kernel ---------------------------------------------------------------

    @app.get("/api/kernel")
    async def get_kernel() -> dict:
        return kernel_document

    # -- projects ---------------------------------------------------------------

    @app.get("/api/projects")
    async def list_projects(request: Request) -> list[dict]:
        user = require_user(request)
        return [p.to_dict() for p in store.list_projects_by_owner(user.id)]

    @app.post("/api/projects", status_code=201)
    async def create_project(body: ProjectCreate, request: Request) -> dict:
        throttle(request)
        user = require_user(request)
        project = await asyncio.to_thread(
            store.create_project, user.id, body.name, body.description
        )
        return project.to_dict()

    @app.get("/api/projects/{project_id}")
    async def get_project(project_id: str, request: Request) -> dict:
        project = load_project(project_id)
        check_access(request, project)
        return project.to_dict()

    @app.patch("/api/projects/{project_id}")
    async def patch_project(project_id: str, body: ProjectPatch, request: Request) -> dict:
        throttle(request)
        async with project_locks[project_id]:
            project = load_project(project_id)
            check_access(request, project)
            updated = replace(
                project,
                name=body.name if body.name is not None else project.name,
                description=body.description
                if body.description is not None
                else project.description,
            )
            await asyncio.to_thread(store.put_project, updated)
        return updated.to_dict()

    @app.delete("/api/projects/{project_id}", status_code=204)
    async def delete_project(project_id: str, request: Request) -> Response:
        throttle(request)
        if project_id == DEMO_PROJECT_ID:
            raise DemoProjectProtected(project_id)
        async with project_locks[project_id]:
            project = load_project(project_id)
            check_access(request, project)
            await asyncio.to_thread(store.delete_project, project_id)
        return Response(status_code=204)

    # -- state changes and completion ------------------------------------------

    def _commit(project: Project, event: Event) -> Event:
        # projects.json first, then events.json; both atomic on their own.
        store.put_project(project)
        return store.record_event(event)

    @app.post("/api/projects/{project_id}/alphas/{alpha_id}/state")
    async def change_state(
        project_id: str, alpha_id: str, body: StateChange, request: Request
    ) -> dict:
        throttle(request)
        async with project_locks[project_id]:
            project = load_project(project_id)
            check_access(request, project)
            if body.state_id is None:
                updated, event, snapshot = clear_alpha_state(
                    kernel, project, alpha_id, clock
                )
            else:
                updated, event, snapshot = set_alpha_state(
                    kernel, project, alpha_id, body.state_id, clock
                )
            recorded = await asyncio.to_thread(_commit, updated, event)
            notice = {
                "project_id": project_id,
                "event": recorded.to_dict(),
                "snapshot": snapshot.to_dict(),
            }
            broadcaster.publish(project_id, json.dumps(notice))
        return {"event": recorded.to_dict(), "snapshot": snapshot.to_dict()}

    @app.get("/api/projects/{project_id}/snapshot")
    async def get_snapshot(project_id: str, request: Request) -> dict:
        project = load_project(project_id)
        check_access(request, project)
        return compute_snapshot(kernel, project).to_dict()

    # -- events -----------------------------------------------------------------

    @app.get("/api/projects/{project_id}/events")
    async def list_events(project_id: str, request: Request) -> list[dict]:
        project = load_project(project_id)
        check_access(request, project)
        return [event.to_dict() for event in store.list_events(project_id)]

    @app.get("/api/projects/{project_id}/events.csv")
    async def export_events_csv(project_id: str, request: Request) -> Response:
        project = load_project(project_id)
        check_access(request, project)
        return Response(
            content=store.export_csv(project_id),
            media_type="text/csv",
            headers={
                "content-disposition": f'attachment; filename="{project_id}-events.csv"'
            },
        )

    @app.get("/api/projects/{project_id}/subscribe")
    async def subscribe(project_id: str, request: Request) -> StreamingResponse:
        project = load_project(project_id)
        check_access(request, project)
        queue = broadcaster.subscribe(project_id)

        async def stream() -> AsyncIterator[str]:
            try:
                while True:
                    item = await queue.get()
                    if item is _DISCONNECT:
                        break
                    yield item + "\n"
            finally:
                broadcaster.unsubscribe(project_id, queue)

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    # -- browser app -------------------------------------------------------------

    if static_dir is not None:
        static_root = Path(static_dir)
        index_file = static_root / "index.html"
        app.mount("/static", StaticFiles(directory=static_root), name="static")

        @app.get("/", include_in_schema=False)
        @app.get("/demo", include_in_schema=False)
        async def spa_index() -> FileResponse:
            return FileResponse(index_file)

    else:

        @app.get("/", include_in_schema=False)
        async def index() -> dict:
            return {
                "name": "essencetrack",
                "kernel": "/api/kernel",
                "demo_project": DEMO_PROJECT_ID,
            }

    return app
