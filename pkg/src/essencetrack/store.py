"""Durable persistence for users, projects, and event logs.

One JSON document per entity collection (users.json, projects.json,
events.json) inside a data directory. Every mutation is written to a temp file,
fsynced, and atomically renamed over the canonical document before the call
returns, so a crash never leaves a half-applied record and reopening the
directory reproduces every acknowledged write. Mutations are serialized behind
a single store-wide lock; reads observe committed state only.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import secrets
import threading
import uuid
from contextlib import suppress
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Any

from .events import (
    Event,
    EventLog,
    UnknownProject,
    format_timestamp,
    parse_timestamp,
    truncate_to_millis,
    utcnow,
)
from .kernel import KernelDefinition, builtin_kernel
from .progress import Project, validate_project

DEMO_PROJECT_ID = "demo"
DEMO_PROJECT_NAME = "Demo project"
DEMO_PROJECT_DESCRIPTION = (
    "A shared project open to every visitor, no registration needed; "
    "changes are pushed live to everyone viewing it."
)

_SCRYPT_N = 2**14
_SCRYPT_R = 8
_SCRYPT_P = 1


class StoreError(Exception):
    """Base for persistence-layer failures."""


class CorruptStore(StoreError):
    """A data file exists but cannot be parsed or violates store invariants."""


class IoFailure(StoreError):
    """The underlying filesystem refused a read or write."""


class DuplicateEmail(StoreError):
    """The email is already registered."""


class WeakPassword(StoreError):
    """The password does not meet the minimum length of 8 characters."""


class BadCredentials(StoreError):
    """Login rejected: unknown email or wrong password."""


class DemoProjectProtected(StoreError):
    """The shared demo project cannot be deleted."""


@dataclass(frozen=True)
class User:
    """Registration identity. ``credential`` is a salted scrypt hash, never plaintext."""

    id: str
    email: str
    credential: str
    created_at: datetime


def hash_password(password: str) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.scrypt(
        password.encode("utf-8"), salt=salt, n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P
    )
    return f"scrypt${_SCRYPT_N}${_SCRYPT_R}${_SCRYPT_P}${salt.hex()}${digest.hex()}"


def verify_password(password: str, credential: str) -> bool:
    try:
        scheme, n, r, p, salt_hex, digest_hex = credential.split("$")
        if scheme != "scrypt":
            return False
        expected = bytes.fromhex(digest_hex)
        actual = hashlib.scrypt(
            password.encode("utf-8"),
            salt=bytes.fromhex(salt_hex),
            n=int(n),
            r=int(r),
            p=int(p),
        )
    except (ValueError, TypeError):
        return False
    return hmac.compare_digest(actual, expected)


def _atomic_write_json(path: Path, payload: dict[str, Any]) -> None:
    """Write-to-temp, fsync, atomic rename, fsync dir: the commit point is the rename."""
    tmp_path = path.with_name(path.name + ".tmp")
    try:
        with open(tmp_path, "w", encoding="utf-8") as fp:
            json.dump(payload, fp, ensure_ascii=False, indent=2)
            fp.write("\n")
            fp.flush()
            os.fsync(fp.fileno())
        os.replace(tmp_path, path)
        dir_fd = os.open(path.parent, os.O_RDONLY)
        try:
            with suppress(OSError):
                os.fsync(dir_fd)
        finally:
            os.close(dir_fd)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_json(path: Path) -> dict[str, Any] | None:
    if not path.exists():
        return None
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorruptStore(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise CorruptStore(f"{path}: expected a JSON object at top level")
    return data


class Store:
    """File-backed document store bound to one data directory and one kernel."""

    def __init__(self, data_dir: str | Path, kernel: KernelDefinition | None = None) -> None:
        self.data_dir = Path(data_dir)
        self.kernel = kernel if kernel is not None else builtin_kernel()
        self._lock = threading.RLock()
        self._users: dict[str, User] = {}
        self._projects: dict[str, Project] = {}
        self._log = EventLog()

        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoFailure(f"cannot create data directory {self.data_dir}: {exc}") from exc
        self._load()
        if DEMO_PROJECT_ID not in self._projects:
            self._seed_demo_project()

    @property
    def users_path(self) -> Path:
        return self.data_dir / "users.json"

    @property
    def projects_path(self) -> Path:
        return self.data_dir / "projects.json"

    @property
    def events_path(self) -> Path:
        return self.data_dir / "events.json"

    # -- users --------------------------------------------------------------

    def register_user(self, email: str, password: str) -> User:
        email = email.strip()
        if not email:
            raise ValueError("email must be nonempty")
        if len(password) < 8:
            raise WeakPassword("password must be at least 8 characters")
        with self._lock:
            if any(u.email == email for u in self._users.values()):
                raise DuplicateEmail(email)
            user = User(
                id=uuid.uuid4().hex,
                email=email,
                credential=hash_password(password),
                created_at=truncate_to_millis(utcnow()),
            )
            self._users[user.id] = user
            try:
                self._save_users()
            except StoreError:
                del self._users[user.id]
                raise
            return user

    def verify_login(self, email: str, password: str) -> User:
        with self._lock:
            for user in self._users.values():
                if user.email == email.strip():
                    if verify_password(password, user.credential):
                        return user
                    break
        raise BadCredentials(email)

    def get_user(self, user_id: str) -> User | None:
        with self._lock:
            return self._users.get(user_id)

    def user_count(self) -> int:
        with self._lock:
            return len(self._users)

    # -- projects -------------------------------------------------------------

    def create_project(self, owner: str | None, name: str, description: str = "") -> Project:
        project = Project(
            id=uuid.uuid4().hex,
            owner=owner,
            name=name,
            description=description,
            created_at=truncate_to_millis(utcnow()),
            alpha_states={},
        )
        self.put_project(project)
        return project

    def put_project(self, project: Project) -> None:
        """Insert or replace a project; validates assignments against the kernel."""
        if project.owner is None and project.id != DEMO_PROJECT_ID:
            raise ValueError("only the demo project may be ownerless")
        validate_project(self.kernel, project)
        with self._lock:
            previous = self._projects.get(project.id)
            self._projects[project.id] = project
            log_added = not self._log.has_project(project.id)
            if log_added:
                self._log.add_project(project.id)
            try:
                self._save_projects()
                if log_added:
                    self._save_events()
            except StoreError:
                if previous is None:
                    del self._projects[project.id]
                else:
                    self._projects[project.id] = previous
                if log_added:
                    self._log.discard_project(project.id)
                raise

    def get_project(self, project_id: str) -> Project:
        with self._lock:
            project = self._projects.get(project_id)
            if project is None:
                raise UnknownProject(project_id)
            # Defensive copy: alpha_states must only change through put_project.
            return replace(project, alpha_states=dict(project.alpha_states))

    def has_project(self, project_id: str) -> bool:
        with self._lock:
            return project_id in self._projects

    def delete_project(self, project_id: str) -> None:
        """Remove the project and its whole event sequence. The demo is protected."""
        if project_id == DEMO_PROJECT_ID:
            raise DemoProjectProtected(project_id)
        with self._lock:
            if project_id not in self._projects:
                raise UnknownProject(project_id)
            removed = self._projects.pop(project_id)
            removed_events = self._log.list_events(project_id)
            self._log.discard_project(project_id)
            try:
                self._save_projects()
                self._save_events()
            except StoreError:
                self._projects[project_id] = removed
                self._log.add_project(project_id)
                for event in removed_events:
                    self._log.record_event(replace(event, seq=None))
                raise

    def list_projects_by_owner(self, owner_id: str) -> list[Project]:
        with self._lock:
            own = [p for p in self._projects.values() if p.owner == owner_id]
        own.sort(key=lambda p: (p.created_at, p.id))
        return [replace(p, alpha_states=dict(p.alpha_states)) for p in own]

    def project_count(self) -> int:
        with self._lock:
            return len(self._projects)

    # -- events ---------------------------------------------------------------

    def record_event(self, event: Event) -> Event:
        with self._lock:
            recorded = self._log.record_event(event)
            try:
                self._save_events()
            except StoreError:
                self._log._pop_last(event.project_id)
                raise
            return recorded

    def list_events(self, project_id: str) -> list[Event]:
        with self._lock:
            return self._log.list_events(project_id)

    def export_csv(self, project_id: str) -> str:
        with self._lock:
            return self._log.export_csv(project_id)

    # -- persistence ----------------------------------------------------------

    def _seed_demo_project(self) -> None:
        demo = Project(
            id=DEMO_PROJECT_ID,
            owner=None,
            name=DEMO_PROJECT_NAME,
            description=DEMO_PROJECT_DESCRIPTION,
            created_at=truncate_to_millis(utcnow()),
            alpha_states={},
        )
        self.put_project(demo)

    def _save_users(self) -> None:
        payload = {
            "users": [
                {
                    "id": u.id,
                    "email": u.email,
                    "credential": u.credential,
                    "created_at": format_timestamp(u.created_at),
                }
                for u in self._users.values()
            ]
        }
        _atomic_write_json(self.users_path, payload)

    def _save_projects(self) -> None:
        payload = {
            "projects": [
                {
                    "id": p.id,
                    "owner": p.owner,
                    "name": p.name,
                    "description": p.description,
                    "created_at": format_timestamp(p.created_at),
                    "alpha_states": dict(p.alpha_states),
                }
                for p in self._projects.values()
            ]
        }
        _atomic_write_json(self.projects_path, payload)

    def _save_events(self) -> None:
        payload = {
            "events": {
                project_id: [
                    {
                        "seq": e.seq,
                        "timestamp": format_timestamp(e.timestamp),
                        "subject": e.subject,
                        "value": e.value,
                    }
                    for e in self._log.list_events(project_id)
                ]
                for project_id in self._log.project_ids()
            }
        }
        _atomic_write_json(self.events_path, payload)

    def _load(self) -> None:
        self._load_users()
        self._load_projects()
        self._load_events()

    def _load_users(self) -> None:
        data = _read_json(self.users_path)
        if data is None:
            return
        path = self.users_path
        raw_users = data.get("users")
        if not isinstance(raw_users, list):
            raise CorruptStore(f"{path}: missing 'users' list")
        emails: set[str] = set()
        for item in raw_users:
            try:
                user = User(
                    id=item["id"],
                    email=item["email"],
                    credential=item["credential"],
                    created_at=parse_timestamp(item["created_at"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptStore(f"{path}: bad user record ({exc})") from exc
            if user.email in emails:
                raise CorruptStore(f"{path}: duplicate email '{user.email}'")
            emails.add(user.email)
            self._users[user.id] = user

    def _load_projects(self) -> None:
        data = _read_json(self.projects_path)
        if data is None:
            return
        path = self.projects_path
        raw_projects = data.get("projects")
        if not isinstance(raw_projects, list):
            raise CorruptStore(f"{path}: missing 'projects' list")
        for item in raw_projects:
            try:
                project = Project(
                    id=item["id"],
                    owner=item["owner"],
                    name=item["name"],
                    description=item["description"],
                    created_at=parse_timestamp(item["created_at"]),
                    alpha_states=dict(item["alpha_states"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptStore(f"{path}: bad project record ({exc})") from exc
            if project.owner is not None and project.owner not in self._users:
                raise CorruptStore(
                    f"{path}: project '{project.id}' owned by unknown user '{project.owner}'"
                )
            if project.owner is None and project.id != DEMO_PROJECT_ID:
                raise CorruptStore(
                    f"{path}: ownerless project '{project.id}' is not the demo project"
                )
            try:
                validate_project(self.kernel, project)
            except Exception as exc:
                raise CorruptStore(f"{path}: {exc}") from exc
            if project.id in self._projects:
                raise CorruptStore(f"{path}: duplicate project id '{project.id}'")
            self._projects[project.id] = project
            self._log.add_project(project.id)

    def _load_events(self) -> None:
        data = _read_json(self.events_path)
        if data is None:
            return
        path = self.events_path
        raw_events = data.get("events")
        if not isinstance(raw_events, dict):
            raise CorruptStore(f"{path}: missing 'events' map")
        for project_id, items in raw_events.items():
            if project_id not in self._projects:
                raise CorruptStore(
                    f"{path}: events recorded for unknown project '{project_id}'"
                )
            if not isinstance(items, list):
                raise CorruptStore(f"{path}: events of '{project_id}' is not a list")
            for position, item in enumerate(items, start=1):
                try:
                    event = Event(
                        project_id=project_id,
                        timestamp=parse_timestamp(item["timestamp"]),
                        subject=item["subject"],
                        value=item["value"],
                        seq=item["seq"],
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise CorruptStore(f"{path}: bad event record ({exc})") from exc
                if event.seq != position:
                    raise CorruptStore(
                        f"{path}: project '{project_id}' has seq {event.seq} "
                        f"at position {position}"
                    )
                recorded = self._log.record_event(replace(event, seq=None))
                if recorded.timestamp != event.timestamp:
                    raise CorruptStore(
                        f"{path}: project '{project_id}' timestamps decrease at seq {position}"
                    )


def open_store(data_dir: str | Path, kernel: KernelDefinition | None = None) -> Store:
    """Open (or initialize) the store in ``data_dir``.

    A fresh directory comes up with no users, no events, and the shared demo
    project already seeded. Prior state, when present, is reloaded and checked
    against the kernel; unparseable or inconsistent files raise
    :class:`CorruptStore` naming the offending file.
    """
    return Store(data_dir, kernel)
