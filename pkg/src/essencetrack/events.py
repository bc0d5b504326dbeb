"""Append-only per-project log of usage events, exportable as RFC 4180 CSV.

Every recorded event carries a per-project sequence number and a UTC timestamp
with millisecond precision, serialized as ``2013-04-03T14:01:27.007Z``. The log
offers no update or delete of recorded events; a project's whole sequence is
dropped only when the owning store deletes the project itself.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone

CSV_HEADER = "timestamp,subject,value"


class UnknownProject(Exception):
    """The referenced project id does not exist."""


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


def truncate_to_millis(instant: datetime) -> datetime:
    """Drop sub-millisecond precision so stored and exported timestamps agree."""
    return instant.replace(microsecond=(instant.microsecond // 1000) * 1000)


def format_timestamp(instant: datetime) -> str:
    """ISO 8601 with milliseconds and trailing Z, e.g. 2013-04-03T14:01:27.007Z."""
    utc = instant.astimezone(timezone.utc)
    return f"{utc:%Y-%m-%dT%H:%M:%S}.{utc.microsecond // 1000:03d}Z"


def parse_timestamp(text: str) -> datetime:
    """Inverse of :func:`format_timestamp`."""
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%S.%fZ").replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class Event:
    """A timestamped (subject, value) record of one usage action.

    ``seq`` is None until the event has been appended to a log; recorded events
    carry the per-project position, starting at 1.
    """

    project_id: str
    timestamp: datetime
    subject: str
    value: str
    seq: int | None = None

    def csv_row(self) -> str:
        return ",".join(
            _quote(field) for field in (format_timestamp(self.timestamp), self.subject, self.value)
        )

    def to_dict(self) -> dict:
        return {
            "project_id": self.project_id,
            "seq": self.seq,
            "timestamp": format_timestamp(self.timestamp),
            "subject": self.subject,
            "value": self.value,
        }


def _quote(field: str) -> str:
    # Unconditional quoting keeps the output stable whatever the field contains.
    return '"' + field.replace('"', '""') + '"'


class EventLog:
    """In-memory append-only log holding one event sequence per known project."""

    def __init__(self) -> None:
        self._events: dict[str, list[Event]] = {}

    def add_project(self, project_id: str) -> None:
        self._events.setdefault(project_id, [])

    def discard_project(self, project_id: str) -> None:
        """Drop a project's whole sequence; used only when the project is deleted."""
        self._events.pop(project_id, None)

    def has_project(self, project_id: str) -> bool:
        return project_id in self._events

    def project_ids(self) -> list[str]:
        return list(self._events)

    def record_event(self, event: Event) -> Event:
        """Append ``event`` to its project's sequence and return it with seq assigned.

        A timestamp behind the project's latest event is clamped up to that
        value, keeping timestamps non-decreasing in seq order even if the wall
        clock steps backward.
        """
        sequence = self._events.get(event.project_id)
        if sequence is None:
            raise UnknownProject(event.project_id)
        timestamp = truncate_to_millis(event.timestamp)
        if sequence and timestamp < sequence[-1].timestamp:
            timestamp = sequence[-1].timestamp
        recorded = replace(event, timestamp=timestamp, seq=len(sequence) + 1)
        sequence.append(recorded)
        return recorded

    def _pop_last(self, project_id: str) -> None:
        # Store-internal rollback of an append whose persistence failed; not
        # part of the public surface, which stays append-only.
        sequence = self._events.get(project_id)
        if sequence:
            sequence.pop()

    def list_events(self, project_id: str) -> list[Event]:
        """Events in seq order; empty list for a project with no events."""
        return list(self._events.get(project_id, ()))

    def export_csv(self, project_id: str) -> str:
        """RFC 4180 text: CRLF line endings, ``timestamp,subject,value`` header,
        every data field double-quoted. A project with no events yields the
        header line only."""
        lines = [CSV_HEADER]
        lines.extend(event.csv_row() for event in self._events.get(project_id, ()))
        return "\r\n".join(lines) + "\r\n"
