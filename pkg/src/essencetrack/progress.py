"""Completion engine: project state assignments and the derived percentages.

An alpha sitting in its k-th of N states is 100*k/N percent complete; an alpha
with no state is at 0. A concern is the arithmetic mean of its member alphas,
and the whole project the mean of its concerns. All operations are pure: they
take a project value and return a new one, leaving serialization of concurrent
writers to the store and service layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Callable, Mapping

from .events import Event, truncate_to_millis, utcnow
from .kernel import AlphaDef, ConcernDef, KernelDefinition, find_alpha

CLEARED_STATE_VALUE = "(none)"


class ProgressError(Exception):
    """Base for state-change and snapshot failures."""


class UnknownAlpha(ProgressError):
    """The alpha id is not part of the kernel."""


class UnknownState(ProgressError):
    """The state id does not belong to the targeted alpha."""


class InvalidProject(ProgressError):
    """The project's alpha_states violate the kernel's structure."""


@dataclass(frozen=True)
class Project:
    """A user-owned endeavor; ``owner`` None marks the shared demo project.

    ``alpha_states`` maps alpha id to the current state id; an absent key means
    the alpha holds no state yet (the zero-or-one rule).
    """

    id: str
    owner: str | None
    name: str
    description: str
    created_at: datetime
    alpha_states: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .events import format_timestamp

        return {
            "id": self.id,
            "owner": self.owner,
            "name": self.name,
            "description": self.description,
            "created_at": format_timestamp(self.created_at),
            "alpha_states": dict(self.alpha_states),
        }


@dataclass(frozen=True)
class CompletionSnapshot:
    """Derived percentages (0..100) per alpha, per concern, and project-wide."""

    alpha_completion: dict[str, float]
    concern_completion: dict[str, float]
    project_completion: float

    def to_dict(self) -> dict:
        return {
            "alpha_completion": dict(self.alpha_completion),
            "concern_completion": dict(self.concern_completion),
            "project_completion": self.project_completion,
        }


def alpha_completion(alpha: AlphaDef, current_state: str | None) -> float:
    """Percentage completion of one alpha: 100 * order(state) / count(states).

    Returns 0.0 when the alpha holds no state; the final state maps to 100.
    """
    if current_state is None:
        return 0.0
    state = alpha.state(current_state)
    if state is None:
        raise UnknownState(f"alpha '{alpha.id}' has no state '{current_state}'")
    return 100.0 * state.order / len(alpha.states)


def concern_completion(concern: ConcernDef, alpha_states: Mapping[str, str]) -> float:
    """Arithmetic mean of the member alphas' completions."""
    total = sum(
        alpha_completion(alpha, alpha_states.get(alpha.id)) for alpha in concern.alphas
    )
    return total / len(concern.alphas)


def validate_project(kernel: KernelDefinition, project: Project) -> None:
    """Raise :class:`InvalidProject` unless every assignment fits the kernel."""
    for alpha_id, state_id in project.alpha_states.items():
        alpha = find_alpha(kernel, alpha_id)
        if alpha is None:
            raise InvalidProject(
                f"project '{project.id}' references unknown alpha '{alpha_id}'"
            )
        if alpha.state(state_id) is None:
            raise InvalidProject(
                f"project '{project.id}' assigns alpha '{alpha_id}' "
                f"an unknown state '{state_id}'"
            )


def compute_snapshot(kernel: KernelDefinition, project: Project) -> CompletionSnapshot:
    """Recompute every percentage from the project's current assignments.

    Pure and deterministic: repeated calls over the same inputs agree exactly.
    """
    validate_project(kernel, project)
    alphas: dict[str, float] = {}
    concerns: dict[str, float] = {}
    for concern in kernel.concerns:
        for alpha in concern.alphas:
            alphas[alpha.id] = alpha_completion(alpha, project.alpha_states.get(alpha.id))
        concerns[concern.id] = concern_completion(concern, project.alpha_states)
    project_completion = sum(concerns.values()) / len(concerns)
    return CompletionSnapshot(
        alpha_completion=alphas,
        concern_completion=concerns,
        project_completion=project_completion,
    )


Clock = Callable[[], datetime]


def set_alpha_state(
    kernel: KernelDefinition,
    project: Project,
    alpha_id: str,
    state_id: str,
    clock: Clock = utcnow,
) -> tuple[Project, Event, CompletionSnapshot]:
    """Assign ``state_id`` as the alpha's current state.

    Any state may be set at any time: re-setting the held state and moving
    backward are both accepted and logged. Returns the updated project, the
    event describing the click (subject ``<alpha_id>.State``, value = the state
    display name), and the freshly recomputed snapshot. On error nothing is
    produced.
    """
    alpha = find_alpha(kernel, alpha_id)
    if alpha is None:
        raise UnknownAlpha(f"kernel has no alpha '{alpha_id}'")
    state = alpha.state(state_id)
    if state is None:
        raise UnknownState(f"alpha '{alpha_id}' has no state '{state_id}'")

    updated = replace(project, alpha_states={**project.alpha_states, alpha_id: state_id})
    event = Event(
        project_id=project.id,
        timestamp=truncate_to_millis(clock()),
        subject=f"{alpha_id}.State",
        value=state.name,
    )
    return updated, event, compute_snapshot(kernel, updated)


def clear_alpha_state(
    kernel: KernelDefinition,
    project: Project,
    alpha_id: str,
    clock: Clock = utcnow,
) -> tuple[Project, Event, CompletionSnapshot]:
    """Return the alpha to the no-state condition; idempotent, always logged."""
    if find_alpha(kernel, alpha_id) is None:
        raise UnknownAlpha(f"kernel has no alpha '{alpha_id}'")

    remaining = {k: v for k, v in project.alpha_states.items() if k != alpha_id}
    updated = replace(project, alpha_states=remaining)
    event = Event(
        project_id=project.id,
        timestamp=truncate_to_millis(clock()),
        subject=f"{alpha_id}.State",
        value=CLEARED_STATE_VALUE,
    )
    return updated, event, compute_snapshot(kernel, updated)
