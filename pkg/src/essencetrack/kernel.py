"""Immutable catalog of the Essence kernel: concerns, alphas, and their ordered states.

The catalog is data-driven: a JSON document validated by :func:`load_kernel`.
The default kernel ships with the package in ``data/essence_kernel.json`` and is
exposed through :func:`builtin_kernel`. Once loaded, a :class:`KernelDefinition`
is frozen and safe to share across threads and requests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Iterator


class KernelError(ValueError):
    """A kernel document failed validation. ``path`` names the offending element."""

    def __init__(self, message: str, path: str = "") -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class MalformedDocument(KernelError):
    """The document is not well-formed per the kernel file schema."""


class DuplicateId(KernelError):
    """Two elements share an id that must be unique."""


class EmptyStateList(KernelError):
    """An alpha carries no states."""


class NonContiguousOrder(KernelError):
    """State orders within an alpha are not the gap-free sequence 1..N."""


@dataclass(frozen=True)
class StateDef:
    """One named stage in an alpha's progression. ``order`` is 1-based."""

    id: str
    name: str
    description: str
    order: int


@dataclass(frozen=True)
class AlphaDef:
    """An essential thing to work with, progressing through ordered states."""

    id: str
    name: str
    description: str
    states: tuple[StateDef, ...]

    def state(self, state_id: str) -> StateDef | None:
        for state in self.states:
            if state.id == state_id:
                return state
        return None

    @property
    def final_state(self) -> StateDef:
        return self.states[-1]


@dataclass(frozen=True)
class ConcernDef:
    """A grouping of alphas focused on one aspect of software engineering."""

    id: str
    name: str
    description: str
    alphas: tuple[AlphaDef, ...]


@dataclass(frozen=True)
class KernelDefinition:
    """The whole catalog: ordered concerns, each owning its alphas."""

    version: str
    concerns: tuple[ConcernDef, ...]

    def alphas(self) -> Iterator[AlphaDef]:
        """All alphas across concerns, in catalog order."""
        for concern in self.concerns:
            yield from concern.alphas

    def alpha_ids(self) -> list[str]:
        return [alpha.id for alpha in self.alphas()]


def find_alpha(kernel: KernelDefinition, alpha_id: str) -> AlphaDef | None:
    """Return the alpha with ``alpha_id``, or None when the kernel has no such alpha."""
    for alpha in kernel.alphas():
        if alpha.id == alpha_id:
            return alpha
    return None


def concern_of(kernel: KernelDefinition, alpha_id: str) -> ConcernDef | None:
    """Return the concern that owns ``alpha_id``, or None."""
    for concern in kernel.concerns:
        for alpha in concern.alphas:
            if alpha.id == alpha_id:
                return concern
    return None


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------

def _require_str(node: dict[str, Any], key: str, path: str, *, identifier: bool = False) -> str:
    value = node.get(key)
    if not isinstance(value, str) or not value:
        raise MalformedDocument(f"field '{key}' must be a nonempty string", path)
    if identifier and any(ch.isspace() for ch in value):
        raise MalformedDocument(f"field '{key}' must not contain whitespace", path)
    return value


def _require_dict(node: Any, path: str) -> dict[str, Any]:
    if not isinstance(node, dict):
        raise MalformedDocument("expected an object", path)
    return node


def _parse_state(node: Any, path: str) -> StateDef:
    node = _require_dict(node, path)
    order = node.get("order")
    if not isinstance(order, int) or isinstance(order, bool) or order < 1:
        raise MalformedDocument("field 'order' must be a positive integer", path)
    return StateDef(
        id=_require_str(node, "id", path, identifier=True),
        name=_require_str(node, "name", path),
        description=_require_str(node, "description", path),
        order=order,
    )


def _parse_alpha(node: Any, path: str) -> AlphaDef:
    node = _require_dict(node, path)
    alpha_id = _require_str(node, "id", path, identifier=True)
    raw_states = node.get("states")
    if not isinstance(raw_states, list):
        raise MalformedDocument("field 'states' must be a list", path)
    if not raw_states:
        raise EmptyStateList("alpha has no states", path)

    states = [_parse_state(raw, f"{path}.states[{i}]") for i, raw in enumerate(raw_states)]

    seen_state_ids: set[str] = set()
    for i, state in enumerate(states):
        if state.id in seen_state_ids:
            raise DuplicateId(f"state id '{state.id}' repeated", f"{path}.states[{i}]")
        seen_state_ids.add(state.id)

    orders = sorted(state.order for state in states)
    if orders != list(range(1, len(states) + 1)):
        raise NonContiguousOrder(
            f"state orders {orders} are not the contiguous sequence 1..{len(states)}", path
        )

    # The 'order' field is authoritative; normalize the listing to match it.
    states.sort(key=lambda s: s.order)

    return AlphaDef(
        id=alpha_id,
        name=_require_str(node, "name", path),
        description=_require_str(node, "description", path),
        states=tuple(states),
    )


def _parse_concern(node: Any, path: str) -> ConcernDef:
    node = _require_dict(node, path)
    concern_id = _require_str(node, "id", path, identifier=True)
    raw_alphas = node.get("alphas")
    if not isinstance(raw_alphas, list) or not raw_alphas:
        raise MalformedDocument("field 'alphas' must be a nonempty list", path)
    alphas = tuple(
        _parse_alpha(raw, f"{path}.alphas[{i}]") for i, raw in enumerate(raw_alphas)
    )
    return ConcernDef(
        id=concern_id,
        name=_require_str(node, "name", path),
        description=_require_str(node, "description", path),
        alphas=alphas,
    )


def load_kernel(document: bytes | str) -> KernelDefinition:
    """Parse and validate a kernel-definition JSON document.

    Raises :class:`MalformedDocument` on syntax or schema violations,
    :class:`DuplicateId`, :class:`EmptyStateList`, or :class:`NonContiguousOrder`
    on the corresponding structural violations; each error names the element path.
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"document is not valid UTF-8: {exc}") from exc
    try:
        root = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc

    root = _require_dict(root, "$")
    version = _require_str(root, "version", "$")
    raw_concerns = root.get("concerns")
    if not isinstance(raw_concerns, list) or not raw_concerns:
        raise MalformedDocument("field 'concerns' must be a nonempty list", "$")

    concerns = tuple(
        _parse_concern(raw, f"$.concerns[{i}]") for i, raw in enumerate(raw_concerns)
    )
    kernel = KernelDefinition(version=version, concerns=concerns)

    seen_concerns: set[str] = set()
    seen_alphas: set[str] = set()
    for ci, concern in enumerate(kernel.concerns):
        if concern.id in seen_concerns:
            raise DuplicateId(f"concern id '{concern.id}' repeated", f"$.concerns[{ci}]")
        seen_concerns.add(concern.id)
        for ai, alpha in enumerate(concern.alphas):
            if alpha.id in seen_alphas:
                raise DuplicateId(
                    f"alpha id '{alpha.id}' repeated", f"$.concerns[{ci}].alphas[{ai}]"
                )
            seen_alphas.add(alpha.id)

    return kernel


def kernel_to_dict(kernel: KernelDefinition) -> dict[str, Any]:
    """Plain-dict form of the catalog, matching the kernel file schema."""
    return {
        "version": kernel.version,
        "concerns": [
            {
                "id": concern.id,
                "name": concern.name,
                "description": concern.description,
                "alphas": [
                    {
                        "id": alpha.id,
                        "name": alpha.name,
                        "description": alpha.description,
                        "states": [
                            {
                                "id": state.id,
                                "name": state.name,
                                "description": state.description,
                                "order": state.order,
                            }
                            for state in alpha.states
                        ],
                    }
                    for alpha in concern.alphas
                ],
            }
            for concern in kernel.concerns
        ],
    }


def serialize_kernel(kernel: KernelDefinition) -> str:
    """JSON text that :func:`load_kernel` accepts and round-trips unchanged."""
    return json.dumps(kernel_to_dict(kernel), indent=2) + "\n"


BUILTIN_KERNEL_RESOURCE = "data/essence_kernel.json"


@lru_cache(maxsize=1)
def builtin_kernel() -> KernelDefinition:
    """The default Essence 1.0 kernel shipped with the package.

    Three concerns (Customer, Solution, Endeavor) holding the seven alphas;
    validated through :func:`load_kernel` like any external document.
    """
    document = resources.files(__package__).joinpath(BUILTIN_KERNEL_RESOURCE).read_bytes()
    return load_kernel(document)
