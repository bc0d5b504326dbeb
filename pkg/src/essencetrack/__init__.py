"""Progress tracking for software-engineering endeavors modeled with the
SEMAT Essence kernel: an immutable kernel catalog, a pure completion engine,
an append-only research event log with CSV export, a durable file store, and
an HTTP service with live change push."""

from .events import Event, EventLog, UnknownProject, format_timestamp, parse_timestamp
from .kernel import (
    AlphaDef,
    ConcernDef,
    DuplicateId,
    EmptyStateList,
    KernelDefinition,
    KernelError,
    MalformedDocument,
    NonContiguousOrder,
    StateDef,
    builtin_kernel,
    find_alpha,
    load_kernel,
    serialize_kernel,
)
from .progress import (
    CompletionSnapshot,
    InvalidProject,
    Project,
    UnknownAlpha,
    UnknownState,
    alpha_completion,
    clear_alpha_state,
    compute_snapshot,
    concern_completion,
    set_alpha_state,
)
from .service import create_app
from .store import (
    DEMO_PROJECT_ID,
    BadCredentials,
    CorruptStore,
    DemoProjectProtected,
    DuplicateEmail,
    IoFailure,
    Store,
    User,
    WeakPassword,
    open_store,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaDef",
    "BadCredentials",
    "CompletionSnapshot",
    "ConcernDef",
    "CorruptStore",
    "DEMO_PROJECT_ID",
    "DemoProjectProtected",
    "DuplicateEmail",
    "DuplicateId",
    "EmptyStateList",
    "Event",
    "EventLog",
    "InvalidProject",
    "IoFailure",
    "KernelDefinition",
    "KernelError",
    "MalformedDocument",
    "NonContiguousOrder",
    "Project",
    "StateDef",
    "Store",
    "UnknownAlpha",
    "UnknownProject",
    "UnknownState",
    "User",
    "WeakPassword",
    "alpha_completion",
    "builtin_kernel",
    "clear_alpha_state",
    "compute_snapshot",
    "concern_completion",
    "create_app",
    "find_alpha",
    "format_timestamp",
    "load_kernel",
    "open_store",
    "parse_timestamp",
    "serialize_kernel",
    "set_alpha_state",
]
