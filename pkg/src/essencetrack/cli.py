"""Operator entry point: run the service, validate kernel files, export CSVs.

Exit codes: 0 success, 1 validation or domain error, 2 usage error. Errors go
to stderr as single ``error: <Kind>: <detail>`` lines. `serve` is the only
long-running command; it holds an exclusive lock on the data directory, and
`export` refuses to race a live server by taking the same lock.
"""

from __future__ import annotations

import argparse
import os
import socket
import sys
from pathlib import Path

import uvicorn
from filelock import FileLock, Timeout

from .kernel import KernelDefinition, KernelError, builtin_kernel, load_kernel
from .service import create_app
from .store import Store, StoreError, open_store

DEFAULT_ADDR = "127.0.0.1:8000"
DEFAULT_DATA_DIR = "./data"
LOCK_FILENAME = ".essencetrack.lock"


def _fail(exc_or_message: object) -> int:
    if isinstance(exc_or_message, BaseException):
        print(f"error: {type(exc_or_message).__name__}: {exc_or_message}", file=sys.stderr)
    else:
        print(f"error: {exc_or_message}", file=sys.stderr)
    return 1


def _parse_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address '{addr}' is not of the form host:port")
    return host or "127.0.0.1", int(port)


def _resolve_kernel(kernel_file: str | None) -> KernelDefinition:
    if kernel_file is None:
        return builtin_kernel()
    return load_kernel(Path(kernel_file).read_bytes())


def _locked_store(data_dir: str, kernel: KernelDefinition) -> tuple[FileLock, Store]:
    directory = Path(data_dir)
    directory.mkdir(parents=True, exist_ok=True)
    lock = FileLock(directory / LOCK_FILENAME)
    try:
        lock.acquire(timeout=0)
    except Timeout:
        raise StoreError(
            f"data directory {directory} is locked by another process"
        ) from None
    try:
        return lock, open_store(directory, kernel)
    except BaseException:
        lock.release()
        raise


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        host, port = _parse_addr(args.addr)
    except ValueError as exc:
        return _fail(exc)
    try:
        kernel = _resolve_kernel(args.kernel)
    except (OSError, KernelError) as exc:
        return _fail(exc)
    try:
        lock, store = _locked_store(args.data_dir, kernel)
    except StoreError as exc:
        return _fail(exc)

    with lock:
        app = create_app(store, static_dir=args.static_dir)
        # Bind ourselves so address conflicts surface as our exit code 1.
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
        except OSError as exc:
            sock.close()
            return _fail(f"cannot bind {host}:{port}: {exc}")
        sock.set_inheritable(True)

        alpha_count = len(list(store.kernel.alphas()))
        print(
            f"essencetrack serving on {host}:{port} | kernel {store.kernel.version} "
            f"({alpha_count} alphas) | {store.project_count()} projects "
            f"| data dir {store.data_dir}",
            flush=True,
        )
        config = uvicorn.Config(app, host=host, port=port, log_level="info")
        server = uvicorn.Server(config)
        server.run(sockets=[sock])
    return 0


def cmd_kernel_validate(args: argparse.Namespace) -> int:
    try:
        document = Path(args.file).read_bytes()
    except OSError as exc:
        return _fail(exc)
    try:
        kernel = load_kernel(document)
    except KernelError as exc:
        return _fail(exc)

    state_total = 0
    print(f"kernel version: {kernel.version}")
    for concern in kernel.concerns:
        print(f"concern {concern.id}: {len(concern.alphas)} alphas")
        for alpha in concern.alphas:
            state_total += len(alpha.states)
            print(f"  alpha {alpha.id}: {len(alpha.states)} states, orders 1..{len(alpha.states)}")
    alpha_total = len(list(kernel.alphas()))
    print(f"OK: {len(kernel.concerns)} concerns, {alpha_total} alphas, {state_total} states")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    try:
        kernel = _resolve_kernel(args.kernel)
    except (OSError, KernelError) as exc:
        return _fail(exc)
    try:
        lock, store = _locked_store(args.data_dir, kernel)
    except StoreError as exc:
        return _fail(exc)

    with lock:
        if not store.has_project(args.project):
            return _fail(f"UnknownProject: no project '{args.project}' in {store.data_dir}")
        payload = store.export_csv(args.project).encode("utf-8")

    if args.out == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        try:
            Path(args.out).write_bytes(payload)
        except OSError as exc:
            return _fail(exc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="essencetrack",
        description="Progress tracking for software-engineering endeavors "
        "modeled with the Essence kernel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument(
        "--addr",
        default=os.environ.get("ESSENCE_ADDR", DEFAULT_ADDR),
        help=f"listen address host:port (env ESSENCE_ADDR, default {DEFAULT_ADDR})",
    )
    serve.add_argument(
        "--data-dir",
        default=os.environ.get("ESSENCE_DATA_DIR", DEFAULT_DATA_DIR),
        help=f"store location (env ESSENCE_DATA_DIR, default {DEFAULT_DATA_DIR})",
    )
    serve.add_argument("--kernel", default=None, help="kernel definition file (default: built-in)")
    serve.add_argument(
        "--static-dir",
        default=os.environ.get("ESSENCE_STATIC_DIR"),
        help="directory with the built browser app (env ESSENCE_STATIC_DIR)",
    )
    serve.set_defaults(func=cmd_serve)

    validate = sub.add_parser("kernel-validate", help="validate a kernel definition file")
    validate.add_argument("file", help="kernel JSON document")
    validate.set_defaults(func=cmd_kernel_validate)

    export = sub.add_parser("export", help="export a project's event log as CSV")
    export.add_argument(
        "--data-dir",
        default=os.environ.get("ESSENCE_DATA_DIR", DEFAULT_DATA_DIR),
        help=f"store location (env ESSENCE_DATA_DIR, default {DEFAULT_DATA_DIR})",
    )
    export.add_argument("--project", required=True, help="project id")
    export.add_argument("--out", default="-", help="output file, or - for stdout (default)")
    export.add_argument("--kernel", default=None, help="kernel definition file (default: built-in)")
    export.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
