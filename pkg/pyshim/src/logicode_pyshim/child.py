"""Child-process runner: executes one generated analysis function.

Reads an init frame with the source text, execs it with an Image proxy in
scope, calls the entry function with the image path, and reports either a
(bool, reason-string) result or the exception traceback. Every Image
method call is one query frame answered by the host.

Invoked as ``python -I -m logicode_pyshim.child stdio`` so the untrusted
source runs without inherited sys.path or user site-packages.
"""

from __future__ import annotations

import math
import sys
import traceback

from . import protocol


class QueryFailed(RuntimeError):
    """The host rejected a query (unknown object, bad arguments)."""


class _Channel:
    def __init__(self, reader, writer):
        self._reader = reader
        self._writer = writer
        self._next_id = 0

    def query(self, op: str, args: list):
        self._next_id += 1
        qid = self._next_id
        protocol.write_frame(
            self._writer, {"type": "query", "query_id": qid, "query": op, "args": args}
        )
        reply = protocol.read_frame(self._reader)
        if reply is None:
            raise RuntimeError("host closed the fact channel")
        if reply.get("query_id") != qid:
            raise RuntimeError(f"host answered query {reply.get('query_id')}, expected {qid}")
        if "error" in reply:
            raise QueryFailed(reply["error"])
        return reply.get("value")


class Image:
    """Proxy mirroring the host's fact queries; object handles are ids."""

    def __init__(self, image_path, _channel=None):
        self._channel = _channel or _ACTIVE_CHANNEL
        self.image_path = image_path

    def find(self, name):
        return self._channel.query("find", [name])

    def count(self, name):
        return self._channel.query("count", [name])

    def size(self, object_id):
        return self._channel.query("size", [object_id])

    def position(self, object_id):
        return self._channel.query("position", [object_id])

    def color(self, object_id):
        return self._channel.query("color", [object_id])

    def order(self, name, axis):
        return self._channel.query("order", [name, axis])

    def nearest(self, object_id, name):
        return self._channel.query("nearest", [object_id, name])

    def overlaps(self, id_a, id_b):
        return self._channel.query("overlaps", [id_a, id_b])


_ACTIVE_CHANNEL: _Channel | None = None


def _apply_limits(limits: dict) -> None:
    try:
        import resource
    except ImportError:  # pragma: no cover - non-POSIX
        return
    cpu = int(limits.get("cpu_seconds", 0))
    if cpu > 0:
        resource.setrlimit(resource.RLIMIT_CPU, (cpu, cpu + 1))
    memory = int(limits.get("memory_bytes", 0))
    if memory > 0:
        try:
            resource.setrlimit(resource.RLIMIT_AS, (memory, memory))
        except ValueError:  # pragma: no cover - platform-dependent floor
            pass


def run(reader, writer) -> None:
    global _ACTIVE_CHANNEL
    init = protocol.read_frame(reader)
    if init is None or init.get("type") != "init":
        protocol.write_frame(writer, {"type": "exception", "traceback": "missing init frame"})
        return
    _apply_limits(init.get("limits", {}))
    channel = _Channel(reader, writer)
    _ACTIVE_CHANNEL = channel

    try:
        source = init["source"]
        entry_name = init.get("entry", "analyze_image")
        namespace = {"Image": Image, "math": math}
        exec(compile(source, "<generated>", "exec"), namespace)  # noqa: S102
        entry = namespace.get(entry_name)
        if not callable(entry):
            raise NameError(f"source does not define a callable {entry_name!r}")
        result = entry(init.get("image_path", ""))
        if (
            not isinstance(result, (tuple, list))
            or len(result) != 2
            or not isinstance(result[0], bool)
            or not isinstance(result[1], str)
        ):
            raise TypeError(
                f"{entry_name} must return (bool, str), got {type(result).__name__}"
            )
        protocol.write_frame(
            writer,
            {"type": "done", "abnormal": result[0], "reason_string": result[1]},
        )
    except BaseException:  # noqa: BLE001 - report everything, then exit
        protocol.write_frame(
            writer, {"type": "exception", "traceback": traceback.format_exc()}
        )


def main() -> int:
    if len(sys.argv) != 2 or sys.argv[1] != "stdio":
        print("usage: python -m logicode_pyshim.child stdio", file=sys.stderr)
        return 2
    reader = sys.stdin.buffer
    writer = sys.stdout.buffer
    # user print() must not corrupt the frame stream
    sys.stdout = sys.stderr
    run(reader, writer)
    return 0


if __name__ == "__main__":
    sys.exit(main())
