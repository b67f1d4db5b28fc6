"""Host side: serve fact queries to one child and collect its verdict.

The fact source is a plain fact-table dict in the primary pipeline's
canonical dump schema ({"image_id", "objects": [{object_id, name, area,
length, centroid, bbox, color, color_name, ...}]}). Query semantics match
the embedded evaluator: annotation order for find, object_id tie-breaks,
strict bounding-box overlap, nearest excludes the source object.
"""

from __future__ import annotations

import queue
import subprocess
import sys
import threading
import time

from . import protocol

DEFAULT_TIMEOUT_S = 10.0
DEFAULT_MEMORY_BYTES = 512 * 1024 * 1024

PREDICTED_NORMAL = "normal"
PREDICTED_ABNORMAL = "abnormal"
PREDICTED_FAILED = "evaluation_failed"


class ShimError(Exception):
    """Base for shim infrastructure failures."""


class ShimTimeout(ShimError):
    """The child exceeded its wall-clock budget and was killed."""


class ShimCrash(ShimError):
    """The child died without delivering a result."""


class ProtocolError(ShimError):
    """The child sent bytes that are not valid frames."""


class ShimExecutionError(ShimError):
    """The generated source raised; carries the child traceback."""

    def __init__(self, child_traceback: str):
        super().__init__(child_traceback.strip().splitlines()[-1] if child_traceback else "error")
        self.child_traceback = child_traceback


class QueryError(Exception):
    """A query the fact table cannot answer; relayed to the child."""


class FactTableServer:
    """Answers the eight fact queries from one canonical fact table."""

    def __init__(self, fact_table: dict):
        self.image_id = fact_table["image_id"]
        self._objects = list(fact_table["objects"])
        self._by_id = {o["object_id"]: o for o in self._objects}

    def _get(self, object_id) -> dict:
        if not isinstance(object_id, str) or object_id not in self._by_id:
            raise QueryError(f"no object {object_id!r}")
        return self._by_id[object_id]

    def _named(self, name) -> list[dict]:
        if not isinstance(name, str):
            raise QueryError("object name must be a string")
        return [o for o in self._objects if o["name"] == name]

    def find(self, name):
        return [o["object_id"] for o in self._named(name)]

    def count(self, name):
        return len(self._named(name))

    def size(self, object_id):
        obj = self._get(object_id)
        return {"area": obj["area"], "length": obj["length"]}

    def position(self, object_id):
        obj = self._get(object_id)
        return {"x": obj["centroid"][0], "y": obj["centroid"][1]}

    def color(self, object_id):
        obj = self._get(object_id)
        return {"name": obj["color_name"], "rgb": list(obj["color"])}

    def order(self, name, axis):
        if axis not in ("x", "y"):
            raise QueryError(f"axis must be 'x' or 'y', got {axis!r}")
        idx = 0 if axis == "x" else 1
        ranked = sorted(self._named(name), key=lambda o: (o["centroid"][idx], o["object_id"]))
        return [o["object_id"] for o in ranked]

    def nearest(self, object_id, name):
        src = self._get(object_id)
        candidates = [o for o in self._named(name) if o["object_id"] != object_id]
        if not candidates:
            raise QueryError(f"no {name!r} candidates near {object_id!r}")
        sx, sy = src["centroid"]
        best = min(
            candidates,
            key=lambda o: (
                (o["centroid"][0] - sx) ** 2 + (o["centroid"][1] - sy) ** 2,
                o["object_id"],
            ),
        )
        return best["object_id"]

    def overlaps(self, id_a, id_b):
        a = self._get(id_a)["bbox"]
        b = self._get(id_b)["bbox"]
        width = min(a[2], b[2]) - max(a[0], b[0])
        height = min(a[3], b[3]) - max(a[1], b[1])
        return width > 0 and height > 0

    _ARITY = {
        "find": 1,
        "count": 1,
        "size": 1,
        "position": 1,
        "color": 1,
        "order": 2,
        "nearest": 2,
        "overlaps": 2,
    }

    def dispatch(self, op, args):
        if op not in self._ARITY:
            raise QueryError(f"unknown query {op!r}")
        if not isinstance(args, list) or len(args) != self._ARITY[op]:
            raise QueryError(f"{op} takes {self._ARITY[op]} argument(s)")
        return getattr(self, op)(*args)


def _drain(stream, sink: list) -> None:
    for line in iter(stream.readline, b""):
        sink.append(line)
    stream.close()


def _read_frames(stream, frames: "queue.Queue") -> None:
    try:
        while True:
            frame = protocol.read_frame(stream)
            if frame is None:
                frames.put(("eof", None))
                return
            frames.put(("frame", frame))
    except protocol.FramingError as exc:
        frames.put(("bad", str(exc)))
    except OSError:
        frames.put(("eof", None))


class ShimSession:
    """One child process evaluating one source against one fact table."""

    def __init__(
        self,
        source: str,
        server: FactTableServer,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        entry: str = "analyze_image",
        memory_bytes: int = DEFAULT_MEMORY_BYTES,
    ):
        self.source = source
        self.server = server
        self.timeout_s = timeout_s
        self.entry = entry
        self.memory_bytes = memory_bytes

    def run(self) -> tuple[bool, str]:
        """Returns (abnormal, reason_string) or raises a ShimError."""
        child = subprocess.Popen(
            [sys.executable, "-I", "-m", "logicode_pyshim.child", "stdio"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
        )
        frames: "queue.Queue" = queue.Queue()
        stderr_lines: list[bytes] = []
        reader = threading.Thread(target=_read_frames, args=(child.stdout, frames), daemon=True)
        sink = threading.Thread(target=_drain, args=(child.stderr, stderr_lines), daemon=True)
        reader.start()
        sink.start()
        deadline = time.monotonic() + self.timeout_s
        try:
            protocol.write_frame(
                child.stdin,
                {
                    "type": "init",
                    "source": self.source,
                    "entry": self.entry,
                    "image_path": self.server.image_id,
                    "limits": {
                        "cpu_seconds": max(1, int(self.timeout_s) + 1),
                        "memory_bytes": self.memory_bytes,
                    },
                },
            )
            while True:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise ShimTimeout(f"no result within {self.timeout_s:.1f}s")
                try:
                    kind, payload = frames.get(timeout=remaining)
                except queue.Empty:
                    raise ShimTimeout(f"no result within {self.timeout_s:.1f}s") from None
                if kind == "eof":
                    raise ShimCrash(self._crash_message(child, stderr_lines))
                if kind == "bad":
                    raise ProtocolError(payload)
                message = payload
                mtype = message.get("type")
                if mtype == "query":
                    self._answer(child.stdin, message)
                elif mtype == "done":
                    abnormal = message.get("abnormal")
                    reason_string = message.get("reason_string")
                    if not isinstance(abnormal, bool) or not isinstance(reason_string, str):
                        raise ProtocolError("malformed done frame")
                    return abnormal, reason_string
                elif mtype == "exception":
                    raise ShimExecutionError(message.get("traceback", ""))
                else:
                    raise ProtocolError(f"unexpected frame type {mtype!r}")
        except BrokenPipeError as exc:
            raise ShimCrash(self._crash_message(child, stderr_lines)) from exc
        finally:
            child.kill()
            child.wait()
            reader.join(timeout=1.0)
            sink.join(timeout=1.0)
            if child.stdin:
                child.stdin.close()

    def _answer(self, writer, message: dict) -> None:
        qid = message.get("query_id")
        try:
            value = self.server.dispatch(message.get("query"), message.get("args"))
            protocol.write_frame(writer, {"type": "result", "query_id": qid, "value": value})
        except QueryError as exc:
            protocol.write_frame(writer, {"type": "error", "query_id": qid, "error": str(exc)})

    @staticmethod
    def _crash_message(child, stderr_lines: list[bytes]) -> str:
        tail = b"".join(stderr_lines[-10:]).decode("utf-8", errors="replace").strip()
        code = child.poll()
        message = f"child exited with code {code} before delivering a result"
        if tail:
            message += f"; stderr tail: {tail}"
        return message


def shim_evaluate(
    source_text: str,
    fact_table: dict,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    entry: str = "analyze_image",
) -> dict:
    """Evaluate one generated function against one fact table.

    Returns an analysis-report dict: image_id, predicted (normal /
    abnormal / evaluation_failed), reasons, reason_string, and error with
    the captured traceback or fault description on failure. Timeouts,
    crashes and protocol faults never raise; they become
    evaluation_failed.
    """
    server = FactTableServer(fact_table)
    session = ShimSession(source_text, server, timeout_s=timeout_s, entry=entry)
    try:
        abnormal, reason_string = session.run()
    except ShimExecutionError as exc:
        return {
            "image_id": server.image_id,
            "predicted": PREDICTED_FAILED,
            "reasons": [],
            "reason_string": "",
            "error": exc.child_traceback,
        }
    except ShimError as exc:
        return {
            "image_id": server.image_id,
            "predicted": PREDICTED_FAILED,
            "reasons": [],
            "reason_string": "",
            "error": f"{type(exc).__name__}: {exc}",
        }
    reasons = [part for part in reason_string.split("; ") if part]
    return {
        "image_id": server.image_id,
        "predicted": PREDICTED_ABNORMAL if abnormal else PREDICTED_NORMAL,
        "reasons": reasons,
        "reason_string": "; ".join(reasons),
        "error": None,
    }
