"""Length-prefixed JSON framing: 4-byte big-endian length, UTF-8 body.

Debuggable by eye (the body is plain JSON) and trivially portable. Frames
over 16 MiB are rejected as protocol violations.
"""

from __future__ import annotations

import json
import struct

MAX_FRAME_BYTES = 16 * 1024 * 1024


class FramingError(Exception):
    """The byte stream is not a valid frame sequence."""


def write_frame(stream, message: dict) -> None:
    data = json.dumps(message, sort_keys=True).encode("utf-8")
    if len(data) > MAX_FRAME_BYTES:
        raise FramingError(f"frame of {len(data)} bytes exceeds limit")
    stream.write(struct.pack(">I", len(data)) + data)
    stream.flush()


def _read_exact(stream, n: int) -> bytes | None:
    chunks = []
    remaining = n
    while remaining:
        chunk = stream.read(remaining)
        if not chunk:
            if chunks:
                raise FramingError("stream ended mid-frame")
            return None
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(stream) -> dict | None:
    """Next frame, or None on clean end-of-stream at a frame boundary."""
    header = _read_exact(stream, 4)
    if header is None:
        return None
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME_BYTES:
        raise FramingError(f"declared frame of {length} bytes exceeds limit")
    body = _read_exact(stream, length)
    if body is None:
        raise FramingError("stream ended before frame body")
    try:
        message = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FramingError(f"frame body is not JSON: {exc}") from exc
    if not isinstance(message, dict):
        raise FramingError("frame body must be a JSON object")
    return message
