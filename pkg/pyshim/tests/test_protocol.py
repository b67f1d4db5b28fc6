import io
import struct

import pytest

from logicode_pyshim import protocol


def test_round_trip():
    buf = io.BytesIO()
    protocol.write_frame(buf, {"type": "query", "query_id": 1, "args": ["cable", 0]})
    protocol.write_frame(buf, {"type": "done", "abnormal": True})
    buf.seek(0)
    assert protocol.read_frame(buf) == {"type": "query", "query_id": 1, "args": ["cable", 0]}
    assert protocol.read_frame(buf) == {"type": "done", "abnormal": True}
    assert protocol.read_frame(buf) is None


def test_clean_eof_at_boundary():
    assert protocol.read_frame(io.BytesIO()) is None


def test_truncated_header():
    with pytest.raises(protocol.FramingError, match="mid-frame"):
        protocol.read_frame(io.BytesIO(b"\x00\x00"))


def test_truncated_body():
    buf = io.BytesIO(struct.pack(">I", 10) + b"{}")
    with pytest.raises(protocol.FramingError, match="mid-frame"):
        protocol.read_frame(buf)


def test_missing_body_after_header():
    buf = io.BytesIO(struct.pack(">I", 10))
    with pytest.raises(protocol.FramingError, match="before frame body"):
        protocol.read_frame(buf)


def test_oversized_frame_rejected():
    buf = io.BytesIO(struct.pack(">I", protocol.MAX_FRAME_BYTES + 1))
    with pytest.raises(protocol.FramingError, match="exceeds"):
        protocol.read_frame(buf)


def test_non_json_body():
    body = b"not json!"
    buf = io.BytesIO(struct.pack(">I", len(body)) + body)
    with pytest.raises(protocol.FramingError, match="not JSON"):
        protocol.read_frame(buf)


def test_non_object_body():
    body = b"[1, 2]"
    buf = io.BytesIO(struct.pack(">I", len(body)) + body)
    with pytest.raises(protocol.FramingError, match="object"):
        protocol.read_frame(buf)
