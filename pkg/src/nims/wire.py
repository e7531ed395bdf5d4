"""Length-prefixed framing and message type codes.

A frame is a 4-byte big-endian length (message type plus body), one type
byte and the body. Every request gets exactly one response frame.
"""

from __future__ import annotations

import struct

from .errors import FrameTooLargeError, ProtocolError

MAX_FRAME = 1 << 28

ADD = 0x01
DELETE = 0x02
SEARCH = 0x03
PING = 0x04
ADD_OK = 0x81
DELETE_OK = 0x82
RESULTS = 0x83
PONG = 0x84
ERROR = 0x7F

REQUEST_TYPES = frozenset({ADD, DELETE, SEARCH, PING})
RESPONSE_TYPES = frozenset({ADD_OK, DELETE_OK, RESULTS, PONG, ERROR})

# ERROR codes
E_UNKNOWN_TYPE = 1
E_MALFORMED = 2
E_DUPLICATE = 3
E_INTERNAL = 4
E_TOO_LARGE = 5

_HEADER = struct.Struct(">IB")


def encode_frame(msg_type: int, body: bytes = b"") -> bytes:
    length = 1 + len(body)
    if length > MAX_FRAME:
        raise FrameTooLargeError(f"frame of {length} bytes exceeds {MAX_FRAME}")
    if not 0 <= msg_type <= 0xFF:
        raise ProtocolError(f"message type {msg_type} out of range")
    return _HEADER.pack(length, msg_type) + body


def decode_frame(buf: bytes):
    """Parse one frame from the front of ``buf``.

    Returns ``(msg_type, body, consumed)``, or ``None`` if ``buf`` does not
    yet hold a whole frame. Nothing is consumed in the ``None`` case.
    """
    if len(buf) < 4:
        return None
    length = int.from_bytes(buf[:4], "big")
    if length == 0:
        raise ProtocolError("zero-length frame has no message type")
    if length > MAX_FRAME:
        raise FrameTooLargeError(f"frame of {length} bytes exceeds {MAX_FRAME}")
    if len(buf) < 4 + length:
        return None
    return buf[4], bytes(buf[5:4 + length]), 4 + length


def read_frame(sock):
    """Blocking read of one frame; ``None`` on clean EOF before a header."""
    header = _recv_exact(sock, 4, allow_eof=True)
    if header is None:
        return None
    length = int.from_bytes(header, "big")
    if length == 0:
        raise ProtocolError("zero-length frame has no message type")
    if length > MAX_FRAME:
        raise FrameTooLargeError(f"frame of {length} bytes exceeds {MAX_FRAME}")
    rest = _recv_exact(sock, length)
    return rest[0], rest[1:]


def write_frame(sock, msg_type: int, body: bytes = b""):
    sock.sendall(encode_frame(msg_type, body))


def _recv_exact(sock, n: int, allow_eof: bool = False):
    chunks = []
    got = 0
    while got < n:
        chunk = sock.recv(min(n - got, 1 << 20))
        if not chunk:
            if allow_eof and got == 0:
                return None
            raise ConnectionError(f"connection closed after {got} of {n} bytes")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def encode_error(code: int, message: str) -> bytes:
    return code.to_bytes(2, "big") + message.encode("utf-8", "replace")


def decode_error(body: bytes):
    if len(body) < 2:
        raise ProtocolError("ERROR body too short")
    return int.from_bytes(body[:2], "big"), body[2:].decode("utf-8", "replace")
