"""Blocking client transport for the three roles."""

from __future__ import annotations

import socket

from . import codec, wire
from .errors import ProtocolError, RemoteError, TransportConnectionError, TransportTimeout
from .roles import AddBatch, SearchToken
from .server import parse_addr


class Client:
    """One TCP connection, reused across calls; reconnects lazily."""

    def __init__(self, addr: str | None = None, timeout: float = 30.0):
        self.addr = parse_addr(addr)
        self.timeout = timeout
        self._sock = None
        self.bytes_sent = 0

    def _connect(self):
        try:
            self._sock = socket.create_connection(self.addr, timeout=self.timeout)
        except socket.timeout:
            raise TransportTimeout(f"connect to {self.addr} timed out") from None
        except OSError as exc:
            raise TransportConnectionError(f"cannot reach {self.addr[0]}:{self.addr[1]}: {exc}") from None

    def close(self):
        if self._sock is not None:
            self._sock.close()
            self._sock = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def call(self, msg_type: int, body: bytes = b""):
        """Send one request frame and return the response ``(type, body)``.

        ERROR responses raise RemoteError.
        """
        frame = wire.encode_frame(msg_type, body)
        if self._sock is None:
            self._connect()
        try:
            self._sock.sendall(frame)
            reply = wire.read_frame(self._sock)
        except socket.timeout:
            self.close()
            raise TransportTimeout(f"no reply from {self.addr} within {self.timeout}s") from None
        except OSError as exc:
            self.close()
            raise TransportConnectionError(f"connection to {self.addr} failed: {exc}") from None
        if reply is None:
            self.close()
            raise TransportConnectionError("server closed the connection")
        self.bytes_sent += len(frame)
        rtype, rbody = reply
        if rtype == wire.ERROR:
            raise RemoteError(*wire.decode_error(rbody))
        if rtype not in wire.RESPONSE_TYPES:
            raise ProtocolError(f"unexpected response type 0x{rtype:02x}")
        return rtype, rbody

    def _expect(self, want, msg_type, body=b""):
        rtype, rbody = self.call(msg_type, body)
        if rtype != want:
            raise ProtocolError(f"expected 0x{want:02x}, got 0x{rtype:02x}")
        return rbody

    def ping(self):
        """Returns ``(epoch_ts, matrix count, cdb size)``."""
        body = self._expect(wire.PONG, wire.PING)
        if len(body) != 20:
            raise ProtocolError("bad PONG body")
        return int.from_bytes(body[:8], "big"), int.from_bytes(body[8:12], "big"), int.from_bytes(body[12:], "big")

    def add(self, batch: AddBatch):
        body = self._expect(wire.ADD_OK, wire.ADD, codec.encode_add_batch(batch))
        return int.from_bytes(body[:4], "big"), int.from_bytes(body[4:8], "big")

    def delete(self, eid: bytes) -> bool:
        body = self._expect(wire.DELETE_OK, wire.DELETE, eid)
        return body == b"\x01"

    def search(self, token: SearchToken) -> list:
        return codec.decode_results(self._expect(wire.RESULTS, wire.SEARCH, codec.encode_token(token.token)))


def client_call(endpoint: str, request_frame: bytes, timeout: float = 30.0) -> bytes:
    """Send a pre-encoded request frame; return the raw response frame."""
    parsed = wire.decode_frame(request_frame)
    if parsed is None or parsed[2] != len(request_frame):
        raise ProtocolError("request must be exactly one complete frame")
    with Client(endpoint, timeout) as c:
        try:
            rtype, rbody = c.call(parsed[0], parsed[1])
        except RemoteError as exc:
            return wire.encode_frame(wire.ERROR, wire.encode_error(exc.code, exc.remote_message))
        return wire.encode_frame(rtype, rbody)
