"""TCP server dispatching protocol frames to a ServerStore."""

from __future__ import annotations

import logging
import os
import signal
import socketserver
import threading

from . import codec, wire
from .errors import DuplicateAddressError, FormatError, NimsError, ParameterError, ProtocolError
from .roles import SearchToken
from .store import ServerStore

log = logging.getLogger(__name__)

ENV_ADDR = "NIMS_SERVER_ADDR"
DEFAULT_ADDR = "127.0.0.1:7878"


def parse_addr(addr: str | None):
    addr = addr or os.environ.get(ENV_ADDR) or DEFAULT_ADDR
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise ParameterError(f"address must be host:port, got {addr!r}")
    return host, int(port)


def handle_request(store: ServerStore, msg_type: int, body: bytes):
    """One request frame in, one ``(type, body)`` response out. Never raises
    for bad input: failures become ERROR frames with the store unchanged."""
    try:
        if msg_type == wire.ADD:
            batch = codec.decode_add_batch(body)
            added, mats = store.add(batch, raw=body)
            return wire.ADD_OK, added.to_bytes(4, "big") + mats.to_bytes(4, "big")
        if msg_type == wire.DELETE:
            found = store.delete(body)
            return wire.DELETE_OK, bytes([int(found)])
        if msg_type == wire.SEARCH:
            token = SearchToken(codec.decode_token(body))
            return wire.RESULTS, codec.encode_results(store.search(token))
        if msg_type == wire.PING:
            if body:
                raise FormatError("PING takes no body")
            epoch_ts, n_mat, n_cdb = store.status()
            return wire.PONG, epoch_ts.to_bytes(8, "big") + n_mat.to_bytes(4, "big") + n_cdb.to_bytes(8, "big")
        return wire.ERROR, wire.encode_error(wire.E_UNKNOWN_TYPE, f"unknown message type 0x{msg_type:02x}")
    except (FormatError, ParameterError) as exc:
        return wire.ERROR, wire.encode_error(wire.E_MALFORMED, str(exc))
    except DuplicateAddressError as exc:
        return wire.ERROR, wire.encode_error(wire.E_DUPLICATE, str(exc))
    except NimsError as exc:
        log.exception("request failed")
        return wire.ERROR, wire.encode_error(wire.E_INTERNAL, f"{type(exc).__name__}: {exc}")


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        sock = self.request
        while True:
            try:
                frame = wire.read_frame(sock)
            except wire.FrameTooLargeError as exc:
                wire.write_frame(sock, wire.ERROR, wire.encode_error(wire.E_TOO_LARGE, str(exc)))
                return
            except (ProtocolError, ConnectionError, OSError):
                return
            if frame is None:
                return
            reply_type, reply = handle_request(self.server.store, *frame)
            try:
                wire.write_frame(sock, reply_type, reply)
            except OSError:
                return


class NimsServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, store: ServerStore, addr):
        self.store = store
        super().__init__(addr, _Handler)


def serve(store: ServerStore, listen: str | None = None, ready=None):
    """Serve until SIGINT/SIGTERM, then fold the log into a snapshot.

    ``ready`` is called with the bound ``(host, port)`` once listening.
    """
    server = NimsServer(store, parse_addr(listen))
    host, port = server.server_address[:2]
    log.info("listening on %s:%d", host, port)
    stop = threading.Event()

    def _stop(signum, frame):
        stop.set()
        threading.Thread(target=server.shutdown, daemon=True).start()

    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGTERM, _stop)
        signal.signal(signal.SIGINT, _stop)
    if ready is not None:
        ready((host, port))
    try:
        server.serve_forever(poll_interval=0.2)
    finally:
        server.server_close()
        store.close()
