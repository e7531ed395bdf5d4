import random
import socket
import threading

import pytest

from nims import codec, roles, store as store_mod, wire
from nims.client import Client, client_call
from nims.errors import (DuplicateAddressError, FrameTooLargeError, ProtocolError, RemoteError,
                         TransportConnectionError, FormatError)
from nims.roles import Document
from nims.server import NimsServer, handle_request, parse_addr
from nims.store import ServerStore

from conftest import SMALL


# -- framing -------------------------------------------------------------------

def test_frame_empty_body():
    f = wire.encode_frame(wire.PING)
    assert f == b"\x00\x00\x00\x01\x04"
    assert wire.decode_frame(f) == (wire.PING, b"", 5)


def test_frame_partial_returns_none():
    f = wire.encode_frame(wire.SEARCH, b"hello")
    for cut in range(len(f)):
        assert wire.decode_frame(f[:cut]) is None
    assert wire.decode_frame(f + b"extra") == (wire.SEARCH, b"hello", len(f))


def test_frame_limits():
    with pytest.raises(FrameTooLargeError):
        wire.decode_frame((wire.MAX_FRAME + 1).to_bytes(4, "big") + b"\x01")
    with pytest.raises(ProtocolError):
        wire.decode_frame(b"\x00\x00\x00\x00")
    with pytest.raises(ProtocolError):
        wire.encode_frame(256)


def test_error_body():
    assert wire.decode_error(wire.encode_error(3, "dup")) == (3, "dup")
    with pytest.raises(ProtocolError):
        wire.decode_error(b"\x00")


def test_parse_addr(monkeypatch):
    assert parse_addr("10.0.0.1:99") == ("10.0.0.1", 99)
    monkeypatch.setenv("NIMS_SERVER_ADDR", "h:1")
    assert parse_addr(None) == ("h", 1)
    with pytest.raises(ValueError):
        parse_addr("nohost")


# -- store ---------------------------------------------------------------------

@pytest.fixture
def owner(rng):
    return roles.owner_setup(SMALL, rng)[0]


def test_snapshot_bytes_stable(tmp_path, owner, rng):
    s = ServerStore.open(tmp_path / "edb")
    s.add(roles.owner_add(owner, [Document("a", {"x", "y"})], 1, rng))
    s.delete(roles.owner_delete(owner, "a"))
    s.snapshot_save()
    first = (tmp_path / "edb").read_bytes()
    s2 = ServerStore.open(tmp_path / "edb")
    s2.snapshot_save()
    assert (tmp_path / "edb").read_bytes() == first
    edb, seq = store_mod.decode_snapshot(first)
    assert seq == 2 and edb.cdb == s.edb.cdb


def test_bad_snapshot(tmp_path):
    p = tmp_path / "edb"
    p.write_bytes(b"garbage")
    with pytest.raises(FormatError):
        ServerStore.open(p)


def test_log_replay_and_torn_tail(tmp_path, owner, rng):
    path = tmp_path / "edb"
    s = ServerStore.open(path, snapshot_every=1000)
    s.add(roles.owner_add(owner, [Document("a", {"x"})], 1, rng))
    s.add(roles.owner_add(owner, [Document("b", {"x"})], 2, rng))
    expected = dict(s.edb.cdb)
    # simulate a crash mid-append: garbage half-record at the tail
    with open(str(path) + ".log", "ab") as f:
        f.write(b"\x00\x00\x00\x00\x00\x00\x00\x09\x02\x00\x00")
    s2 = ServerStore.open(path)
    assert s2.edb.cdb == expected and s2.seq == 2
    s2.delete(roles.owner_delete(owner, "a"))
    s3 = ServerStore.open(path)
    assert s3.seq == 3 and len(s3.edb.cdb) == len(expected) - 1


def test_store_rejects_duplicate_without_logging(tmp_path, owner, rng):
    s = ServerStore.open(tmp_path / "edb")
    batch = roles.owner_add(owner, [Document("a", {"x"})], 1, rng)
    s.add(batch)
    with pytest.raises(DuplicateAddressError):
        s.add(batch)
    assert s.seq == 1


def test_handle_request_errors(tmp_path):
    s = ServerStore.open(tmp_path / "edb")
    t, body = handle_request(s, 0x55, b"")
    assert t == wire.ERROR and wire.decode_error(body)[0] == wire.E_UNKNOWN_TYPE
    t, body = handle_request(s, wire.ADD, b"\x01")
    assert wire.decode_error(body)[0] == wire.E_MALFORMED
    t, body = handle_request(s, wire.DELETE, b"short")
    assert wire.decode_error(body)[0] == wire.E_MALFORMED
    t, body = handle_request(s, wire.PING, b"x")
    assert t == wire.ERROR
    assert s.seq == 0


# -- live server -----------------------------------------------------------------

@pytest.fixture
def live(tmp_path):
    def start():
        st = ServerStore.open(tmp_path / "edb")
        srv = NimsServer(st, ("127.0.0.1", 0))
        th = threading.Thread(target=srv.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True)
        th.start()
        return srv, f"127.0.0.1:{srv.server_address[1]}"

    running = []

    def stop(srv):
        srv.shutdown()
        srv.server_close()
        srv.store.close()
        running.remove(srv)

    def _start():
        srv, addr = start()
        running.append(srv)
        return srv, addr

    yield _start, stop
    for srv in list(running):
        stop(srv)


def test_ping_fresh(live):
    start, _ = live
    _, addr = start()
    with Client(addr) as c:
        assert c.ping() == (0, 0, 0)


def test_add_search_restart(live, owner, rng):
    start, stop = live
    srv, addr = start()
    with Client(addr) as c:
        assert c.add(roles.owner_add(owner, [Document("a", {"x"}), Document("b", {"x", "y"})], 1, rng)) == (7, 2)
        tok = roles.user_search_token(owner.msk, "x", 1, rng)
        assert roles.user_decrypt_results(owner.msk, c.search(tok)) == {b"a", b"b"}
        assert c.delete(roles.owner_delete(owner, "a")) is True
        with pytest.raises(RemoteError) as ei:
            c.delete(b"tiny")
        assert ei.value.code == wire.E_MALFORMED
        # connection stays usable after an error reply
        assert c.ping()[1] == 2
    stop(srv)
    _, addr = start()
    with Client(addr) as c:
        tok = roles.user_search_token(owner.msk, "x", 1, rng)
        assert roles.user_decrypt_results(owner.msk, c.search(tok)) == {b"b"}


def test_unknown_type_and_client_call(live):
    start, _ = live
    _, addr = start()
    raw = client_call(addr, wire.encode_frame(0x42))
    t, body, _ = wire.decode_frame(raw)
    assert t == wire.ERROR and wire.decode_error(body)[0] == wire.E_UNKNOWN_TYPE
    raw = client_call(addr, wire.encode_frame(wire.PING))
    assert wire.decode_frame(raw)[0] == wire.PONG
    with pytest.raises(ProtocolError):
        client_call(addr, wire.encode_frame(wire.PING) + b"x")


def test_oversize_frame_gets_error(live):
    start, _ = live
    srv, _ = start()
    with socket.create_connection(srv.server_address[:2], timeout=5) as s:
        s.sendall((wire.MAX_FRAME + 1).to_bytes(4, "big"))
        t, body = wire.read_frame(s)
    assert t == wire.ERROR and wire.decode_error(body)[0] == wire.E_TOO_LARGE


def test_connection_refused():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    with pytest.raises(TransportConnectionError):
        Client(f"127.0.0.1:{port}", timeout=2).ping()


def test_concurrent_clients(live, owner, rng):
    start, _ = live
    _, addr = start()
    with Client(addr) as c:
        c.add(roles.owner_add(owner, [Document(f"d{i}", {"x"}) for i in range(5)], 1, rng))
    toks = [roles.user_search_token(owner.msk, "x", 1, random.Random(i)) for i in range(4)]
    results = []

    def run(tok):
        with Client(addr) as c:
            results.append(roles.user_decrypt_results(owner.msk, c.search(tok)))

    threads = [threading.Thread(target=run, args=(t,)) for t in toks]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results == [{f"d{i}".encode() for i in range(5)}] * 4
