"""Durable server store: a full snapshot plus an append-only intent log.

Every mutation is appended to ``<snapshot>.log`` and fsynced before it is
applied and acknowledged. The log is folded into a fresh snapshot after a
number of mutations and on clean shutdown. Log records carry a sequence
number, so records already covered by the snapshot are skipped on replay,
and a torn tail record (crash mid-write) is discarded.
"""

from __future__ import annotations

import logging
import os
import random
import threading
import zlib

from . import codec, hk, roles
from .errors import FormatError, ParameterError

log = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"NIMS-EDB\n"
SNAPSHOT_VERSION = 1

REC_ADD = 0x01
REC_DELETE = 0x02

SNAPSHOT_EVERY = 64
SNAPSHOT_LOG_BYTES = 64 << 20


def encode_snapshot(edb: roles.EncryptedDatabase, seq: int = 0) -> bytes:
    """Canonical snapshot bytes: entries sorted by address, matrices in order."""
    parts = [SNAPSHOT_MAGIC, bytes([SNAPSHOT_VERSION]),
             edb.lambda_bits.to_bytes(2, "big"), seq.to_bytes(8, "big"),
             edb.epoch_ts.to_bytes(8, "big"), len(edb.mat).to_bytes(4, "big")]
    parts.extend(codec.encode_matrix(m.matrix) for m in edb.mat)
    parts.append(len(edb.cdb).to_bytes(8, "big"))
    parts.extend(codec.encode_entry(a, edb.cdb[a]) for a in sorted(edb.cdb))
    return b"".join(parts)


def decode_snapshot(data: bytes):
    """Returns ``(edb, seq)``; refuses bad magic, version or truncation."""
    r = codec.Reader(data)
    if r.take(len(SNAPSHOT_MAGIC)) != SNAPSHOT_MAGIC:
        raise FormatError("not a snapshot file (bad magic)")
    version = r.u8()
    if version != SNAPSHOT_VERSION:
        raise FormatError(f"unsupported snapshot version {version}")
    lam, seq, epoch_ts = r.u16(), r.u64(), r.u64()
    mats = [hk.HiddenIndex(codec.decode_matrix(r)) for _ in range(r.u32())]
    cdb = {}
    for _ in range(r.u64()):
        addr, val = codec.decode_entry(r)
        cdb[addr] = val
    r.expect_end()
    return roles.EncryptedDatabase(cdb, mats, epoch_ts, lam), seq


def _fsync_dir(path):
    try:
        fd = os.open(os.path.dirname(os.path.abspath(path)), os.O_RDONLY)
    except OSError:
        return
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


class ServerStore:
    """An encrypted database bound to a snapshot path.

    All access goes through one lock, so a search never observes a
    half-applied add.
    """

    def __init__(self, snapshot_path, edb=None, seq=0, snapshot_every=SNAPSHOT_EVERY):
        self.snapshot_path = os.fspath(snapshot_path)
        self.log_path = self.snapshot_path + ".log"
        self.edb = edb if edb is not None else roles.EncryptedDatabase()
        self.seq = seq
        self.snapshot_every = snapshot_every
        self.dirty = False
        self._since_snapshot = 0
        self._lock = threading.Lock()
        self._rng = random.SystemRandom()
        self._log = None

    @classmethod
    def open(cls, snapshot_path, **kwargs):
        """Load the snapshot (if any) and replay the intent log."""
        path = os.fspath(snapshot_path)
        if os.path.exists(path):
            with open(path, "rb") as f:
                edb, seq = decode_snapshot(f.read())
        else:
            edb, seq = None, 0
        store = cls(path, edb, seq, **kwargs)
        store._replay()
        return store

    def _replay(self):
        if not os.path.exists(self.log_path):
            return
        with open(self.log_path, "rb") as f:
            data = f.read()
        pos = 0
        replayed = 0
        while pos < len(data):
            rec = _parse_record(data, pos)
            if rec is None:
                log.warning("discarding torn log tail at offset %d", pos)
                with open(self.log_path, "r+b") as f:
                    f.truncate(pos)
                break
            seq, kind, body, pos = rec
            if seq <= self.seq:
                continue
            self._apply(kind, body)
            self.seq = seq
            replayed += 1
        if replayed:
            self.dirty = True
            self._since_snapshot = replayed

    def _apply(self, kind, body):
        if kind == REC_ADD:
            roles.server_apply_add(self.edb, codec.decode_add_batch(body))
            return None
        if kind == REC_DELETE:
            return roles.server_apply_delete(self.edb, body)
        raise FormatError(f"unknown log record type {kind}")

    def _append(self, kind, body):
        if self._log is None:
            self._log = open(self.log_path, "ab")
        self.seq += 1
        head = self.seq.to_bytes(8, "big") + bytes([kind]) + len(body).to_bytes(4, "big")
        crc = zlib.crc32(head + body).to_bytes(4, "big")
        self._log.write(head + body + crc)
        self._log.flush()
        os.fsync(self._log.fileno())

    def add(self, batch: roles.AddBatch, raw: bytes | None = None):
        """Validate, log, then apply. Returns (entries added, matrix count)."""
        raw = raw if raw is not None else codec.encode_add_batch(batch)
        with self._lock:
            roles.check_add(self.edb, batch)
            self._append(REC_ADD, raw)
            roles.server_apply_add(self.edb, batch)
            self._mutated()
            return len(batch.dic_entries), len(batch.new_mat)

    def delete(self, eid: bytes) -> bool:
        with self._lock:
            if len(eid) != self.edb.eid_width:
                raise ParameterError(f"delete token must be {self.edb.eid_width} bytes")
            self._append(REC_DELETE, bytes(eid))
            found = roles.server_apply_delete(self.edb, eid)
            self._mutated()
            return found

    def search(self, token: roles.SearchToken, stats=None):
        with self._lock:
            return roles.server_search(self.edb, token, self._rng, stats)

    def status(self):
        with self._lock:
            return self.edb.epoch_ts, len(self.edb.mat), len(self.edb.cdb)

    def _mutated(self):
        self.dirty = True
        self._since_snapshot += 1
        if self._since_snapshot >= self.snapshot_every or (
                self._log is not None and self._log.tell() >= SNAPSHOT_LOG_BYTES):
            self._snapshot_locked()

    def snapshot_save(self):
        with self._lock:
            self._snapshot_locked()

    def _snapshot_locked(self):
        tmp = self.snapshot_path + ".tmp"
        with open(tmp, "wb") as f:
            f.write(encode_snapshot(self.edb, self.seq))
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, self.snapshot_path)
        _fsync_dir(self.snapshot_path)
        # every logged record is now covered by the snapshot's seq
        if self._log is not None:
            self._log.close()
            self._log = None
        with open(self.log_path, "wb"):
            pass
        self.dirty = False
        self._since_snapshot = 0

    def close(self):
        """Clean shutdown: fold the log into the snapshot."""
        with self._lock:
            if self.dirty or not os.path.exists(self.snapshot_path):
                self._snapshot_locked()
            if self._log is not None:
                self._log.close()
                self._log = None


def snapshot_save(store: ServerStore):
    store.snapshot_save()


def snapshot_load(path) -> ServerStore:
    return ServerStore.open(path)


def _parse_record(data, pos):
    if pos + 13 > len(data):
        return None
    seq = int.from_bytes(data[pos:pos + 8], "big")
    kind = data[pos + 8]
    length = int.from_bytes(data[pos + 9:pos + 13], "big")
    end = pos + 13 + length
    if end + 4 > len(data):
        return None
    if zlib.crc32(data[pos:end]) != int.from_bytes(data[end:end + 4], "big"):
        return None
    return seq, kind, data[pos + 13:end], end + 4
