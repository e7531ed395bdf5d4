"""Bit-exact binary layouts for matrices, protocol payloads and state files.

Integers: sign byte (0 non-negative, 1 negative), 4-byte big-endian
magnitude length, minimal big-endian magnitude. Matrices: 2-byte dimension
then the entries row-major. All other counts are big-endian and fixed width.
"""

from __future__ import annotations

import struct

from . import hk
from .errors import FormatError
from .params import SchemeParams
from .primitives import MasterSecret
from .roles import AddBatch, OwnerState

OWNER_MAGIC = b"NIMS-OWNER\n"
MSK_MAGIC = b"NIMS-MSK\n"
STATE_VERSION = 1

_PARAMS = struct.Struct(">HHHHQ")


class Reader:
    """Cursor over a bytes object; raises FormatError on overrun."""

    def __init__(self, data: bytes, pos: int = 0):
        self.data = memoryview(data)
        self.pos = pos

    def take(self, n: int) -> bytes:
        end = self.pos + n
        if n < 0 or end > len(self.data):
            raise FormatError(f"truncated input: need {n} bytes at offset {self.pos}")
        out = bytes(self.data[self.pos:end])
        self.pos = end
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def u64(self) -> int:
        return int.from_bytes(self.take(8), "big")

    def at_end(self) -> bool:
        return self.pos == len(self.data)

    def expect_end(self):
        if not self.at_end():
            raise FormatError(f"{len(self.data) - self.pos} trailing bytes")


def encode_int(x: int) -> bytes:
    mag = abs(x)
    body = mag.to_bytes((mag.bit_length() + 7) // 8, "big")
    return bytes([1 if x < 0 else 0]) + len(body).to_bytes(4, "big") + body


def decode_int(r: Reader) -> int:
    sign = r.u8()
    if sign > 1:
        raise FormatError(f"bad sign byte {sign}")
    body = r.take(r.u32())
    if body[:1] == b"\x00":
        raise FormatError("non-minimal integer magnitude")
    mag = int.from_bytes(body, "big")
    if sign and not mag:
        raise FormatError("negative zero")
    return -mag if sign else mag


def encode_matrix(m) -> bytes:
    n = len(m)
    parts = [n.to_bytes(2, "big")]
    for row in m:
        if len(row) != n:
            raise FormatError("matrix must be square")
        parts.extend(encode_int(x) for x in row)
    return b"".join(parts)


def decode_matrix(r: Reader) -> tuple:
    n = r.u16()
    return tuple(tuple(decode_int(r) for _ in range(n)) for _ in range(n))


def encode_params(p: SchemeParams) -> bytes:
    return _PARAMS.pack(p.lambda_bits, p.iota, p.kappa, p.n, p.genesis)


def decode_params(r: Reader) -> SchemeParams:
    lam, iota, kappa, n, genesis = _PARAMS.unpack(r.take(_PARAMS.size))
    try:
        p = SchemeParams(lam, iota, kappa, genesis)
    except ValueError as exc:
        raise FormatError(f"bad params block: {exc}") from None
    if p.n != n:
        raise FormatError(f"params block says n={n}, expected {p.n}")
    return p


def _encode_msk_body(msk: MasterSecret) -> bytes:
    return b"".join([
        encode_params(msk.params),
        msk.k,
        encode_matrix(msk.m1),
        encode_matrix(msk.m2),
        encode_matrix(msk.m1_inv),
        encode_matrix(msk.m2_inv),
    ])


def _decode_msk_body(r: Reader) -> MasterSecret:
    params = decode_params(r)
    k = r.take(params.key_bytes)
    mats = [decode_matrix(r) for _ in range(4)]
    try:
        return MasterSecret(k, *mats, params=params)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def _check_header(r: Reader, magic: bytes):
    if r.take(len(magic)) != magic:
        raise FormatError("bad magic")
    version = r.u8()
    if version != STATE_VERSION:
        raise FormatError(f"unsupported version {version}")


def encode_owner_state(state: OwnerState) -> bytes:
    parts = [OWNER_MAGIC, bytes([STATE_VERSION]), _encode_msk_body(state.msk),
             state.ctr.to_bytes(8, "big"), state.last_ts.to_bytes(8, "big"),
             len(state.keywords).to_bytes(4, "big")]
    for w in sorted(state.keywords):
        raw = w.encode("utf-8")
        parts.append(len(raw).to_bytes(4, "big") + raw)
    return b"".join(parts)


def decode_owner_state(data: bytes) -> OwnerState:
    r = Reader(data)
    _check_header(r, OWNER_MAGIC)
    msk = _decode_msk_body(r)
    ctr, last_ts = r.u64(), r.u64()
    keywords = set()
    for _ in range(r.u32()):
        keywords.add(r.take(r.u32()).decode("utf-8"))
    r.expect_end()
    return OwnerState(msk, ctr, keywords, last_ts)


def encode_msk(msk: MasterSecret) -> bytes:
    return MSK_MAGIC + bytes([STATE_VERSION]) + _encode_msk_body(msk)


def decode_msk(data: bytes) -> MasterSecret:
    r = Reader(data)
    _check_header(r, MSK_MAGIC)
    msk = _decode_msk_body(r)
    r.expect_end()
    return msk


def encode_entry(addr: bytes, value: bytes) -> bytes:
    """(1-byte address width, address, 4-byte value length, value)."""
    return bytes([len(addr)]) + addr + len(value).to_bytes(4, "big") + value


def decode_entry(r: Reader):
    addr = r.take(r.u8())
    return addr, r.take(r.u32())


def encode_add_batch(batch: AddBatch) -> bytes:
    parts = [batch.lambda_bits.to_bytes(2, "big"), batch.epoch_ts.to_bytes(8, "big"),
             len(batch.dic_entries).to_bytes(4, "big")]
    parts.extend(encode_entry(a, v) for a, v in batch.dic_entries)
    parts.append(len(batch.new_mat).to_bytes(4, "big"))
    parts.extend(encode_matrix(m.matrix) for m in batch.new_mat)
    return b"".join(parts)


def decode_add_batch(data: bytes) -> AddBatch:
    r = Reader(data)
    lam, ts = r.u16(), r.u64()
    if lam == 0 or lam % 8 or lam > 256:
        raise FormatError(f"bad lambda {lam}")
    entries = [decode_entry(r) for _ in range(r.u32())]
    mats = [hk.HiddenIndex(decode_matrix(r)) for _ in range(r.u32())]
    r.expect_end()
    for addr, val in entries:
        if len(addr) not in (lam // 8, lam // 4):
            raise FormatError(f"address width {len(addr)} does not match lambda {lam}")
    return AddBatch(entries, mats, ts, lam)


def encode_token(token: hk.HiddenToken) -> bytes:
    return len(token.matrices).to_bytes(2, "big") + b"".join(encode_matrix(m) for m in token.matrices)


def decode_token(data: bytes) -> hk.HiddenToken:
    r = Reader(data)
    mats = tuple(decode_matrix(r) for _ in range(r.u16()))
    r.expect_end()
    try:
        return hk.HiddenToken(mats)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def encode_results(cts) -> bytes:
    return len(cts).to_bytes(4, "big") + b"".join(len(c).to_bytes(4, "big") + c for c in cts)


def decode_results(data: bytes) -> list:
    r = Reader(data)
    out = [r.take(r.u32()) for _ in range(r.u32())]
    r.expect_end()
    return out
