"""Lightweight storage chain.

Every block is addressed by ``H1(key || 0x00)`` and carries
``H1(key || 0x01) XOR (data || kpr)``, where ``kpr`` is the key of the
previous block in the same keyword chain. Knowing the newest key is enough
to walk the whole chain; without it blocks are unlinkable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import BrokenChainError, ParameterError
from .primitives import hash_h1


@dataclass(frozen=True)
class ChainBlock:
    addr: bytes
    val: bytes


@dataclass(frozen=True)
class BlockPayload:
    data: bytes
    kpr: bytes


def terminator(width: int) -> bytes:
    return bytes(width)


def sentinel(width: int) -> bytes:
    return b"\xff" * width


def _xor(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def block_address(key: bytes) -> bytes:
    return hash_h1(key + b"\x00", len(key) * 8)


def _block_mask(key: bytes) -> bytes:
    return hash_h1(key + b"\x01", len(key) * 8)


def encrypt_block(key: bytes, data: bytes, kpr: bytes) -> ChainBlock:
    width = len(key)
    if width == 0 or len(data) != width or len(kpr) != width:
        raise ParameterError("key, data and kpr must share one non-zero width")
    return ChainBlock(block_address(key), _xor(_block_mask(key), data + kpr))


def decode_block(val: bytes, key: bytes) -> BlockPayload:
    width = len(key)
    if width == 0 or len(val) != 2 * width:
        raise ParameterError("block value must be twice the key width")
    plain = _xor(_block_mask(key), val)
    return BlockPayload(plain[:width], plain[width:])


def walk_chain(lookup: Mapping[bytes, bytes], head_key: bytes, counter=None) -> list[bytes]:
    """Data fields of the chain starting at ``head_key``, newest first.

    Sentinels are returned too; callers filter them. ``counter`` (a
    one-element list) counts blocks visited.
    """
    end = terminator(len(head_key))
    if head_key == end:
        raise ParameterError("head key must be nonzero")
    out = []
    key = head_key
    while key != end:
        val = lookup.get(block_address(key))
        if val is None:
            raise BrokenChainError(f"missing block after {len(out)} steps", out)
        payload = decode_block(val, key)
        out.append(payload.data)
        if counter is not None:
            counter[0] += 1
        key = payload.kpr
    return out
