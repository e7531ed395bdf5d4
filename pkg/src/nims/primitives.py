"""Keyed primitives and key material.

F1 and F2 are HMAC-SHA-256, H is SHA-256 truncated to ``iota`` bits, H1 is
SHA-512 truncated to ``2 * lambda`` bits and Enc/Dec is AES-256-GCM with a
random 12-byte nonce prepended to the ciphertext. The single root key K is
split into three subkeys by domain separation so that no two primitives
share a key.
"""

from __future__ import annotations

import hashlib
import hmac
import os
from dataclasses import dataclass, field
from functools import cached_property

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import AuthenticationError, CiphertextFormatError, ParameterError
from .params import SchemeParams

NONCE_BYTES = 12
TAG_BYTES = 16

_F1_LABEL = b"NIMS/F1"
_F2_LABEL = b"NIMS/F2"
_SE_LABEL = b"NIMS/SE"


def _check_key(key: bytes, name="key"):
    if not isinstance(key, (bytes, bytearray)):
        raise ParameterError(f"{name} must be bytes")
    if not 1 <= len(key) <= 32:
        raise ParameterError(f"{name} must be 1..32 bytes, got {len(key)}")


def _hmac(key: bytes, msg: bytes, out_len: int) -> bytes:
    return hmac.new(key, msg, hashlib.sha256).digest()[:out_len]


@dataclass(frozen=True)
class SubKeys:
    k_f1: bytes
    k_f2: bytes
    k_se: bytes


def derive_subkeys(master_k: bytes, lambda_bits: int = 256) -> SubKeys:
    """Split the root key into independent keys for F1, F2 and Enc."""
    width = lambda_bits // 8
    if not isinstance(master_k, (bytes, bytearray)) or len(master_k) != width:
        raise ParameterError(f"master key must be exactly {width} bytes")
    master_k = bytes(master_k)
    return SubKeys(
        k_f1=_hmac(master_k, _F1_LABEL, width),
        k_f2=_hmac(master_k, _F2_LABEL, width),
        k_se=_hmac(master_k, _SE_LABEL, width),
    )


def encode_f1_message(ctr: int, w: str) -> bytes:
    if ctr < 0 or ctr >= 1 << 64:
        raise ParameterError("counter must fit in 64 unsigned bits")
    return ctr.to_bytes(8, "big") + w.encode("utf-8")


def prf_f1(k_f1: bytes, ctr: int, w: str) -> bytes:
    """Head-key PRF over (update counter, keyword)."""
    _check_key(k_f1, "k_f1")
    return _hmac(k_f1, encode_f1_message(ctr, w), len(k_f1))


def prf_f2(k_f2: bytes, ind: bytes) -> bytes:
    """Server address (``eid``) of a document identifier."""
    _check_key(k_f2, "k_f2")
    if isinstance(ind, str):
        ind = ind.encode("utf-8")
    if not ind:
        raise ParameterError("document identifier must be non-empty")
    return _hmac(k_f2, ind, len(k_f2))


def hash_keyword(w: str, iota: int) -> tuple[int, ...]:
    """First ``iota`` bits of SHA-256(w), most significant first."""
    if not 1 <= iota <= 256:
        raise ParameterError("iota must be in [1, 256] for a SHA-256 digest")
    value = int.from_bytes(hashlib.sha256(w.encode("utf-8")).digest(), "big")
    value >>= 256 - iota
    return tuple((value >> (iota - 1 - i)) & 1 for i in range(iota))


def hash_h1(data: bytes, lambda_bits: int = 256) -> bytes:
    """Block hash with a ``2 * lambda``-bit output."""
    return hashlib.sha512(data).digest()[: 2 * lambda_bits // 8]


def enc(k_se: bytes, plaintext: bytes) -> bytes:
    """Randomized authenticated encryption; returns nonce || ciphertext || tag."""
    nonce = os.urandom(NONCE_BYTES)
    return nonce + AESGCM(_aead_key(k_se)).encrypt(nonce, bytes(plaintext), None)


def dec(k_se: bytes, ciphertext: bytes) -> bytes:
    if len(ciphertext) < NONCE_BYTES + TAG_BYTES:
        raise CiphertextFormatError(f"ciphertext too short ({len(ciphertext)} bytes)")
    nonce, body = ciphertext[:NONCE_BYTES], ciphertext[NONCE_BYTES:]
    try:
        return AESGCM(_aead_key(k_se)).decrypt(nonce, bytes(body), None)
    except InvalidTag:
        raise AuthenticationError("ciphertext failed authentication") from None


def _aead_key(k_se: bytes) -> bytes:
    if len(k_se) in (16, 24, 32):
        return bytes(k_se)
    # lambda below 128 bits: stretch to an AES-256 key
    return hashlib.sha256(b"NIMS/AEAD" + k_se).digest()


@dataclass(frozen=True)
class MasterSecret:
    """Root key plus the two secret mask matrices and their inverses.

    Matrices are tuples of row tuples of Python ints.
    """

    k: bytes
    m1: tuple = field(repr=False)
    m2: tuple = field(repr=False)
    m1_inv: tuple = field(repr=False)
    m2_inv: tuple = field(repr=False)
    params: SchemeParams = field(default_factory=SchemeParams)
    # per-instance memo for derived forms of the masks (filled by hk)
    cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if len(self.k) != self.params.key_bytes:
            raise ParameterError(f"K must be {self.params.key_bytes} bytes")
        n = self.params.n
        for name in ("m1", "m2", "m1_inv", "m2_inv"):
            m = getattr(self, name)
            if len(m) != n or any(len(row) != n for row in m):
                raise ParameterError(f"{name} must be {n}x{n}")

    @cached_property
    def subkeys(self) -> SubKeys:
        return derive_subkeys(self.k, self.params.lambda_bits)
