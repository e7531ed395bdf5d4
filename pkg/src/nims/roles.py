"""Data owner, data user and server logic, all in-process.

The owner keeps only the master secret, an update counter, the keyword set
and the last timestamp. Every add re-issues one sentinel head block and one
hidden-key matrix per known keyword; the server replaces its matrix set
wholesale, so tokens built for an earlier clock stop matching. Deletion
removes the encrypted identifier only and leaves chain blocks in place.
"""

from __future__ import annotations

import hmac
import hashlib
import random
from dataclasses import dataclass, field

from . import hk, lsc
from .errors import (
    AuthenticationError,
    CiphertextFormatError,
    DuplicateAddressError,
    EpochExhaustedError,
    ParameterError,
    ResultIntegrityError,
)
from .params import SchemeParams
from .primitives import MasterSecret, dec, enc, encode_f1_message, prf_f1, prf_f2


@dataclass
class OwnerState:
    msk: MasterSecret
    ctr: int = 0
    keywords: set = field(default_factory=set)
    last_ts: int = 0

    @property
    def params(self) -> SchemeParams:
        return self.msk.params


@dataclass
class EncryptedDatabase:
    """Server-side store: the address/value map plus the current matrices."""

    cdb: dict = field(default_factory=dict)
    mat: list = field(default_factory=list)
    epoch_ts: int = 0
    lambda_bits: int = 256

    @property
    def eid_width(self) -> int:
        return self.lambda_bits // 8

    def chain_block_count(self) -> int:
        return sum(1 for a in self.cdb if len(a) != self.eid_width)


@dataclass(frozen=True)
class Document:
    ind: bytes
    keywords: frozenset

    def __post_init__(self):
        ind = self.ind.encode("utf-8") if isinstance(self.ind, str) else bytes(self.ind)
        object.__setattr__(self, "ind", ind)
        object.__setattr__(self, "keywords", frozenset(self.keywords))
        if not ind:
            raise ParameterError("document identifier must be non-empty")


@dataclass
class AddBatch:
    dic_entries: list
    new_mat: list
    epoch_ts: int
    lambda_bits: int = 256


@dataclass(frozen=True)
class SearchToken:
    token: hk.HiddenToken


@dataclass
class SearchStats:
    """Work counters for one server-side search."""

    traces: int = 0
    chain_steps: int = 0
    matched: bool = False


def head_key(k_f1: bytes, ctr: int, w: str) -> bytes:
    """Head-block key for ``w`` at epoch ``ctr``; never all-zero."""
    key = prf_f1(k_f1, ctr, w)
    attempt = 0
    while not any(key):
        # 2**-lambda event: re-derive under a distinct encoding
        attempt += 1
        msg = b"NIMS/F1-retry" + attempt.to_bytes(4, "big") + encode_f1_message(ctr, w)
        key = hmac.new(k_f1, msg, hashlib.sha256).digest()[: len(k_f1)]
    return key


def _random_key(rng, width: int) -> bytes:
    while True:
        key = rng.getrandbits(width * 8).to_bytes(width, "big")
        if any(key):
            return key


def owner_setup(params: SchemeParams, rng=None):
    """Fresh owner state and an empty encrypted database."""
    rng = rng or random.SystemRandom()
    k = rng.getrandbits(params.lambda_bits).to_bytes(params.key_bytes, "big")
    m1, m2, m1_inv, m2_inv = hk.gen_masks(params.n, rng)
    msk = MasterSecret(k, m1, m2, m1_inv, m2_inv, params)
    return OwnerState(msk), EncryptedDatabase(lambda_bits=params.lambda_bits)


def clock_to_ts(params: SchemeParams, clock: int) -> int:
    ts = clock - params.genesis
    if ts < 0:
        raise ParameterError(f"clock {clock} precedes genesis {params.genesis}")
    if ts > params.max_ts:
        raise EpochExhaustedError(f"timestamp {ts} needs more than kappa={params.kappa} bits")
    return ts


def owner_add(state: OwnerState, docs, clock: int, rng=None) -> AddBatch:
    """Encode ``docs`` into chain blocks and a fresh matrix set.

    ``state`` is only modified once the whole batch has been built.
    """
    rng = rng or random.SystemRandom()
    docs = list(docs)
    if not docs:
        raise ParameterError("add needs at least one document")
    seen = set()
    for doc in docs:
        if not doc.keywords:
            raise ParameterError(f"document {doc.ind!r} has no keywords")
        if doc.ind in seen:
            raise ParameterError(f"document {doc.ind!r} appears twice in one batch")
        seen.add(doc.ind)
    params = state.params
    ts = max(clock_to_ts(params, clock), state.last_ts)
    width = params.key_bytes
    sk = state.msk.subkeys

    ctr = state.ctr + 1
    keywords = set(state.keywords)
    latest = {w: head_key(sk.k_f1, ctr - 1, w) for w in keywords}
    dic = []
    order = list(docs)
    rng.shuffle(order)
    for doc in order:
        eid = prf_f2(sk.k_f2, doc.ind)
        dic.append((eid, enc(sk.k_se, doc.ind)))
        doc_keywords = sorted(doc.keywords)
        rng.shuffle(doc_keywords)
        for w in doc_keywords:
            if w not in keywords:
                latest[w] = lsc.terminator(width)
                keywords.add(w)
            key = _random_key(rng, width)
            block = lsc.encrypt_block(key, eid, latest[w])
            dic.append((block.addr, block.val))
            latest[w] = key

    new_mat = []
    for w in sorted(keywords):
        key_w = head_key(sk.k_f1, ctr, w)
        block = lsc.encrypt_block(key_w, lsc.sentinel(width), latest[w])
        dic.append((block.addr, block.val))
        new_mat.append(hk.hk_data(w, ts, key_w, state.msk, rng))
    rng.shuffle(dic)
    rng.shuffle(new_mat)

    state.ctr = ctr
    state.keywords = keywords
    state.last_ts = ts
    return AddBatch(dic, new_mat, ts, params.lambda_bits)


def owner_delete(state: OwnerState, ind) -> bytes:
    """Delete token: the identifier's server address. Leaves state untouched."""
    return prf_f2(state.msk.subkeys.k_f2, ind)


def user_search_token(msk: MasterSecret, w: str, clock: int, rng=None) -> SearchToken:
    """Token covering every timestamp from genesis up to ``clock``."""
    rng = rng or random.SystemRandom()
    hi = clock_to_ts(msk.params, clock)
    return SearchToken(hk.hk_token(w, 0, hi, msk, rng))


def check_add(edb: EncryptedDatabase, batch: AddBatch) -> None:
    """Raise DuplicateAddressError if ``batch`` would overwrite any address."""
    addrs = set()
    for addr, _ in batch.dic_entries:
        if addr in edb.cdb or addr in addrs:
            raise DuplicateAddressError(f"address {addr.hex()[:16]}... already present")
        addrs.add(addr)


def server_apply_add(edb: EncryptedDatabase, batch: AddBatch) -> None:
    check_add(edb, batch)
    edb.cdb.update(batch.dic_entries)
    edb.mat = list(batch.new_mat)
    edb.epoch_ts = batch.epoch_ts
    edb.lambda_bits = batch.lambda_bits


def server_apply_delete(edb: EncryptedDatabase, eid: bytes) -> bool:
    if len(eid) != edb.eid_width:
        raise ParameterError(f"delete token must be {edb.eid_width} bytes")
    return edb.cdb.pop(bytes(eid), None) is not None


def server_search(edb: EncryptedDatabase, token: SearchToken, rng=None, stats: SearchStats | None = None):
    """Encrypted identifiers for the token's keyword (empty if none match)."""
    rng = rng or random.SystemRandom()
    stats = stats if stats is not None else SearchStats()
    order = list(edb.mat)
    rng.shuffle(order)
    traces = [0]
    head = None
    for m in order:
        flag, key = hk.hk_query(m, token.token, edb.lambda_bits, counter=traces)
        if flag:
            head = key
            break
    stats.traces = traces[0]
    if head is None:
        return []
    stats.matched = True
    steps = [0]
    width = edb.eid_width
    stop = lsc.sentinel(width)
    data = lsc.walk_chain(edb.cdb, head, counter=steps)
    stats.chain_steps = steps[0]
    out = []
    for eid in data:
        if eid == stop:
            continue
        ct = edb.cdb.get(eid)
        if ct is not None:
            out.append(ct)
    rng.shuffle(out)
    return out


def user_decrypt_results(msk: MasterSecret, cts) -> set:
    k_se = msk.subkeys.k_se
    out = set()
    for i, ct in enumerate(cts):
        try:
            out.add(dec(k_se, ct))
        except (AuthenticationError, CiphertextFormatError) as exc:
            raise ResultIntegrityError(f"result {i} failed to decrypt: {exc}", i) from exc
    return out
