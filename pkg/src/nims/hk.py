"""Hidden-key matrices.

A head-block key ``u`` is placed in the last diagonal slot of a random
lower-triangular integer matrix whose other diagonal entries are the
blinded index vector ``r_u * P_t``. Tokens carry the blinded query vector
``r_m * G_t`` with a trailing 1. Both sides are wrapped in secret unimodular
masks that cancel under the trace, so

    tr(U* Q*) = r_u * r_m * (P_t . G_t) + u

which is ``u`` on a match and negative otherwise (``r_u > u``, ``r_m >= 1``).

Matrices are tuples of row tuples of Python ints. Dense products go through
FLINT; traces are computed here in O(n^2) without forming the product.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field

import flint
import numpy as np

from . import bwma
from .errors import IntegrityError, ParameterError
from .primitives import MasterSecret, hash_keyword

OFFDIAG_BITS = 32
MASK_BITS = 31
BLIND_BITS = 64


def identity(n: int) -> tuple:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _to_flint(m):
    return flint.fmpz_mat([list(row) for row in m])


def _from_flint(fm) -> tuple:
    n, k = fm.nrows(), fm.ncols()
    flat = [int(x) for x in fm.entries()]
    return tuple(tuple(flat[i * k:(i + 1) * k]) for i in range(n))


def matmul(*mats) -> tuple:
    """Exact product of one or more integer matrices."""
    acc = _to_flint(mats[0])
    for m in mats[1:]:
        acc = acc * _to_flint(m)
    return _from_flint(acc)


def transpose(m) -> tuple:
    return tuple(zip(*m))


def is_lower_triangular(m) -> bool:
    return all(m[i][j] == 0 for i in range(len(m)) for j in range(i + 1, len(m)))


def unit_lower_inverse(m) -> tuple:
    """Exact inverse of a unit-diagonal lower-triangular matrix."""
    n = len(m)
    if any(m[i][i] != 1 for i in range(n)) or not is_lower_triangular(m):
        raise ParameterError("matrix must be unit lower-triangular")
    inv = [[0] * n for _ in range(n)]
    for j in range(n):
        inv[j][j] = 1
        for i in range(j + 1, n):
            inv[i][j] = -sum(m[i][k] * inv[k][j] for k in range(j, i))
    return tuple(map(tuple, inv))


def _uniform_signed(rng, count: int, bits: int) -> list[int]:
    """``count`` draws uniform in ``[-2**bits, 2**bits)``, for ``bits < 64``."""
    if count == 0:
        return []
    raw = np.frombuffer(rng.randbytes(8 * count), dtype="<u8")
    return ((raw >> np.uint64(63 - bits)).astype(np.int64) - (1 << bits)).tolist()


def _low_tri_flat(diag, rng, entry_bits: int = OFFDIAG_BITS) -> list[int]:
    n = len(diag)
    lower = iter(_uniform_signed(rng, n * (n - 1) // 2, entry_bits))
    flat = [0] * (n * n)
    for i in range(n):
        base = i * n
        for j in range(i):
            flat[base + j] = next(lower)
        flat[base + i] = int(diag[i])
    return flat


def gen_low_tri(diag, rng, entry_bits: int = OFFDIAG_BITS) -> tuple:
    """Random lower-triangular matrix with the given main diagonal.

    Strictly-lower entries are uniform in ``[-2**entry_bits, 2**entry_bits)``.
    """
    n = len(diag)
    flat = _low_tri_flat(diag, rng, entry_bits)
    return tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n))


def _permutation(perm) -> tuple:
    n = len(perm)
    return tuple(tuple(int(perm[i] == j) for j in range(n)) for i in range(n))


def _block_shear(n, h, rng, lower: bool):
    """Unimodular [[I,0],[A,I]] (or [[I,A],[0,I]]) and its inverse.

    Each shear squares to the identity up to sign flip of ``A``, so the
    inverse has entries of the same size as the matrix itself.
    """
    lo, hi = -(1 << MASK_BITS), 1 << MASK_BITS
    fwd = [[int(i == j) for j in range(n)] for i in range(n)]
    inv = [[int(i == j) for j in range(n)] for i in range(n)]
    rows = range(h, n) if lower else range(h)
    cols = range(h) if lower else range(h, n)
    for i in rows:
        for j in cols:
            a = rng.randrange(lo, hi)
            fwd[i][j] = a
            inv[i][j] = -a
    return fwd, inv


def gen_mask(n: int, rng) -> tuple[tuple, tuple]:
    """One dense unimodular mask and its exact integer inverse.

    The mask is ``P . L1 . U . L2 . P'`` with random permutations and
    random block shears; the inverse is the reversed product of inverses.
    """
    if n < 2:
        raise ParameterError("mask dimension must be at least 2")
    h = n // 2
    p_perm = list(range(n))
    q_perm = list(range(n))
    rng.shuffle(p_perm)
    rng.shuffle(q_perm)
    p, q = _permutation(p_perm), _permutation(q_perm)
    l1, l1_inv = _block_shear(n, h, rng, lower=True)
    u, u_inv = _block_shear(n, h, rng, lower=False)
    l2, l2_inv = _block_shear(n, h, rng, lower=True)
    mask = matmul(p, l1, u, l2, q)
    inv = matmul(transpose(q), l2_inv, u_inv, l1_inv, transpose(p))
    return mask, inv


def gen_masks(n: int, rng):
    """Fresh ``(m1, m2, m1_inv, m2_inv)``."""
    m1, m1_inv = gen_mask(n, rng)
    m2, m2_inv = gen_mask(n, rng)
    return m1, m2, m1_inv, m2_inv


def trace_product(a, b) -> int:
    """``tr(a @ b)`` in O(n^2) multiplications."""
    n = len(a)
    if len(b) != n or any(len(r) != n for r in a) or any(len(r) != n for r in b):
        raise ParameterError("trace_product needs two square matrices of equal size")
    return _flat_trace(_flatten(a), _flatten(transpose(b)))


def _flatten(m) -> tuple:
    return tuple(x for row in m for x in row)


def _flat_trace(a_flat, bt_flat) -> int:
    return sum(map(operator.mul, a_flat, bt_flat))


@dataclass(frozen=True)
class HiddenIndex:
    """Masked matrix ``U*`` hiding one head-block key."""

    matrix: tuple = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def flat(self) -> tuple:
        # memoized outside the frozen fields
        cached = self.__dict__.get("_flat")
        if cached is None:
            cached = _flatten(self.matrix)
            object.__setattr__(self, "_flat", cached)
        return cached


@dataclass(frozen=True)
class HiddenToken:
    """Ordered list of masked query matrices ``Q*_1 .. Q*_l``."""

    matrices: tuple = field(repr=False)

    def __post_init__(self):
        if not self.matrices:
            raise ParameterError("a token needs at least one matrix")
        n = len(self.matrices[0])
        if any(len(m) != n for m in self.matrices):
            raise ParameterError("token matrices must share one dimension")

    @property
    def dim(self) -> int:
        return len(self.matrices[0])

    def __len__(self):
        return len(self.matrices)

    def transposed_flats(self) -> tuple:
        cached = self.__dict__.get("_tflats")
        if cached is None:
            cached = tuple(_flatten(transpose(m)) for m in self.matrices)
            object.__setattr__(self, "_tflats", cached)
        return cached


def index_vector(w: str, ts: int, params) -> tuple[int, ...]:
    bits = hash_keyword(w, params.iota) + bwma.binary_encode(ts, params.kappa)
    return bwma.trans_index(bits)


def query_vectors(w: str, lo: int, hi: int, params) -> list[tuple[int, ...]]:
    kw = hash_keyword(w, params.iota)
    return [bwma.trans_query(kw + t) for t in bwma.wildcard_cover(lo, hi, params.kappa)]


def _flint_masks(master: MasterSecret):
    cache = master.cache
    if "flint" not in cache:
        cache["flint"] = tuple(_to_flint(m) for m in (master.m1, master.m2, master.m1_inv, master.m2_inv))
    return cache["flint"]


def _conjugate(left, core_diag, right, rng) -> tuple:
    n = len(core_diag)
    core = flint.fmpz_mat(n, n, _low_tri_flat(core_diag, rng))
    blind = flint.fmpz_mat(n, n, _low_tri_flat([1] * n, rng))
    return _from_flint((left * blind) * ((core * blind) * right))


def index_diagonal(w: str, ts: int, u: int, params, rng) -> list[int]:
    """``[r_u * P_t, u]`` with ``r_u`` uniform in ``(u, u + 2**64]``."""
    r_u = rng.randrange(u + 1, u + (1 << BLIND_BITS) + 1)
    diag = [r_u * x for x in index_vector(w, ts, params)]
    diag.append(u)
    return diag


def token_diagonals(w: str, lo: int, hi: int, params, rng) -> list[list[int]]:
    """``[r_m * G_t, 1]`` per cover element, ``r_m`` uniform in ``[1, 2**64]``."""
    out = []
    for g in query_vectors(w, lo, hi, params):
        r_m = rng.randrange(1, (1 << BLIND_BITS) + 1)
        diag = [r_m * x for x in g]
        diag.append(1)
        out.append(diag)
    return out


def hide_index(diag, master: MasterSecret, rng) -> HiddenIndex:
    """``M1 . I_x . U . I_x . M2`` for a fresh blinding ``I_x``."""
    m1, m2, _, _ = _flint_masks(master)
    return HiddenIndex(_conjugate(m1, diag, m2, rng))


def hide_query(diag, master: MasterSecret, rng) -> tuple:
    """``M2^-1 . I_y . Q . I_y . M1^-1`` for a fresh blinding ``I_y``."""
    _, _, m1_inv, m2_inv = _flint_masks(master)
    return _conjugate(m2_inv, diag, m1_inv, rng)


def hk_data(w: str, ts: int, key_w: bytes, master: MasterSecret, rng) -> HiddenIndex:
    """Hide ``key_w`` under keyword ``w`` and timestamp ``ts``."""
    params = master.params
    if len(key_w) != params.key_bytes:
        raise ParameterError(f"key_w must be {params.key_bytes} bytes")
    u = int.from_bytes(key_w, "big")
    if u == 0:
        raise ParameterError("key_w must be nonzero")
    if not 0 <= ts <= params.max_ts:
        raise ParameterError(f"timestamp {ts} does not fit in kappa={params.kappa} bits")
    return hide_index(index_diagonal(w, ts, u, params, rng), master, rng)


def hk_token(w: str, tr_lo: int, tr_hi: int, master: MasterSecret, rng) -> HiddenToken:
    """Token matching indices of ``w`` whose timestamp lies in ``[tr_lo, tr_hi]``."""
    diags = token_diagonals(w, tr_lo, tr_hi, master.params, rng)
    mats = [hide_query(d, master, rng) for d in diags]
    rng.shuffle(mats)
    return HiddenToken(tuple(mats))


def hk_query(index: HiddenIndex, token: HiddenToken, lambda_bits: int = 256, counter=None):
    """Try every token matrix against ``index``.

    Returns ``(True, key_bytes)`` for the first positive trace, else
    ``(False, None)``. ``counter`` (a one-element list) is incremented once
    per trace evaluated.
    """
    if index.dim != token.dim:
        raise ParameterError(f"dimension mismatch: {index.dim} vs {token.dim}")
    a = index.flat()
    for bt in token.transposed_flats():
        if counter is not None:
            counter[0] += 1
        res = _flat_trace(a, bt)
        if res > 0:
            if res >= 1 << lambda_bits:
                raise IntegrityError("recovered key exceeds lambda bits")
            return True, res.to_bytes(lambda_bits // 8, "big")
    return False, None
