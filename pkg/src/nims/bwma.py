"""Boolean wildcard matching as an integer dot-product zero test.

An index bit vector ``p`` and a query vector ``q`` over ``{0, 1, *}`` are
mapped to integer vectors whose dot product is ``-2`` times the number of
fixed query positions where they disagree, so the pair matches exactly when
the product is zero. Time ranges become sets of wildcard vectors through the
canonical dyadic cover of a perfect binary tree.
"""

from __future__ import annotations

from .errors import ParameterError

STAR = "*"


def binary_encode(value: int, k: int) -> tuple[int, ...]:
    """Big-endian ``k``-bit decomposition of ``value``."""
    if k < 1:
        raise ParameterError("bit width must be positive")
    if not 0 <= value < 1 << k:
        raise ParameterError(f"{value} does not fit in {k} bits")
    return tuple((value >> (k - 1 - i)) & 1 for i in range(k))


def trans_index(p) -> tuple[int, ...]:
    """0 -> 1, 1 -> -1, then a trailing 1."""
    out = []
    for bit in p:
        if bit == 0:
            out.append(1)
        elif bit == 1:
            out.append(-1)
        else:
            raise ParameterError(f"index symbol must be 0 or 1, got {bit!r}")
    out.append(1)
    return tuple(out)


def trans_query(q) -> tuple[int, ...]:
    """0 -> 1, 1 -> -1, * -> 0, then ``-(number of fixed positions)``."""
    out = []
    fixed = 0
    for sym in q:
        if sym == STAR:
            out.append(0)
        elif sym == 0:
            out.append(1)
            fixed += 1
        elif sym == 1:
            out.append(-1)
            fixed += 1
        else:
            raise ParameterError(f"query symbol must be 0, 1 or '*', got {sym!r}")
    out.append(-fixed)
    return tuple(out)


def dot(a, b) -> int:
    if len(a) != len(b):
        raise ParameterError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(x * y for x, y in zip(a, b))


def bwma_match(pt, qt) -> bool:
    return dot(pt, qt) == 0


def wildcard_matches(p, q) -> bool:
    """Direct symbol-by-symbol comparison (reference semantics)."""
    return len(p) == len(q) and all(s == STAR or s == b for b, s in zip(p, q))


def wildcard_cover(lo: int, hi: int, kappa: int) -> list[tuple]:
    """Canonical dyadic cover of ``[lo, hi]`` as wildcard vectors.

    Greedily takes the largest aligned block starting at ``lo`` that stays
    inside the range. Elements come out in ascending leaf order.
    """
    if kappa < 1:
        raise ParameterError("kappa must be positive")
    if not 0 <= lo <= hi < 1 << kappa:
        raise ParameterError(f"invalid range [{lo}, {hi}] for kappa={kappa}")
    cover = []
    start = lo
    while start <= hi:
        # largest level such that start is aligned and the block ends <= hi
        level = (start & -start).bit_length() - 1 if start else kappa
        while start + (1 << level) - 1 > hi:
            level -= 1
        prefix_len = kappa - level
        prefix = binary_encode(start >> level, prefix_len) if prefix_len else ()
        cover.append(prefix + (STAR,) * level)
        start += 1 << level
    return cover
