"""Plaintext inverted index used as the correctness reference."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize_document(text: str) -> set[str]:
    """Lowercase, split on non-alphanumerics, keep tokens of 3+ chars."""
    return {tok for tok in _SPLIT.split(text.lower()) if len(tok) >= 3}


@dataclass
class OracleIndex:
    forward: dict = field(default_factory=dict)
    inverted: dict = field(default_factory=dict)

    def add(self, ind, keywords):
        if ind in self.forward:
            raise KeyError(f"{ind!r} is already live")
        kws = frozenset(keywords)
        self.forward[ind] = kws
        for w in kws:
            self.inverted.setdefault(w, set()).add(ind)

    def delete(self, ind) -> bool:
        kws = self.forward.pop(ind, None)
        if kws is None:
            return False
        for w in kws:
            live = self.inverted[w]
            live.discard(ind)
            if not live:
                del self.inverted[w]
        return True

    def search(self, w) -> set:
        return set(self.inverted.get(w, ()))

    def check(self):
        """Assert forward and inverted maps describe the same pairs."""
        pairs_f = {(i, w) for i, kws in self.forward.items() for w in kws}
        pairs_i = {(i, w) for w, inds in self.inverted.items() for i in inds}
        assert pairs_f == pairs_i, "forward and inverted index disagree"
        assert all(self.inverted.values()), "empty posting list left behind"


def oracle_add(oracle: OracleIndex, ind, keywords):
    oracle.add(ind, keywords)


def oracle_delete(oracle: OracleIndex, ind) -> bool:
    return oracle.delete(ind)


def oracle_search(oracle: OracleIndex, w) -> set:
    return oracle.search(w)
