import os
import random

import pytest

from nims import hk
from nims.params import SchemeParams
from nims.primitives import MasterSecret

SMALL = SchemeParams(iota=16, kappa=3)


class LowestRng:
    """Stand-in randomness that always returns the value nearest zero.

    Lets tests degenerate the blinding (off-diagonals 0, r_u = u + 1,
    r_m = 1) to check the algebra by hand.
    """

    def randrange(self, start, stop=None):
        if stop is None:
            start, stop = 0, start
        return min(max(0, start), stop - 1)

    def randbytes(self, n):
        # each little-endian u64 = 2**63, which _uniform_signed maps to 0
        return (b"\x00" * 7 + b"\x80") * (n // 8)

    def shuffle(self, seq):
        pass

    def getrandbits(self, k):
        return 1


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def small_params():
    return SMALL


def make_master(params, seed=7):
    r = random.Random(seed)
    k = r.getrandbits(params.lambda_bits).to_bytes(params.key_bytes, "big")
    return MasterSecret(k, *hk.gen_masks(params.n, r), params=params)


@pytest.fixture
def master(small_params):
    return make_master(small_params)


@pytest.fixture
def key32():
    return os.urandom(32)


# one (criterion, ok, detail) per acceptance check, echoed at session end
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
