# Hiding a 256-bit key in a masked integer matrix, and getting it back
# with a matching token.

import random

from nims import hk, roles
from nims.params import SchemeParams

rng = random.Random(2)
params = SchemeParams(iota=16, kappa=8)
state, _ = roles.owner_setup(params, rng)
msk = state.msk
print("matrix dimension", params.n)

key = rng.getrandbits(256).to_bytes(32, "big")
index = hk.hk_data("apple", 40, key, msk, rng)
print("largest entry has", max(abs(x).bit_length() for row in index.matrix for x in row), "bits")

# token for timestamps 32..63 recovers the key
flag, got = hk.hk_query(index, hk.hk_token("apple", 32, 63, msk, rng))
print("in range:", flag, got == key)

# a range that misses ts=40, or another keyword, gives nothing
print("out of range:", hk.hk_query(index, hk.hk_token("apple", 0, 39, msk, rng)))
print("other keyword:", hk.hk_query(index, hk.hk_token("pear", 0, 63, msk, rng)))

# the same key hidden twice looks unrelated
again = hk.hk_data("apple", 40, key, msk, rng)
print("identical matrices:", again.matrix == index.matrix)
