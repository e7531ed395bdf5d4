# Owner storage does not grow with the number of documents, only with
# the keyword set.

import random

from nims import codec, harness, roles
from nims.params import SchemeParams

params = SchemeParams(iota=8, kappa=4)
vocab = [f"kw{i:03d}" for i in range(100)]

for n_docs in (100, 1000, 10000):
    rng = random.Random(4)
    owner, edb = roles.owner_setup(params, random.Random(5))
    docs = harness.synthetic_corpus(n_docs, vocab, rng)
    roles.server_apply_add(edb, roles.owner_add(owner, docs, 0, rng))
    print(n_docs, "documents:", len(owner.keywords), "keywords,",
          len(codec.encode_owner_state(owner)), "owner bytes,", len(edb.cdb), "server entries")
