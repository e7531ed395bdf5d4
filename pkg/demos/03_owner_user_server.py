# The whole lifecycle in one process: the owner indexes documents, a user
# holding only the master secret searches, the owner deletes.

import random

from nims import codec, roles
from nims.params import SchemeParams
from nims.roles import Document

rng = random.Random(3)
params = SchemeParams(iota=16, kappa=8, genesis=1000)
owner, edb = roles.owner_setup(params, rng)

docs = [
    Document("report.txt", {"budget", "travel"}),
    Document("memo.txt", {"travel"}),
    Document("notes.txt", {"budget"}),
]
batch = roles.owner_add(owner, docs, clock=1005, rng=rng)
roles.server_apply_add(edb, batch)
print("server entries", len(edb.cdb), "matrices", len(edb.mat))

# the user only needs the exported master secret
msk = codec.decode_msk(codec.encode_msk(owner.msk))


def search(w, clock):
    tok = roles.user_search_token(msk, w, clock, rng)
    return sorted(roles.user_decrypt_results(msk, roles.server_search(edb, tok, rng)))


print("travel:", search("travel", 1005))

# a token made now will not see documents added later
old = roles.user_search_token(msk, "budget", 1005, rng)
roles.server_apply_add(edb, roles.owner_add(owner, [Document("plan.txt", {"budget"})], 1010, rng))
print("stale token:", roles.server_search(edb, old, rng))
print("fresh token:", search("budget", 1010))

# deletion needs just one 32-byte address
eid = roles.owner_delete(owner, "report.txt")
print("delete token bytes", len(eid), "removed", roles.server_apply_delete(edb, eid))
print("budget after delete:", search("budget", 1010))

print("owner state bytes", len(codec.encode_owner_state(owner)))
