# Wildcard matching as a zero test on a dot product, and range queries
# as a handful of wildcard patterns.

from nims import bwma

# an index pattern and a query with wildcards
p = (1, 0, 1, 1)
q = (1, bwma.STAR, 1, bwma.STAR)
pt, qt = bwma.trans_index(p), bwma.trans_query(q)
print("index vector", pt)
print("query vector", qt)
print("dot", bwma.dot(pt, qt), "match", bwma.bwma_match(pt, qt))

# flip one fixed bit and the dot product goes negative
q2 = (0, bwma.STAR, 1, bwma.STAR)
print("dot after mismatch", bwma.dot(pt, bwma.trans_query(q2)))

# the range [3, 12] over 4-bit timestamps
cover = bwma.wildcard_cover(3, 12, 4)
for c in cover:
    print("".join(str(s) for s in c))

hits = [v for v in range(16) if any(bwma.wildcard_matches(bwma.binary_encode(v, 4), c) for c in cover)]
print("covered", hits)
