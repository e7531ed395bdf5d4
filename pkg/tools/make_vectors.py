"""Regenerate vectors/crypto.tsv from hashlib/hmac alone.

Deliberately independent of the nims package: the test suite checks the
package against these rows.
"""

import hashlib
import hmac
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "vectors", "crypto.tsv")


def h256(key, msg):
    return hmac.new(key, msg, hashlib.sha256).digest()


def main():
    rows = []
    zero = bytes(32)
    ramp = bytes(range(32))
    for label, master in (("zero", zero), ("ramp", ramp)):
        subs = [h256(master, tag) for tag in (b"NIMS/F1", b"NIMS/F2", b"NIMS/SE")]
        rows.append(("derive_subkeys", master.hex(), b"".join(subs).hex()))
    for ctr, w in ((0, "alpha"), (1, "alpha"), (7, "beta"), (2**40 + 3, "ünïcode")):
        msg = ctr.to_bytes(8, "big") + w.encode("utf-8")
        rows.append(("prf_f1", ramp.hex(), ctr.to_bytes(8, "big").hex(), w.encode().hex(), h256(ramp, msg).hex()))
    for ind in (b"doc-0001", b"x"):
        rows.append(("prf_f2", ramp.hex(), ind.hex(), h256(ramp, ind).hex()))
    for w, iota in (("alpha", 8), ("alpha", 64), ("beta", 128)):
        digest = hashlib.sha256(w.encode()).digest()[: iota // 8]
        rows.append(("hash_keyword", w.encode().hex(), iota.to_bytes(2, "big").hex(), digest.hex()))
    for data in (bytes(33), ramp + b"\x00", ramp + b"\x01"):
        rows.append(("hash_h1", data.hex(), hashlib.sha512(data).digest().hex()))
    with open(OUT, "w") as f:
        f.write("# op\thex inputs...\thex output\n")
        for row in rows:
            f.write("\t".join(row) + "\n")


if __name__ == "__main__":
    main()
