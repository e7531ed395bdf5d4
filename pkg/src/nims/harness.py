"""Corpus loading, oracle-equivalence fuzzing and the benchmark runner."""

from __future__ import annotations

import csv
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import codec, roles, wire
from .oracle import OracleIndex, tokenize_document
from .params import SchemeParams
from .roles import Document


class InProcessServer:
    """Same calls as :class:`nims.client.Client`, against a local database."""

    def __init__(self, edb=None, rng=None):
        self.edb = edb if edb is not None else roles.EncryptedDatabase()
        self.rng = rng or random.Random(0)
        self.last_stats = None

    def add(self, batch):
        roles.server_apply_add(self.edb, batch)
        return len(batch.dic_entries), len(batch.new_mat)

    def delete(self, eid):
        return roles.server_apply_delete(self.edb, eid)

    def search(self, token):
        self.last_stats = roles.SearchStats()
        return roles.server_search(self.edb, token, self.rng, self.last_stats)

    def ping(self):
        return self.edb.epoch_ts, len(self.edb.mat), len(self.edb.cdb)


def read_pairs(path) -> list[Document]:
    """``ind<TAB>w1,w2,...`` per line; blank lines and ``#`` comments skipped."""
    docs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            ind, sep, kws = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'ind<TAB>keywords'")
            keywords = {w.strip() for w in kws.split(",") if w.strip()}
            docs.append(Document(ind, keywords))
    return docs


def read_docs_dir(path) -> list[Document]:
    """One document per regular file; the file name is the identifier."""
    docs = []
    for p in sorted(Path(path).iterdir()):
        if p.is_file():
            kws = tokenize_document(p.read_text(encoding="utf-8", errors="replace"))
            if kws:
                docs.append(Document(p.name, kws))
    return docs


def synthetic_corpus(n_docs, vocabulary, rng, min_kw=1, max_kw=5, prefix="doc"):
    width = max(4, len(str(n_docs)))
    out = []
    for i in range(n_docs):
        k = rng.randint(min_kw, min(max_kw, len(vocabulary)))
        out.append(Document(f"{prefix}-{i:0{width}d}", rng.sample(vocabulary, k)))
    return out


@dataclass
class FuzzReport:
    ops: int = 0
    adds: int = 0
    deletes: int = 0
    searches: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.mismatches


def fuzz(server, params: SchemeParams, seed=0, n_ops=200, n_keywords=50, n_docs=500, rng_setup=None):
    """Random Add/Delete/Search interleaving checked against the oracle.

    Identifiers are never reused after deletion: the chain keeps pointing
    at the old address, so a re-added identifier would resurface under its
    former keywords.
    """
    rng = random.Random(seed)
    state, _ = roles.owner_setup(params, rng_setup or random.Random(seed + 1))
    vocab = [f"kw{i:03d}" for i in range(n_keywords)]
    pool = synthetic_corpus(n_docs, vocab, rng)
    rng.shuffle(pool)
    oracle = OracleIndex()
    report = FuzzReport()
    clock = params.genesis + 1
    next_doc = 0
    for _ in range(n_ops):
        clock += rng.randint(0, 2)
        roll = rng.random()
        if next_doc == 0 or (roll < 0.35 and next_doc < len(pool)):
            size = rng.randint(1, 8)
            docs = pool[next_doc:next_doc + size]
            next_doc += len(docs)
            server.add(roles.owner_add(state, docs, clock, rng))
            for d in docs:
                oracle.add(d.ind, d.keywords)
            report.adds += 1
        elif roll < 0.55:
            live = sorted(oracle.forward)
            if live and rng.random() < 0.9:
                ind = rng.choice(live)
            else:
                ind = b"never-added-%d" % rng.randrange(10 ** 6)
            found = server.delete(roles.owner_delete(state, ind))
            expected = oracle.delete(ind)
            if found != expected:
                report.mismatches.append(("delete", ind, found, expected))
            report.deletes += 1
        else:
            w = rng.choice(vocab + ["absent-keyword"])
            token = roles.user_search_token(state.msk, w, clock, rng)
            got = roles.user_decrypt_results(state.msk, server.search(token))
            want = oracle.search(w)
            if got != want:
                report.mismatches.append(("search", w, sorted(got), sorted(want)))
            report.searches += 1
        report.ops += 1
        oracle.check()
    return report


# -- benchmarks ---------------------------------------------------------------

REPORT_COLUMNS = ("op", "n", "ms", "wire_bytes", "owner_state_bytes")


def _ms(t0):
    return round((time.perf_counter() - t0) * 1000.0, 3)


def bench(profile, n_pairs, n_keywords, params=None, seed=0):
    """Rows of ``(op, n, ms, wire_bytes, owner_state_bytes)``."""
    params = params or SchemeParams(iota=32, kappa=16)
    rng = random.Random(seed)
    state, edb = roles.owner_setup(params, random.Random(seed + 1))
    server = InProcessServer(edb, random.Random(seed + 2))
    vocab = [f"kw{i:05d}" for i in range(n_keywords)]
    rows = []
    clock = params.genesis + 1

    def state_bytes():
        return len(codec.encode_owner_state(state))

    if profile == "add":
        # one batch per doubling of the corpus
        done, size = 0, max(1, min(100, n_pairs))
        doc_id = 0
        while done < n_pairs:
            take = min(size, n_pairs - done)
            docs = []
            for _ in range(take):
                docs.append(Document(f"doc-{doc_id:08d}", [vocab[rng.randrange(n_keywords)]]))
                doc_id += 1
            t0 = time.perf_counter()
            batch = roles.owner_add(state, docs, clock, rng)
            server.add(batch)
            ms = _ms(t0)
            wire_len = len(wire.encode_frame(wire.ADD, codec.encode_add_batch(batch)))
            done += take
            rows.append(("add", take, ms, wire_len, state_bytes()))
            size *= 2
            clock += 1
        return rows

    if profile in ("search", "delete"):
        docs = []
        for i in range(n_pairs):
            docs.append(Document(f"doc-{i:08d}", [vocab[i % n_keywords]]))
        server.add(roles.owner_add(state, docs, clock, rng))
        if profile == "search":
            for w in vocab[: min(n_keywords, 20)]:
                token = roles.user_search_token(state.msk, w, clock, rng)
                t0 = time.perf_counter()
                cts = server.search(token)
                ms = _ms(t0)
                wire_len = len(wire.encode_frame(wire.SEARCH, codec.encode_token(token.token)))
                rows.append(("search", len(cts), ms, wire_len, state_bytes()))
            return rows
        for doc in docs[: min(n_pairs, 100)]:
            t0 = time.perf_counter()
            eid = roles.owner_delete(state, doc.ind)
            server.delete(eid)
            ms = _ms(t0)
            rows.append(("delete", len(doc.keywords), ms, len(wire.encode_frame(wire.DELETE, eid)), state_bytes()))
        return rows

    if profile == "storage":
        # every keyword appears in the first batch, so W is fixed afterwards
        docs = [Document(f"seed-{i:06d}", [w]) for i, w in enumerate(vocab)]
        server.add(roles.owner_add(state, docs, clock, rng))
        total = len(docs)
        rows.append(("storage", total, 0.0, 0, state_bytes()))
        doc_id = 0
        step = max(1, n_pairs // 4)
        while total < n_pairs:
            take = min(step, n_pairs - total)
            batch_docs = []
            for _ in range(take):
                batch_docs.append(Document(f"doc-{doc_id:08d}", [vocab[rng.randrange(n_keywords)]]))
                doc_id += 1
            clock += 1
            t0 = time.perf_counter()
            server.add(roles.owner_add(state, batch_docs, clock, rng))
            total += take
            rows.append(("storage", total, _ms(t0), 0, state_bytes()))
        return rows

    raise ValueError(f"unknown bench profile {profile!r}")


def write_report(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        out = csv.writer(f, delimiter="\t", lineterminator="\n")
        out.writerow(REPORT_COLUMNS)
        out.writerows(rows)


def selftest(seed=0, n_ops=200, params=None):
    params = params or SchemeParams(iota=32, kappa=16, genesis=1_700_000_000)
    return fuzz(InProcessServer(rng=random.Random(seed)), params, seed=seed, n_ops=n_ops)


def ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
