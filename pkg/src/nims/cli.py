"""Command-line entry point: ``nims <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import codec, harness, roles
from .client import Client
from .errors import NimsError
from .params import DEFAULT_IOTA, DEFAULT_KAPPA, SchemeParams
from .server import serve
from .store import ServerStore


def _write_atomic(path, data: bytes):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(data)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def _read(path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _clock(args) -> int:
    return int(args.at) if getattr(args, "at", None) is not None else int(time.time())


def cmd_setup(args):
    params = SchemeParams(iota=args.iota, kappa=args.kappa,
                          genesis=args.genesis if args.genesis is not None else int(time.time()))
    state, _ = roles.owner_setup(params)
    _write_atomic(args.out, codec.encode_owner_state(state))
    if args.export_msk:
        _write_atomic(args.export_msk, codec.encode_msk(state.msk))
    print(f"owner state written to {args.out} (n={params.n}, genesis={params.genesis})")


def cmd_add(args):
    state = codec.decode_owner_state(_read(args.state))
    docs = harness.read_pairs(args.pairs) if args.pairs else harness.read_docs_dir(args.docs)
    if not docs:
        raise NimsError("no documents with keywords to add")
    batch = roles.owner_add(state, docs, _clock(args))
    with Client(args.server) as c:
        added, mats = c.add(batch)
    # the server has acknowledged; only now does the owner state advance
    _write_atomic(args.state, codec.encode_owner_state(state))
    print(f"added {len(docs)} documents: {added} entries, {mats} matrices, epoch ts {batch.epoch_ts}")


def cmd_del(args):
    state = codec.decode_owner_state(_read(args.state))
    with Client(args.server) as c:
        found = c.delete(roles.owner_delete(state, args.ind))
    print("deleted" if found else "not found")


def cmd_search(args):
    msk = codec.decode_msk(_read(args.msk))
    token = roles.user_search_token(msk, args.keyword, _clock(args))
    with Client(args.server) as c:
        cts = c.search(token)
    for ind in sorted(roles.user_decrypt_results(msk, cts)):
        print(ind.decode("utf-8", "replace"))


def cmd_serve(args):
    store = ServerStore.open(args.store)

    def ready(addr):
        print(f"listening on {addr[0]}:{addr[1]}", flush=True)

    serve(store, args.listen, ready=ready)


def cmd_bench(args):
    params = SchemeParams(iota=args.iota, kappa=args.kappa)
    rows = harness.bench(args.profile, args.pairs, args.keywords, params, seed=args.seed)
    harness.write_report(rows, args.out)
    print(f"{len(rows)} rows written to {args.out}")


def cmd_selftest(args):
    report = harness.selftest(seed=args.seed, n_ops=args.ops)
    print(f"ops={report.ops} adds={report.adds} deletes={report.deletes} "
          f"searches={report.searches} mismatches={len(report.mismatches)}")
    for m in report.mismatches[:10]:
        print("  mismatch:", m)
    return 0 if report.ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="nims", description="Non-interactive multi-client encrypted search.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("setup", help="create owner state and export the user key")
    s.add_argument("--out", required=True)
    s.add_argument("--export-msk")
    s.add_argument("--iota", type=int, default=DEFAULT_IOTA)
    s.add_argument("--kappa", type=int, default=DEFAULT_KAPPA)
    s.add_argument("--genesis", type=int)
    s.set_defaults(func=cmd_setup)

    s = sub.add_parser("add", help="index documents and upload them")
    s.add_argument("--state", required=True)
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--docs", help="directory of text files")
    src.add_argument("--pairs", help="file of 'ind<TAB>w1,w2,...' lines")
    s.add_argument("--server")
    s.add_argument("--at", type=int, help="clock (epoch seconds) instead of now")
    s.set_defaults(func=cmd_add)

    s = sub.add_parser("del", help="delete one document")
    s.add_argument("--state", required=True)
    s.add_argument("--ind", required=True)
    s.add_argument("--server")
    s.set_defaults(func=cmd_del)

    s = sub.add_parser("search", help="search one keyword, print identifiers")
    s.add_argument("--msk", required=True)
    s.add_argument("--keyword", required=True)
    s.add_argument("--server")
    s.add_argument("--at", type=int, help="clock (epoch seconds) instead of now")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("serve", help="run the storage server")
    s.add_argument("--store", required=True)
    s.add_argument("--listen")
    s.set_defaults(func=cmd_serve)

    s = sub.add_parser("bench", help="run a benchmark profile")
    s.add_argument("--profile", required=True, choices=["add", "search", "delete", "storage"])
    s.add_argument("--pairs", type=int, default=10_000)
    s.add_argument("--keywords", type=int, default=100)
    s.add_argument("--out", required=True)
    s.add_argument("--iota", type=int, default=32)
    s.add_argument("--kappa", type=int, default=16)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("selftest", help="seeded oracle-equivalence fuzz")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--ops", type=int, default=200)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or 0
    except (NimsError, OSError, ValueError) as exc:
        print(f"nims: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
