import os
import signal
import socket
import subprocess
import sys

import pytest

from nims import cli, codec


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture
def server(tmp_path):
    addr = f"127.0.0.1:{free_port()}"
    proc = subprocess.Popen([sys.executable, "-m", "nims.cli", "serve", "--store", str(tmp_path / "edb"),
                             "--listen", addr], stdout=subprocess.PIPE, text=True)
    assert proc.stdout.readline().startswith("listening on")
    yield addr
    proc.send_signal(signal.SIGTERM)
    proc.wait(timeout=10)
    assert (tmp_path / "edb").exists()


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_scripted_flow(tmp_path, server, capsys):
    state, msk = tmp_path / "owner.state", tmp_path / "user.msk"
    code, out, _ = run(capsys, "setup", "--out", state, "--export-msk", msk,
                       "--iota", 16, "--kappa", 8, "--genesis", 1000)
    assert code == 0 and "n=26" in out
    docs = tmp_path / "docs"
    docs.mkdir()
    (docs / "one.txt").write_text("The cat sat on the mat.")
    (docs / "two.txt").write_text("A cat and a dog.")
    (docs / "empty.txt").write_text("a b")
    code, out, _ = run(capsys, "add", "--state", state, "--docs", docs, "--server", server, "--at", 1010)
    assert code == 0 and "added 2 documents" in out
    assert codec.decode_owner_state(state.read_bytes()).ctr == 1

    code, out, _ = run(capsys, "search", "--msk", msk, "--keyword", "cat", "--server", server, "--at", 1010)
    assert out.split() == ["one.txt", "two.txt"]
    # a token for a clock before the add sees nothing, and that is not an error
    code, out, _ = run(capsys, "search", "--msk", msk, "--keyword", "cat", "--server", server, "--at", 1005)
    assert code == 0 and out == ""

    code, out, _ = run(capsys, "del", "--state", state, "--ind", "one.txt", "--server", server)
    assert out.strip() == "deleted"
    code, out, _ = run(capsys, "del", "--state", state, "--ind", "one.txt", "--server", server)
    assert out.strip() == "not found"
    code, out, _ = run(capsys, "search", "--msk", msk, "--keyword", "cat", "--server", server, "--at", 1010)
    assert out.split() == ["two.txt"]

    pairs = tmp_path / "pairs.tsv"
    pairs.write_text("# comment\nthree\tcat, bird\n\n")
    code, out, _ = run(capsys, "add", "--state", state, "--pairs", pairs, "--server", server, "--at", 1020)
    assert code == 0
    code, out, _ = run(capsys, "search", "--msk", msk, "--keyword", "cat", "--server", server, "--at", 1020)
    assert out.split() == ["three", "two.txt"]


def test_add_without_server_keeps_state(tmp_path, capsys):
    state = tmp_path / "owner.state"
    run(capsys, "setup", "--out", state, "--iota", 16, "--kappa", 8, "--genesis", 1000)
    before = state.read_bytes()
    pairs = tmp_path / "p.tsv"
    pairs.write_text("a\tx\n")
    code, _, err = run(capsys, "add", "--state", state, "--pairs", pairs,
                       "--server", f"127.0.0.1:{free_port()}", "--at", 1001)
    assert code == 1 and "error" in err
    assert state.read_bytes() == before


def test_bad_state_file(tmp_path, capsys):
    bad = tmp_path / "x"
    bad.write_bytes(b"not an owner state file")
    code, _, err = run(capsys, "del", "--state", bad, "--ind", "a")
    assert code == 1 and "magic" in err


def test_bench_delete_constant_wire(tmp_path, capsys):
    out = tmp_path / "del.tsv"
    code, _, _ = run(capsys, "bench", "--profile", "delete", "--pairs", 30, "--keywords", 3,
                     "--iota", 8, "--kappa", 4, "--out", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].split("\t") == ["op", "n", "ms", "wire_bytes", "owner_state_bytes"]
    wire_sizes = {row.split("\t")[3] for row in lines[1:]}
    assert wire_sizes == {str(5 + 32)}


def test_selftest_command(capsys):
    code, out, _ = run(capsys, "selftest", "--seed", 2, "--ops", 20)
    assert code == 0 and "mismatches=0" in out
