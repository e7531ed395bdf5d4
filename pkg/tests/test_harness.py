import random

import pytest
from hypothesis import given, strategies as st

from nims import harness
from nims.oracle import OracleIndex, tokenize_document
from nims.params import SchemeParams


@pytest.mark.parametrize("text,want", [
    ("The cat sat.", {"the", "cat", "sat"}),
    ("", set()),
    ("a-b-c", set()),
    ("Hello, WORLD!! 2024x", {"hello", "world", "2024x"}),
])
def test_tokenize(text, want):
    assert tokenize_document(text) == want


@given(st.text())
def test_tokenize_properties(text):
    toks = tokenize_document(text)
    assert all(len(t) >= 3 and t == t.lower() and t.isascii() for t in toks)


def test_oracle_consistency():
    rng = random.Random(9)
    o = OracleIndex()
    model = {}
    for i in range(10_000):
        if model and rng.random() < 0.4:
            ind = rng.choice(sorted(model))
            assert o.delete(ind)
            del model[ind]
        elif rng.random() < 0.05:
            assert not o.delete(f"ghost{i}")
        else:
            kws = set(rng.sample(range(20), rng.randint(1, 4)))
            o.add(f"d{i}", kws)
            model[f"d{i}"] = kws
        if i % 500 == 0:
            o.check()
            w = rng.randrange(20)
            assert o.search(w) == {d for d, k in model.items() if w in k}
    o.check()


def test_oracle_rejects_live_readd():
    o = OracleIndex()
    o.add("a", {"x"})
    with pytest.raises(KeyError):
        o.add("a", {"y"})


def test_read_pairs(tmp_path):
    p = tmp_path / "p.tsv"
    p.write_text("d1\ta,b\n# skip\n\nd2\t c \n")
    docs = harness.read_pairs(p)
    assert [(d.ind, d.keywords) for d in docs] == [(b"d1", {"a", "b"}), (b"d2", {"c"})]
    p.write_text("no tab here\n")
    with pytest.raises(ValueError):
        harness.read_pairs(p)


def test_read_docs_dir(tmp_path):
    (tmp_path / "x.txt").write_text("Alpha beta")
    (tmp_path / "y.txt").write_text("no")
    (tmp_path / "sub").mkdir()
    docs = harness.read_docs_dir(tmp_path)
    assert [(d.ind, d.keywords) for d in docs] == [(b"x.txt", {"alpha", "beta"})]


def test_fuzz_small():
    params = SchemeParams(iota=16, kappa=8, genesis=100)
    report = harness.fuzz(harness.InProcessServer(), params, seed=4, n_ops=60, n_keywords=10, n_docs=80)
    assert report.ok, report.mismatches[:3]
    assert report.adds and report.deletes and report.searches


@pytest.mark.parametrize("profile", ["add", "search", "storage"])
def test_bench_profiles(profile, tmp_path):
    rows = harness.bench(profile, 40, 4, SchemeParams(iota=8, kappa=4))
    assert rows and all(len(r) == len(harness.REPORT_COLUMNS) for r in rows)
    out = tmp_path / "r.tsv"
    harness.write_report(rows, out)
    assert len(out.read_text().splitlines()) == len(rows) + 1


def test_bench_storage_flat():
    rows = harness.bench("storage", 60, 5, SchemeParams(iota=8, kappa=4))
    assert len({r[4] for r in rows}) == 1


def test_bench_unknown():
    with pytest.raises(ValueError):
        harness.bench("nope", 1, 1, SchemeParams(iota=8, kappa=4))
