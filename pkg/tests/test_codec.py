import random

import pytest
from hypothesis import given, strategies as st

from nims import codec, roles
from nims.errors import FormatError
from nims.params import SchemeParams
from nims.roles import Document

from conftest import SMALL


@given(st.integers(min_value=-(1 << 3000), max_value=1 << 3000))
def test_int_round_trip(x):
    r = codec.Reader(codec.encode_int(x))
    assert codec.decode_int(r) == x
    assert r.at_end()


def test_int_layout():
    assert codec.encode_int(0) == b"\x00\x00\x00\x00\x00"
    assert codec.encode_int(-1) == b"\x01\x00\x00\x00\x01\x01"
    assert codec.encode_int(256) == b"\x00\x00\x00\x00\x02\x01\x00"


@pytest.mark.parametrize("raw", [b"\x02\x00\x00\x00\x00", b"\x01\x00\x00\x00\x00",
                                 b"\x00\x00\x00\x00\x01\x00", b"\x00\x00\x00\x00\x05\x01"])
def test_int_rejects(raw):
    with pytest.raises(FormatError):
        codec.decode_int(codec.Reader(raw))


@given(st.integers(1, 5).flatmap(lambda n: st.lists(
    st.lists(st.integers(-(1 << 200), 1 << 200), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_matrix_round_trip(rows):
    m = tuple(map(tuple, rows))
    assert codec.decode_matrix(codec.Reader(codec.encode_matrix(m))) == m


def test_matrix_not_square():
    with pytest.raises(FormatError):
        codec.encode_matrix(((1, 2), (3,)))


@pytest.fixture
def populated(rng):
    state, edb = roles.owner_setup(SMALL, rng)
    batch = roles.owner_add(state, [Document("d1", {"alpha", "beta"}), Document("d2", {"beta"})], 5, rng)
    return state, batch


def test_owner_state_round_trip(populated):
    state, _ = populated
    blob = codec.encode_owner_state(state)
    back = codec.decode_owner_state(blob)
    assert back.msk == state.msk
    assert (back.ctr, back.keywords, back.last_ts) == (state.ctr, state.keywords, state.last_ts)
    assert codec.encode_owner_state(back) == blob


def test_msk_round_trip(populated):
    state, _ = populated
    blob = codec.encode_msk(state.msk)
    assert codec.decode_msk(blob) == state.msk


def test_params_genesis_survives():
    p = SchemeParams(iota=16, kappa=4, genesis=1_700_000_000)
    assert codec.decode_params(codec.Reader(codec.encode_params(p))) == p


def test_batch_round_trip(populated):
    _, batch = populated
    back = codec.decode_add_batch(codec.encode_add_batch(batch))
    assert back.dic_entries == batch.dic_entries
    assert [m.matrix for m in back.new_mat] == [m.matrix for m in batch.new_mat]
    assert (back.epoch_ts, back.lambda_bits) == (batch.epoch_ts, batch.lambda_bits)


def test_batch_rejects_bad_address(populated):
    _, batch = populated
    bad = roles.AddBatch([(b"short", b"v")], [], 0)
    with pytest.raises(FormatError):
        codec.decode_add_batch(codec.encode_add_batch(bad))


def test_token_and_results_round_trip(populated, rng):
    state, _ = populated
    tok = roles.user_search_token(state.msk, "beta", 6, rng)
    assert codec.decode_token(codec.encode_token(tok.token)).matrices == tok.token.matrices
    cts = [b"", b"abc", bytes(100)]
    assert codec.decode_results(codec.encode_results(cts)) == cts


def test_empty_token_rejected():
    with pytest.raises(FormatError):
        codec.decode_token(b"\x00\x00")


@pytest.mark.parametrize("which", ["state", "msk", "batch"])
def test_truncation_and_trailing(populated, which):
    state, batch = populated
    enc, dec = {
        "state": (lambda: codec.encode_owner_state(state), codec.decode_owner_state),
        "msk": (lambda: codec.encode_msk(state.msk), codec.decode_msk),
        "batch": (lambda: codec.encode_add_batch(batch), codec.decode_add_batch),
    }[which]
    blob = enc()
    r = random.Random(3)
    for cut in sorted(r.sample(range(len(blob)), 20)):
        with pytest.raises(FormatError):
            dec(blob[:cut])
    with pytest.raises(FormatError):
        dec(blob + b"\x00")


def test_bad_magic_and_version(populated):
    state, _ = populated
    blob = codec.encode_owner_state(state)
    with pytest.raises(FormatError):
        codec.decode_owner_state(b"X" + blob[1:])
    v = len(codec.OWNER_MAGIC)
    with pytest.raises(FormatError):
        codec.decode_owner_state(blob[:v] + b"\x09" + blob[v + 1:])
    with pytest.raises(FormatError):
        codec.decode_msk(blob)
