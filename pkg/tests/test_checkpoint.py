import struct

import pytest

from ecsieve.checkpoint import (
    MAGIC,
    CheckpointState,
    CorruptCheckpoint,
    config_digest,
    decode,
    encode,
    load_checkpoint,
    save_checkpoint,
)


def _state():
    return CheckpointState(
        fingerprint=config_digest("demo"), next_lo=65537, n_good_primes=6541, n_in_A=6541,
        pi_twin=700, empirical_S=900, ub1_extra=3, max_a=65800, empirical_H=123.456789012345,
        omega_hist=[0, 700, 1500, 2000], divisor_counts=[6541, 4300], ell_counts=[4300, 3000],
        excluded_primes=[37], series=[(65536, 6541, 6541, 700, 0, 900, 3, 0.1 + 0.2)])


def test_round_trip_is_bit_exact():
    s = _state()
    back = decode(encode(s))
    assert back == s
    assert struct.pack("<d", back.empirical_H) == struct.pack("<d", s.empirical_H)
    assert encode(back) == encode(s)


def test_magic_prefix():
    assert encode(_state()).startswith(MAGIC)


def test_corrupted_length_field():
    data = bytearray(encode(_state()))
    struct.pack_into("<Q", data, len(MAGIC), 10**9)
    with pytest.raises(CorruptCheckpoint):
        decode(bytes(data))


def test_corrupted_payload_and_truncation():
    data = bytearray(encode(_state()))
    data[60] ^= 1
    with pytest.raises(CorruptCheckpoint):
        decode(bytes(data))
    with pytest.raises(CorruptCheckpoint):
        decode(encode(_state())[:-3])
    with pytest.raises(CorruptCheckpoint):
        decode(b"NOPE" + encode(_state())[5:])


def test_missing_or_empty_file_means_fresh_start(tmp_path):
    assert load_checkpoint(tmp_path / "absent.ck") is None
    empty = tmp_path / "empty.ck"
    empty.write_bytes(b"")
    assert load_checkpoint(empty) is None


def test_save_load(tmp_path):
    path = tmp_path / "state.ck"
    save_checkpoint(path, _state())
    assert load_checkpoint(path) == _state()
    assert not (tmp_path / "state.ck.tmp").exists()
