import pytest

from catiso.errors import ConfigurationError, PreconditionError
from catiso.tape import CatalyticTape, SpaceLedger, new_tape


def test_zero_fill():
    tape = new_tape(8, 8, "zeros")
    assert tape.bits() == (0,) * 8
    assert tape.verify_restored()


def test_explicit_fill_identity():
    bits = (1, 0, 1, 1, 0, 0, 1, 0)
    tape = new_tape(8, 8, "explicit", bits=bits)
    assert tape.bits() == bits


def test_random_fill_deterministic():
    a = new_tape(64, 8, "random", seed=7)
    b = new_tape(64, 8, "random", seed=7)
    assert a.bits() == b.bits()
    assert a.origin == b.origin


def test_bad_lengths_rejected():
    with pytest.raises(ConfigurationError):
        new_tape(10, 4, "zeros")
    with pytest.raises(ConfigurationError):
        new_tape(0, 4, "zeros")
    with pytest.raises(ConfigurationError):
        new_tape(8, 8, "explicit", bits=(1, 0))


def test_write_read_round_trip():
    tape = new_tape(24, 12, "random", seed=1)
    payload = (1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0)
    tape.write_block(0, payload)
    assert tape.read_block(0) == payload
    short = (1, 1, 0, 1)
    tape.write_block(1, short)
    assert tape.read_block(1) == short


def test_short_write_credits_analytical_bits():
    # A 12-bit block rewritten with 8 bits frees exactly 4 bits.
    tape = new_tape(24, 12, "random", seed=2)
    ledger = SpaceLedger()
    tape.write_block(0, (1,) * 8, ledger)
    assert ledger.freed_total == 4
    assert ledger.entries[0].bits_before == 12
    assert ledger.entries[0].bits_after == 8


def test_full_rewrite_releases_ledger_entry():
    tape = new_tape(24, 12, "random", seed=3)
    original = tape.read_block(0)
    ledger = SpaceLedger()
    tape.write_block(0, (0,) * 5, ledger)
    assert ledger.freed_total == 7
    tape.write_block(0, original, ledger)
    assert ledger.freed_total == 0
    assert tape.verify_restored()


def test_writes_to_distinct_blocks_commute():
    p1, p2 = (1, 0, 1), (0, 1, 1)
    one = new_tape(12, 6, "zeros")
    one.write_block(0, p1)
    one.write_block(1, p2)
    other = new_tape(12, 6, "zeros")
    other.write_block(1, p2)
    other.write_block(0, p1)
    assert one.bits() == other.bits()


def test_verify_restored_detects_single_flip():
    tape = new_tape(16, 8, "random", seed=4)
    assert tape.verify_restored()
    flipped = list(tape.read_block(0))
    flipped[3] ^= 1
    tape.write_block(0, flipped)
    assert not tape.verify_restored()
    flipped[3] ^= 1
    tape.write_block(0, flipped)
    assert tape.verify_restored()


def test_oversized_payload_rejected():
    tape = new_tape(8, 4, "zeros")
    with pytest.raises(PreconditionError):
        tape.write_block(0, (1,) * 5)


def test_ledger_rejects_growth_entries():
    ledger = SpaceLedger()
    with pytest.raises(PreconditionError):
        ledger.record(0, 4, 8)


def test_length_never_changes():
    tape = new_tape(24, 8, "random", seed=5)
    tape.write_block(0, (1,))
    tape.write_block(2, (0, 1, 0, 1, 0, 1, 0, 1))
    assert tape.c_total == 24
    assert len(tape.bits()) == 24
