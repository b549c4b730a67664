"""Catalytic tape: fixed-length bit store with restoration verification.

The tape is a data structure, not a machine model.  Its physical length
never changes; a run may overwrite blocks freely but must leave the tape
bit-identical to its initial contents, which is checked against a SHA-256
digest recorded at creation time.

Short payloads are stored left-aligned with zero padding.  The payload
length of each block is tracked next to the tape, playing the role of the
bookkeeping flags an engine keeps on its work tape; the space ledger
counts only the analytical saving (bits_before - bits_after), never the
physical padding.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Sequence

from .bitops import Bits, pack_bits
from .errors import ConfigurationError, PreconditionError


@dataclass(frozen=True)
class LedgerEntry:
    block_index: int
    bits_before: int
    bits_after: int


@dataclass
class SpaceLedger:
    """Log of per-block compression savings, in analytical bits."""

    entries: list[LedgerEntry] = field(default_factory=list)

    @property
    def freed_total(self) -> int:
        return sum(e.bits_before - e.bits_after for e in self.entries)

    def record(self, block_index: int, bits_before: int, bits_after: int) -> None:
        if bits_after > bits_before:
            raise PreconditionError(
                f"ledger entry would grow block {block_index}: "
                f"{bits_before} -> {bits_after}"
            )
        self.entries.append(LedgerEntry(block_index, bits_before, bits_after))

    def release(self, block_index: int) -> None:
        """Drop the entry for a block whose full contents were restored."""
        self.entries = [e for e in self.entries if e.block_index != block_index]


class CatalyticTape:
    """Fixed-length bit tape divided into equal blocks."""

    def __init__(self, bits: Sequence[int], block_len: int):
        if block_len <= 0 or len(bits) == 0:
            raise ConfigurationError("tape and block length must be positive")
        if len(bits) % block_len != 0:
            raise ConfigurationError(
                f"tape length {len(bits)} is not a multiple of block length {block_len}"
            )
        self._cells = bytearray(b & 1 for b in bits)
        self.block_len = block_len
        self._payload_len = [block_len] * (len(bits) // block_len)
        self._initial = bytes(self._cells)
        self.origin = self._digest()

    # -- introspection -------------------------------------------------

    @property
    def c_total(self) -> int:
        return len(self._cells)

    @property
    def num_blocks(self) -> int:
        return len(self._payload_len)

    def bits(self) -> Bits:
        return tuple(self._cells)

    def initial_bits(self) -> Bits:
        return tuple(self._initial)

    def _digest(self) -> bytes:
        h = hashlib.sha256()
        h.update(len(self._cells).to_bytes(8, "big"))
        h.update(pack_bits(self._cells))
        return h.digest()

    # -- block access --------------------------------------------------

    def _check_index(self, k: int) -> None:
        if not 0 <= k < self.num_blocks:
            raise PreconditionError(f"block index {k} out of range")

    def read_block(self, k: int) -> Bits:
        """Current payload of block ``k`` (the full block if uncompressed)."""
        self._check_index(k)
        start = k * self.block_len
        return tuple(self._cells[start : start + self._payload_len[k]])

    def read_raw_block(self, k: int) -> Bits:
        self._check_index(k)
        start = k * self.block_len
        return tuple(self._cells[start : start + self.block_len])

    def write_block(self, k: int, payload: Sequence[int], ledger: SpaceLedger | None = None) -> None:
        self._check_index(k)
        if len(payload) > self.block_len:
            raise PreconditionError(
                f"payload of {len(payload)} bits exceeds block length {self.block_len}"
            )
        start = k * self.block_len
        for i in range(self.block_len):
            self._cells[start + i] = payload[i] & 1 if i < len(payload) else 0
        before = self._payload_len[k]
        after = len(payload)
        self._payload_len[k] = after
        if ledger is not None:
            if after < before:
                ledger.record(k, before, after)
            elif after > before:
                ledger.release(k)

    def verify_restored(self) -> bool:
        return self._digest() == self.origin


def new_tape(
    c_total: int,
    block_len: int,
    fill: str = "zeros",
    *,
    seed: int | None = None,
    bits: Sequence[int] | None = None,
) -> CatalyticTape:
    """Create a tape of ``c_total`` bits filled per ``fill``.

    ``fill`` is one of ``zeros``, ``random`` (requires ``seed``) or
    ``explicit`` (requires ``bits`` of exactly ``c_total`` cells).
    """
    if c_total <= 0:
        raise ConfigurationError("c_total must be positive")
    if block_len <= 0 or c_total % block_len != 0:
        raise ConfigurationError(
            f"c_total {c_total} must be a positive multiple of block_len {block_len}"
        )
    if fill == "zeros":
        cells: Sequence[int] = [0] * c_total
    elif fill == "random":
        if seed is None:
            raise ConfigurationError("random fill requires a seed")
        rng = random.Random(seed)
        cells = [rng.getrandbits(1) for _ in range(c_total)]
    elif fill == "explicit":
        if bits is None or len(bits) != c_total:
            raise ConfigurationError("explicit fill requires exactly c_total bits")
        cells = bits
    else:
        raise ConfigurationError(f"unknown fill mode {fill!r}")
    return CatalyticTape(cells, block_len)
