"""Fixed-width bit-sequence helpers.

Bit sequences are tuples of 0/1 ints, most significant bit first.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import PreconditionError

Bits = tuple[int, ...]


def int_to_bits(value: int, width: int) -> Bits:
    """Encode ``value`` big-endian in exactly ``width`` bits."""
    if value < 0:
        raise PreconditionError(f"cannot encode negative value {value}")
    if width < 0 or value >> width:
        raise PreconditionError(f"value {value} does not fit in {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def bits_to_int(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | (b & 1)
    return out


def pack_bits(bits: Iterable[int]) -> bytes:
    """Pack a 0/1 sequence into bytes, eight cells per byte, zero padded."""
    out = bytearray()
    acc = 0
    nbits = 0
    for b in bits:
        acc = (acc << 1) | (b & 1)
        nbits += 1
        if nbits == 8:
            out.append(acc)
            acc = 0
            nbits = 0
    if nbits:
        out.append(acc << (8 - nbits))
    return bytes(out)


def bit_length_ceil(x: int) -> int:
    """Smallest w with 2**w >= x, i.e. ceil(log2(x)) for x >= 1."""
    if x < 1:
        raise PreconditionError(f"bit_length_ceil needs x >= 1, got {x}")
    return (x - 1).bit_length()
