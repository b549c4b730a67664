"""Affine-modular universal hash family h(x) = ((a*x + b) mod p) mod r.

The prime p is the smallest prime >= max(m, r) for domain [m] and range
[r].  The mod-r truncation inflates the shifted-collision probability
from the idealized 1/r to at most 2/r; every probability budget built on
top of this family uses the doubled bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .bitops import Bits, bit_length_ceil, bits_to_int, int_to_bits
from .errors import PreconditionError


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    candidate = max(n, 2)
    while not _is_prime(candidate):
        candidate += 1
    return candidate


@dataclass(frozen=True)
class HashFamilyParams:
    m: int
    r: int
    p: int
    seed_bits: int


@dataclass(frozen=True)
class HashSeed:
    a: int
    b: int


def family_params(m: int, r: int) -> HashFamilyParams:
    if m < 1 or r < 2:
        raise PreconditionError(f"need m >= 1 and r >= 2, got m={m}, r={r}")
    p = next_prime(max(m, r))
    seed_bits = 2 * bit_length_ceil(p)
    return HashFamilyParams(m=m, r=r, p=p, seed_bits=seed_bits)


def eval_hash(params: HashFamilyParams, seed: HashSeed, x: int) -> int:
    if not 0 <= x < params.m:
        raise PreconditionError(f"x={x} outside hash domain [0, {params.m})")
    return ((seed.a * x + seed.b) % params.p) % params.r


def all_seeds(params: HashFamilyParams) -> Iterator[HashSeed]:
    for a in range(1, params.p):
        for b in range(params.p):
            yield HashSeed(a, b)


def seed_count(params: HashFamilyParams) -> int:
    return (params.p - 1) * params.p


def shifted_collision_audit(params: HashFamilyParams, u: int, v: int, delta: int) -> Fraction:
    """Exact Pr_h[h(u) = delta + h(v)] by enumerating every seed."""
    if u == v:
        raise PreconditionError("shifted-collision audit requires u != v")
    if not (0 <= u < params.m and 0 <= v < params.m):
        raise PreconditionError("u, v must lie in the hash domain")
    hits = 0
    for seed in all_seeds(params):
        if eval_hash(params, seed, u) == delta + eval_hash(params, seed, v):
            hits += 1
    return Fraction(hits, seed_count(params))


def seed_from_bits(params: HashFamilyParams, raw: Sequence[int]) -> HashSeed:
    """Decode a raw bit string into a seed; every string decodes to one.

    Out-of-range halves wrap mod p and a == 0 is remapped to a == 1, so
    arbitrary tape contents always yield a member of the family.
    """
    if len(raw) != params.seed_bits:
        raise PreconditionError(
            f"raw seed must be {params.seed_bits} bits, got {len(raw)}"
        )
    half = params.seed_bits // 2
    a = bits_to_int(raw[:half]) % params.p
    b = bits_to_int(raw[half:]) % params.p
    if a == 0:
        a = 1
    return HashSeed(a, b)


def seed_to_bits(params: HashFamilyParams, seed: HashSeed) -> Bits:
    half = params.seed_bits // 2
    return int_to_bits(seed.a, half) + int_to_bits(seed.b, half)
