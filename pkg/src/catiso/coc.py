"""Compress-or-compute engine over a catalytic tape of hash seeds.

Each tape block is read as a candidate hash seed.  Good seeds extend the
isolating weight assignment one block-system level group at a time; bad
seeds are replaced in place by their rank within the ascending
enumeration of all bad seeds for the current goodness context, freeing
one word of space per block.  If too few good seeds are found, the freed
space pays for enumerating good seeds directly.  Either way the tape is
restored bit-exactly by re-running the same enumeration in reverse.

The goodness test is pluggable; reachability uses layered-DAG weight
checks and the circuit engine reuses this module with proof-tree checks.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .bitops import bit_length_ceil, bits_to_int, int_to_bits
from .dag import LayeredDag, construct_weights, gamma_for, weight_eval
from .dag import weight_check as dag_weight_check
from .errors import ConfigurationError, CorruptionError, PreconditionError
from .hashing import HashFamilyParams, HashSeed, family_params, seed_from_bits
from .tape import CatalyticTape, SpaceLedger

DEFAULT_MAX_ENUM = 1 << 20

GoodnessFn = Callable[[tuple[int, ...]], bool]
SolveFn = Callable[[tuple[int, ...]], bool]


@dataclass(frozen=True)
class CocConfig:
    """Derived engine parameters shared by the DAG and circuit engines.

    ``word`` is ceil(log2 n); seeds occupy c*word-bit blocks and a bad
    seed's rank must fit in (c-1)*word bits.  ``levels`` is the number of
    weight-extension levels (ell for graphs, the count of fan-in-2 layers
    for circuits) and ``n_hashes`` = ceil(levels/delta).
    """

    alpha: float
    r: int
    c: int
    delta: int
    levels: int
    n_hashes: int
    word: int
    block_bits: int
    t: int
    gamma: int
    params: HashFamilyParams
    max_enum: int = DEFAULT_MAX_ENUM

    @property
    def rank_bits(self) -> int:
        return (self.c - 1) * self.word

    @property
    def tape_bits(self) -> int:
        return self.t * self.block_bits


def build_config(
    n: int,
    depth: int,
    levels: int,
    alpha: float = 0.0,
    r: int | None = None,
    c: int | None = None,
    max_enum: int = DEFAULT_MAX_ENUM,
) -> CocConfig:
    if not 0.0 <= alpha <= 0.5:
        raise ConfigurationError(f"alpha must lie in [0, 0.5], got {alpha}")
    if r is None:
        r = n**6
    if r < 2:
        raise ConfigurationError(f"hash range r must be >= 2, got {r}")
    delta = max(1, math.ceil(levels**alpha)) if levels > 0 else 1
    n_hashes = -(-levels // delta)
    params = family_params(n, r)
    word = max(1, bit_length_ceil(max(n, 2)))
    min_c = max(2, -(-params.seed_bits // word))
    if c is None:
        c = min_c
    elif c < min_c:
        raise ConfigurationError(f"c={c} too small; seeds need c >= {min_c}")
    gamma = gamma_for(n, depth, r)
    return CocConfig(
        alpha=alpha,
        r=r,
        c=c,
        delta=delta,
        levels=levels,
        n_hashes=n_hashes,
        word=word,
        block_bits=c * word,
        t=(c + 1) * n_hashes,
        gamma=gamma,
        params=params,
        max_enum=max_enum,
    )


def config_for_graph(g: LayeredDag, alpha: float = 0.0, r: int | None = None,
                     c: int | None = None, max_enum: int = DEFAULT_MAX_ENUM) -> CocConfig:
    gp = g.padded()
    return build_config(gp.n, gp.d, gp.ell, alpha=alpha, r=r, c=c, max_enum=max_enum)


def decode_block_seed(config: CocConfig, raw: int) -> HashSeed:
    """A block's seed is decoded from its leading seed_bits bits; trailing
    slack bits only matter for the raw enumeration order."""
    bits = int_to_bits(raw, config.block_bits)
    return seed_from_bits(config.params, bits[: config.params.seed_bits])


class GoodnessTester:
    """Caching wrapper for the goodness oracle of one engine run.

    The context of a query is the tuple of good raw seeds found so far;
    compress, decompress and the fallback all re-ask the same contexts,
    so verdicts and per-context bad-seed enumerations are memoized.
    ``queries`` counts distinct oracle evaluations.
    """

    def __init__(self, config: CocConfig, good_fn: GoodnessFn):
        self.config = config
        self._good_fn = good_fn
        self.queries = 0
        self._verdicts: dict[tuple[tuple[int, ...], int], bool] = {}
        self._bad: dict[tuple[int, ...], list[int]] = {}

    def is_good(self, goods: tuple[int, ...], raw: int) -> bool:
        key = (goods, raw)
        if key not in self._verdicts:
            self.queries += 1
            self._verdicts[key] = self._good_fn(goods + (raw,))
        return self._verdicts[key]

    def bad_seeds(self, goods: tuple[int, ...]) -> list[int]:
        if goods not in self._bad:
            total = 1 << self.config.block_bits
            if total > self.config.max_enum:
                raise ConfigurationError(
                    f"seed space 2^{self.config.block_bits} exceeds the enumeration "
                    f"cap {self.config.max_enum}; rerun with a smaller r"
                )
            self._bad[goods] = [raw for raw in range(total) if not self.is_good(goods, raw)]
        return self._bad[goods]

    def first_good(self, goods: tuple[int, ...]) -> int | None:
        bad = self.bad_seeds(goods)
        total = 1 << self.config.block_bits
        if len(bad) == total:
            return None
        bad_set = set(bad)
        for raw in range(total):
            if raw not in bad_set:
                return raw
        return None


def compress(tape: CatalyticTape, k: int, tester: GoodnessTester,
             goods: tuple[int, ...], ledger: SpaceLedger) -> int:
    """Replace block k's bad seed with its rank among all bad seeds."""
    raw = bits_to_int(tape.read_block(k))
    bads = tester.bad_seeds(goods)
    pos = bisect_left(bads, raw)
    if pos == len(bads) or bads[pos] != raw:
        raise CorruptionError(f"compress called on block {k} holding a good seed")
    config = tester.config
    if pos >> config.rank_bits:
        raise CorruptionError(
            f"bad-seed rank {pos} does not fit in {config.rank_bits} bits; "
            "r is too small for this instance"
        )
    tape.write_block(k, int_to_bits(pos, config.rank_bits), ledger)
    return pos


def decompress(tape: CatalyticTape, k: int, tester: GoodnessTester,
               goods: tuple[int, ...], ledger: SpaceLedger) -> None:
    """Restore block k from its rank by re-running the bad-seed enumeration."""
    rank = bits_to_int(tape.read_block(k))
    bads = tester.bad_seeds(goods)
    if rank >= len(bads):
        raise CorruptionError(
            f"rank {rank} exceeds the {len(bads)} bad seeds of this context"
        )
    config = tester.config
    tape.write_block(k, int_to_bits(bads[rank], config.block_bits), ledger)


def fallback_enumerate(tester: GoodnessTester, n_hashes: int, freed_bits: int) -> list[int]:
    """First good seed per level, scanning raw encodings in ascending order."""
    config = tester.config
    if freed_bits < n_hashes * config.c * config.word:
        raise PreconditionError(
            f"fallback needs {n_hashes * config.c * config.word} freed bits, "
            f"have {freed_bits}"
        )
    goods: list[int] = []
    for i in range(n_hashes):
        raw = tester.first_good(tuple(goods))
        if raw is None:
            raise CorruptionError(
                f"no good seed exists at step {i + 1}; r is set too small "
                "for this instance"
            )
        goods.append(raw)
    return goods


@dataclass
class EngineReport:
    path: str  # "A" or "B"
    verdict: bool
    block_flags: list[int] = field(default_factory=list)
    good_blocks: list[int] = field(default_factory=list)
    good_seeds: list[int] = field(default_factory=list)
    compressed_blocks: list[int] = field(default_factory=list)
    fallback_seeds: list[int] = field(default_factory=list)
    freed_bits: int = 0
    oracle_queries: int = 0
    tape_restored: bool = True


def run_engine(
    tape: CatalyticTape | None,
    config: CocConfig,
    good_fn: GoodnessFn,
    solve: SolveFn,
) -> EngineReport:
    """Algorithm skeleton shared by the DAG and circuit engines."""
    tester = GoodnessTester(config, good_fn)
    if config.t == 0:
        verdict = solve(())
        restored = tape.verify_restored() if tape is not None else True
        return EngineReport(path="A", verdict=verdict,
                            oracle_queries=tester.queries, tape_restored=restored)
    if tape is None:
        raise ConfigurationError("this configuration needs a catalytic tape")
    if tape.block_len != config.block_bits or tape.num_blocks != config.t:
        raise ConfigurationError(
            f"tape shape {tape.num_blocks}x{tape.block_len} does not match "
            f"config {config.t}x{config.block_bits}"
        )
    ledger = SpaceLedger()
    flags = [-1] * config.t
    goods: list[int] = []
    good_blocks: list[int] = []
    for k in range(config.t):
        if len(goods) >= config.n_hashes:
            break
        raw = bits_to_int(tape.read_block(k))
        if tester.is_good(tuple(goods), raw):
            flags[k] = 1
            goods.append(raw)
            good_blocks.append(k)
        else:
            flags[k] = 0
            compress(tape, k, tester, tuple(goods), ledger)
    fallback_seeds: list[int] = []
    if len(goods) >= config.n_hashes:
        path = "A"
        verdict = solve(tuple(goods))
    else:
        path = "B"
        fallback_seeds = fallback_enumerate(tester, config.n_hashes, ledger.freed_total)
        verdict = solve(tuple(fallback_seeds))
    freed_bits = ledger.freed_total
    for k in range(config.t - 1, -1, -1):
        if flags[k] == 0:
            prior = tuple(
                bits_to_int(tape.read_block(b)) for b in good_blocks if b < k
            )
            decompress(tape, k, tester, prior, ledger)
    return EngineReport(
        path=path,
        verdict=verdict,
        block_flags=flags,
        good_blocks=good_blocks,
        good_seeds=goods,
        compressed_blocks=[k for k, f in enumerate(flags) if f == 0],
        fallback_seeds=fallback_seeds,
        freed_bits=freed_bits,
        oracle_queries=tester.queries,
        tape_restored=tape.verify_restored(),
    )


def _graph_goodness(g: LayeredDag, config: CocConfig) -> GoodnessFn:
    def good(raws: tuple[int, ...]) -> bool:
        level = min(len(raws) * config.delta, config.levels)
        seeds = [decode_block_seed(config, raw) for raw in raws]
        w = construct_weights(g, config.params, seeds, config.delta, config.gamma, level)
        return dag_weight_check(g, w, level)

    return good


def compress_or_compute(
    g: LayeredDag,
    tape: CatalyticTape | None,
    config: CocConfig,
    s: int,
    t: int,
) -> tuple[bool, EngineReport]:
    """Decide s-t reachability; the tape is restored before returning."""
    gp = g.padded()
    if not (0 <= s < g.n and 0 <= t < g.n):
        raise PreconditionError(f"vertices s={s}, t={t} out of range")

    def solve(raws: tuple[int, ...]) -> bool:
        seeds = [decode_block_seed(config, raw) for raw in raws]
        w = construct_weights(gp, config.params, seeds, config.delta,
                              config.gamma, config.levels)
        return weight_eval(gp, w, s, t) is not None

    report = run_engine(tape, config, _graph_goodness(gp, config), solve)
    return report.verdict, report
