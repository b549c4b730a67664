"""Search-to-weighted-decision reduction against a pluggable oracle.

The catalytic tape holds N candidate weight assignments.  Processing one
assignment either certifies it min-isolating (no threshold element) and
extracts the unique minimum witness with one query per element, or finds
a threshold element whose weight is recoverable from the others, drops
that entry to free ceil(log2 m) bits, and moves on.  If nothing isolates,
the freed space pays for brute force; afterwards every dropped entry is
recomputed from two oracle minima and the tape restored bit-exactly.

The FSAT variant performs the same isolation argument with equality
queries ("is there a satisfying assignment of weight exactly w*") in two
nonadaptive rounds, as a base for unique-SAT style formula isolation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

from .bitops import Bits, bit_length_ceil, bits_to_int, int_to_bits
from .errors import ConfigurationError, CorruptionError, PreconditionError
from .oracles import Cnf, Relation, satisfying_masks
from .seeding import derived_rng
from .tape import CatalyticTape, SpaceLedger, new_tape

INPUT_WEIGHT_SCALE_EXP = 10  # combined weight = W_input * m^10 + W_catalytic


# -- weight-vector tape encoding ----------------------------------------


def weight_word(m: int) -> int:
    """ceil(log2 m), at least 1: the bits saved per compressed assignment."""
    return max(1, bit_length_ceil(max(m, 1)))


def entry_bits(m: int) -> int:
    return 2 * weight_word(m)


def entry_cap(m: int) -> int:
    """Largest admissible entry: m^2, clipped to the encodable range."""
    return min(m * m, (1 << entry_bits(m)) - 1)


def weight_block_bits(m: int) -> int:
    return m * entry_bits(m)


def encode_weights(weights: Sequence[int], m: int) -> Bits:
    if len(weights) != m:
        raise PreconditionError(f"need {m} entries, got {len(weights)}")
    eb = entry_bits(m)
    out: tuple[int, ...] = ()
    for w in weights:
        if not 0 <= w <= entry_cap(m):
            raise PreconditionError(f"entry {w} outside [0, {entry_cap(m)}]")
        out += int_to_bits(w, eb)
    return out


def decode_weights(bits: Sequence[int], m: int) -> tuple[int, ...]:
    eb = entry_bits(m)
    if len(bits) != m * eb:
        raise PreconditionError(f"weight block must be {m * eb} bits, got {len(bits)}")
    out = []
    for j in range(m):
        w = bits_to_int(bits[j * eb : (j + 1) * eb])
        if w > entry_cap(m):
            raise PreconditionError(
                f"entry {w} exceeds the cap {entry_cap(m)}; the tape must hold "
                "valid weight assignments"
            )
        out.append(w)
    return tuple(out)


@dataclass(frozen=True)
class CompressedWeight:
    """A weight vector with one entry dropped: (index, surviving entries)."""

    dropped_index: int
    remaining: tuple[int, ...]


def encode_compressed(cw: CompressedWeight, m: int) -> Bits:
    if len(cw.remaining) != m - 1:
        raise PreconditionError("compressed weight must keep m-1 entries")
    out = int_to_bits(cw.dropped_index, weight_word(m))
    eb = entry_bits(m)
    for w in cw.remaining:
        out += int_to_bits(w, eb)
    return out


def decode_compressed(bits: Sequence[int], m: int) -> CompressedWeight:
    word = weight_word(m)
    eb = entry_bits(m)
    if len(bits) != word + (m - 1) * eb:
        raise PreconditionError("bad compressed weight payload length")
    idx = bits_to_int(bits[:word])
    remaining = tuple(
        bits_to_int(bits[word + j * eb : word + (j + 1) * eb]) for j in range(m - 1)
    )
    return CompressedWeight(idx, remaining)


def random_weight_tape(m: int, n_weights: int, seed: int) -> CatalyticTape:
    """Tape of n_weights assignments with uniform entries in [0, entry_cap]."""
    rng = derived_rng(seed, f"s2d-tape-m{m}")
    bits: list[int] = []
    for _ in range(n_weights):
        weights = [rng.randint(0, entry_cap(m)) for _ in range(m)]
        bits.extend(encode_weights(weights, m))
    return CatalyticTape(bits, weight_block_bits(m))


def weights_tape(assignments: Sequence[Sequence[int]], m: int) -> CatalyticTape:
    bits: list[int] = []
    for weights in assignments:
        bits.extend(encode_weights(weights, m))
    return CatalyticTape(bits, weight_block_bits(m))


def default_n_weights(m: int) -> int:
    return m + 8


# -- core queries against a <=-oracle -----------------------------------


def find_wmin(oracle, weights: Sequence[int], cap: int | None = None) -> int | None:
    """Least w0 with a witness of weight <= w0, by binary search; None if
    even the cap admits no witness."""
    m = len(weights)
    if cap is None:
        cap = m**3
    if not oracle.query(weights, cap):
        return None
    lo, hi = 0, cap
    while lo < hi:
        mid = (lo + hi) // 2
        if oracle.query(weights, mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _subst(weights: Sequence[int], e: int, value: int) -> tuple[int, ...]:
    out = list(weights)
    out[e] = value
    return tuple(out)


def find_threshold(oracle, weights: Sequence[int], wmin: int) -> int | None:
    """Smallest threshold element, or None when the assignment isolates.

    Element e passes when raising its weight to wmin+1 still leaves a
    weight-wmin witness and zeroing it leaves a weight-(wmin - W(e))
    witness; no element passing certifies min-isolation.
    """
    for e in range(len(weights)):
        raised = _subst(weights, e, wmin + 1)
        zeroed = _subst(weights, e, 0)
        if oracle.query(raised, wmin) and oracle.query(zeroed, wmin - weights[e]):
            return e
    return None


def extract_witness(
    oracle,
    weights: Sequence[int],
    wmin: int,
    relation: Relation | None = None,
) -> Bits:
    """Read off the unique minimum witness, one raised-weight query per element."""
    y = []
    for e in range(len(weights)):
        raised = _subst(weights, e, wmin + 1)
        y.append(0 if oracle.query(raised, wmin) else 1)
    witness = tuple(y)
    if relation is not None:
        if not relation.holds(witness):
            raise CorruptionError("extracted bit vector is not a witness")
        got = sum(w for w, bit in zip(weights, witness) if bit)
        if got != wmin:
            raise CorruptionError(f"extracted witness weighs {got}, expected {wmin}")
    return witness


def recompute(
    oracle,
    compressed: CompressedWeight,
    m: int,
    *,
    w_input: Sequence[int] | None = None,
) -> tuple[int, ...]:
    """Reconstruct the dropped entry as W'min - W''min.

    W' pins the dropped index to the cap (the finite stand-in for
    infinity) and W'' to zero; with a threshold at that index both minima
    are exact, so the difference recovers the original entry bit-exactly.
    """
    i0 = compressed.dropped_index
    partial = list(compressed.remaining)
    partial.insert(i0, 0)
    if w_input is None:
        big = m**3
        cap = m**3
        effective = list(partial)
    else:
        scale = m**INPUT_WEIGHT_SCALE_EXP
        cap = scale * sum(w_input) + m**3
        big = cap + 1
        effective = [scale * wi + wc for wi, wc in zip(w_input, partial)]
    w_prime = _subst(effective, i0, big)
    w_dprime = _subst(effective, i0, 0)
    top = find_wmin(oracle, w_prime, cap)
    bottom = find_wmin(oracle, w_dprime, cap)
    if top is None or bottom is None:
        raise CorruptionError("recompute found no witness; tape is corrupt")
    value = top - bottom
    if w_input is not None:
        value -= w_input[i0] * (m**INPUT_WEIGHT_SCALE_EXP)
    if not 0 <= value <= entry_cap(m):
        raise CorruptionError(f"recomputed entry {value} is out of range")
    return tuple(_subst(partial, i0, value))


def combined_weight(
    w_input: Sequence[int], w_catalytic: Sequence[int], m: int
) -> tuple[int, ...]:
    """Scale input weights above any catalytic total so that minima under
    the combination are minima under the input weights."""
    if len(w_input) != m or len(w_catalytic) != m:
        raise PreconditionError("weight vectors must have length m")
    scale = m**INPUT_WEIGHT_SCALE_EXP
    return tuple(scale * wi + wc for wi, wc in zip(w_input, w_catalytic))


# -- the reduction ------------------------------------------------------


@dataclass
class S2dResult:
    path: str  # "isolated", "fallback", "reject"
    witness: Bits | None
    wmin: int | None
    isolating_index: int | None
    freed_bits: int
    oracle_queries: int
    tape_restored: bool
    governing: str = ""


def search_to_decision(
    relation: Relation,
    oracle,
    tape: CatalyticTape,
    *,
    w_input: Sequence[int] | None = None,
) -> S2dResult:
    """Run the full reduction; the tape is restored before returning.

    With ``w_input`` the returned witness has minimum input weight (the
    combined-weight construction); otherwise minimality is under the
    governing tape assignment recorded in the result.
    """
    m = relation.m
    if tape.block_len != weight_block_bits(m):
        raise ConfigurationError(
            f"tape blocks must be {weight_block_bits(m)} bits for m={m}"
        )
    if w_input is not None and len(w_input) != m:
        raise ConfigurationError("w_input must have one entry per element")
    n_weights = tape.num_blocks
    queries_before = getattr(oracle, "queries", 0)
    ledger = SpaceLedger()

    def effective(weights: Sequence[int]) -> tuple[int, ...]:
        if w_input is None:
            return tuple(weights)
        return combined_weight(w_input, weights, m)

    if w_input is None:
        cap = m**3
    else:
        cap = (m**INPUT_WEIGHT_SCALE_EXP) * sum(w_input) + m**3

    def result(path: str, witness: Bits | None, wmin: int | None,
               index: int | None, governing: str) -> S2dResult:
        return S2dResult(
            path=path,
            witness=witness,
            wmin=wmin,
            isolating_index=index,
            freed_bits=freed_snapshot,
            oracle_queries=getattr(oracle, "queries", 0) - queries_before,
            tape_restored=tape.verify_restored(),
            governing=governing,
        )

    first = decode_weights(tape.read_block(0), m)
    if not oracle.query(effective(first), cap):
        freed_snapshot = 0
        return result("reject", None, None, None, "")

    compressed_upto = 0
    for i in range(n_weights):
        tape_weights = decode_weights(tape.read_block(i), m)
        eff = effective(tape_weights)
        wmin = find_wmin(oracle, eff, cap)
        if wmin is None:
            raise CorruptionError("witness vanished between queries; oracle impure?")
        e = find_threshold(oracle, eff, wmin)
        if e is None:
            witness = extract_witness(oracle, eff, wmin, relation)
            freed_snapshot = ledger.freed_total
            _restore_blocks(oracle, tape, ledger, m, range(compressed_upto), w_input)
            if w_input is not None:
                reported = sum(w for w, bit in zip(w_input, witness) if bit)
                governing = "w_input"
            else:
                reported = sum(w for w, bit in zip(tape_weights, witness) if bit)
                governing = f"tape[{i}]"
            return result("isolated", witness, reported, i, governing)
        cw = CompressedWeight(e, tape_weights[:e] + tape_weights[e + 1 :])
        tape.write_block(i, encode_compressed(cw, m), ledger)
        compressed_upto = i + 1

    # Nothing isolated: brute force in the freed space, then restore.
    freed_snapshot = ledger.freed_total
    fallback_weights = w_input if w_input is not None else first
    best_mask = None
    best_weight = None
    for mask in range(1 << m):
        y = tuple((mask >> j) & 1 for j in range(m))
        if relation.holds(y):
            weight = sum(w for w, bit in zip(fallback_weights, y) if bit)
            if best_weight is None or weight < best_weight:
                best_mask, best_weight = mask, weight
    if best_mask is None:
        raise CorruptionError("fallback found no witness although the oracle did")
    witness = tuple((best_mask >> j) & 1 for j in range(m))
    _restore_blocks(oracle, tape, ledger, m, range(n_weights), w_input)
    governing = "w_input" if w_input is not None else "tape[0]"
    return result("fallback", witness, best_weight, None, governing)


def _restore_blocks(oracle, tape, ledger, m, indices, w_input):
    for i in indices:
        cw = decode_compressed(tape.read_block(i), m)
        weights = recompute(oracle, cw, m, w_input=w_input)
        tape.write_block(i, encode_weights(weights, m), ledger)


# -- FSAT: two nonadaptive query rounds ----------------------------------


@dataclass
class RoundLog:
    count: int = 0
    query_digest: str = ""
    answer_digest: str = ""
    entries: list[tuple] | None = None


class QueryLog:
    """Round-tagged oracle call log.

    Always tracks per-round counts and SHA-256 digests of the query and
    answer streams; with ``detail`` it also keeps the raw entries, which
    replay harnesses use to answer round-1 queries from a cache.
    """

    def __init__(self, detail: bool = False):
        self.detail = detail
        self.rounds: list[RoundLog] = []
        self._qh = None
        self._ah = None

    def start_round(self) -> None:
        self._seal()
        self.rounds.append(RoundLog(entries=[] if self.detail else None))
        self._qh = hashlib.sha256()
        self._ah = hashlib.sha256()

    def record(self, query: tuple, answer: bool) -> None:
        rl = self.rounds[-1]
        rl.count += 1
        self._qh.update(repr(query).encode())
        self._ah.update(b"1" if answer else b"0")
        if rl.entries is not None:
            rl.entries.append((query, answer))

    def _seal(self) -> None:
        if self.rounds and self._qh is not None:
            self.rounds[-1].query_digest = self._qh.hexdigest()
            self.rounds[-1].answer_digest = self._ah.hexdigest()

    def finish(self) -> None:
        self._seal()

    def counts(self) -> tuple[int, ...]:
        return tuple(rl.count for rl in self.rounds)


class CnfEqualityOracle:
    """NP-style query: is there a satisfying assignment (with variable j
    optionally pinned) of weight exactly w*?  Backed by one enumeration
    of the satisfying assignments, with per-weight-vector achievable-set
    caches."""

    def __init__(self, cnf: Cnf, answer_cache: dict | None = None):
        self.cnf = cnf
        self.masks = satisfying_masks(cnf)
        self._sets: dict[tuple[int, ...], tuple[set, list[set], list[set]]] = {}
        self.answer_cache = answer_cache

    def _weight_sets(self, weights: tuple[int, ...]):
        if weights not in self._sets:
            n = self.cnf.n_vars
            all_w: set[int] = set()
            with_j: list[set[int]] = [set() for _ in range(n)]
            without_j: list[set[int]] = [set() for _ in range(n)]
            for mask in self.masks:
                total = 0
                for j in range(n):
                    if (mask >> j) & 1:
                        total += weights[j]
                all_w.add(total)
                for j in range(n):
                    (with_j if (mask >> j) & 1 else without_j)[j].add(total)
            self._sets[weights] = (all_w, with_j, without_j)
        return self._sets[weights]

    def query(self, pin: tuple[str, int] | None, weights: tuple[int, ...], wstar: int) -> bool:
        all_w, with_j, without_j = self._weight_sets(weights)
        if pin is None:
            return wstar in all_w
        kind, j = pin
        return wstar in (with_j[j] if kind == "pos" else without_j[j])


@dataclass
class FsatResult:
    satisfiable: bool
    assignment: Bits | None
    path: str  # "isolated", "fallback", "reject"
    isolating_index: int | None
    freed_bits: int
    tape_restored: bool
    round_queries: tuple[int, ...]
    log: QueryLog


@dataclass
class IsolatedFormula:
    """phi AND phi': the input formula strengthened to at most one model.

    ``weight`` mode conjoins the constraint W(S) = wmin for an isolating
    W; ``assignment`` mode pins every variable; ``unsat`` is constant
    false.
    """

    cnf: Cnf
    mode: str
    weights: tuple[int, ...] | None = None
    target: int | None = None
    assignment: Bits | None = None

    def satisfied(self, bits: Sequence[int]) -> bool:
        if not self.cnf.satisfied(bits):
            return False
        if self.mode == "unsat":
            return False
        if self.mode == "assignment":
            return tuple(bits) == self.assignment
        total = sum(w for w, bit in zip(self.weights, bits) if bit)
        return total == self.target

    def count_models(self) -> int:
        n = self.cnf.n_vars
        return sum(
            1
            for mask in range(1 << n)
            if self.satisfied(tuple((mask >> j) & 1 for j in range(n)))
        )


def fsat(
    cnf: Cnf,
    tape: CatalyticTape,
    *,
    detail_log: bool = False,
    oracle: CnfEqualityOracle | None = None,
) -> FsatResult:
    result, _ = _fsat_core(cnf, tape, detail_log=detail_log, oracle=oracle)
    return result


def isolate_formula(
    cnf: Cnf,
    tape: CatalyticTape,
    *,
    detail_log: bool = False,
    oracle: CnfEqualityOracle | None = None,
) -> tuple[IsolatedFormula, FsatResult]:
    result, formula = _fsat_core(cnf, tape, detail_log=detail_log, oracle=oracle)
    return formula, result


def _fsat_core(
    cnf: Cnf,
    tape: CatalyticTape,
    *,
    detail_log: bool,
    oracle: CnfEqualityOracle | None,
) -> tuple[FsatResult, IsolatedFormula]:
    n = cnf.n_vars
    if tape.block_len != weight_block_bits(n):
        raise ConfigurationError(
            f"tape blocks must be {weight_block_bits(n)} bits for {n} variables"
        )
    n_weights = tape.num_blocks
    if oracle is None:
        oracle = CnfEqualityOracle(cnf)
    log = QueryLog(detail=detail_log)
    ledger = SpaceLedger()

    def ask(tag: str, pin, weights, wstar, i: int, j: int) -> bool:
        answer = oracle.query(pin, weights, wstar)
        log.record((tag, i, j, wstar), answer)
        return answer

    all_weights = [decode_weights(tape.read_block(i), n) for i in range(n_weights)]

    # Round 1: for every assignment i, all weights w* in [0, sum(W_i)]:
    # q1 asks for a satisfying set of weight w*, q2/q3 additionally pin
    # variable j+1 to true/false.  The emitted query set never depends on
    # any answer from this round.
    log.start_round()
    wmins: list[int | None] = []
    b2: list[list[bool]] = []
    b3: list[list[bool]] = []
    for i, weights in enumerate(all_weights):
        cap = sum(weights)
        wmin: int | None = None
        for wstar in range(cap + 1):
            if ask("q1", None, weights, wstar, i, -1) and wmin is None:
                wmin = wstar
        row2 = [False] * n
        row3 = [False] * n
        for j in range(n):
            for wstar in range(cap + 1):
                a2 = ask("q2", ("pos", j), weights, wstar, i, j)
                a3 = ask("q3", ("neg", j), weights, wstar, i, j)
                if wmin is not None and wstar == wmin:
                    row2[j] = a2
                    row3[j] = a3
        wmins.append(wmin)
        b2.append(row2)
        b3.append(row3)

    def finish(path: str, assignment: Bits | None, index: int | None,
               formula: IsolatedFormula) -> tuple[FsatResult, IsolatedFormula]:
        log.finish()
        res = FsatResult(
            satisfiable=assignment is not None,
            assignment=assignment,
            path=path,
            isolating_index=index,
            freed_bits=freed_snapshot,
            tape_restored=tape.verify_restored(),
            round_queries=log.counts(),
            log=log,
        )
        return res, formula

    if wmins[0] is None:
        # Unsatisfiable: every b1 bit is false, nothing was touched.
        freed_snapshot = 0
        log.start_round()
        return finish("reject", None, None, IsolatedFormula(cnf, "unsat"))

    isolating = None
    for i in range(n_weights):
        if wmins[i] is None:
            raise CorruptionError("inconsistent satisfiability across assignments")
        if all(b2[i][j] != b3[i][j] for j in range(n)):
            isolating = i
            break

    if isolating is not None:
        assignment = tuple(1 if b2[isolating][j] else 0 for j in range(n))
        if not cnf.satisfied(assignment):
            raise CorruptionError("read-off assignment does not satisfy the formula")
        freed_snapshot = 0
        log.start_round()
        formula = IsolatedFormula(
            cnf,
            "weight",
            weights=all_weights[isolating],
            target=wmins[isolating],
        )
        return finish("isolated", assignment, isolating, formula)

    # No assignment isolates: compress every block at its threshold
    # variable, pick a satisfying assignment by brute force, then run the
    # second query round to reconstruct the dropped entries.
    thresholds: list[int] = []
    for i in range(n_weights):
        j = next((j for j in range(n) if b2[i][j] and b3[i][j]), None)
        if j is None:
            raise CorruptionError("non-isolating assignment without a threshold")
        thresholds.append(j)
        weights = all_weights[i]
        cw = CompressedWeight(j, weights[:j] + weights[j + 1 :])
        tape.write_block(i, encode_compressed(cw, n), ledger)
    freed_snapshot = ledger.freed_total
    assignment = tuple((oracle.masks[0] >> j) & 1 for j in range(n))

    log.start_round()
    for i in range(n_weights):
        cw = decode_compressed(tape.read_block(i), n)
        j = cw.dropped_index
        partial = list(cw.remaining)
        partial.insert(j, 0)
        pw = tuple(partial)
        cap = sum(pw)
        with_min: int | None = None
        without_min: int | None = None
        for wstar in range(cap + 1):
            a4 = ask("q4", ("pos", j), pw, wstar, i, j)
            a5 = ask("q5", ("neg", j), pw, wstar, i, j)
            if a4 and with_min is None:
                with_min = wstar
            if a5 and without_min is None:
                without_min = wstar
        if with_min is None or without_min is None:
            raise CorruptionError("round-2 minima missing; tape is corrupt")
        value = without_min - with_min
        restored = _subst(pw, j, value)
        tape.write_block(i, encode_weights(restored, n), ledger)

    formula = IsolatedFormula(cnf, "assignment", assignment=assignment)
    return finish("fallback", assignment, None, formula)
