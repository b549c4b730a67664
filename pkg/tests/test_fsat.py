import random

import pytest

from catiso.errors import ConfigurationError
from catiso.oracles import Cnf
from catiso.s2d import (
    CnfEqualityOracle,
    QueryLog,
    default_n_weights,
    fsat,
    isolate_formula,
    random_weight_tape,
    weights_tape,
)

from conftest import model_count, random_satisfiable_cnf


def run_tape(n, seed, n_weights=None):
    return random_weight_tape(n, n_weights or default_n_weights(n), seed=seed)


def test_satisfiable_formula_solved(rng):
    for trial in range(40):
        n = rng.randint(2, 7)
        cnf = random_satisfiable_cnf(rng, n, rng.randint(1, 2 * n))
        result = fsat(cnf, run_tape(n, seed=trial))
        assert result.satisfiable
        assert cnf.satisfied(result.assignment)
        assert result.tape_restored
        assert len(result.round_queries) == 2


def test_unsat_rejects_with_empty_second_round():
    cnf = Cnf(2, ((1,), (-1,), (2,)))
    result = fsat(cnf, run_tape(2, seed=5))
    assert result.path == "reject"
    assert not result.satisfiable
    assert result.assignment is None
    assert result.round_queries[1] == 0
    assert result.freed_bits == 0
    assert result.tape_restored


def test_unique_model_read_off_directly():
    # exactly one satisfying assignment: any weight assignment isolates
    cnf = Cnf(3, ((1,), (-2,), (3,)))
    result = fsat(cnf, run_tape(3, seed=2))
    assert result.path == "isolated"
    assert result.isolating_index == 0
    assert result.assignment == (1, 0, 1)
    assert result.round_queries[1] == 0


def test_constant_weights_force_fallback():
    # (x1 or x2) with all-equal weights never isolates: {10} and {01} tie
    cnf = Cnf(2, ((1, 2),))
    n_weights = 4
    tape = weights_tape([[1, 1]] * n_weights, 2)
    result = fsat(cnf, tape)
    assert result.path == "fallback"
    assert cnf.satisfied(result.assignment)
    assert result.freed_bits == n_weights * 1  # ceil(log2 2) bits per block
    assert result.round_queries[1] > 0
    assert result.tape_restored


def test_isolate_formula_model_counts(rng):
    for trial in range(25):
        n = rng.randint(2, 6)
        cnf = random_satisfiable_cnf(rng, n, rng.randint(1, 2 * n))
        formula, result = isolate_formula(cnf, run_tape(n, seed=1000 + trial))
        assert result.tape_restored
        assert formula.count_models() == 1


def test_isolate_formula_unsat_stays_unsat():
    cnf = Cnf(2, ((1,), (-1,)))
    formula, result = isolate_formula(cnf, run_tape(2, seed=8))
    assert result.path == "reject"
    assert formula.count_models() == 0


def test_isolated_formula_conjoins_input():
    # models of the output are models of the input
    cnf = Cnf(3, ((1, 2), (2, 3)))
    formula, _ = isolate_formula(cnf, run_tape(3, seed=3))
    for mask in range(8):
        bits = tuple((mask >> j) & 1 for j in range(3))
        if formula.satisfied(bits):
            assert cnf.satisfied(bits)


def test_two_rounds_and_digests_reproduce(rng):
    for trial in range(10):
        n = rng.randint(2, 6)
        cnf = random_satisfiable_cnf(rng, n, rng.randint(1, 2 * n))
        tape1 = run_tape(n, seed=50 + trial)
        tape2 = run_tape(n, seed=50 + trial)
        r1 = fsat(cnf, tape1)
        r2 = fsat(cnf, tape2)
        assert len(r1.log.rounds) == 2
        assert r1.round_queries == r2.round_queries
        for a, b in zip(r1.log.rounds, r2.log.rounds):
            assert a.query_digest == b.query_digest
            assert a.answer_digest == b.answer_digest


class RecordingOracle:
    """Wraps the real oracle, recording every (query, answer) in order."""

    def __init__(self, cnf: Cnf):
        self.inner = CnfEqualityOracle(cnf)
        self.trace: list[tuple[tuple, bool]] = []

    @property
    def masks(self):
        return self.inner.masks

    def query(self, pin, weights, wstar):
        answer = self.inner.query(pin, weights, wstar)
        self.trace.append(((pin, weights, wstar), answer))
        return answer


class ReplayOracle:
    """Answers the first ``prefix`` queries from a recorded trace,
    asserting the replayed stream asks the identical questions."""

    def __init__(self, cnf: Cnf, trace, prefix: int):
        self.inner = CnfEqualityOracle(cnf)
        self.trace = trace
        self.prefix = prefix
        self.position = 0

    @property
    def masks(self):
        return self.inner.masks

    def query(self, pin, weights, wstar):
        if self.position < self.prefix:
            key, answer = self.trace[self.position]
            assert key == (pin, weights, wstar), "replay diverged inside round 1"
            self.position += 1
            return answer
        return self.inner.query(pin, weights, wstar)


def test_round_one_replay_reproduces_round_two(rng):
    # Record every round-1 (query -> answer) pair, then rerun answering
    # round 1 purely from the cache: the round-2 query stream must be
    # identical.
    for trial in range(6):
        n = rng.randint(2, 5)
        cnf = random_satisfiable_cnf(rng, n, rng.randint(1, 2 * n))
        recorder = RecordingOracle(cnf)
        first = fsat(cnf, run_tape(n, seed=99 + trial), detail_log=True, oracle=recorder)
        round1_count = first.round_queries[0]
        replayer = ReplayOracle(cnf, recorder.trace, round1_count)
        second = fsat(cnf, run_tape(n, seed=99 + trial), detail_log=True, oracle=replayer)
        assert replayer.position == round1_count  # all of round 1 came from the cache
        assert second.round_queries == first.round_queries
        assert second.log.rounds[1].query_digest == first.log.rounds[1].query_digest
        assert second.assignment == first.assignment


def test_tape_shape_validated():
    cnf = Cnf(3, ((1, 2),))
    with pytest.raises(ConfigurationError):
        fsat(cnf, run_tape(4, seed=0))


def test_round1_reject_example_bits():
    # every q1 answer is false for an unsatisfiable formula
    cnf = Cnf(2, ((1,), (-1,)))
    result = fsat(cnf, run_tape(2, seed=13), detail_log=True)
    round1 = result.log.rounds[0]
    assert all(not ans for (tag, *_), ans in round1.entries if tag == "q1")
