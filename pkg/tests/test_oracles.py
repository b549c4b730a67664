import random

import pytest

from catiso.errors import ConfigurationError, PreconditionError
from catiso.oracles import (
    ArborescenceRelation,
    BruteForceOracle,
    Cnf,
    Digraph,
    ExactMatchingRelation,
    Graph,
    KSubsetRelation,
    PerfectMatchingRelation,
    Relation,
    SatRelation,
    WeightPolynomial,
    arborescence_counting_oracle,
    brute_force_oracle,
    counting_oracle_to_decision,
    matrix_tree_count,
    parse_dimacs,
    satisfying_masks,
    to_dimacs,
)

from conftest import argmin_witnesses, mask_weight, witness_masks


def four_cycle(colors=None) -> Graph:
    return Graph(4, ((0, 1), (1, 2), (2, 3), (3, 0)), colors)


def random_digraph(rng: random.Random, n: int, arc_prob: float = 0.5) -> Digraph:
    arcs = [
        (u, v)
        for u in range(n)
        for v in range(n)
        if u != v and rng.random() < arc_prob
    ]
    if not arcs:
        arcs = [(0, 1 % n)]
    return Digraph(n, tuple(arcs))


def enumerate_arborescences(dg: Digraph, root: int) -> list[int]:
    """Independent enumeration: pick one incoming arc per non-root vertex,
    then keep the acyclic choices (reachable from the root)."""
    n = dg.n
    incoming: list[list[int]] = [[] for _ in range(n)]
    for idx, (u, v) in enumerate(dg.arcs):
        incoming[v].append(idx)
    chosen: list[int] = []
    out: list[int] = []

    def rec(v: int) -> None:
        if v == n:
            mask = 0
            adj = [[] for _ in range(n)]
            for idx in chosen:
                a, b = dg.arcs[idx]
                adj[a].append(b)
                mask |= 1 << idx
            seen = {root}
            stack = [root]
            while stack:
                for w in adj[stack.pop()]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) == n:
                out.append(mask)
            return
        if v == root:
            rec(v + 1)
            return
        for idx in incoming[v]:
            chosen.append(idx)
            rec(v + 1)
            chosen.pop()

    rec(0)
    return out


# -- relations ---------------------------------------------------------------


def test_four_cycle_has_two_perfect_matchings():
    rel = PerfectMatchingRelation(four_cycle())
    assert len(witness_masks(rel)) == 2


def test_exact_matching_alternating_colors_k1_empty():
    rel = ExactMatchingRelation(four_cycle(("red", "blue", "red", "blue")), 1)
    assert witness_masks(rel) == []
    rel2 = ExactMatchingRelation(four_cycle(("red", "blue", "red", "blue")), 2)
    assert len(witness_masks(rel2)) == 1  # the all-red matching


def test_exact_matching_requires_colors():
    with pytest.raises(ConfigurationError):
        ExactMatchingRelation(four_cycle(), 1)


def test_path_digraph_single_arborescence():
    dg = Digraph(3, ((0, 1), (1, 2)))
    rel = ArborescenceRelation(dg, 0)
    assert witness_masks(rel) == [0b11]
    # rooted elsewhere there is none
    assert witness_masks(ArborescenceRelation(dg, 1)) == []


def test_arborescence_rejects_cycles_and_root_indegree():
    dg = Digraph(3, ((0, 1), (1, 2), (2, 0)))
    rel = ArborescenceRelation(dg, 0)
    assert rel.holds((1, 1, 0))
    assert not rel.holds((1, 1, 1))  # arc into the root
    assert not rel.holds((0, 1, 1))  # root not indegree 0


def test_arborescence_matches_independent_enumeration(rng):
    for _ in range(25):
        dg = random_digraph(rng, rng.randint(2, 5))
        root = rng.randrange(dg.n)
        rel = ArborescenceRelation(dg, root)
        assert sorted(witness_masks(rel)) == sorted(enumerate_arborescences(dg, root))


# -- brute-force oracle ---------------------------------------------------------


class EmptyRelation(Relation):
    def __init__(self, m):
        self.m = m

    def holds(self, y):
        return False


class FullRelation(Relation):
    def __init__(self, m):
        self.m = m

    def holds(self, y):
        return True


def test_empty_relation_always_false():
    oracle = brute_force_oracle(EmptyRelation(4))
    assert not oracle.query((1, 2, 3, 4), 10**6)


def test_full_relation_true_iff_nonnegative():
    oracle = brute_force_oracle(FullRelation(3))
    assert oracle.query((5, 5, 5), 0)  # the empty set weighs 0
    assert oracle.queries == 1


def test_oracle_monotone_in_w0(rng):
    rel = KSubsetRelation(6, 3)
    oracle = brute_force_oracle(rel)
    for _ in range(30):
        weights = tuple(rng.randint(0, 30) for _ in range(6))
        w0 = rng.randint(0, 90)
        if oracle.query(weights, w0):
            assert oracle.query(weights, w0 + 1)


def test_oracle_witness_cap():
    with pytest.raises(ConfigurationError):
        brute_force_oracle(FullRelation(30))


def test_oracle_agrees_with_enumeration(rng):
    for _ in range(20):
        m = rng.randint(2, 7)
        rel = KSubsetRelation(m, rng.randint(0, m))
        oracle = brute_force_oracle(rel)
        weights = tuple(rng.randint(0, m * m) for _ in range(m))
        masks = witness_masks(rel)
        best = min((mask_weight(x, weights) for x in masks), default=None)
        assert oracle.min_weight(weights) == best


# -- matrix-tree counting ---------------------------------------------------------


def test_matrix_tree_single_path():
    dg = Digraph(3, ((0, 1), (1, 2)))
    poly = matrix_tree_count(dg, (2, 3), 0)
    assert poly.coefficients == {5: 1}


def test_matrix_tree_no_arborescence_zero_polynomial():
    dg = Digraph(3, ((0, 1), (2, 1)))
    poly = matrix_tree_count(dg, (1, 1), 0)
    assert poly.coefficients == {}


def test_matrix_tree_methods_agree_and_match_enumeration(rng):
    for _ in range(40):
        dg = random_digraph(rng, rng.randint(2, 5), arc_prob=0.6)
        root = rng.randrange(dg.n)
        weights = tuple(rng.randint(0, 6) for _ in dg.arcs)
        interp = matrix_tree_count(dg, weights, root, "interpolate")
        bareiss = matrix_tree_count(dg, weights, root, "bareiss")
        assert interp.coefficients == bareiss.coefficients
        expected: dict[int, int] = {}
        for mask in enumerate_arborescences(dg, root):
            w = mask_weight(mask, weights)
            expected[w] = expected.get(w, 0) + 1
        assert interp.coefficients == expected


def test_complete_digraph_count_cayley():
    n = 4
    dg = Digraph(n, tuple((u, v) for u in range(n) for v in range(n) if u != v))
    poly = matrix_tree_count(dg, (0,) * len(dg.arcs), 0)
    assert poly.total() == n ** (n - 2)  # Cayley: 16 arborescences of K4 per root


def test_counting_oracle_equals_brute_force(rng):
    for _ in range(12):
        dg = random_digraph(rng, rng.randint(2, 5), arc_prob=0.6)
        root = rng.randrange(dg.n)
        rel = ArborescenceRelation(dg, root)
        brute = brute_force_oracle(rel)
        counting = arborescence_counting_oracle(dg, root)
        m = len(dg.arcs)
        for _ in range(8):
            weights = tuple(rng.randint(0, 5) for _ in range(m))
            for w0 in (0, 3, 7, m * 5):
                assert counting.query(weights, w0) == brute.query(weights, w0)


def test_counting_oracle_zero_polynomial_always_false():
    oracle = counting_oracle_to_decision(lambda weights: WeightPolynomial({}))
    assert not oracle.query((1, 2), 100)


def test_weight_validation():
    dg = Digraph(2, ((0, 1),))
    with pytest.raises(PreconditionError):
        matrix_tree_count(dg, (1, 2), 0)
    with pytest.raises(PreconditionError):
        matrix_tree_count(dg, (-1,), 0)


# -- CNF ---------------------------------------------------------------------------


def test_dimacs_round_trip():
    cnf = Cnf(3, ((1, -2), (2, 3), (-1,)))
    again = parse_dimacs(to_dimacs(cnf))
    assert again == cnf


def test_dimacs_parsing_details():
    text = "c comment\np cnf 3 2\n1 -2 0\n2\n3 0\n"
    cnf = parse_dimacs(text)
    assert cnf.clauses == ((1, -2), (2, 3))
    with pytest.raises(ConfigurationError):
        parse_dimacs("1 2 0\n")
    with pytest.raises(ConfigurationError):
        parse_dimacs("p cnf 2 1\n3 0\n")


def test_satisfying_masks():
    cnf = Cnf(2, ((1,), (-2,)))
    assert satisfying_masks(cnf) == [0b01]
    sat = SatRelation(cnf)
    assert sat.holds((1, 0))
    assert not sat.holds((1, 1))
