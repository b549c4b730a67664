"""Shared instance generators and independent reference oracles.

The oracles here (path enumeration, BFS, proof-tree enumeration, witness
enumeration) are deliberately written from the definitions, independent
of the library code paths they check.
"""

from __future__ import annotations

import random

import pytest

from catiso.bitops import int_to_bits
from catiso.circuits import Gate, LayeredCircuit
from catiso.coc import CocConfig, GoodnessTester, _graph_goodness
from catiso.dag import LayeredDag, WeightAssignment
from catiso.oracles import Cnf
from catiso.tape import CatalyticTape, new_tape


# -- layered DAGs --------------------------------------------------------


def random_layered_dag(
    rng: random.Random,
    d: int = 8,
    max_width: int = 3,
    edge_prob: float = 0.7,
) -> LayeredDag:
    layers = []
    vid = 0
    for _ in range(d + 1):
        width = rng.randint(1, max_width)
        layers.append(list(range(vid, vid + width)))
        vid += width
    edges = []
    for li in range(d):
        for u in layers[li]:
            for v in layers[li + 1]:
                if rng.random() < edge_prob:
                    edges.append((u, v))
    return LayeredDag(vid, layers, edges)


def chain_dag(d: int) -> LayeredDag:
    """Single path: at most one path per pair, so every seed is good."""
    return LayeredDag(d + 1, [[i] for i in range(d + 1)], [(i, i + 1) for i in range(d)])


def diamond_chain(d: int) -> LayeredDag:
    """Two parallel vertices per inner layer, fully wired: tie-rich."""
    layers = [[0]]
    vid = 1
    for _ in range(d - 1):
        layers.append([vid, vid + 1])
        vid += 2
    layers.append([vid])
    vid += 1
    edges = []
    for li in range(d):
        for u in layers[li]:
            for v in layers[li + 1]:
                edges.append((u, v))
    return LayeredDag(vid, layers, edges)


def bfs_reachable(g: LayeredDag, s: int, t: int) -> bool:
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v in g.adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return t in seen


def enumerate_path_weights(g: LayeredDag, w: WeightAssignment, s: int, t: int) -> list[int]:
    """Weights of every s-t path, by DFS over the definition."""
    out: list[int] = []

    def dfs(u: int, acc: int) -> None:
        if u == t:
            out.append(acc)
            return
        for v in g.adj[u]:
            if g.layer_of[v] <= g.layer_of[t]:
                dfs(v, acc + w.of(v))

    if g.layer_of[s] > g.layer_of[t]:
        return []
    dfs(s, w.of(s))
    return out


def dp_shortest_path(g: LayeredDag, w: WeightAssignment, s: int, t: int) -> int | None:
    """Independent layer-by-layer shortest-path DP (distances only)."""
    INF = float("inf")
    dist = [INF] * g.n
    dist[s] = w.of(s)
    for li in range(g.layer_of[s], g.layer_of[t]):
        for u in g.layers[li]:
            if dist[u] == INF:
                continue
            for v in g.adj[u]:
                cand = dist[u] + w.of(v)
                if cand < dist[v]:
                    dist[v] = cand
    return None if dist[t] == INF else int(dist[t])


def adversarial_fill(g: LayeredDag, config: CocConfig) -> CatalyticTape | None:
    """Tape whose every block is the smallest initially-bad seed, or None
    when every seed is good for the first extension step."""
    tester = GoodnessTester(config, _graph_goodness(g.padded(), config))
    bads = tester.bad_seeds(())
    if not bads:
        return None
    block = int_to_bits(bads[0], config.block_bits)
    return new_tape(config.tape_bits, config.block_bits, "explicit", bits=block * config.t)


# -- circuits -------------------------------------------------------------


def random_circuit(
    rng: random.Random,
    n_vars: int = 3,
    depth: int = 4,
    max_width: int = 3,
) -> LayeredCircuit:
    assert depth % 2 == 0
    layers = []
    gid = 0
    lits = []
    for _ in range(rng.randint(2, max_width + 1)):
        lit = rng.choice([1, -1]) * rng.randint(1, n_vars)
        lits.append((gid, Gate("lit", literal=lit)))
        gid += 1
    layers.append(lits)
    prev = [g for g, _ in lits]
    for li in range(1, depth + 1):
        count = rng.randint(1, max_width) if li < depth else 1
        layer = []
        for _ in range(count):
            if li % 2 == 1:
                children = (rng.choice(prev), rng.choice(prev))
                layer.append((gid, Gate("and", children=children)))
            else:
                k = rng.randint(1, min(3, len(prev)))
                layer.append((gid, Gate("or", children=tuple(rng.sample(prev, k)))))
            gid += 1
        layers.append(layer)
        prev = [g for g, _ in layer]
    return LayeredCircuit(layers, output=prev[0], n_vars=n_vars)


def enumerate_proof_tree_weights(
    c: LayeredCircuit, z, w: WeightAssignment, g: int, cap: int = 200_000
) -> list[int]:
    """Weight of every proof tree rooted at g, straight from the definition."""
    from catiso.circuits import _literal_value

    memo: dict[int, list[int]] = {}

    def rec(gid: int) -> list[int]:
        if gid in memo:
            return memo[gid]
        gate = c.gates[gid]
        if gate.kind == "lit":
            out = [w.of(gid)] if _literal_value(gate, z) else []
        elif gate.kind == "and":
            a, b = gate.children
            out = [w.of(gid) + x + y for x in rec(a) for y in rec(b)]
        else:
            out = [w.of(gid) + x for ch in gate.children for x in rec(ch)]
        if len(out) > cap:
            raise AssertionError("proof-tree enumeration blew past the cap")
        memo[gid] = out
        return out

    return rec(g)


# -- CNF -------------------------------------------------------------------


def random_cnf(rng: random.Random, n_vars: int, n_clauses: int, width: int = 3) -> Cnf:
    clauses = []
    for _ in range(n_clauses):
        size = rng.randint(1, min(width, n_vars))
        variables = rng.sample(range(1, n_vars + 1), size)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return Cnf(n_vars, tuple(clauses))


def model_count(cnf: Cnf) -> int:
    return sum(
        1
        for mask in range(1 << cnf.n_vars)
        if cnf.satisfied(tuple((mask >> j) & 1 for j in range(cnf.n_vars)))
    )


def random_satisfiable_cnf(rng: random.Random, n_vars: int, n_clauses: int) -> Cnf:
    while True:
        cnf = random_cnf(rng, n_vars, n_clauses)
        if model_count(cnf) > 0:
            return cnf


# -- witness relations ------------------------------------------------------


def witness_masks(relation) -> list[int]:
    m = relation.m
    return [
        mask
        for mask in range(1 << m)
        if relation.holds(tuple((mask >> j) & 1 for j in range(m)))
    ]


def mask_weight(mask: int, weights) -> int:
    return sum(w for j, w in enumerate(weights) if (mask >> j) & 1)


def argmin_witnesses(relation, weights) -> list[int]:
    masks = witness_masks(relation)
    if not masks:
        return []
    best = min(mask_weight(mask, weights) for mask in masks)
    return [mask for mask in masks if mask_weight(mask, weights) == best]


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240809)
