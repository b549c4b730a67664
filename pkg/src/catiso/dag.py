"""Layered DAGs, block systems, and isolating weight assignments.

A layered DAG has d+1 layers and edges only between consecutive layers,
so every path is layer-monotone and any path between two vertices of a
contiguous layer range stays inside that range.  The block system pairs
adjacent layer ranges recursively; weights are extended level by level
with hash-and-shift so that each block's minimum-weight paths become
unique.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .bitops import bit_length_ceil
from .errors import ConfigurationError, PreconditionError
from .hashing import HashFamilyParams, HashSeed, eval_hash


class PathStats(NamedTuple):
    min_weight: int | None  # None encodes "unreachable"
    count: int  # saturates at 2


@dataclass
class WeightAssignment:
    """Nonnegative integer weights on vertex/gate/element indices.

    Indices absent from the mapping carry weight 0.
    """

    w: dict[int, int] = field(default_factory=dict)

    def of(self, v: int) -> int:
        return self.w.get(v, 0)

    @property
    def max_bits(self) -> int:
        return max((x.bit_length() for x in self.w.values()), default=0)


class LayeredDag:
    def __init__(self, n: int, layers: Sequence[Sequence[int]], edges: Sequence[tuple[int, int]]):
        if n <= 0 or not layers:
            raise ConfigurationError("graph needs at least one vertex and one layer")
        seen: set[int] = set()
        for layer in layers:
            if not layer:
                raise ConfigurationError("empty layers are not allowed")
            for v in layer:
                if not 0 <= v < n or v in seen:
                    raise ConfigurationError(f"bad or duplicate vertex id {v}")
                seen.add(v)
        if len(seen) != n:
            raise ConfigurationError("layers must partition the vertex set 0..n-1")
        self.n = n
        self.layers = [list(layer) for layer in layers]
        self.layer_of = [0] * n
        for li, layer in enumerate(self.layers):
            for v in layer:
                self.layer_of[v] = li
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.radj: list[list[int]] = [[] for _ in range(n)]
        edge_set: set[tuple[int, int]] = set()
        for u, v in edges:
            if self.layer_of[v] != self.layer_of[u] + 1:
                raise ConfigurationError(f"edge ({u}, {v}) does not join adjacent layers")
            if (u, v) in edge_set:
                raise ConfigurationError(f"duplicate edge ({u}, {v})")
            edge_set.add((u, v))
            self.adj[u].append(v)
            self.radj[v].append(u)
        self.edges = sorted(edge_set)

    @property
    def d(self) -> int:
        return len(self.layers) - 1

    @property
    def ell(self) -> int:
        d = self.d
        if d < 1 or d & (d - 1):
            raise PreconditionError(
                f"block system needs a power-of-two layer depth, got d={d}; pad first"
            )
        return d.bit_length() - 1

    def padded(self) -> "LayeredDag":
        """Pad d up to the next power of two with pass-through layers."""
        d = self.d
        if d >= 1 and d & (d - 1) == 0:
            return self
        target = 1 if d == 0 else 1 << bit_length_ceil(d)
        layers = [list(layer) for layer in self.layers]
        edges = list(self.edges)
        n = self.n
        prev = layers[-1]
        for _ in range(target - d):
            fresh = list(range(n, n + len(prev)))
            edges.extend(zip(prev, fresh))
            layers.append(fresh)
            n += len(prev)
            prev = fresh
        return LayeredDag(n, layers, edges)


# -- block system ------------------------------------------------------


def block_layer_range(g: LayeredDag, i: int, j: int) -> tuple[int, int]:
    """Closed layer range [(j-1)*2^i, j*2^i] of block j at level i."""
    ell = g.ell
    if not 0 <= i <= ell or not 1 <= j <= 1 << (ell - i):
        raise PreconditionError(f"block ({i}, {j}) out of range for ell={ell}")
    return (j - 1) << i, j << i


def block_vertices(g: LayeredDag, i: int, j: int) -> list[int]:
    lo, hi = block_layer_range(g, i, j)
    out: list[int] = []
    for li in range(lo, hi + 1):
        out.extend(g.layers[li])
    return out


def middle_layer(g: LayeredDag, i: int, j: int) -> int:
    if i < 1:
        raise PreconditionError("level-0 blocks have no middle layer")
    block_layer_range(g, i, j)
    return (2 * j - 1) << (i - 1)


def level_layers(g: LayeredDag, i: int) -> list[int]:
    """Layer indices of L_i, the layers that receive weights at level i."""
    ell = g.ell
    if not 1 <= i <= ell:
        raise PreconditionError(f"level {i} out of range 1..{ell}")
    step = 1 << (i - 1)
    return [j * step for j in range(1, (1 << (ell - i + 1)) + 1, 2)]


def level_vertices(g: LayeredDag, i: int) -> list[int]:
    out: list[int] = []
    for li in level_layers(g, i):
        out.extend(g.layers[li])
    return out


def gamma_for(n: int, d: int, r: int) -> int:
    """Shift base 2^ceil(log2(2*n*(d+1)*r))."""
    return 1 << bit_length_ceil(2 * n * (d + 1) * r)


def construct_weights(
    g: LayeredDag,
    params: HashFamilyParams,
    seeds: Sequence[HashSeed],
    delta: int,
    gamma: int,
    i_target: int,
) -> WeightAssignment:
    """Hash-and-shift weights for levels 1..i_target.

    Level i' reuses seed floor((i'-1)/delta) scaled by gamma^((i'-1) mod
    delta); everything else stays 0, so block-boundary vertices of every
    level >= i_target keep weight 0.
    """
    if delta < 1:
        raise PreconditionError("delta must be >= 1")
    if not 0 <= i_target <= g.ell:
        raise PreconditionError(f"i_target {i_target} out of range 0..{g.ell}")
    need = -(-i_target // delta)
    if len(seeds) < need:
        raise PreconditionError(f"need {need} hashes for i_target={i_target}, got {len(seeds)}")
    w: dict[int, int] = {}
    for ip in range(1, i_target + 1):
        i1, i0 = divmod(ip - 1, delta)
        scale = gamma**i0
        seed = seeds[i1]
        for v in level_vertices(g, ip):
            w[v] = eval_hash(params, seed, v) * scale
    return WeightAssignment(w)


# -- path statistics ---------------------------------------------------


def _forward_stats(
    g: LayeredDag, wd: dict[int, int], s: int, hi_layer: int
) -> tuple[dict[int, int], dict[int, int]]:
    """Min path weight and saturating count from s to every vertex in
    layers layer(s)..hi_layer.  Path weight sums vertex weights with both
    endpoints included."""
    dist = {s: wd.get(s, 0)}
    cnt = {s: 1}
    for li in range(g.layer_of[s], hi_layer):
        for u in g.layers[li]:
            du = dist.get(u)
            if du is None:
                continue
            cu = cnt[u]
            for v in g.adj[u]:
                nd = du + wd.get(v, 0)
                dv = dist.get(v)
                if dv is None or nd < dv:
                    dist[v] = nd
                    cnt[v] = cu
                elif nd == dv:
                    cnt[v] = min(2, cnt[v] + cu)
    return dist, cnt


def min_path_stats(g: LayeredDag, w: WeightAssignment, s: int, t: int) -> PathStats:
    """Exact min s-t path weight and count of minimum paths, capped at 2."""
    ls, lt = g.layer_of[s], g.layer_of[t]
    if ls > lt:
        return PathStats(None, 0)
    if s == t:
        return PathStats(w.of(s), 1)
    dist, cnt = _forward_stats(g, w.w, s, lt)
    return PathStats(dist.get(t), cnt.get(t, 0))


def weight_check(g: LayeredDag, w: WeightAssignment, level: int) -> bool:
    """True iff within every block of B^level all min-weight path counts are <= 1."""
    ell = g.ell
    if not 0 <= level <= ell:
        raise PreconditionError(f"level {level} out of range 0..{ell}")
    wd = w.w
    size = 1 << level
    for j in range(1 << (ell - level)):
        lo, hi = j * size, (j + 1) * size
        for li in range(lo, hi):
            for s in g.layers[li]:
                if not g.adj[s]:
                    continue
                _, cnt = _forward_stats(g, wd, s, hi)
                if any(c > 1 for c in cnt.values()):
                    return False
    return True


def weight_eval(g: LayeredDag, w: WeightAssignment, s: int, t: int) -> int | None:
    """Min s-t path weight under a min-isolating assignment (None if unreachable)."""
    if not weight_check(g, w, g.ell):
        raise PreconditionError("weight_eval called with a non-isolating assignment")
    return min_path_stats(g, w, s, t).min_weight


def disambiguation_holds(
    g: LayeredDag,
    w_i: WeightAssignment,
    w_next: WeightAssignment,
    i: int,
    j: int,
) -> bool:
    """Check the disambiguation inequality on block j of level i+1.

    For every s, t in the block and distinct middle-layer vertices u, v
    lying on some s-t path, the sums mu(s,u) + mu(u,t) + w_next(u) must
    be pairwise distinct.
    """
    lo, hi = block_layer_range(g, i + 1, j)
    mid = middle_layer(g, i + 1, j)
    middle = g.layers[mid]
    if len(middle) < 2:
        return True
    wd = w_i.w
    fwd: dict[int, dict[int, int]] = {}
    for li in range(lo, mid):
        for s in g.layers[li]:
            dist, _ = _forward_stats(g, wd, s, mid)
            fwd[s] = {u: dist[u] for u in middle if u in dist}
    bwd: dict[int, dict[int, int]] = {}
    for li in range(mid + 1, hi + 1):
        for t in g.layers[li]:
            dist = _backward_stats(g, wd, t, mid)
            bwd[t] = {u: dist[u] for u in middle if u in dist}
    for s, to_mid in fwd.items():
        if not to_mid:
            continue
        for t, from_mid in bwd.items():
            keys = [
                to_mid[u] + from_mid[u] + w_next.of(u)
                for u in middle
                if u in to_mid and u in from_mid
            ]
            if len(keys) != len(set(keys)):
                return False
    return True


def _backward_stats(g: LayeredDag, wd: dict[int, int], t: int, lo_layer: int) -> dict[int, int]:
    dist = {t: wd.get(t, 0)}
    for li in range(g.layer_of[t], lo_layer, -1):
        for v in g.layers[li]:
            dv = dist.get(v)
            if dv is None:
                continue
            for u in g.radj[v]:
                nd = dv + wd.get(u, 0)
                du = dist.get(u)
                if du is None or nd < du:
                    dist[u] = nd
    return dist


# -- file formats ------------------------------------------------------


def graph_from_json(text: str) -> LayeredDag:
    try:
        obj = json.loads(text)
        return LayeredDag(obj["n"], obj["layers"], [tuple(e) for e in obj["edges"]])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed graph JSON: {exc}") from exc


def graph_to_json(g: LayeredDag) -> str:
    return json.dumps(
        {"n": g.n, "layers": g.layers, "edges": [list(e) for e in g.edges]},
        sort_keys=True,
    )


def graph_from_text(text: str) -> LayeredDag:
    """Line format: ``L <layer> <v...>`` declares a layer, ``E <u> <v>`` an edge."""
    layer_map: dict[int, list[int]] = {}
    edges: list[tuple[int, int]] = []
    try:
        for line in text.splitlines():
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "L":
                layer_map[int(parts[1])] = [int(x) for x in parts[2:]]
            elif parts[0] == "E":
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise ConfigurationError(f"unknown graph line {line!r}")
    except (ValueError, IndexError) as exc:
        raise ConfigurationError(f"malformed graph text: {exc}") from exc
    if sorted(layer_map) != list(range(len(layer_map))):
        raise ConfigurationError("layer indices must be contiguous from 0")
    layers = [layer_map[i] for i in range(len(layer_map))]
    n = sum(len(layer) for layer in layers)
    return LayeredDag(n, layers, edges)


def load_graph(path: str) -> LayeredDag:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return graph_from_json(text)
    return graph_from_text(text)
