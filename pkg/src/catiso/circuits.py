"""Layered semi-unbounded circuits and proof-tree isolation.

Layer 0 holds literals and constants, odd layers hold fan-in-2 AND gates,
even layers hold unbounded fan-in OR gates, and wires only join
consecutive layers.  A proof tree picks both children of every AND gate
and exactly one child of every OR gate; its weight is the gate weight
plus the weights of its child subtrees, counted with multiplicity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .coc import (
    CocConfig,
    DEFAULT_MAX_ENUM,
    EngineReport,
    build_config,
    decode_block_seed,
    run_engine,
)
from .dag import WeightAssignment
from .errors import ConfigurationError, PreconditionError
from .hashing import HashFamilyParams, HashSeed, eval_hash
from .tape import CatalyticTape


class ProofTreeStats(NamedTuple):
    min_weight: int | None  # None encodes "no proof tree"
    count: int  # saturates at 2


@dataclass(frozen=True)
class Gate:
    kind: str  # "lit", "and", "or"
    children: tuple[int, ...] = ()
    literal: int | bool | None = None  # DIMACS-style +/-var, or a constant


class LayeredCircuit:
    def __init__(
        self,
        layers: Sequence[Sequence[tuple[int, Gate]]],
        output: int,
        n_vars: int,
    ):
        if not layers:
            raise ConfigurationError("circuit needs at least one layer")
        d = len(layers) - 1
        if d % 2 != 0:
            raise ConfigurationError(f"circuit depth must be even, got {d}")
        total = sum(len(layer) for layer in layers)
        self.gates: list[Gate] = [Gate("lit")] * total
        self.layers: list[list[int]] = []
        self.layer_of = [0] * total
        seen: set[int] = set()
        for li, layer in enumerate(layers):
            if not layer:
                raise ConfigurationError("empty layers are not allowed")
            ids = []
            for gid, gate in layer:
                if not 0 <= gid < total or gid in seen:
                    raise ConfigurationError(f"bad or duplicate gate id {gid}")
                seen.add(gid)
                self._validate_gate(li, gid, gate)
                self.gates[gid] = gate
                self.layer_of[gid] = li
                ids.append(gid)
            self.layers.append(ids)
        for gid, gate in enumerate(self.gates):
            for ch in gate.children:
                if not 0 <= ch < total or self.layer_of[ch] != self.layer_of[gid] - 1:
                    raise ConfigurationError(
                        f"gate {gid} wires to {ch} outside the previous layer"
                    )
        if not 0 <= output < total:
            raise ConfigurationError(f"output gate {output} does not exist")
        if n_vars < 0:
            raise ConfigurationError("n_vars must be nonnegative")
        for gate in self.gates:
            if gate.kind == "lit" and not isinstance(gate.literal, bool):
                if not 1 <= abs(gate.literal) <= n_vars:
                    raise ConfigurationError(f"literal {gate.literal} out of range")
        self.output = output
        self.n_vars = n_vars

    @staticmethod
    def _validate_gate(layer: int, gid: int, gate: Gate) -> None:
        if layer == 0:
            if gate.kind != "lit" or gate.literal is None:
                raise ConfigurationError(f"layer-0 gate {gid} must be a literal/constant")
            if not isinstance(gate.literal, bool) and gate.literal == 0:
                raise ConfigurationError(f"gate {gid}: literal 0 is invalid")
        elif layer % 2 == 1:
            if gate.kind != "and" or len(gate.children) != 2:
                raise ConfigurationError(f"odd-layer gate {gid} must be AND with fan-in 2")
        else:
            if gate.kind != "or" or len(gate.children) < 1:
                raise ConfigurationError(f"even-layer gate {gid} must be OR with fan-in >= 1")

    @property
    def d(self) -> int:
        return len(self.layers) - 1

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    @property
    def and_levels(self) -> int:
        return self.d // 2

    def and_layer(self, i: int) -> list[int]:
        """Gate ids of L_i, the i-th AND layer (layer index 2i-1)."""
        if not 1 <= i <= self.and_levels:
            raise PreconditionError(f"AND level {i} out of range 1..{self.and_levels}")
        return self.layers[2 * i - 1]


def eval_circuit(c: LayeredCircuit, z: Sequence[int]) -> list[bool]:
    """Standard boolean evaluation; returns one value per gate."""
    if len(z) != c.n_vars:
        raise PreconditionError(f"input needs {c.n_vars} bits, got {len(z)}")
    val = [False] * c.n_gates
    for gid in (g for layer in c.layers for g in layer):
        gate = c.gates[gid]
        if gate.kind == "lit":
            val[gid] = _literal_value(gate, z)
        elif gate.kind == "and":
            val[gid] = all(val[ch] for ch in gate.children)
        else:
            val[gid] = any(val[ch] for ch in gate.children)
    return val


def _literal_value(gate: Gate, z: Sequence[int]) -> bool:
    lit = gate.literal
    if isinstance(lit, bool):
        return lit
    assert isinstance(lit, int)
    bit = bool(z[abs(lit) - 1])
    return bit if lit > 0 else not bit


def _stats_all(
    c: LayeredCircuit, z: Sequence[int], w: WeightAssignment
) -> tuple[list[int | None], list[int]]:
    if len(z) != c.n_vars:
        raise PreconditionError(f"input needs {c.n_vars} bits, got {len(z)}")
    minw: list[int | None] = [None] * c.n_gates
    cnt = [0] * c.n_gates
    for gid in c.layers[0]:
        if _literal_value(c.gates[gid], z):
            minw[gid] = w.of(gid)
            cnt[gid] = 1
    for layer in c.layers[1:]:
        for gid in layer:
            gate = c.gates[gid]
            if gate.kind == "and":
                a, b = gate.children
                if minw[a] is not None and minw[b] is not None:
                    minw[gid] = w.of(gid) + minw[a] + minw[b]
                    cnt[gid] = min(2, cnt[a] * cnt[b])
            else:
                best: int | None = None
                ways = 0
                for ch in gate.children:
                    mc = minw[ch]
                    if mc is None:
                        continue
                    if best is None or mc < best:
                        best = mc
                        ways = cnt[ch]
                    elif mc == best:
                        ways = min(2, ways + cnt[ch])
                if best is not None:
                    minw[gid] = w.of(gid) + best
                    cnt[gid] = ways
    return minw, cnt


def proof_tree_stats(
    c: LayeredCircuit, z: Sequence[int], w: WeightAssignment, g: int
) -> ProofTreeStats:
    """Min proof-tree weight at gate g and the count of minima, capped at 2."""
    minw, cnt = _stats_all(c, z, w)
    return ProofTreeStats(minw[g], cnt[g])


def circuit_weight_check(
    c: LayeredCircuit,
    z: Sequence[int],
    w: WeightAssignment,
    max_layer: int | None = None,
) -> bool:
    """True iff every gate up to max_layer has at most one minimum proof tree."""
    if max_layer is None:
        max_layer = c.d
    _, cnt = _stats_all(c, z, w)
    return all(
        cnt[gid] <= 1 for layer in c.layers[: max_layer + 1] for gid in layer
    )


def circuit_weight_eval(
    c: LayeredCircuit, z: Sequence[int], w: WeightAssignment, g: int
) -> int | None:
    if not circuit_weight_check(c, z, w):
        raise PreconditionError("circuit_weight_eval called with a non-isolating assignment")
    minw, _ = _stats_all(c, z, w)
    return minw[g]


def construct_circuit_weights(
    c: LayeredCircuit,
    params: HashFamilyParams,
    seeds: Sequence[HashSeed],
    delta: int,
    gamma: int,
    i_target: int,
) -> WeightAssignment:
    """Cumulative hash-and-shift weights on the first i_target AND layers."""
    if delta < 1:
        raise PreconditionError("delta must be >= 1")
    if not 0 <= i_target <= c.and_levels:
        raise PreconditionError(f"i_target {i_target} out of range 0..{c.and_levels}")
    need = -(-i_target // delta)
    if len(seeds) < need:
        raise PreconditionError(f"need {need} hashes for i_target={i_target}, got {len(seeds)}")
    w: dict[int, int] = {}
    for ip in range(1, i_target + 1):
        i1, i0 = divmod(ip - 1, delta)
        scale = gamma**i0
        seed = seeds[i1]
        for gid in c.and_layer(ip):
            w[gid] = w.get(gid, 0) + eval_hash(params, seed, gid) * scale
    return WeightAssignment(w)


def config_for_circuit(
    c: LayeredCircuit,
    alpha: float = 0.0,
    r: int | None = None,
    c_const: int | None = None,
    max_enum: int = DEFAULT_MAX_ENUM,
) -> CocConfig:
    return build_config(
        c.n_gates, c.d, c.and_levels, alpha=alpha, r=r, c=c_const, max_enum=max_enum
    )


def circuit_compress_or_compute(
    c: LayeredCircuit,
    z: Sequence[int],
    tape: CatalyticTape | None,
    config: CocConfig,
) -> tuple[bool, EngineReport]:
    """Decide proof-tree existence at the output gate; tape is restored."""

    def good(raws: tuple[int, ...]) -> bool:
        i_tgt = min(len(raws) * config.delta, config.levels)
        seeds = [decode_block_seed(config, raw) for raw in raws]
        w = construct_circuit_weights(c, config.params, seeds, config.delta,
                                      config.gamma, i_tgt)
        return circuit_weight_check(c, z, w, max_layer=2 * i_tgt)

    def solve(raws: tuple[int, ...]) -> bool:
        seeds = [decode_block_seed(config, raw) for raw in raws]
        w = construct_circuit_weights(c, config.params, seeds, config.delta,
                                      config.gamma, config.levels)
        return circuit_weight_eval(c, z, w, c.output) is not None

    report = run_engine(tape, config, good, solve)
    return report.verdict, report


# -- file format -------------------------------------------------------


def circuit_from_json(text: str) -> LayeredCircuit:
    try:
        obj = json.loads(text)
        layers = []
        for layer in obj["layers"]:
            entries = []
            for item in layer:
                gate = Gate(
                    kind=item["kind"],
                    children=tuple(item.get("children", ())),
                    literal=item.get("literal"),
                )
                entries.append((item["gate"], gate))
            layers.append(entries)
        n_vars = obj.get("n_vars")
        if n_vars is None:
            n_vars = max(
                (abs(g.literal) for layer in layers for _, g in layer
                 if isinstance(g.literal, int) and not isinstance(g.literal, bool)),
                default=0,
            )
        return LayeredCircuit(layers, obj["output"], n_vars)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed circuit JSON: {exc}") from exc


def circuit_to_json(c: LayeredCircuit) -> str:
    layers = []
    for ids in c.layers:
        layer = []
        for gid in ids:
            gate = c.gates[gid]
            item: dict = {"gate": gid, "kind": gate.kind}
            if gate.kind == "lit":
                item["literal"] = gate.literal
            else:
                item["children"] = list(gate.children)
            layer.append(item)
        layers.append(layer)
    return json.dumps(
        {"n_vars": c.n_vars, "layers": layers, "output": c.output}, sort_keys=True
    )


def load_circuit(path: str) -> LayeredCircuit:
    with open(path) as fh:
        return circuit_from_json(fh.read())
