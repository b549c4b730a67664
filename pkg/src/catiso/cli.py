"""Experiment command line: one subcommand per engine.

All randomness flows from a single 64-bit seed (flag or CATISO_SEED) via
the derivations in ``seeding``; identical flags and seed give
byte-identical output, so volatile fields like wall time never appear in
CLI reports.  Exit status 0 means success with the tape restored, 2 a
configuration or precondition problem, 3 an internal corruption check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import circuits as circuits_mod
from . import coc as coc_mod
from . import dag as dag_mod
from . import oracles as oracles_mod
from . import s2d as s2d_mod
from .bitops import bits_to_int, int_to_bits
from .errors import ConfigurationError, CorruptionError, PreconditionError
from .hashing import family_params, shifted_collision_audit
from .seeding import derive_seed, derived_rng
from .tape import new_tape


def _env_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CATISO_SEED")
    if env is not None:
        return int(env)
    return 0


def _out_path(path: str | None) -> str | None:
    if path is None:
        return None
    outdir = os.environ.get("CATISO_OUTDIR")
    if outdir and not os.path.isabs(path):
        return os.path.join(outdir, path)
    return path


def _emit(text: str, out: str | None) -> None:
    path = _out_path(out)
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_json(obj: dict, out: str | None) -> None:
    _emit(json.dumps(obj, sort_keys=True), out)


# -- hash-audit ---------------------------------------------------------


def _cmd_hash_audit(args: argparse.Namespace) -> int:
    params = family_params(args.m, args.r)
    rows = ["u,v,delta,probability"]
    if args.exhaustive:
        triples = (
            (u, v, delta)
            for u in range(params.m)
            for v in range(params.m)
            if u != v
            for delta in range(-params.r, params.r + 1)
        )
    else:
        rng = derived_rng(_env_seed(args), "hash-audit")
        if params.m < 2:
            raise ConfigurationError("sampling needs a domain of at least 2")

        def _sample():
            for _ in range(args.samples):
                u = rng.randrange(params.m)
                v = rng.randrange(params.m - 1)
                if v >= u:
                    v += 1
                yield u, v, rng.randint(-params.r, params.r)

        triples = _sample()
    worst = Fraction(0)
    for u, v, delta in triples:
        prob = shifted_collision_audit(params, u, v, delta)
        worst = max(worst, prob)
        rows.append(f"{u},{v},{delta},{prob}")
    _emit("\n".join(rows), args.out)
    bound = Fraction(2, params.r)
    if worst > bound:
        print(f"warning: worst probability {worst} exceeds 2/r = {bound}", file=sys.stderr)
    return 0


# -- coc / circuit-coc ---------------------------------------------------


def _build_tape(config: coc_mod.CocConfig, args: argparse.Namespace, seed: int):
    if config.t == 0:
        return None
    if args.fill == "zeros":
        return new_tape(config.tape_bits, config.block_bits, "zeros")
    if args.fill == "file":
        if not args.tape_file:
            raise ConfigurationError("--fill file requires --tape-file")
        with open(args.tape_file) as fh:
            hexstr = fh.read().strip()
        try:
            value = int(hexstr, 16) if hexstr else 0
        except ValueError as exc:
            raise ConfigurationError(f"tape file is not hex: {exc}") from exc
        if value >> config.tape_bits:
            raise ConfigurationError(
                f"tape file holds more than {config.tape_bits} bits"
            )
        bits = int_to_bits(value, config.tape_bits)
        return new_tape(config.tape_bits, config.block_bits, "explicit", bits=bits)
    return new_tape(
        config.tape_bits,
        config.block_bits,
        "random",
        seed=derive_seed(seed, "tape-fill"),
    )


def _engine_json(report: coc_mod.EngineReport) -> dict:
    return {
        "path": report.path,
        "good_hashes": report.good_seeds,
        "compressed_blocks": report.compressed_blocks,
        "freed_bits": report.freed_bits,
        "verdict": report.verdict,
        "tape_restored": report.tape_restored,
        "oracle_queries": report.oracle_queries,
    }


def _cmd_coc(args: argparse.Namespace) -> int:
    g = dag_mod.load_graph(args.graph)
    seed = _env_seed(args)
    config = coc_mod.config_for_graph(
        g, alpha=args.alpha, r=args.r_override, c=args.c, max_enum=args.max_enum
    )
    tape = _build_tape(config, args, seed)
    verdict, report = coc_mod.compress_or_compute(g, tape, config, args.s, args.t)
    obj = _engine_json(report)
    obj["s"] = args.s
    obj["t"] = args.t
    obj["seed"] = seed
    _emit_json(obj, args.out)
    return 0 if report.tape_restored else 3


def _cmd_circuit_coc(args: argparse.Namespace) -> int:
    circuit = circuits_mod.load_circuit(args.circuit)
    z = [int(ch) for ch in args.input]
    if any(b not in (0, 1) for b in z):
        raise ConfigurationError("--input must be a 0/1 string")
    seed = _env_seed(args)
    config = circuits_mod.config_for_circuit(
        circuit, alpha=args.alpha, r=args.r_override, c_const=args.c,
        max_enum=args.max_enum,
    )
    tape = _build_tape(config, args, seed)
    verdict, report = circuits_mod.circuit_compress_or_compute(circuit, z, tape, config)
    obj = _engine_json(report)
    obj["seed"] = seed
    _emit_json(obj, args.out)
    return 0 if report.tape_restored else 3


# -- s2d ------------------------------------------------------------------


def _relation_from_args(args: argparse.Namespace):
    kind = args.relation
    if kind == "k-subset":
        if args.m is None or args.k is None:
            raise ConfigurationError("k-subset needs --m and --k")
        return oracles_mod.KSubsetRelation(args.m, args.k)
    if args.instance is None:
        raise ConfigurationError(f"relation {kind} needs --instance FILE")
    with open(args.instance) as fh:
        text = fh.read()
    if kind == "sat":
        return oracles_mod.SatRelation(oracles_mod.parse_dimacs(text))
    if kind == "pm":
        return oracles_mod.PerfectMatchingRelation(oracles_mod.graph_from_json(text))
    if kind == "exact-pm":
        if args.k is None:
            raise ConfigurationError("exact-pm needs --k")
        return oracles_mod.ExactMatchingRelation(oracles_mod.graph_from_json(text), args.k)
    if kind == "arborescence":
        dg, root = oracles_mod.digraph_from_json(text)
        if args.root is not None:
            root = args.root
        if root is None:
            raise ConfigurationError("arborescence needs a root (--root or JSON)")
        return oracles_mod.ArborescenceRelation(dg, root)
    raise ConfigurationError(f"unknown relation {kind}")


def _cmd_s2d(args: argparse.Namespace) -> int:
    relation = _relation_from_args(args)
    m = relation.m
    n_weights = args.n_weights or s2d_mod.default_n_weights(m)
    seed = args.tape_seed if args.tape_seed is not None else _env_seed(args)
    tape = s2d_mod.random_weight_tape(m, n_weights, seed)
    if args.oracle == "matrix-tree":
        if args.relation != "arborescence":
            raise ConfigurationError("--oracle matrix-tree only fits arborescence")
        oracle = oracles_mod.arborescence_counting_oracle(
            relation.digraph, relation.root
        )
    else:
        oracle = oracles_mod.brute_force_oracle(relation)
    w_input = None
    if args.weights:
        w_input = [int(x) for x in args.weights.split(",")]
    result = s2d_mod.search_to_decision(relation, oracle, tape, w_input=w_input)
    obj = {
        "witness": "".join(map(str, result.witness)) if result.witness else None,
        "wmin": result.wmin,
        "isolating_index": (
            result.isolating_index if result.isolating_index is not None
            else ("fallback" if result.path == "fallback" else None)
        ),
        "path": result.path,
        "freed_bits": result.freed_bits,
        "queries_total": result.oracle_queries,
        "tape_restored": result.tape_restored,
        "seed": seed,
        "n_weights": n_weights,
    }
    _emit_json(obj, args.out)
    return 0 if result.tape_restored else 3


def _cmd_fsat(args: argparse.Namespace) -> int:
    with open(args.cnf) as fh:
        cnf = oracles_mod.parse_dimacs(fh.read())
    n_weights = args.n_weights or s2d_mod.default_n_weights(cnf.n_vars)
    seed = args.tape_seed if args.tape_seed is not None else _env_seed(args)
    tape = s2d_mod.random_weight_tape(cnf.n_vars, n_weights, seed)
    result = s2d_mod.fsat(cnf, tape, detail_log=args.query_log is not None)
    obj = {
        "satisfiable": result.satisfiable,
        "assignment": (
            "".join(map(str, result.assignment)) if result.assignment else None
        ),
        "path": result.path,
        "isolating_index": result.isolating_index,
        "freed_bits": result.freed_bits,
        "tape_restored": result.tape_restored,
        "rounds": [
            {
                "round": idx + 1,
                "queries": rl.count,
                "query_digest": rl.query_digest,
                "answer_digest": rl.answer_digest,
            }
            for idx, rl in enumerate(result.log.rounds)
        ],
        "seed": seed,
        "n_weights": n_weights,
    }
    _emit_json(obj, args.out)
    if args.query_log:
        entries = [
            {"round": idx + 1, "query": list(q), "answer": a}
            for idx, rl in enumerate(result.log.rounds)
            for q, a in (rl.entries or [])
        ]
        with open(_out_path(args.query_log), "w") as fh:
            json.dump(entries, fh)
    return 0 if result.tape_restored else 3


# -- oracle-check ----------------------------------------------------------


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    with open(args.graph) as fh:
        dg, root = oracles_mod.digraph_from_json(fh.read())
    if args.root is not None:
        root = args.root
    if root is None:
        raise ConfigurationError("oracle-check needs a root (--root or JSON)")
    rng = derived_rng(_env_seed(args), "oracle-check")
    relation = oracles_mod.ArborescenceRelation(dg, root)
    brute = oracles_mod.brute_force_oracle(relation)
    mismatches = 0
    method_splits = 0
    m = len(dg.arcs)
    for _ in range(args.trials):
        weights = tuple(rng.randint(0, args.max_weight) for _ in range(m))
        by_interp = oracles_mod.matrix_tree_count(dg, weights, root, "interpolate")
        by_bareiss = oracles_mod.matrix_tree_count(dg, weights, root, "bareiss")
        if by_interp.coefficients != by_bareiss.coefficients:
            method_splits += 1
        counted_min = by_interp.min_weight()
        brute_min = brute.min_weight(weights)
        if counted_min != brute_min:
            mismatches += 1
        else:
            for w0 in range(0, m * args.max_weight + 1, max(1, args.max_weight)):
                counting = counted_min is not None and counted_min <= w0
                if counting != brute.query(weights, w0):
                    mismatches += 1
                    break
    _emit_json(
        {
            "trials": args.trials,
            "oracle_mismatches": mismatches,
            "determinant_method_splits": method_splits,
            "ok": mismatches == 0 and method_splits == 0,
        },
        args.out,
    )
    return 0 if mismatches == 0 and method_splits == 0 else 3


# -- parser ----------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.0, help="tradeoff in [0, 0.5]")
    p.add_argument("--r-override", type=int, default=None, dest="r_override",
                   help="hash range r (default n^6)")
    p.add_argument("--c", type=int, default=None, help="hash-encoding constant")
    p.add_argument("--fill", choices=["random", "zeros", "file"], default="random")
    p.add_argument("--tape-file", default=None, help="hex file for --fill file")
    p.add_argument("--max-enum", type=int, default=coc_mod.DEFAULT_MAX_ENUM,
                   help="cap on bad-seed enumeration size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catiso",
        description="catalytic isolation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hash-audit", help="shifted-collision audit of the hash family")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--exhaustive", action="store_true")
    group.add_argument("--samples", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_hash_audit)

    p = sub.add_parser("coc", help="compress-or-compute reachability")
    p.add_argument("--graph", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    _add_engine_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_coc)

    p = sub.add_parser("circuit-coc", help="compress-or-compute proof-tree existence")
    p.add_argument("--circuit", required=True)
    p.add_argument("--input", required=True, help="0/1 assignment string")
    _add_engine_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_circuit_coc)

    p = sub.add_parser("s2d", help="search-to-weighted-decision reduction")
    p.add_argument("--relation", required=True,
                   choices=["sat", "pm", "exact-pm", "arborescence", "k-subset"])
    p.add_argument("--instance", default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--root", type=int, default=None)
    p.add_argument("--weights", default=None,
                   help="comma-separated input weights (weighted search)")
    p.add_argument("--tape-seed", type=int, default=None)
    p.add_argument("--n-weights", type=int, default=None)
    p.add_argument("--oracle", choices=["brute", "matrix-tree"], default="brute")
    _add_common(p)
    p.set_defaults(func=_cmd_s2d)

    p = sub.add_parser("fsat", help="satisfying-assignment search, two query rounds")
    p.add_argument("--cnf", required=True, help="DIMACS file")
    p.add_argument("--tape-seed", type=int, default=None)
    p.add_argument("--n-weights", type=int, default=None)
    p.add_argument("--query-log", default=None, help="write the full query log here")
    _add_common(p)
    p.set_defaults(func=_cmd_fsat)

    p = sub.add_parser("oracle-check", help="matrix-tree vs brute-force agreement")
    p.add_argument("--graph", required=True, help="digraph JSON")
    p.add_argument("--root", type=int, default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--max-weight", type=int, default=6)
    _add_common(p)
    p.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CorruptionError as exc:
        print(f"corruption: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
