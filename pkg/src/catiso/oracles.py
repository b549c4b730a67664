"""Weighted decision oracles over explicit witness relations.

A relation exposes a witness length ``m`` and a predicate over bit
vectors; the brute-force oracle answers "is there a witness of weight at
most w0" by exhaustive enumeration.  For rooted arborescences a second,
independent route answers the same queries from the directed matrix-tree
determinant with polynomial edge labels y^w.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .errors import ConfigurationError, PreconditionError

MAX_WITNESS_BITS = 22

Bitvec = tuple[int, ...]


# -- CNF formulas ------------------------------------------------------


@dataclass(frozen=True)
class Cnf:
    n_vars: int
    clauses: tuple[tuple[int, ...], ...]  # DIMACS literals, no zeros

    def satisfied(self, assignment: Sequence[int]) -> bool:
        if len(assignment) != self.n_vars:
            raise PreconditionError(
                f"assignment needs {self.n_vars} bits, got {len(assignment)}"
            )
        for clause in self.clauses:
            for lit in clause:
                value = assignment[abs(lit) - 1]
                if (lit > 0) == bool(value):
                    break
            else:
                return False
        return True


def parse_dimacs(text: str) -> Cnf:
    n_vars = None
    tokens: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise ConfigurationError(f"bad DIMACS header {line!r}")
            n_vars = int(parts[2])
            continue
        try:
            tokens.extend(int(tok) for tok in line.split())
        except ValueError as exc:
            raise ConfigurationError(f"bad DIMACS line {line!r}") from exc
    if n_vars is None:
        raise ConfigurationError("missing DIMACS problem line")
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for tok in tokens:
        if tok == 0:
            clauses.append(tuple(current))
            current = []
        else:
            if abs(tok) > n_vars:
                raise ConfigurationError(f"literal {tok} exceeds declared variables")
            current.append(tok)
    if current:
        clauses.append(tuple(current))
    return Cnf(n_vars, tuple(clauses))


def to_dimacs(cnf: Cnf) -> str:
    lines = [f"p cnf {cnf.n_vars} {len(cnf.clauses)}"]
    lines.extend(" ".join(map(str, clause)) + " 0" for clause in cnf.clauses)
    return "\n".join(lines) + "\n"


def satisfying_masks(cnf: Cnf) -> list[int]:
    """All satisfying assignments as bitmasks (bit j = variable j+1)."""
    if cnf.n_vars > MAX_WITNESS_BITS:
        raise ConfigurationError(f"refusing to enumerate 2^{cnf.n_vars} assignments")
    out = []
    for mask in range(1 << cnf.n_vars):
        bits = tuple((mask >> j) & 1 for j in range(cnf.n_vars))
        if cnf.satisfied(bits):
            out.append(mask)
    return out


# -- graphs ------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; ``colors`` labels edges red/blue."""

    n: int
    edges: tuple[tuple[int, int], ...]
    colors: tuple[str, ...] | None = None

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ConfigurationError(f"bad edge ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ConfigurationError(f"duplicate edge ({u}, {v})")
            seen.add(key)
        if self.colors is not None:
            if len(self.colors) != len(self.edges):
                raise ConfigurationError("colors must label every edge")
            if any(c not in ("red", "blue") for c in self.colors):
                raise ConfigurationError("edge colors must be 'red' or 'blue'")


@dataclass(frozen=True)
class Digraph:
    n: int
    arcs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.arcs:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ConfigurationError(f"bad arc ({u}, {v})")
            if (u, v) in seen:
                raise ConfigurationError(f"duplicate arc ({u}, {v})")
            seen.add((u, v))


def graph_from_json(text: str) -> Graph:
    try:
        obj = json.loads(text)
        colors = tuple(obj["colors"]) if "colors" in obj else None
        return Graph(obj["n"], tuple(tuple(e) for e in obj["edges"]), colors)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed graph JSON: {exc}") from exc


def digraph_from_json(text: str) -> tuple[Digraph, int | None]:
    try:
        obj = json.loads(text)
        dg = Digraph(obj["n"], tuple(tuple(e) for e in obj["edges"]))
        return dg, obj.get("root")
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed digraph JSON: {exc}") from exc


# -- witness relations -------------------------------------------------


class Relation:
    """Witness predicate over {0,1}^m.  Subclasses define ``holds``."""

    m: int

    def holds(self, y: Sequence[int]) -> bool:
        raise NotImplementedError


class KSubsetRelation(Relation):
    def __init__(self, m: int, k: int):
        if not 0 <= k <= m:
            raise ConfigurationError(f"need 0 <= k <= m, got k={k}, m={m}")
        self.m = m
        self.k = k

    def holds(self, y: Sequence[int]) -> bool:
        return sum(y) == self.k


class SatRelation(Relation):
    def __init__(self, cnf: Cnf):
        self.cnf = cnf
        self.m = cnf.n_vars

    def holds(self, y: Sequence[int]) -> bool:
        return self.cnf.satisfied(y)


class PerfectMatchingRelation(Relation):
    def __init__(self, graph: Graph):
        self.graph = graph
        self.m = len(graph.edges)

    def holds(self, y: Sequence[int]) -> bool:
        degree = [0] * self.graph.n
        for idx, bit in enumerate(y):
            if bit:
                u, v = self.graph.edges[idx]
                degree[u] += 1
                degree[v] += 1
        return all(dg == 1 for dg in degree)


class ExactMatchingRelation(PerfectMatchingRelation):
    """Perfect matchings containing exactly k red edges."""

    def __init__(self, graph: Graph, k: int):
        if graph.colors is None:
            raise ConfigurationError("exact matching needs edge colors")
        super().__init__(graph)
        self.k = k

    def holds(self, y: Sequence[int]) -> bool:
        if not super().holds(y):
            return False
        reds = sum(
            1 for idx, bit in enumerate(y) if bit and self.graph.colors[idx] == "red"
        )
        return reds == self.k


class ArborescenceRelation(Relation):
    """Spanning arborescences rooted at r: r has indegree 0, every other
    vertex indegree 1, and all vertices are reachable from r."""

    def __init__(self, digraph: Digraph, root: int):
        if not 0 <= root < digraph.n:
            raise ConfigurationError(f"root {root} out of range")
        self.digraph = digraph
        self.root = root
        self.m = len(digraph.arcs)

    def holds(self, y: Sequence[int]) -> bool:
        n = self.digraph.n
        indeg = [0] * n
        adj: list[list[int]] = [[] for _ in range(n)]
        for idx, bit in enumerate(y):
            if bit:
                u, v = self.digraph.arcs[idx]
                indeg[v] += 1
                adj[u].append(v)
        if indeg[self.root] != 0:
            return False
        if any(indeg[v] != 1 for v in range(n) if v != self.root):
            return False
        seen = {self.root}
        stack = [self.root]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == n


# -- brute-force oracle ------------------------------------------------


def _mask_weight(mask: int, weights: Sequence[int]) -> int:
    total = 0
    for j, wj in enumerate(weights):
        if (mask >> j) & 1:
            total += wj
    return total


class BruteForceOracle:
    """Weighted decision by exhaustive enumeration of the witness space.

    Minima are memoized per weight vector, which keeps the oracle pure
    and monotone in w0 while making repeated binary-search queries cheap.
    ``queries`` counts every query() call.
    """

    def __init__(self, relation: Relation):
        if relation.m > MAX_WITNESS_BITS:
            raise ConfigurationError(
                f"witness space 2^{relation.m} exceeds the brute-force cap "
                f"2^{MAX_WITNESS_BITS}"
            )
        self.relation = relation
        self.queries = 0
        self._witnesses: list[int] | None = None
        self._min_cache: dict[tuple[int, ...], int | None] = {}

    def witnesses(self) -> list[int]:
        if self._witnesses is None:
            m = self.relation.m
            self._witnesses = [
                mask
                for mask in range(1 << m)
                if self.relation.holds(tuple((mask >> j) & 1 for j in range(m)))
            ]
        return self._witnesses

    def min_weight(self, weights: Sequence[int]) -> int | None:
        key = tuple(weights)
        if key not in self._min_cache:
            masks = self.witnesses()
            self._min_cache[key] = (
                min(_mask_weight(mask, key) for mask in masks) if masks else None
            )
        return self._min_cache[key]

    def query(self, weights: Sequence[int], w0: int) -> bool:
        self.queries += 1
        mn = self.min_weight(weights)
        return mn is not None and mn <= w0


def brute_force_oracle(relation: Relation) -> BruteForceOracle:
    return BruteForceOracle(relation)


# -- exact polynomial arithmetic ---------------------------------------
# Dense polynomials over the integers as coefficient lists, index=degree.

Poly = list[int]


def _pnorm(p: Poly) -> Poly:
    while p and p[-1] == 0:
        p.pop()
    return p


def _padd(a: Poly, b: Poly) -> Poly:
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return _pnorm(out)


def _psub(a: Poly, b: Poly) -> Poly:
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] -= c
    return _pnorm(out)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return _pnorm(out)


def _pdiv_exact(a: Poly, b: Poly) -> Poly:
    """Exact division a / b in Z[y]; raises if the division is not exact."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = a[:]
    out = [0] * max(len(a) - len(b) + 1, 0) if a else []
    while rem and len(rem) >= len(b):
        q, r = divmod(rem[-1], b[-1])
        if r:
            raise ArithmeticError("inexact polynomial division")
        shift = len(rem) - len(b)
        out[shift] = q
        for i, cb in enumerate(b):
            rem[shift + i] -= q * cb
        _pnorm(rem)
    if rem:
        raise ArithmeticError("inexact polynomial division")
    return _pnorm(out)


def _peval(p: Poly, x: int) -> int:
    out = 0
    for c in reversed(p):
        out = out * x + c
    return out


def det_bareiss_int(matrix: list[list[int]]) -> int:
    """Fraction-free determinant over the integers."""
    a = [row[:] for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det_bareiss_poly(matrix: list[list[Poly]]) -> Poly:
    """Fraction-free determinant over Z[y]; all divisions are exact."""
    a = [[cell[:] for cell in row] for row in matrix]
    n = len(a)
    if n == 0:
        return [1]
    sign = 1
    prev: Poly = [1]
    for k in range(n - 1):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return []
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = _psub(_pmul(a[i][j], a[k][k]), _pmul(a[i][k], a[k][j]))
                a[i][j] = _pdiv_exact(num, prev)
            a[i][k] = []
        prev = a[k][k]
    result = a[n - 1][n - 1]
    return result if sign == 1 else [-c for c in result]


def interpolate_integer_poly(values: Sequence[int]) -> Poly:
    """Reconstruct an integer polynomial from values at 1..len(values).

    Builds the finite-difference (Newton forward) form with a common
    factorial denominator so all intermediate arithmetic stays in Z; the
    final per-coefficient division is exact for integer polynomials.
    """
    n = len(values)
    if n == 0:
        return []
    fact_n = 1
    for k in range(1, n):
        fact_n *= k
    scaled: Poly = []
    basis: Poly = [1]  # prod_{j<k} (y - (1+j))
    diffs = list(values)
    k_fact = 1
    for k in range(n):
        if k:
            diffs = [diffs[i + 1] - diffs[i] for i in range(len(diffs) - 1)]
            k_fact *= k
        coeff = diffs[0] * (fact_n // k_fact)
        scaled = _padd(scaled, [coeff * b for b in basis])
        basis = _pmul(basis, [-(1 + k), 1])
    out = []
    for c in scaled:
        q, r = divmod(c, fact_n)
        if r:
            raise ArithmeticError("interpolation did not produce integer coefficients")
        out.append(q)
    return _pnorm(out)


# -- directed matrix-tree counting -------------------------------------


@dataclass
class WeightPolynomial:
    """coefficients[w] = number of witnesses of total weight exactly w."""

    coefficients: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_poly(cls, p: Poly) -> "WeightPolynomial":
        return cls({deg: c for deg, c in enumerate(p) if c})

    def min_weight(self) -> int | None:
        positive = [w for w, c in self.coefficients.items() if c > 0]
        return min(positive) if positive else None

    def total(self) -> int:
        return sum(self.coefficients.values())


def _laplacian_poly(dg: Digraph, weights: Sequence[int], root: int) -> list[list[Poly]]:
    n = dg.n
    mat: list[list[Poly]] = [[[] for _ in range(n)] for _ in range(n)]
    for (u, v), w in zip(dg.arcs, weights):
        mono = [0] * w + [1]
        mat[v][v] = _padd(mat[v][v], mono)  # in-degree term
        mat[u][v] = _psub(mat[u][v], mono)
    keep = [v for v in range(n) if v != root]
    return [[mat[i][j] for j in keep] for i in keep]


def matrix_tree_count(
    dg: Digraph,
    weights: Sequence[int],
    root: int,
    method: str = "interpolate",
) -> WeightPolynomial:
    """Per-weight counts of spanning arborescences rooted at ``root``.

    Each arc contributes the monomial y^w to the in-degree Laplacian; the
    root-deleted determinant's coefficient of y^w counts arborescences of
    total weight w.  ``method`` picks integer evaluation/interpolation or
    the fraction-free symbolic determinant.
    """
    if len(weights) != len(dg.arcs):
        raise PreconditionError("need one weight per arc")
    if any(w < 0 for w in weights):
        raise PreconditionError("arc weights must be nonnegative")
    if not 0 <= root < dg.n:
        raise PreconditionError(f"root {root} out of range")
    mat = _laplacian_poly(dg, weights, root)
    if method == "bareiss":
        det = det_bareiss_poly(mat)
    elif method == "interpolate":
        max_in: dict[int, int] = {}
        for (u, v), w in zip(dg.arcs, weights):
            max_in[v] = max(max_in.get(v, 0), w)
        degree_bound = sum(w for v, w in max_in.items() if v != root)
        points = range(1, degree_bound + 2)
        values = [
            det_bareiss_int([[_peval(cell, x) for cell in row] for row in mat])
            for x in points
        ]
        det = interpolate_integer_poly(values)
    else:
        raise ConfigurationError(f"unknown determinant method {method!r}")
    return WeightPolynomial.from_poly(det)


class CountingDecisionOracle:
    """Adapter turning a per-weight counter into a weighted decision oracle."""

    def __init__(self, counter: Callable[[tuple[int, ...]], WeightPolynomial]):
        self._counter = counter
        self.queries = 0
        self._cache: dict[tuple[int, ...], WeightPolynomial] = {}

    def _poly(self, weights: tuple[int, ...]) -> WeightPolynomial:
        if weights not in self._cache:
            self._cache[weights] = self._counter(weights)
        return self._cache[weights]

    def min_weight(self, weights: Sequence[int]) -> int | None:
        return self._poly(tuple(weights)).min_weight()

    def query(self, weights: Sequence[int], w0: int) -> bool:
        self.queries += 1
        mn = self.min_weight(weights)
        return mn is not None and mn <= w0


def counting_oracle_to_decision(
    counter: Callable[[tuple[int, ...]], WeightPolynomial],
) -> CountingDecisionOracle:
    return CountingDecisionOracle(counter)


def arborescence_counting_oracle(dg: Digraph, root: int,
                                 method: str = "interpolate") -> CountingDecisionOracle:
    return counting_oracle_to_decision(
        lambda weights: matrix_tree_count(dg, weights, root, method=method)
    )
