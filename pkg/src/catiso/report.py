"""Run records and aggregate statistics for the experiment CLI.

One RunReport per engine run; JSON for single runs and summaries, CSV for
per-trial rows.  Field names are stable and carry a schema version; the
RNG seed rides along so any row can be replayed.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

SCHEMA_VERSION = 1

CSV_FIELDS = [
    "schema_version",
    "engine",
    "path_taken",
    "freed_bits",
    "oracle_queries",
    "round_queries",
    "tape_restored",
    "wall_time",
    "seed",
]


@dataclass
class RunReport:
    engine: str  # "coc", "circuit-coc", "s2d", "fsat"
    path_taken: str  # "isolated", "fallback", "reject"
    freed_bits: int
    oracle_queries: int
    tape_restored: bool
    wall_time: float = 0.0
    seed: int | None = None
    round_queries: tuple[int, ...] | None = None  # fsat only
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        obj = asdict(self)
        if obj["round_queries"] is not None:
            obj["round_queries"] = list(obj["round_queries"])
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        obj = json.loads(text)
        rq = obj.get("round_queries")
        obj["round_queries"] = tuple(rq) if rq is not None else None
        return cls(**obj)


def aggregate(reports: Sequence[RunReport]) -> dict:
    """Order-insensitive summary: counts, path fractions, means, min/max."""
    if not reports:
        return {"count": 0}
    count = len(reports)
    paths = sorted({r.path_taken for r in reports})
    freed = [r.freed_bits for r in reports]
    queries = [r.oracle_queries for r in reports]
    return {
        "schema_version": SCHEMA_VERSION,
        "count": count,
        "engines": sorted({r.engine for r in reports}),
        "path_fractions": {
            p: sum(1 for r in reports if r.path_taken == p) / count for p in paths
        },
        "tape_restored_fraction": sum(r.tape_restored for r in reports) / count,
        "freed_bits": {
            "mean": sum(freed) / count,
            "min": min(freed),
            "max": max(freed),
        },
        "oracle_queries": {
            "mean": sum(queries) / count,
            "min": min(queries),
            "max": max(queries),
        },
        "wall_time_mean": sum(r.wall_time for r in reports) / count,
    }


def reports_to_csv(reports: Iterable[RunReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS)
    writer.writeheader()
    for r in reports:
        row = {k: getattr(r, k) for k in CSV_FIELDS}
        row["round_queries"] = (
            " ".join(map(str, r.round_queries)) if r.round_queries else ""
        )
        writer.writerow(row)
    return buf.getvalue()
