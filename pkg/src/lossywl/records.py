"""Result records and their CSV / JSON serialisation.

Infinite values are written as the string ``"inf"`` in both formats; missing
values are empty strings in CSV and ``null`` in JSON. Floats are written with
``repr`` so that a file parses back to equal records.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from hashlib import blake2b

from .errors import ParseError

FIELDS = (
    "run_id", "graph_hash", "arch", "task", "L", "D_or_s", "trials", "seed", "p_hat",
    "mpc_nats", "ci_lo", "ci_hi", "bound_lower", "bound_upper", "provenance", "wall_ms",
)
BOUND_ONLY = "bound_only"


@dataclass(frozen=True)
class ResultRecord:
    run_id: str
    graph_hash: str
    arch: str
    task: str
    L: int
    D_or_s: int | None
    trials: int | None
    seed: int | None
    p_hat: float | None
    mpc_nats: float | None
    ci_lo: float | None
    ci_hi: float | None
    bound_lower: float | None
    bound_upper: float | None
    provenance: str
    wall_ms: float

    @property
    def bound_only(self) -> bool:
        return self.provenance.split(";")[0] == BOUND_ONLY

    def outputs(self) -> tuple:
        """Everything except the wall clock; reruns must reproduce it exactly."""
        return tuple(getattr(self, f) for f in FIELDS if f != "wall_ms")


_INT = {"L", "D_or_s", "trials", "seed"}
_FLOAT = {"p_hat", "mpc_nats", "ci_lo", "ci_hi", "bound_lower", "bound_upper", "wall_ms"}
assert tuple(f.name for f in fields(ResultRecord)) == FIELDS


def content_hash(g) -> str:
    """Identity of a graph: BLAKE2b-128 over its canonical JSON encoding."""
    data = json.dumps([g.n, [list(e) for e in g.edges], [list(f) for f in g.features]])
    return blake2b(data.encode(), digest_size=16).hexdigest()


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return "inf" if math.isinf(x) else repr(x)
    return str(x)


def _json_value(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def _parse(name, raw):
    if raw is None or raw == "":
        return None
    if name in _INT:
        return int(raw)
    if name in _FLOAT:
        return math.inf if raw == "inf" else float(raw)
    return str(raw)


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow([_cell(getattr(r, f)) for f in FIELDS])
    return buf.getvalue()


def to_json(records, meta: dict | None = None) -> str:
    rows = []
    for r in records:
        d = {k: _json_value(v) for k, v in asdict(r).items()}
        d["bound_only"] = r.bound_only
        rows.append(d)
    return json.dumps({"meta": meta or {}, "records": rows}, indent=1) + "\n"


def _record(d: dict) -> ResultRecord:
    missing = [f for f in FIELDS if f not in d]
    if missing:
        raise ParseError("missing record field", field=missing[0])
    return ResultRecord(**{f: _parse(f, d[f]) for f in FIELDS})


def read_csv(text: str) -> list[ResultRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [_record(r) for r in rows]


def read_json(text: str) -> list[ResultRecord]:
    data = json.loads(text)
    return [_record(r) for r in data["records"]]
