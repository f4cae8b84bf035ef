"""JSON graph files.

One graph per object::

    {"n": 3, "edges": [[0, 1], [1, 2]], "features": [[0], [0], [0]]}

Optional fields: ``targets`` (per-node integer arrays, used by WLC),
``roles`` and ``edge_layer_mask`` (written for exported message passing
graphs). Anything else is rejected. A dataset is a directory of such files,
a JSON array of objects, or a single object.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import InvalidParameters, ParseError
from .graph import Dataset, Graph

_ALLOWED = {"n", "edges", "features", "targets", "roles", "edge_layer_mask"}
ROLE_NAMES = ("original", "virtual", "edge_cell", "ring_cell", "fragment", "readout")


def _int_list(value, field, path):
    if not isinstance(value, list) or not all(
        isinstance(x, int) and not isinstance(x, bool) for x in value
    ):
        raise ParseError("expected an array of integers", path=path, field=field)
    return value


def graph_from_obj(obj, path=None) -> tuple[Graph, dict]:
    """Validate a decoded JSON object. Returns the graph and the optional extras."""
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", path=path)
    unknown = sorted(set(obj) - _ALLOWED)
    if unknown:
        raise ParseError("unknown field", path=path, field=unknown[0])
    for key in ("n", "edges", "features"):
        if key not in obj:
            raise ParseError("missing required field", path=path, field=key)
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ParseError("must be a non-negative integer", path=path, field="n")
    edges = obj["edges"]
    if not isinstance(edges, list):
        raise ParseError("expected an array", path=path, field="edges")
    seen = set()
    for i, e in enumerate(edges):
        f = f"edges[{i}]"
        _int_list(e, f, path)
        if len(e) != 2:
            raise ParseError("an edge has exactly two endpoints", path=path, field=f)
        a, b = e
        if a == b:
            raise ParseError(f"self-loop ({a},{b})", path=path, field=f)
        if not (0 <= a < n and 0 <= b < n):
            raise ParseError(f"endpoint outside 0..{n - 1}", path=path, field=f)
        if a > b:
            raise ParseError("edge endpoints must be ordered a < b", path=path, field=f)
        if (a, b) in seen:
            raise ParseError("duplicate edge", path=path, field=f)
        seen.add((a, b))
    feats = obj["features"]
    if not isinstance(feats, list) or len(feats) != n:
        raise ParseError(f"expected {n} feature arrays", path=path, field="features")
    for i, x in enumerate(feats):
        _int_list(x, f"features[{i}]", path)
    extras = {}
    if "targets" in obj:
        t = obj["targets"]
        if not isinstance(t, list) or len(t) != n:
            raise ParseError(f"expected {n} target arrays", path=path, field="targets")
        for i, x in enumerate(t):
            _int_list(x, f"targets[{i}]", path)
        extras["targets"] = [tuple(x) for x in t]
    if "roles" in obj:
        roles = obj["roles"]
        if not isinstance(roles, list) or len(roles) != n or any(r not in ROLE_NAMES for r in roles):
            raise ParseError(f"expected {n} roles from {ROLE_NAMES}", path=path, field="roles")
        extras["roles"] = roles
    if "edge_layer_mask" in obj:
        masks = obj["edge_layer_mask"]
        if not isinstance(masks, list) or len(masks) != len(edges):
            raise ParseError("expected one entry per edge", path=path, field="edge_layer_mask")
        for i, m in enumerate(masks):
            if m is not None:
                _int_list(m, f"edge_layer_mask[{i}]", path)
        extras["edge_layer_mask"] = masks
    try:
        g = Graph.from_edges(n, edges, [tuple(x) for x in feats])
    except InvalidParameters as exc:  # pragma: no cover - checks above are stricter
        raise ParseError(str(exc), path=path) from exc
    return g, extras


def graph_to_obj(g: Graph, targets=None) -> dict:
    obj = {"n": g.n, "edges": [list(e) for e in g.edges], "features": [list(f) for f in g.features]}
    if targets is not None:
        obj["targets"] = [list(t) for t in targets]
    return obj


def _read_json(path: Path):
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, line=exc.lineno) from exc


def load_graph(path) -> Graph:
    path = Path(path)
    g, _ = graph_from_obj(_read_json(path), path=path)
    return g


def save_graph(g: Graph, path, targets=None) -> None:
    Path(path).write_text(json.dumps(graph_to_obj(g, targets)) + "\n", encoding="utf-8")


def load_dataset(path) -> Dataset:
    """Load every graph under ``path``; targets are kept only if all graphs have them."""
    path = Path(path)
    items = []
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == ".json")
        for f in files:
            items.append(graph_from_obj(_read_json(f), path=f))
    else:
        data = _read_json(path)
        if isinstance(data, list):
            items = [graph_from_obj(o, path=f"{path}[{i}]") for i, o in enumerate(data)]
        else:
            items = [graph_from_obj(data, path=path)]
    graphs = [g for g, _ in items]
    targets = None
    if items and all("targets" in x for _, x in items):
        targets = [x["targets"] for _, x in items]
    return Dataset(tuple(graphs), targets)
