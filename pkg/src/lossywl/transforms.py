"""Architecture lifts: the message passing graph each architecture runs on.

Original input nodes always keep their ids ``0..n-1``; lifted nodes are
appended after them. Self-messages are implicit (never stored as edges).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .cycles import cycle_counts, enumerate_cycles
from .errors import InvalidParameters
from .graph import Cycle, Graph, InfluenceModel

# reserved first feature entry of lifted nodes; input features are free-form ints
VIRTUAL_LABEL = -1
FRAGMENT_LABEL = -2
EDGE_CELL_LABEL = -3
RING_CELL_LABEL = -4
READOUT_LABEL = -5


class Variant(str, enum.Enum):
    MLP = "mlp"
    STANDARD = "standard"
    VIRTUAL_NODE = "virtual_node"
    GSN = "gsn"
    FRAGNET = "fragnet"
    CIN = "cin"


class Role(str, enum.Enum):
    ORIGINAL = "original"
    VIRTUAL = "virtual"
    EDGE_CELL = "edge_cell"
    RING_CELL = "ring_cell"
    FRAGMENT = "fragment"
    READOUT = "readout"


CYCLE_AWARE = (Variant.GSN, Variant.FRAGNET, Variant.CIN)

_ALIASES = {
    "mlp": Variant.MLP,
    "standard": Variant.STANDARD,
    "gcn": Variant.STANDARD,
    "gin": Variant.STANDARD,
    "sage": Variant.STANDARD,
    "graphsage": Variant.STANDARD,
    "vn": Variant.VIRTUAL_NODE,
    "gcn-vn": Variant.VIRTUAL_NODE,
    "virtual_node": Variant.VIRTUAL_NODE,
    "virtualnode": Variant.VIRTUAL_NODE,
    "gsn": Variant.GSN,
    "fragnet": Variant.FRAGNET,
    "cin": Variant.CIN,
}


@dataclass(frozen=True)
class Arch:
    variant: Variant
    max_cycle: int | None = None
    readout: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant in CYCLE_AWARE:
            if self.max_cycle is None:
                raise InvalidParameters(f"{self.variant.value} needs max_cycle")
            if self.max_cycle < 3:
                raise InvalidParameters("max_cycle must be at least 3")

    @classmethod
    def parse(cls, name: str, max_cycle: int = 6, readout: bool = False) -> Arch:
        try:
            variant = _ALIASES[name.lower()]
        except KeyError:
            raise InvalidParameters(
                f"unknown architecture {name!r}; choose from {sorted(_ALIASES)}"
            ) from None
        return cls(variant, max_cycle if variant in CYCLE_AWARE else None, readout)

    @property
    def name(self) -> str:
        s = self.variant.value
        if self.max_cycle is not None:
            s += f"({self.max_cycle})"
        return s + ("+readout" if self.readout else "")


@dataclass(frozen=True)
class MPGraph:
    """Transformed message passing graph.

    ``members[i]`` is the set of input nodes whose features node ``i``'s
    initial feature is built from; it decides which lifted nodes already
    carry an input node's information at layer 0. ``edge_layer_mask`` lists
    the layers in which a masked edge is active; unlisted edges are always on.
    """

    graph: Graph
    roles: tuple[Role, ...]
    n_input: int
    members: tuple[frozenset[int], ...]
    edge_layer_mask: dict = field(default_factory=dict)
    cycles: tuple[Cycle, ...] = ()
    cell: dict = field(default_factory=dict)  # ("fragment"|"ring"|"edge", key) -> node id
    readout_node: int | None = None

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def neighbors(self):
        return self.graph.neighbors

    @property
    def features(self):
        return self.graph.features

    @property
    def edges(self):
        return self.graph.edges

    def origin(self, i: int) -> int:
        if self.roles[i] is not Role.ORIGINAL:
            raise InvalidParameters(f"node {i} is a {self.roles[i].value} node")
        return i

    def active(self, a: int, b: int, layer: int) -> bool:
        """Whether channel ``a -> b`` transmits in ``layer``."""
        if a == b:
            return True
        if b not in self.graph.neighbors[a]:
            return False
        mask = self.edge_layer_mask.get((a, b) if a < b else (b, a))
        return mask is None or layer in mask

    @cached_property
    def max_masked_layer(self) -> int:
        return max((max(m) for m in self.edge_layer_mask.values() if m), default=0)

    def carriers(self, u: int) -> frozenset[int]:
        """Nodes whose initial feature already contains input node ``u``'s feature."""
        return frozenset(i for i, m in enumerate(self.members) if u in m)

    def to_obj(self) -> dict:
        obj = {
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "features": [list(f) for f in self.features],
            "roles": [r.value for r in self.roles],
        }
        obj["edge_layer_mask"] = [
            sorted(self.edge_layer_mask[e]) if e in self.edge_layer_mask else None
            for e in self.edges
        ]
        return obj


def save_mpgraph(mpg: MPGraph, path) -> None:
    Path(path).write_text(json.dumps(mpg.to_obj()) + "\n", encoding="utf-8")


def _originals(g: Graph):
    return [Role.ORIGINAL] * g.n, [frozenset((v,)) for v in range(g.n)]


def transform(g: Graph, arch: Arch, layers: int | None = None) -> MPGraph:
    """Build ``t(G)``. ``layers`` is required when ``arch.readout`` is set."""
    v = arch.variant
    roles, members = _originals(g)
    n = g.n
    if v is Variant.MLP:
        mpg = MPGraph(Graph(n, (), g.features), tuple(roles), n, tuple(members))
    elif v is Variant.STANDARD:
        mpg = MPGraph(g, tuple(roles), n, tuple(members))
    elif v is Variant.VIRTUAL_NODE:
        edges = list(g.edges) + [(i, n) for i in range(n)]
        feats = list(g.features) + [(VIRTUAL_LABEL,)]
        mpg = MPGraph(
            Graph.from_edges(n + 1, edges, feats),
            tuple(roles + [Role.VIRTUAL]),
            n,
            tuple(members + [frozenset()]),
            cell={("virtual",): n},
        )
    elif v is Variant.GSN:
        counts = cycle_counts(g, arch.max_cycle)
        feats = [tuple(f) + tuple(c) for f, c in zip(g.features, counts)]
        mpg = MPGraph(
            g.with_features(feats),
            tuple(roles),
            n,
            tuple(members),
            cycles=tuple(enumerate_cycles(g, arch.max_cycle)),
        )
    elif v is Variant.FRAGNET:
        mpg = _fragnet(g, arch.max_cycle, roles, members)
    elif v is Variant.CIN:
        mpg = _cin(g, arch.max_cycle, roles, members)
    else:  # pragma: no cover
        raise InvalidParameters(f"unhandled variant {v}")
    if arch.readout:
        if layers is None:
            raise InvalidParameters("a readout lift needs the layer count")
        mpg = add_readout(mpg, layers)
    return mpg


def _fragnet(g, max_cycle, roles, members):
    cycles = enumerate_cycles(g, max_cycle)
    edges = list(g.edges)
    feats = list(g.features)
    cell = {}
    for c in cycles:
        f = len(roles)
        cell[("fragment", c.nodes)] = f
        roles.append(Role.FRAGMENT)
        members.append(frozenset())  # the label only encodes the ring size
        feats.append((FRAGMENT_LABEL, len(c)))
        edges += [(x, f) for x in c.nodes]
    return MPGraph(
        Graph.from_edges(len(roles), edges, feats),
        tuple(roles),
        g.n,
        tuple(members),
        cycles=tuple(cycles),
        cell=cell,
    )


def _cin(g, max_cycle, roles, members):
    cycles = enumerate_cycles(g, max_cycle)
    edges = set(g.edges)
    feats = list(g.features)
    cell = {}
    for a, b in g.edges:
        e = len(roles)
        cell[("edge", (a, b))] = e
        roles.append(Role.EDGE_CELL)
        members.append(frozenset((a, b)))
        fa, fb = sorted([g.features[a], g.features[b]])
        feats.append((EDGE_CELL_LABEL,) + fa + fb)
        edges |= {(a, e), (b, e)}
    for c in cycles:
        rc = len(roles)
        cell[("ring", c.nodes)] = rc
        roles.append(Role.RING_CELL)
        members.append(frozenset(c.nodes))
        fs = sorted(g.features[x] for x in c.nodes)
        feats.append((RING_CELL_LABEL, len(c)) + tuple(x for f in fs for x in f))
        ecs = [cell[("edge", e)] for e in c.edges()]
        for i, x in enumerate(ecs):
            edges.add((x, rc))
            for y in ecs[i + 1 :]:
                edges.add((min(x, y), max(x, y)))
    return MPGraph(
        Graph.from_edges(len(roles), edges, feats),
        tuple(roles),
        g.n,
        tuple(members),
        cycles=tuple(cycles),
        cell=cell,
    )


def add_readout(mpg: MPGraph, L: int) -> MPGraph:
    """Attach a graph-level readout node that only listens in layer ``L + 1``."""
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    r = mpg.n
    new_edges = [(i, r) for i in range(r)]
    masks = dict(mpg.edge_layer_mask)
    for e in new_edges:
        masks[e] = frozenset((L + 1,))
    cell = dict(mpg.cell)
    cell[("readout",)] = r
    return MPGraph(
        Graph.from_edges(r + 1, list(mpg.edges) + new_edges, list(mpg.features) + [(READOUT_LABEL,)]),
        mpg.roles + (Role.READOUT,),
        mpg.n_input,
        mpg.members + (frozenset(),),
        masks,
        mpg.cycles,
        cell,
        r,
    )


def mp_influence(mpg: MPGraph) -> InfluenceModel:
    """Survivals on the lift; degrees count every incident edge, masked or not."""
    return InfluenceModel(mpg.graph.neighbors)
