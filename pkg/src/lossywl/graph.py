"""Undirected labelled graphs, the influence model, and walk probabilities."""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import InvalidParameters, NodeOutOfRange

INF = math.inf

Edge = tuple[int, int]
Feature = tuple[int, ...]


def _normalize_edges(n: int, edges: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    seen = set()
    for e in edges:
        a, b = int(e[0]), int(e[1])
        if a == b:
            raise InvalidParameters(f"self-loop ({a},{a}) is not allowed")
        if not (0 <= a < n and 0 <= b < n):
            raise InvalidParameters(f"edge ({a},{b}) has an endpoint outside 0..{n - 1}")
        pair = (a, b) if a < b else (b, a)
        if pair in seen:
            raise InvalidParameters(f"duplicate edge {pair}")
        seen.add(pair)
    return tuple(sorted(seen))


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0..n-1`` with an integer feature vector per node.

    Use :meth:`from_edges` to build one from unsorted input; the constructor
    expects already-canonical data and validates it.
    """

    n: int
    edges: tuple[Edge, ...]
    features: tuple[Feature, ...]

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameters("node count must be non-negative")
        if len(self.features) != self.n:
            raise InvalidParameters(
                f"expected {self.n} feature vectors, got {len(self.features)}"
            )
        canonical = _normalize_edges(self.n, self.edges)
        if canonical != tuple(self.edges):
            object.__setattr__(self, "edges", canonical)
        object.__setattr__(
            self, "features", tuple(tuple(int(x) for x in f) for f in self.features)
        )

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]] = (), features=None) -> Graph:
        if features is None:
            features = [(0,)] * n
        return cls(n, _normalize_edges(n, edges), tuple(tuple(f) for f in features))

    @cached_property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def has_edge(self, a: int, b: int) -> bool:
        return ((a, b) if a < b else (b, a)) in self.edge_set

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def with_features(self, features) -> Graph:
        return Graph(self.n, self.edges, tuple(tuple(f) for f in features))

    def relabel(self, perm: Sequence[int]) -> Graph:
        """Return the copy where old node ``i`` becomes node ``perm[i]``."""
        if sorted(perm) != list(range(self.n)):
            raise InvalidParameters("perm must be a permutation of 0..n-1")
        feats: list[Feature] = [()] * self.n
        for old, new in enumerate(perm):
            feats[new] = self.features[old]
        return Graph.from_edges(self.n, [(perm[a], perm[b]) for a, b in self.edges], feats)

    def induced(self, nodes: Iterable[int]) -> tuple[Graph, list[int]]:
        """Induced subgraph, plus the list mapping new ids back to old ids."""
        keep = sorted(set(nodes))
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[a], index[b]) for a, b in self.edges if a in index and b in index]
        return Graph.from_edges(len(keep), edges, [self.features[v] for v in keep]), keep

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.int64)
        for a, b in self.edges:
            A[a, b] = A[b, a] = 1
        return A


def _check_node(g, v):
    if not (0 <= v < g.n):
        raise NodeOutOfRange(f"node {v} not in 0..{g.n - 1}")


@dataclass(frozen=True)
class Cycle:
    """Simple cycle in canonical orientation (smallest id first, smaller neighbour second)."""

    nodes: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) < 3 or len(set(self.nodes)) != len(self.nodes):
            raise InvalidParameters("a cycle needs at least 3 distinct nodes")
        object.__setattr__(self, "nodes", canonical_cycle(self.nodes))

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __contains__(self, v):
        return v in self.nodes

    def edges(self) -> list[Edge]:
        k = len(self.nodes)
        out = []
        for i in range(k):
            a, b = self.nodes[i], self.nodes[(i + 1) % k]
            out.append((a, b) if a < b else (b, a))
        return out

    def arc_distance(self, a: int, b: int) -> int:
        i, j = self.nodes.index(a), self.nodes.index(b)
        d = abs(i - j)
        return min(d, len(self.nodes) - d)

    def arc(self, a: int, b: int) -> list[int]:
        """Nodes on a shortest arc from ``a`` to ``b`` (inclusive); ties go forward."""
        k = len(self.nodes)
        i, j = self.nodes.index(a), self.nodes.index(b)
        fwd = (j - i) % k
        step = 1 if fwd <= k - fwd else -1
        out = [a]
        while out[-1] != b:
            i = (i + step) % k
            out.append(self.nodes[i])
        return out

    def is_in(self, g: Graph) -> bool:
        return all(g.has_edge(a, b) for a, b in self.edges())


def canonical_cycle(nodes: Sequence[int]) -> tuple[int, ...]:
    nodes = list(nodes)
    k = len(nodes)
    i = nodes.index(min(nodes))
    rot = nodes[i:] + nodes[:i]
    if rot[-1] < rot[1]:
        rot = [rot[0]] + rot[:0:-1]
    assert len(rot) == k
    return tuple(rot)


def shortest_path(g: Graph, u: int, v: int) -> float | int:
    """Hop distance between ``u`` and ``v``; ``INF`` when they are disconnected."""
    _check_node(g, u)
    _check_node(g, v)
    if u == v:
        return 0
    dist = bfs_distances(g, u)
    return dist.get(v, INF)


def bfs_distances(g, source: int, max_depth: int | None = None) -> dict[int, int]:
    """Distances from ``source`` to every reachable node (optionally depth-limited).

    Works on anything exposing ``neighbors`` (``Graph`` and ``MPGraph``).
    """
    dist = {source: 0}
    queue = deque([source])
    while queue:
        a = queue.popleft()
        if max_depth is not None and dist[a] >= max_depth:
            continue
        for b in g.neighbors[a]:
            if b not in dist:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


@dataclass(frozen=True)
class InfluenceModel(Mapping):
    """Survival probability of every directed message channel ``(sender, receiver)``.

    A message into ``b`` survives with ``1/(deg(b)+1)``: the receiver's row of
    the self-loop-augmented adjacency, row-normalised. Channels are ``a -> b``
    for ``a`` in ``N(b)`` plus the self channel ``b -> b``. Exact values are
    :class:`~fractions.Fraction`.
    """

    neighbors: tuple[frozenset[int], ...]
    _probs: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        probs = {}
        for b, nbrs in enumerate(self.neighbors):
            p = Fraction(1, len(nbrs) + 1)
            probs[(b, b)] = p
            for a in nbrs:
                probs[(a, b)] = p
        object.__setattr__(self, "_probs", probs)

    @property
    def n(self) -> int:
        return len(self.neighbors)

    def __getitem__(self, channel) -> Fraction:
        return self._probs[channel]

    def __iter__(self) -> Iterator:
        return iter(self._probs)

    def __len__(self):
        return len(self._probs)

    def survival(self, a: int, b: int) -> Fraction:
        return self._probs[(a, b)]

    def receivers(self, a: int) -> list[int]:
        """Every ``b`` that ``a`` can send to, self first."""
        return [a] + sorted(self.neighbors[a])

    def matrix(self, exact: bool = False) -> np.ndarray:
        """Row = receiver, column = sender; rows sum to one."""
        if exact:
            M = np.full((self.n, self.n), Fraction(0), dtype=object)
        else:
            M = np.zeros((self.n, self.n))
        for (a, b), p in self._probs.items():
            M[b, a] = p if exact else float(p)
        return M


def influence_matrix(g: Graph) -> InfluenceModel:
    return InfluenceModel(g.neighbors)


def walk_probability(g: Graph, L: int, exact: bool = False) -> np.ndarray:
    """``L``-th power of the influence matrix; entry ``[v, u]`` is the L-step walk
    probability between receiver ``v`` and sender ``u``."""
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    M = influence_matrix(g).matrix(exact=exact)
    if exact:
        out = np.full((g.n, g.n), Fraction(0), dtype=object)
        for i in range(g.n):
            out[i, i] = Fraction(1)
        for _ in range(L):
            out = out.dot(M)
        return out
    return np.linalg.matrix_power(M, L) if g.n else np.zeros((0, 0))


@dataclass(frozen=True)
class Dataset:
    """Ordered graphs with optional per-node integer targets (one list per graph)."""

    graphs: tuple[Graph, ...]
    targets: tuple[tuple[Feature, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if self.targets is not None:
            t = tuple(tuple(tuple(int(x) for x in _as_vec(y)) for y in ts) for ts in self.targets)
            if len(t) != len(self.graphs):
                raise InvalidParameters("need one target list per graph")
            for g, ts in zip(self.graphs, t):
                if len(ts) != g.n:
                    raise InvalidParameters("need one target per node")
            object.__setattr__(self, "targets", t)

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)


def _as_vec(y):
    return (y,) if isinstance(y, int) else y


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def disjoint_union(*graphs: Graph) -> Graph:
    edges, feats, off = [], [], 0
    for g in graphs:
        edges += [(a + off, b + off) for a, b in g.edges]
        feats += list(g.features)
        off += g.n
    return Graph.from_edges(off, edges, feats)
