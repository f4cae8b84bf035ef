"""Bounded-length simple cycle enumeration."""

from __future__ import annotations

from .errors import InvalidParameters
from .graph import Cycle, Graph


def enumerate_cycles(g: Graph, max_len: int) -> list[Cycle]:
    """All simple cycles with at most ``max_len`` nodes, each once, sorted.

    Depth-bounded DFS rooted at every node ``s`` that only walks through
    nodes larger than ``s``; a closed path is kept when its second node is
    smaller than its last, which picks one of the two orientations.
    Chorded cycles are included.
    """
    if max_len < 3:
        raise InvalidParameters("max_len must be at least 3")
    nbrs = [sorted(x) for x in g.neighbors]
    found: list[tuple[int, ...]] = []
    for s in range(g.n):
        path = [s]
        on_path = {s}

        def extend(a):
            for b in nbrs[a]:
                if b == s and len(path) >= 3 and path[1] < path[-1]:
                    found.append(tuple(path))
                elif b > s and b not in on_path and len(path) < max_len:
                    path.append(b)
                    on_path.add(b)
                    extend(b)
                    path.pop()
                    on_path.discard(b)

        extend(s)
    found.sort()
    return [Cycle(c) for c in found]


def cycles_through(g: Graph, v: int, max_len: int) -> list[Cycle]:
    """Simple cycles of length at most ``max_len`` that contain ``v``."""
    if max_len < 3:
        raise InvalidParameters("max_len must be at least 3")
    nbrs = [sorted(x) for x in g.neighbors]
    found = set()
    path = [v]
    on_path = {v}

    def extend(a):
        for b in nbrs[a]:
            if b == v and len(path) >= 3:
                if path[1] < path[-1]:
                    found.add(Cycle(tuple(path)).nodes)
            elif b not in on_path and len(path) < max_len:
                path.append(b)
                on_path.add(b)
                extend(b)
                path.pop()
                on_path.discard(b)

    extend(v)
    return [Cycle(c) for c in sorted(found)]


def cycle_counts(g: Graph, max_len: int) -> list[list[int]]:
    """Per node, the number of simple cycles of length ``3..max_len`` through it."""
    counts = [[0] * (max_len - 2) for _ in range(g.n)]
    for c in enumerate_cycles(g, max_len):
        for v in c.nodes:
            counts[v][len(c) - 3] += 1
    return counts
