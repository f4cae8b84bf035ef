"""Seeded random graph generators.

All generators draw from a private ``random.Random`` seeded with the given
integer, so output is bit-identical for identical ``(parameters, seed)``.
"""

from __future__ import annotations

import random

from .cycles import cycles_through
from .errors import GenerationExhausted, InvalidParameters
from .graph import Cycle, Graph

REGULAR_RETRIES = 10_000
RING_RETRIES = 2_000


def gen_random_regular(n: int, r: int, seed: int, retries: int = REGULAR_RETRIES) -> Graph:
    """Random ``r``-regular simple graph from the pairing model.

    Stubs are shuffled and paired; any pairing with a self-loop or a repeated
    pair is thrown away whole and redrawn.
    """
    if n < 0 or r < 0 or r >= max(n, 1) or (n * r) % 2:
        raise InvalidParameters(f"no {r}-regular simple graph on {n} nodes (need n*r even, 0 <= r < n)")
    rng = random.Random(seed)
    stubs = [v for v in range(n) for _ in range(r)]
    for _ in range(retries):
        rng.shuffle(stubs)
        edges = set()
        for i in range(0, len(stubs), 2):
            a, b = stubs[i], stubs[i + 1]
            if a == b:
                break
            pair = (a, b) if a < b else (b, a)
            if pair in edges:
                break
            edges.add(pair)
        else:
            return Graph.from_edges(n, edges)
    raise GenerationExhausted(f"no simple {r}-regular pairing on {n} nodes after {retries} tries")


def gen_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise InvalidParameters("p must lie in [0, 1]")
    if n < 0:
        raise InvalidParameters("n must be non-negative")
    rng = random.Random(seed)
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)


def gen_planted_ring(
    n: int, r: int, s: int, seed: int, retries: int = RING_RETRIES, unique: bool = False
) -> tuple[Graph, int, Cycle]:
    """Random ``r``-regular graph with a designated node ``v`` whose shortest
    cycle has length exactly ``s``.

    Among qualifying nodes the one on the fewest ``s``-cycles is chosen (ties
    in a seeded random order) and the first such cycle is returned. With
    ``unique=True`` the ``s``-cycle must be the only cycle of length ``<= s``
    through ``v``. Nodes get a random permutation of the labels ``1..n``.
    """
    if s < 3:
        raise InvalidParameters("ring size must be at least 3")
    if n < 0 or r < 0 or r >= max(n, 1) or (n * r) % 2:
        raise InvalidParameters(f"no {r}-regular simple graph on {n} nodes")
    rng = random.Random(seed)
    for _ in range(retries):
        g = gen_random_regular(n, r, rng.getrandbits(64))
        order = list(range(n))
        rng.shuffle(order)
        best = None
        for v in order:
            ring = cycles_through(g, v, s)
            if not ring or any(len(c) < s for c in ring):
                continue
            if best is None or len(ring) < len(best[1]):
                best = (v, ring)
        if best is not None and (not unique or len(best[1]) == 1):
            labels = list(range(1, n + 1))
            rng.shuffle(labels)
            v, ring = best
            return g.with_features([(x,) for x in labels]), v, ring[0]
    raise GenerationExhausted(
        f"no {r}-regular graph on {n} nodes with a node of local girth {s} found in {retries} tries"
    )
