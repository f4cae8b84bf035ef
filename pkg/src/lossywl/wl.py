"""Weisfeiler-Leman colour refinement, graph hashes and the binary WLC baseline.

Colours are 128-bit integers produced by BLAKE2b (16-byte digest) over a
canonical byte encoding, so they are comparable across graphs, runs and
platforms:

* layer 0: ``b"F" + len + each feature as signed 8-byte big-endian``
* layer l: ``b"C" + own colour + neighbour count + sorted neighbour colours``
  (each colour as 16 big-endian bytes)
* graph hash: ``b"G" + node count + sorted final-layer colours``
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from hashlib import blake2b

from .errors import EmptyDataset, InvalidParameters, MissingTargets
from .graph import INF, Dataset

DIGEST = 16


def _h(data: bytes) -> int:
    return int.from_bytes(blake2b(data, digest_size=DIGEST).digest(), "big")


def _c(x: int) -> bytes:
    return x.to_bytes(DIGEST, "big")


def feature_color(feature) -> int:
    buf = b"F" + len(feature).to_bytes(4, "big")
    for x in feature:
        buf += int(x).to_bytes(8, "big", signed=True)
    return _h(buf)


@dataclass(frozen=True)
class WlColoring:
    colors: tuple[tuple[int, ...], ...]  # colors[l][v]

    @property
    def layers(self) -> int:
        return len(self.colors) - 1

    def final(self) -> tuple[int, ...]:
        return self.colors[-1]

    def partition(self, layer: int) -> set[frozenset[int]]:
        classes: dict[int, set[int]] = {}
        for v, c in enumerate(self.colors[layer]):
            classes.setdefault(c, set()).add(v)
        return {frozenset(s) for s in classes.values()}


def wl_refine(g, L: int) -> WlColoring:
    """Run ``L`` rounds of colour refinement on anything with ``neighbors`` and ``features``."""
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    nbrs = g.neighbors
    cur = tuple(feature_color(f) for f in g.features)
    out = [cur]
    for _ in range(L):
        nxt = []
        for v in range(len(cur)):
            ns = sorted(cur[u] for u in nbrs[v])
            buf = b"C" + _c(cur[v]) + len(ns).to_bytes(4, "big") + b"".join(_c(x) for x in ns)
            nxt.append(_h(buf))
        cur = tuple(nxt)
        out.append(cur)
    return WlColoring(tuple(out))


def graph_hash(coloring: WlColoring) -> int:
    final = sorted(coloring.final())
    return _h(b"G" + len(final).to_bytes(4, "big") + b"".join(_c(x) for x in final))


def wl_graph_hash(g, L: int) -> int:
    return graph_hash(wl_refine(g, L))


def _serialize(g) -> str:
    return json.dumps([g.n, [list(e) for e in g.edges], [list(f) for f in g.features]])


def dedupe(ds: Dataset) -> list:
    """Drop graphs byte-identical to an earlier one (stand-in for isomorphism removal)."""
    seen, keep = set(), []
    for g in ds.graphs:
        key = _serialize(g)
        if key not in seen:
            seen.add(key)
            keep.append(g)
    return keep


def uniqueness_fraction(ds: Dataset, L: int) -> float:
    """Fraction of (deduplicated) graphs whose WL hash no other graph shares."""
    if not len(ds):
        raise EmptyDataset("uniqueness needs at least one graph")
    graphs = dedupe(ds)
    hashes = [wl_graph_hash(g, L) for g in graphs]
    counts = Counter(hashes)
    return sum(1 for h in hashes if counts[h] == 1) / len(graphs)


def wlc(ds: Dataset, L: int, arch=None) -> list[list[float]]:
    """Per graph and node: ``INF`` if some node anywhere in the family has the
    same final WL colour but a different target, else ``0``.

    With ``arch`` the colours are computed on the transformed message passing
    graph and read off its original nodes.
    """
    if ds.targets is None:
        raise MissingTargets("WLC needs per-node targets on every graph")
    if not len(ds):
        raise EmptyDataset("WLC needs at least one graph")
    finals = []
    for g in ds.graphs:
        h = g
        if arch is not None:
            from .transforms import transform

            h = transform(g, arch)
        finals.append(wl_refine(h, L).final()[: g.n])
    seen: dict[int, set] = {}
    for cols, ts in zip(finals, ds.targets):
        for c, t in zip(cols, ts):
            seen.setdefault(c, set()).add(t)
    return [[INF if len(seen[c]) > 1 else 0 for c in cols] for cols in finals]
