"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import random
import warnings
from fractions import Fraction

import pytest

warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB version")

from lossywl import Graph, gen_erdos_renyi  # noqa: E402
from lossywl.graph import cycle_graph, disjoint_union, path_graph  # noqa: E402
from lossywl.sim import flatten, propagate  # noqa: E402


def reachable_coins(mpg, infl, atoms, L) -> list[tuple[int, int, int]]:
    """Every channel out of a node plain BFS can reach by the layer before."""
    start = set().union(*(s for s, _, _ in atoms))
    reach = [set(start)]
    for layer in range(1, L + 1):
        nxt = set()
        for a in reach[-1]:
            nxt.add(a)
            nxt |= {b for b in mpg.neighbors[a] if mpg.active(a, b, layer)}
        reach.append(nxt)
    return [
        (a, b, layer)
        for layer in range(1, L + 1)
        for a in sorted(reach[layer - 1])
        for b in infl.receivers(a)
        if mpg.active(a, b, layer)
    ]


def brute_force_prob(mpg, infl, sources, pred, L) -> Fraction:
    """Sum over every outcome of the coins senders could ever use.

    Independent of the library's visibility analysis and frontier recursion.
    Feasible up to roughly 18 coins.
    """
    atoms = flatten(pred, sources)
    coins = reachable_coins(mpg, infl, atoms, L)
    assert len(coins) <= 18, f"{len(coins)} coins is too many for brute force"
    total = Fraction(0)
    for outcome in itertools.product((False, True), repeat=len(coins)):
        table = dict(zip(coins, outcome))
        w = Fraction(1)
        for (a, b, _), ok in table.items():
            p = infl[(a, b)]
            w *= p if ok else 1 - p
        if not w:
            continue

        def coin(a, b, layer, table=table):
            return table[(a, b, layer)]

        good = True
        for s, t, mode in atoms:
            final = propagate(mpg, infl, s, L, coin).final
            hit = t <= final if mode == "all" else bool(t & final)
            if not hit:
                good = False
                break
        if good:
            total += w
    return total


def random_small_graph(rng: random.Random, n_min=2, n_max=5, p_lo=0.3, p_hi=0.8) -> Graph:
    n = rng.randint(n_min, n_max)
    return gen_erdos_renyi(n, rng.uniform(p_lo, p_hi), rng.getrandbits(32))


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture
def path2():
    return path_graph(2)


@pytest.fixture
def c6_and_2c3():
    return cycle_graph(6), disjoint_union(cycle_graph(3), cycle_graph(3))
