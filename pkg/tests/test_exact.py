import math
import random
from fractions import Fraction

import pytest

from conftest import brute_force_prob, random_small_graph, reachable_coins
from lossywl import (
    Arch,
    EnumerationTooLarge,
    Joint,
    Propagate,
    Retain,
    exact_mpc,
    exact_probability,
    exact_success_prob,
    mp_influence,
    rw_lower_bound,
    shortest_path,
    transform,
)
from lossywl.analysis import task_predicate
from lossywl.exact import nats
from lossywl.graph import cycle_graph, disjoint_union, path_graph
from lossywl.sim import Conjunction, TargetReached, flatten

ARCHS = ["mlp", "gcn", "vn", "gsn", "fragnet", "cin"]


def random_task(rng, n):
    u, v = rng.randrange(n), rng.randrange(n)
    kind = rng.choice(["retain", "propagate", "joint"])
    return {"retain": Retain(v), "propagate": Propagate(u, v), "joint": Joint((Propagate(u, v), Retain(v)))}[kind]


def oracle_instances(count, seed, min_coins=4, max_coins=14):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        g = random_small_graph(rng, 2, 5)
        arch = Arch.parse(rng.choice(ARCHS), max_cycle=4, readout=rng.random() < 0.2)
        L = rng.randint(1, 3)
        task = random_task(rng, g.n)
        m = transform(g, arch, L)
        pred, layers = task_predicate(m, task, L)
        infl = mp_influence(m)
        if min_coins <= len(reachable_coins(m, infl, flatten(pred, None), layers)) <= max_coins:
            out.append((g, arch, task, L, m, infl, pred, layers))
    return out


@pytest.mark.parametrize("inst", oracle_instances(80, 0), ids=lambda i: f"{i[1].name}-{i[2].label}-L{i[3]}")
def test_exact_matches_brute_force(inst):
    g, arch, task, L, m, infl, pred, layers = inst
    assert exact_probability(g, arch, task, L, cap=64) == brute_force_prob(m, infl, None, pred, layers)


@pytest.mark.parametrize(
    "g,task,L,p",
    [
        (path_graph(2), Propagate(0, 1), 1, Fraction(1, 2)),
        (path_graph(3), Propagate(0, 2), 2, Fraction(1, 6)),
        (path_graph(2), Retain(0), 1, Fraction(1, 2)),
        (path_graph(2), Retain(0), 2, Fraction(7, 16)),
        (path_graph(3), Joint((Propagate(0, 1), Propagate(2, 1))), 1, Fraction(1, 9)),
        (path_graph(1), Retain(0), 5, Fraction(1)),
    ],
)
def test_hand_computed_values(g, task, L, p):
    assert exact_probability(g, Arch.parse("gcn"), task, L) == p


def test_readout_value():
    assert exact_probability(path_graph(2), Arch.parse("gcn", readout=True), Propagate(0, 1), 1) == Fraction(17, 81)


def test_path3_mpc_is_ln6():
    assert exact_mpc(path_graph(3), Arch.parse("gcn"), Propagate(0, 2), 2) == pytest.approx(math.log(6), abs=1e-12)


def test_any_and_all_modes():
    g = path_graph(3)
    m = transform(g, Arch.parse("gcn"))
    infl = mp_influence(m)
    p_all = exact_success_prob(m, infl, {1}, TargetReached({0, 2}), 1)
    p_any = exact_success_prob(m, infl, {1}, TargetReached({0, 2}, mode="any"), 1)
    assert p_all == Fraction(1, 4) and p_any == Fraction(3, 4)
    both = exact_success_prob(m, infl, None, Conjunction((TargetReached({0}, sources={1}), TargetReached({2}, sources={1}))), 1)
    assert both == p_all


@pytest.mark.parametrize("seed", range(20))
def test_under_reaching_iff_distance_exceeds_L(seed):
    rng = random.Random(seed)
    g = random_small_graph(rng, 3, 6, 0.2, 0.5)
    u, v, L = rng.randrange(g.n), rng.randrange(g.n), rng.randint(1, 3)
    p = exact_probability(g, Arch.parse("gcn"), Propagate(u, v), L, cap=64)
    assert (p == 0) == (shortest_path(g, u, v) > L)


def test_disconnected_is_infinite():
    g = disjoint_union(cycle_graph(3), cycle_graph(3))
    assert exact_mpc(g, Arch.parse("gcn"), Propagate(0, 4), 3) == math.inf


@pytest.mark.parametrize("seed", range(30))
def test_random_walk_bound_is_sound(seed):
    rng = random.Random(100 + seed)
    g = random_small_graph(rng, 2, 5)
    u, v, L = rng.randrange(g.n), rng.randrange(g.n), rng.randint(1, 3)
    mpc = exact_mpc(g, Arch.parse("gcn"), Propagate(u, v), L, cap=64)
    assert rw_lower_bound(g, L, u, v).admits(mpc, 1e-9)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_random_walk_bound_tight_on_paths(n):
    g = path_graph(n)
    mpc = exact_mpc(g, Arch.parse("gcn"), Propagate(0, n - 1), n - 1, cap=64)
    assert rw_lower_bound(g, n - 1, 0, n - 1).value_nats == pytest.approx(mpc, abs=1e-9)


def test_cap_enforced():
    with pytest.raises(EnumerationTooLarge):
        exact_probability(cycle_graph(6), Arch.parse("gcn"), Retain(0), 3, cap=5)


@pytest.mark.parametrize("p,expected", [(Fraction(1, 6), math.log(6)), (0, math.inf), (1, 0.0)])
def test_nats(p, expected):
    assert nats(p) == pytest.approx(expected)


def test_state_limit_enforced():
    g = cycle_graph(5)
    with pytest.raises(EnumerationTooLarge) as exc:
        exact_success_prob(g, mp_influence(transform(g, Arch.parse("gcn"))), {0}, TargetReached({2}), 3,
                           cap=64, max_states=2)
    assert exc.value.states == 2
