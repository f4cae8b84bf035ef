"""Exact success probabilities of the lossy process for small instances.

Only visible coins matter: a channel ``a -> b`` at layer ``l`` can influence
the outcome only if ``a`` can be active at layer ``l - 1`` and some target is
reachable from ``b`` in the remaining layers. The probability is computed by
a frontier recursion over the time-expanded graph: layer by layer, one
receiver at a time, tracking which senders and receivers are active for each
predicate atom (atoms share one coin realisation). Senders are forgotten as
soon as no later receiver listens to them, which merges states.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import EnumerationTooLarge, InvalidParameters
from .graph import INF
from .sim import as_mpgraph, flatten, relevance

DEFAULT_CAP = 24
MAX_STATES = 1 << 18


def _forward(mpg, sources, L):
    """``out[l]``: nodes some realisation can make active at layer ``l``."""
    out = [frozenset(sources)]
    for layer in range(1, L + 1):
        nxt = set()
        for a in out[-1]:
            nxt.add(a)
            for b in mpg.neighbors[a]:
                if mpg.active(a, b, layer):
                    nxt.add(b)
        out.append(frozenset(nxt))
    return out


def visible_channels(mpg, infl, sources, pred, L) -> set[tuple[int, int, int]]:
    """Channels ``(a, b, l)`` whose coin can change whether ``pred`` holds."""
    mpg = as_mpgraph(mpg)
    seen = set()
    for src, tgt, _ in flatten(pred, sources):
        rel = relevance(mpg, infl, tgt, L)
        fwd = _forward(mpg, src, L)
        for layer in range(1, L + 1):
            for a in fwd[layer - 1]:
                if not rel[layer - 1, a]:
                    continue
                for b in infl.receivers(a):
                    if rel[layer, b] and mpg.active(a, b, layer):
                        seen.add((a, b, layer))
    return seen


def count_visible_channels(mpg, infl, sources, pred, L) -> int:
    return len(visible_channels(mpg, infl, sources, pred, L))


def exact_success_prob(
    mpg, infl, sources, pred, L: int, cap: int = DEFAULT_CAP, max_states: int = MAX_STATES
) -> Fraction:
    """``P[pred holds after L layers]`` as a :class:`~fractions.Fraction`.

    Raises :class:`EnumerationTooLarge` when more than ``cap`` channels are
    visible or the frontier ever holds more than ``max_states`` states.
    """
    mpg = as_mpgraph(mpg)
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    atoms = flatten(pred, sources)
    for s, t, _ in atoms:
        for v in s | t:
            if not 0 <= v < mpg.n:
                raise InvalidParameters(f"node {v} is not in the message passing graph")
    k = count_visible_channels(mpg, infl, sources, pred, L)
    if k > cap:
        raise EnumerationTooLarge(k, cap)
    K = len(atoms)
    rel = [relevance(mpg, infl, t, L) for _, t, _ in atoms]

    # A state is (sender masks, receiver masks), one bit mask per atom.
    # Weights are integers over the common denominator ``den``: a coin into
    # ``b`` has success weight 1 and failure weight deg(b); where the coin
    # cannot matter the state is scaled by deg(b) + 1 instead.
    zero = (0,) * K
    start = tuple(_mask(s, rel[i], 0) for i, (s, _, _) in enumerate(atoms))
    dist = {(start, zero): 1}
    den = 1
    for layer in range(1, L + 1):
        union = 0
        for prev, _ in dist:
            for m in prev:
                union |= m
        plan = []
        for b in range(mpg.n):
            if not any(rel[i][layer, b] for i in range(K)):
                continue
            senders = [a for a in infl.receivers(b) if union >> a & 1 and mpg.active(a, b, layer)]
            if senders:
                plan.append((b, senders))
        last = {}
        for idx, (_, senders) in enumerate(plan):
            for a in senders:
                last[a] = idx
        keep = 0
        for a in last:
            keep |= 1 << a
        dist = _forget(dist, keep)
        for idx, (b, senders) in enumerate(plan):
            bit = 1 << b
            joins = [i for i in range(K) if rel[i][layer, b]]
            fail = len(infl.neighbors[b])
            tot = fail + 1
            for a in senders:
                abit = 1 << a
                den *= tot
                nxt: dict = {}
                for st, w in dist.items():
                    prev, new = st
                    hit = [i for i in joins if prev[i] & abit and not new[i] & bit]
                    if not hit:
                        nxt[st] = nxt.get(st, 0) + w * tot
                        continue
                    won = (prev, tuple(m | bit if i in hit else m for i, m in enumerate(new)))
                    nxt[won] = nxt.get(won, 0) + w
                    nxt[st] = nxt.get(st, 0) + w * fail
                dist = nxt
                if len(dist) > max_states:
                    raise EnumerationTooLarge(k, cap, states=max_states)
            done = 0
            for a in senders:
                if last[a] == idx:
                    done |= 1 << a
            if done:
                dist = _forget(dist, ~done)
        moved: dict = {}
        for (_, new), w in dist.items():
            st = (new, zero)
            moved[st] = moved.get(st, 0) + w
        dist = moved
    good = 0
    for (final, _), w in dist.items():
        if all(_holds(final[i], atoms[i][1], atoms[i][2]) for i in range(K)):
            good += w
    return Fraction(good, den)


def _mask(nodes, rel, layer) -> int:
    m = 0
    for v in nodes:
        if rel[layer, v]:
            m |= 1 << v
    return m


def _forget(dist: dict, keep: int) -> dict:
    """Clear sender bits outside ``keep`` and merge equal states."""
    out: dict = {}
    for (prev, new), w in dist.items():
        st = (tuple(m & keep for m in prev), new)
        out[st] = out.get(st, 0) + w
    return out


def _holds(mask: int, targets, mode) -> bool:
    hits = [mask >> t & 1 for t in targets]
    return all(hits) if mode == "all" else any(hits)


def nats(p) -> float:
    """``-ln p`` for a probability (``INF`` at zero), exact for fractions."""
    p = Fraction(p)
    if p < 0 or p > 1:
        raise InvalidParameters("probability outside [0, 1]")
    if p == 0:
        return INF
    return math.log(p.denominator) - math.log(p.numerator)
