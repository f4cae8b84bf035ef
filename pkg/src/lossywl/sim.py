"""The lossyWL process as message reachability, simulated by Monte Carlo.

In layer ``l`` every active node ``a`` sends to each ``b`` in ``N(a) + {a}``
whose channel is active; the message survives with the influence probability
of ``a -> b`` and makes ``b`` active in the next set. A task succeeds when its
target nodes are active after ``L`` layers.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np

from . import rng
from .errors import InvalidParameters
from .graph import INF, Graph
from .transforms import Arch, MPGraph, Variant, mp_influence, transform

Z95 = 1.959963984540054
CHUNK = 4096


@dataclass(frozen=True)
class TargetReached:
    """Success when all (or any) of ``targets`` end up active.

    ``sources=None`` means the sources passed to the simulation call.
    """

    targets: frozenset[int]
    mode: str = "all"
    sources: frozenset[int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))
        if self.sources is not None:
            object.__setattr__(self, "sources", frozenset(self.sources))
        if self.mode not in ("all", "any"):
            raise InvalidParameters("mode must be 'all' or 'any'")
        if not self.targets:
            raise InvalidParameters("a predicate needs at least one target")


@dataclass(frozen=True)
class Conjunction:
    """All parts must succeed; parts share one coin realisation."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise InvalidParameters("empty conjunction")


Predicate = TargetReached | Conjunction


def flatten(pred: Predicate, sources) -> list[tuple[frozenset, frozenset, str]]:
    """Predicate as a list of ``(sources, targets, mode)`` atoms."""
    if isinstance(pred, Conjunction):
        return [x for p in pred.parts for x in flatten(p, sources)]
    src = pred.sources if pred.sources is not None else (frozenset(sources) if sources is not None else None)
    if not src:
        raise InvalidParameters("a predicate atom has no sources")
    return [(src, pred.targets, pred.mode)]


def atom_holds(final: frozenset, targets: frozenset, mode: str) -> bool:
    return targets <= final if mode == "all" else bool(targets & final)


@dataclass(frozen=True)
class ReachTrace:
    active_sets: tuple[frozenset[int], ...]

    @property
    def final(self) -> frozenset[int]:
        return self.active_sets[-1]


def as_mpgraph(g) -> MPGraph:
    return g if isinstance(g, MPGraph) else transform(g, Arch(Variant.STANDARD))


def propagate(mpg, infl, sources: Iterable[int], L: int, coin: Callable[[int, int, int], bool]) -> ReachTrace:
    """One realisation of the process with an arbitrary coin ``coin(a, b, layer)``."""
    mpg = as_mpgraph(mpg)
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    cur = frozenset(sources)
    if not cur:
        raise InvalidParameters("sources must be non-empty")
    for v in cur:
        if not 0 <= v < mpg.n:
            raise InvalidParameters(f"source {v} is not a node")
    sets = [cur]
    for layer in range(1, L + 1):
        nxt = set()
        for a in sorted(cur):
            for b in infl.receivers(a):
                if mpg.active(a, b, layer) and coin(a, b, layer):
                    nxt.add(b)
        cur = frozenset(nxt)
        sets.append(cur)
    return ReachTrace(tuple(sets))


def simulate_reach(mpg, infl, sources, L: int, trial_seed: int) -> ReachTrace:
    """Single trial driven by the counter-based coins of :mod:`lossywl.rng`."""
    probs = {ch: float(p) for ch, p in infl.items()}

    def coin(a, b, layer):
        return rng.coin(trial_seed, a, b, layer, probs[(a, b)])

    return propagate(mpg, infl, sources, L, coin)


@dataclass(frozen=True)
class McEstimate:
    trials: int
    successes: int

    def __post_init__(self):
        if self.trials < 1 or not 0 <= self.successes <= self.trials:
            raise InvalidParameters("need trials >= 1 and 0 <= successes <= trials")

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials

    @property
    def mpc_nats(self) -> float:
        return INF if self.successes == 0 else -math.log(self.p_hat)

    @cached_property
    def ci95(self) -> tuple[float, float]:
        """Wilson score interval for ``p_hat``."""
        n, p, z = self.trials, self.p_hat, Z95
        denom = 1 + z * z / n
        centre = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
        # the interval endpoints are exactly 0 and 1 at the extremes; pin them against rounding
        lo = 0.0 if self.successes == 0 else max(0.0, centre - half)
        hi = 1.0 if self.successes == n else min(1.0, centre + half)
        return lo, hi

    @property
    def stderr_nats(self) -> float:
        """Delta-method standard error of ``mpc_nats``; ``INF`` with no successes."""
        if self.successes == 0:
            return INF
        return math.sqrt((1 - self.p_hat) / (self.p_hat * self.trials))


# --- compiled kernel -------------------------------------------------------

_U64 = np.uint64


@numba.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _U64(30))) * _U64(rng.M1)
    z = (z ^ (z >> _U64(27))) * _U64(rng.M2)
    return z ^ (z >> _U64(31))


@numba.njit(cache=True, parallel=True)
def _kernel(indptr, dst, prob, always, mask, keys, src_ptr, src, tgt_ptr, tgt, mode_any,
            relevant, L, base_seed, trials, chunk, flags):
    n = indptr.shape[0] - 1
    n_atoms = src_ptr.shape[0] - 1
    n_chunks = (trials + chunk - 1) // chunk
    gamma = _U64(rng.GAMMA)
    for ci in numba.prange(n_chunks):
        cur = np.empty(n, np.int64)
        nxt = np.empty(n, np.int64)
        cur_mark = np.zeros(n, np.bool_)
        nxt_mark = np.zeros(n, np.bool_)
        stop = min(trials, (ci + 1) * chunk)
        for t in range(ci * chunk, stop):
            ts = _mix(base_seed + _U64(t + 1) * gamma)
            ok = True
            for k in range(n_atoms):
                m = 0
                for i in range(src_ptr[k], src_ptr[k + 1]):
                    s = src[i]
                    if relevant[k, 0, s] and not cur_mark[s]:
                        cur_mark[s] = True
                        cur[m] = s
                        m += 1
                for layer in range(1, L + 1):
                    m2 = 0
                    for i in range(m):
                        a = cur[i]
                        for c in range(indptr[a], indptr[a + 1]):
                            b = dst[c]
                            if nxt_mark[b] or not relevant[k, layer, b]:
                                continue
                            if not always[c]:
                                if layer >= 64 or ((mask[c] >> _U64(layer)) & _U64(1)) == _U64(0):
                                    continue
                            u = (_mix(ts ^ keys[layer, c]) >> _U64(11)) * rng.INV53
                            if u < prob[c]:
                                nxt_mark[b] = True
                                nxt[m2] = b
                                m2 += 1
                    for i in range(m):
                        cur_mark[cur[i]] = False
                    for i in range(m2):
                        b = nxt[i]
                        cur[i] = b
                        cur_mark[b] = True
                        nxt_mark[b] = False
                    m = m2
                    if m == 0:
                        break
                if mode_any[k]:
                    hit = False
                    for i in range(tgt_ptr[k], tgt_ptr[k + 1]):
                        if cur_mark[tgt[i]]:
                            hit = True
                else:
                    hit = True
                    for i in range(tgt_ptr[k], tgt_ptr[k + 1]):
                        if not cur_mark[tgt[i]]:
                            hit = False
                for i in range(m):
                    cur_mark[cur[i]] = False
                if not hit:
                    ok = False
                    break
            flags[t] = 1 if ok else 0


def relevance(mpg: MPGraph, infl, targets, L: int) -> np.ndarray:
    """``out[l, x]``: some target is reachable from ``x`` using layers ``l+1..L``."""
    out = np.zeros((L + 1, mpg.n), dtype=np.bool_)
    for t in targets:
        out[L, t] = True
    for layer in range(L, 0, -1):
        for b in np.flatnonzero(out[layer]):
            b = int(b)
            out[layer - 1, b] = True
            for a in mpg.neighbors[b]:
                if mpg.active(a, b, layer):
                    out[layer - 1, a] = True
    return out


@dataclass
class _Problem:
    arrays: tuple
    L: int


def compile_problem(mpg: MPGraph, infl, sources, pred: Predicate, L: int) -> _Problem:
    atoms = flatten(pred, sources)
    senders, receivers = [], []
    indptr = [0]
    for a in range(mpg.n):
        for b in infl.receivers(a):
            senders.append(a)
            receivers.append(b)
        indptr.append(len(senders))
    nch = len(senders)
    prob = np.array([float(infl[(a, b)]) for a, b in zip(senders, receivers)], dtype=np.float64)
    always = np.ones(nch, dtype=np.bool_)
    mask = np.zeros(nch, dtype=np.uint64)
    for c, (a, b) in enumerate(zip(senders, receivers)):
        m = mpg.edge_layer_mask.get((min(a, b), max(a, b))) if a != b else None
        if m is not None:
            always[c] = False
            bits = 0
            for layer in m:
                if 0 <= layer < 64:
                    bits |= 1 << layer
            mask[c] = bits
    keys = rng.key_table(senders, receivers, L)
    src_ptr, src, tgt_ptr, tgt, mode_any = [0], [], [0], [], []
    rel = np.zeros((len(atoms), L + 1, mpg.n), dtype=np.bool_)
    for k, (s, t, mode) in enumerate(atoms):
        for v in list(s) + list(t):
            if not 0 <= v < mpg.n:
                raise InvalidParameters(f"node {v} is not in the message passing graph")
        src += sorted(s)
        src_ptr.append(len(src))
        tgt += sorted(t)
        tgt_ptr.append(len(tgt))
        mode_any.append(mode == "any")
        rel[k] = relevance(mpg, infl, t, L)
    i64 = lambda x: np.asarray(x, dtype=np.int64)  # noqa: E731
    arrays = (
        i64(indptr), i64(receivers), prob, always, mask, keys,
        i64(src_ptr), i64(src), i64(tgt_ptr), i64(tgt), np.asarray(mode_any, dtype=np.bool_), rel,
    )
    return _Problem(arrays, L)


def configure_threads() -> int:
    """Apply ``MPC_THREADS`` (speed only). Returns the thread count in use."""
    want = os.environ.get("MPC_THREADS")
    if want:
        numba.set_num_threads(max(1, min(int(want), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


def run_flags(problem: _Problem, trials: int, base_seed: int) -> np.ndarray:
    """Per-trial success flags (``uint8``) for trials ``0..trials-1``."""
    if trials < 1:
        raise InvalidParameters("trials must be at least 1")
    configure_threads()
    flags = np.zeros(trials, dtype=np.uint8)
    _kernel(*problem.arrays, problem.L, np.uint64(base_seed & rng.MASK), trials, CHUNK, flags)
    return flags


def mc_success_prob(mpg, infl, sources, pred: Predicate, L: int, trials: int, base_seed: int) -> McEstimate:
    """Monte Carlo estimate of the success probability; trial ``t`` uses
    ``rng.trial_seed(base_seed, t)``, so results do not depend on threading."""
    mpg = as_mpgraph(mpg)
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    flags = run_flags(compile_problem(mpg, infl, sources, pred, L), trials, base_seed)
    return McEstimate(trials, int(flags.sum(dtype=np.int64)))


def default_influence(g) -> object:
    return mp_influence(as_mpgraph(g))


__all__ = [
    "Conjunction",
    "Graph",
    "McEstimate",
    "ReachTrace",
    "TargetReached",
    "mc_success_prob",
    "propagate",
    "simulate_reach",
]
