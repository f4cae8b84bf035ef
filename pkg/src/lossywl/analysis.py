"""Tasks, MPC estimation and the analytic bounds around it.

Every task is reduced to reachability on the message passing graph: the
input feature ``X_u`` starts on the nodes that already carry it (``u`` itself
and, for CIN, the edge and ring cells built from it) and must reach the
target node. With a readout the target is the readout node, one layer later.

All values are in nats (natural logarithm).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidParameters, NotSimulable, UnknownChannel, UnsupportedArch
from .exact import DEFAULT_CAP, exact_success_prob, nats
from .graph import INF, Cycle, Graph, bfs_distances, influence_matrix
from .sim import Conjunction, McEstimate, TargetReached, mc_success_prob
from .transforms import Arch, MPGraph, Role, Variant, mp_influence, transform

# ---------------------------------------------------------------- tasks


@dataclass(frozen=True)
class Retain:
    v: int

    @property
    def target(self) -> int:
        return self.v

    @property
    def label(self) -> str:
        return f"retain({self.v})"


@dataclass(frozen=True)
class Propagate:
    u: int
    v: int

    @property
    def target(self) -> int:
        return self.v

    @property
    def label(self) -> str:
        return f"propagate({self.u}->{self.v})"


@dataclass(frozen=True)
class RingTransfer:
    """Move ``X_u`` to ``v`` where both lie on ``cycle``."""

    v: int
    cycle: Cycle
    u: int

    def __post_init__(self):
        if self.u not in self.cycle or self.v not in self.cycle:
            raise InvalidParameters("u and v must lie on the cycle")

    @property
    def target(self) -> int:
        return self.v

    @property
    def label(self) -> str:
        return f"ring(s={len(self.cycle)},{self.u}->{self.v})"


@dataclass(frozen=True)
class Joint:
    """Concatenation of tasks with a common target, solved by one lossy run."""

    tasks: tuple

    def __post_init__(self):
        flat = []
        for t in self.tasks:
            flat += list(t.tasks) if isinstance(t, Joint) else [t]
        if not flat:
            raise InvalidParameters("a joint task needs at least one member")
        if len({t.target for t in flat}) != 1:
            raise InvalidParameters("joint members must share the target node")
        object.__setattr__(self, "tasks", tuple(flat))

    @property
    def target(self) -> int:
        return self.tasks[0].target

    @property
    def label(self) -> str:
        return "joint(" + ",".join(t.label for t in self.tasks) + ")"


TaskSpec = Retain | Propagate | RingTransfer | Joint
NOT_SIMULABLE = (Variant.MLP, Variant.STANDARD, Variant.VIRTUAL_NODE)


def _check_task_nodes(g: Graph, task) -> None:
    members = task.tasks if isinstance(task, Joint) else (task,)
    for t in members:
        for x in (getattr(t, "u", None), t.target):
            if x is not None and not 0 <= x < g.n:
                raise InvalidParameters(f"task node {x} is not in the input graph")
        if isinstance(t, RingTransfer) and not t.cycle.is_in(g):
            raise InvalidParameters("the ring is not a cycle of the input graph")


def task_predicate(mpg: MPGraph, task, L: int):
    """``(predicate, layers)`` the lossy process must satisfy for ``task``."""
    if isinstance(task, Joint):
        parts = [task_predicate(mpg, t, L) for t in task.tasks]
        return Conjunction(tuple(p for p, _ in parts)), parts[0][1]
    source = task.v if isinstance(task, Retain) else task.u
    target = task.target
    layers = L
    if mpg.readout_node is not None:
        target, layers = mpg.readout_node, L + 1
    return TargetReached({target}, sources=mpg.carriers(source)), layers


def _ring_refusal(g: Graph, arch: Arch, task) -> None:
    rings = [t for t in (task.tasks if isinstance(task, Joint) else (task,)) if isinstance(t, RingTransfer)]
    if rings and arch.variant in NOT_SIMULABLE:
        c = rings[0].cycle
        r = min(g.degree(x) for x in c)
        raise NotSimulable(
            f"ring transfer on {arch.name} is only bounded analytically",
            bounds=bound_ring(arch, len(c), max(r, 2)),
        )


def estimate_mpc(g: Graph, arch: Arch, task, L: int, trials: int, base_seed: int) -> McEstimate:
    """Monte Carlo MPC of ``task`` for ``arch`` with ``L`` layers."""
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    _check_task_nodes(g, task)
    _ring_refusal(g, arch, task)
    mpg = transform(g, arch, L)
    pred, layers = task_predicate(mpg, task, L)
    return mc_success_prob(mpg, mp_influence(mpg), None, pred, layers, trials, base_seed)


def exact_probability(g: Graph, arch: Arch, task, L: int, cap: int = DEFAULT_CAP) -> Fraction:
    """Exact success probability of ``task`` (subject to the enumeration cap)."""
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    _check_task_nodes(g, task)
    _ring_refusal(g, arch, task)
    mpg = transform(g, arch, L)
    pred, layers = task_predicate(mpg, task, L)
    return exact_success_prob(mpg, mp_influence(mpg), None, pred, layers, cap=cap)


def exact_mpc(g: Graph, arch: Arch, task, L: int, cap: int = DEFAULT_CAP) -> float:
    return nats(exact_probability(g, arch, task, L, cap))


# ---------------------------------------------------------------- bounds


class Direction(str, enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


class Provenance(str, enum.Enum):
    PAPER_STATED = "paper_stated"
    LIFT_AUDITED = "lift_audited"


@dataclass(frozen=True)
class Bound:
    direction: Direction
    value_nats: float
    formula_id: str
    provenance: Provenance = Provenance.LIFT_AUDITED
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if not self.value_nats >= 0:
            raise InvalidParameters("bounds are non-negative")

    def admits(self, value: float, tol: float = 0.0) -> bool:
        """Whether an MPC ``value`` is consistent with this bound."""
        if self.direction is Direction.LOWER:
            return value >= self.value_nats - tol
        return value <= self.value_nats + tol


class BoundSet(tuple):
    """Bounds for one claim: the published constants and the audited ones."""

    def stated(self) -> Bound:
        return self._pick(Provenance.PAPER_STATED)

    def audited(self) -> Bound:
        return self._pick(Provenance.LIFT_AUDITED)

    def _pick(self, prov) -> Bound:
        cands = [b for b in self if b.provenance is prov]
        if not cands:
            raise LookupError(f"no {prov.value} bound")
        if cands[0].direction is Direction.UPPER:
            return min(cands, key=lambda b: b.value_nats)
        return max(cands, key=lambda b: b.value_nats)


@dataclass(frozen=True)
class MessageSet:
    """Message identifiers ``(sender, receiver, layer)``."""

    messages: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "messages", frozenset(tuple(m) for m in self.messages))

    def __len__(self):
        return len(self.messages)

    def __iter__(self):
        return iter(sorted(self.messages, key=lambda m: (m[2], m[0], m[1])))

    @property
    def depth(self) -> int:
        return max((m[2] for m in self.messages), default=0)


def _set_probability(mpg: MPGraph, mset: MessageSet) -> Fraction:
    infl = mp_influence(mpg)
    p = Fraction(1)
    for a, b, layer in mset:
        if layer < 1 or (a, b) not in infl or not mpg.active(a, b, layer):
            raise UnknownChannel((a, b, layer))
        p *= infl[(a, b)]
    return p


def mpc_upper_from_sufficient(mpg: MPGraph, mset: MessageSet) -> Bound:
    """``-ln P[all messages succeed]`` for a set whose success implies the task."""
    return Bound(Direction.UPPER, nats(_set_probability(mpg, mset)), "sufficient-set")


def mpc_lower_from_necessary(mpg: MPGraph, mset: MessageSet) -> Bound:
    """``-ln P[all messages succeed]`` for a set every success must contain."""
    return Bound(Direction.LOWER, nats(_set_probability(mpg, mset)), "necessary-set")


def sufficient_set_ring(mpg: MPGraph, arch: Arch, cycle: Cycle, u: int, v: int) -> MessageSet:
    """The proof construction for ring transfer on the actual lift.

    FragNet: ``u -> fragment`` then ``fragment -> v``. CIN: ``ring cell ->
    edge cell`` then ``edge cell -> v`` for a ring edge at ``v``. GSN: the
    shorter arc from ``u`` to ``v`` one hop per layer.
    """
    if u not in cycle or v not in cycle:
        raise InvalidParameters("u and v must lie on the cycle")
    if u == v:
        return MessageSet()
    variant = Arch(arch.variant, arch.max_cycle).variant
    if variant is Variant.FRAGNET:
        f = _cell(mpg, ("fragment", cycle.nodes))
        return MessageSet({(u, f, 1), (f, v, 2)})
    if variant is Variant.CIN:
        rc = _cell(mpg, ("ring", cycle.nodes))
        k = len(cycle)
        i = cycle.nodes.index(v)
        w = cycle.nodes[(i + 1) % k]
        e = _cell(mpg, ("edge", (min(v, w), max(v, w))))
        return MessageSet({(rc, e, 1), (e, v, 2)})
    if variant is Variant.GSN:
        path = cycle.arc(u, v)
        return MessageSet({(path[i], path[i + 1], i + 1) for i in range(len(path) - 1)})
    raise UnsupportedArch(f"no sufficient ring construction for {arch.name}")


def _cell(mpg, key):
    try:
        return mpg.cell[key]
    except KeyError:
        raise InvalidParameters(f"the lift has no cell {key}; is max_cycle large enough?") from None


def bound_retain(g, L: int) -> Bound:
    """Lower bound ``L ln(1/phi)``; ``phi`` is the chance that some message survives a layer."""
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    infl = mp_influence(g) if isinstance(g, MPGraph) else influence_matrix(g)
    miss = Fraction(1)
    for p in infl.values():
        miss *= 1 - p
    phi = 1 - miss
    if phi == 0:  # no channels at all
        return Bound(Direction.LOWER, INF if L else 0.0, "retain:L*ln(1/phi)")
    return Bound(Direction.LOWER, L * nats(phi), "retain:L*ln(1/phi)", note=f"phi={phi}")


def bound_transfer(arch: Arch, n: int, r: int, D: int, g: Graph | None = None, v: int | None = None) -> BoundSet:
    """Propagation bounds at the minimal depth for distance ``D`` on ``r``-regular inputs.

    With ``g`` and ``v`` the standard-architecture lower bounds note whether
    the ``D``-hop ball around ``v`` holds a cycle, which the argument excludes.
    """
    if D < 0 or r < 1 or n < 2:
        raise InvalidParameters("need D >= 0, r >= 1, n >= 2")
    P, A = Provenance.PAPER_STATED, Provenance.LIFT_AUDITED
    U, Lo = Direction.UPPER, Direction.LOWER
    variant = arch.variant
    if variant is Variant.MLP:
        val = INF if D > 0 else 0.0
        return BoundSet((Bound(Lo, val, "mlp:no-edges", P), Bound(Lo, val, "mlp:no-edges", A)))
    if variant is Variant.VIRTUAL_NODE:
        if D == 0:
            return BoundSet((Bound(U, 0.0, "vn:D=0", P), Bound(U, 0.0, "vn:D=0", A)))
        if D == 1:
            x = math.log(r + 2)
            return BoundSet((Bound(U, x, "vn:ln(r+2)", P), Bound(U, x, "vn:ln(r+2)", A)))
        return BoundSet(
            (
                Bound(U, math.log(n * (r + 2)), "vn:ln(n(r+2))", P),
                Bound(U, 2 * math.log(n), "vn:2ln(n)", P),
                Bound(U, math.log((n + 1) * (r + 2)), "vn:ln((n+1)(r+2))", A,
                      note="u->virtual at layer 1, virtual->v at layer 2"),
            )
        )
    note = ""
    if g is not None and v is not None:
        note = "ball-has-cycle" if _ball_has_cycle(g, v, D) else "ball-acyclic"
    return BoundSet(
        (
            Bound(Lo, D * math.log(r), "standard:D*ln(r)", P, note),
            Bound(Lo, D * math.log(r + 1), "standard:D*ln(r+1)", A, note),
        )
    )


def _ball_has_cycle(g: Graph, v: int, D: int) -> bool:
    ball = sorted(bfs_distances(g, v, max_depth=D))
    sub, _ = g.induced(ball)
    return len(sub.edges) >= sub.n  # a forest has fewer edges than nodes


def bound_ring(arch: Arch, s: int, r: int) -> BoundSet:
    """Ring-transfer bounds for a single ``s``-ring at ``v`` in an ``r``-regular graph."""
    if s < 3 or r < 2:
        raise InvalidParameters("need s >= 3 and r >= 2")
    P, A = Provenance.PAPER_STATED, Provenance.LIFT_AUDITED
    U, Lo = Direction.UPPER, Direction.LOWER
    variant = arch.variant
    if variant is Variant.FRAGNET:
        return BoundSet(
            (
                Bound(U, math.log(s * (r + 2)), "fragnet:ln(s(r+2))", P),
                Bound(U, math.log((s + 1) * (r + 2)), "fragnet:ln((s+1)(r+2))", A),
            )
        )
    if variant is Variant.CIN:
        return BoundSet(
            (
                Bound(U, math.log((s + 2) * (2 * r + 1)), "cin:ln((s+2)(2r+1))", P),
                Bound(U, math.log((s + 3) * (2 * r + 1)), "cin:ln((s+3)(2r+1))", A),
            )
        )
    if variant is Variant.GSN:
        x = math.ceil(s / 2) * math.log(r + 1)
        return BoundSet((Bound(U, x, "gsn:ceil(s/2)ln(r+1)", P), Bound(U, x, "gsn:ceil(s/2)ln(r+1)", A)))
    if variant is Variant.MLP:
        return BoundSet((Bound(Lo, INF, "mlp:no-edges", P), Bound(Lo, INF, "mlp:no-edges", A)))
    return BoundSet(
        (
            Bound(Lo, s * math.log(r), "standard:s*ln(r)", P),
            Bound(Lo, s * math.log(r + 1), "standard:s*ln(r+1)", A),
        )
    )


def layered_walk(mpg: MPGraph, L: int) -> np.ndarray:
    """Product of per-layer influence matrices with masked channels removed."""
    base = mp_influence(mpg).matrix()
    out = np.eye(mpg.n)
    masked = [(a, b, m) for (a, b), m in mpg.edge_layer_mask.items()]
    for layer in range(1, L + 1):
        M = base.copy()
        for a, b, m in masked:
            if layer not in m:
                M[a, b] = M[b, a] = 0.0
        out = M @ out
    return out


def rw_lower_bound(g, L: int, u: int, v: int) -> Bound:
    """``-ln`` of the L-step walk mass from the carriers of ``X_u`` into ``v``.

    The expected number of surviving message routes from ``c`` to ``v`` is the
    walk probability, so ``P[reach] <= sum_c (I^L)[v, c]``.
    """
    if L < 0:
        raise InvalidParameters("L must be non-negative")
    mpg = g if isinstance(g, MPGraph) else transform(g, Arch(Variant.STANDARD))
    for x in (u, v):
        if not 0 <= x < mpg.n:
            raise InvalidParameters(f"node {x} is not in the graph")
    W = layered_walk(mpg, L)
    src = mpg.carriers(u) if mpg.roles[u] is Role.ORIGINAL else {u}
    mass = min(1.0, float(sum(W[v, c] for c in src)))
    value = INF if mass <= 0 else max(0.0, -math.log(mass))
    return Bound(Direction.LOWER, value, "random-walk:-ln(I^L)[v,u]")


# ---------------------------------------------------------------- theorem checks


@dataclass(frozen=True)
class TriangleReport:
    p_f: Fraction
    p_g: Fraction
    p_joint: Fraction

    @property
    def mpc_f(self) -> float:
        return nats(self.p_f)

    @property
    def mpc_g(self) -> float:
        return nats(self.p_g)

    @property
    def mpc_joint(self) -> float:
        return nats(self.p_joint)

    @property
    def holds(self) -> bool:
        # MPC(f||g) <= MPC(f) + MPC(g)  <=>  P(f and g) >= P(f) P(g)
        return self.p_joint >= self.p_f * self.p_g

    @property
    def slack(self) -> float:
        return self.mpc_f + self.mpc_g - self.mpc_joint if self.p_joint else -INF


@dataclass(frozen=True)
class RefinementReport:
    p_fine: Fraction
    p_coarse: Fraction

    @property
    def holds(self) -> bool:
        return self.p_fine <= self.p_coarse

    @property
    def mpc_fine(self) -> float:
        return nats(self.p_fine)

    @property
    def mpc_coarse(self) -> float:
        return nats(self.p_coarse)


def check_triangle(g: Graph, arch: Arch, f, h, L: int, cap: int = DEFAULT_CAP) -> TriangleReport:
    """Exact probabilities of ``f``, ``h`` and their concatenation."""
    if f.target != h.target:
        raise InvalidParameters("both tasks must target the same node")
    return TriangleReport(
        exact_probability(g, arch, f, L, cap),
        exact_probability(g, arch, h, L, cap),
        exact_probability(g, arch, Joint((f, h)), L, cap),
    )


def check_refinement(g: Graph, arch: Arch, fine: Joint, coarse, L: int, cap: int = DEFAULT_CAP) -> RefinementReport:
    """The joint task must be at least as hard as any of its members."""
    if not isinstance(fine, Joint):
        fine = Joint((fine,))
    if coarse not in fine.tasks:
        raise InvalidParameters("the coarse task must be a member of the joint task")
    return RefinementReport(
        exact_probability(g, arch, fine, L, cap), exact_probability(g, arch, coarse, L, cap)
    )

