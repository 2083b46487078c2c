"""Score-augmented Ford-Fulkerson over the source/taxi/super-node/sink network.

Each stable group becomes a super node whose sink edge has capacity
ceil(|group| / 4); each taxi has a unit edge from the source and a unit
edge to every group it is willing to serve. Phase 1 pushes one unit at a
time along the augmenting path that earns the most score (passengers
credited to a taxi), Phase 2 moves matched taxis to groups where they
can carry strictly more passengers.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .model import (
    VEHICLE_CAPACITY,
    Assignment,
    EconomicParams,
    Match,
    Request,
    Vehicle,
    driver_economics,
    passenger_feasible,
    synthesize_trip,
    trip_admissible,
)

SOURCE = ("s",)
SINK = ("t",)


def taxi(vid) -> tuple:
    return ("b", vid)


def super_node(k: int) -> tuple:
    return ("v", k)


@dataclass
class FlowNetwork:
    """Directed unit-capacity network with integer flows.

    ``groups[k]`` lists the member request ids of super node ``("v", k)``.
    """
    groups: list
    vehicles: dict
    cap: dict = field(default_factory=dict)
    flow: dict = field(default_factory=dict)
    out: dict = field(default_factory=dict)
    inc: dict = field(default_factory=dict)

    def add_edge(self, u, w, c: int):
        if (u, w) in self.cap:
            raise ValueError(f"duplicate edge {u}->{w}")
        if (w, u) in self.cap:
            raise ValueError(f"antiparallel edge {u}->{w}")
        self.cap[(u, w)] = int(c)
        self.flow[(u, w)] = 0
        self.out.setdefault(u, []).append(w)
        self.inc.setdefault(w, []).append(u)
        self.out.setdefault(w, [])
        self.inc.setdefault(u, [])

    def finalize(self):
        for adj in (self.out, self.inc):
            for u in adj:
                adj[u].sort()

    def residual(self, u, w) -> int:
        r = 0
        if (u, w) in self.cap:
            r += self.cap[(u, w)] - self.flow[(u, w)]
        if (w, u) in self.cap:
            r += self.flow[(w, u)]
        return r

    def residual_neighbors(self, u):
        """Successors of ``u`` in the residual graph, in sorted order."""
        flow, cap = self.flow, self.cap
        nbrs = [w for w in self.inc.get(u, ()) if flow[(w, u)] > 0]
        nbrs.extend(w for w in self.out.get(u, ()) if flow[(u, w)] < cap[(u, w)])
        # two sorted runs; no antiparallel edges, so no duplicates
        nbrs.sort()
        return nbrs

    @property
    def value(self) -> int:
        return sum(self.flow[(SOURCE, w)] for w in self.out.get(SOURCE, ()))

    def taxi_at(self, k: int) -> list:
        """Vehicle ids currently routed to super node k."""
        return [w[1] for w in self.inc.get(super_node(k), ()) if self.flow[(w, super_node(k))] > 0]

    def node_of(self, vid):
        """Super node index that taxi ``vid`` is routed to, or None."""
        for w in self.out.get(taxi(vid), ()):
            if self.flow[(taxi(vid), w)] > 0:
                return w[1]
        return None

    def check_conservation(self):
        for u in self.out:
            if u in (SOURCE, SINK):
                continue
            fin = sum(self.flow[(w, u)] for w in self.inc[u])
            fout = sum(self.flow[(u, w)] for w in self.out[u])
            if fin != fout:
                raise AssertionError(f"flow not conserved at {u}: in {fin}, out {fout}")
        for e, f in self.flow.items():
            if not (isinstance(f, int) and 0 <= f <= self.cap[e]):
                raise AssertionError(f"edge {e} flow {f} outside [0, {self.cap[e]}]")


@dataclass
class ScoreState:
    total: int = 0
    remaining: dict = field(default_factory=dict)
    awarded: dict = field(default_factory=dict)

    @classmethod
    def fresh(cls, net: FlowNetwork) -> "ScoreState":
        return cls(total=0, remaining={k: len(g) for k, g in enumerate(net.groups)}, awarded={})

    def check(self, net: FlowNetwork):
        if self.total != sum(self.awarded.values()):
            raise AssertionError("total score differs from the sum of awards")
        for k, g in enumerate(net.groups):
            at_k = sum(a for (b, kk), a in self.awarded.items() if kk == k)
            if at_k + self.remaining[k] != len(g):
                raise AssertionError(f"super node {k}: awards {at_k} + remaining "
                                     f"{self.remaining[k]} != {len(g)}")
        for a in self.awarded.values():
            if not 0 <= a <= VEHICLE_CAPACITY:
                raise AssertionError(f"award {a} outside 0..{VEHICLE_CAPACITY}")


@dataclass
class SolveStats:
    augmentations: int = 0
    moves: int = 0
    phase1_flow: int = 0
    phase1_total: int = 0
    trace: list = field(default_factory=list)
    unmatched_by_moves: int = 0


def build_flow_network(groups, vehicles: Iterable[Vehicle], requests: Mapping[int, Request],
                       p: EconomicParams) -> FlowNetwork:
    """Source, taxi, super-node and sink edges for a set of stable groups.

    ``groups`` is a StableGroups or a list of member-id lists. Taxi b gets
    an edge to group v when it is willing to drive the trip formed by the
    first min(4, |v|) members of v in id order.
    """
    if hasattr(groups, "all_groups"):
        groups = groups.all_groups()
    groups = [sorted(g) for g in groups]
    vehicles = sorted(vehicles, key=lambda b: b.id)
    net = FlowNetwork(groups=groups, vehicles={b.id: b for b in vehicles})
    adj = {b.id: [] for b in vehicles}
    for k, members in enumerate(groups):
        net.add_edge(super_node(k), SINK, math.ceil(len(members) / VEHICLE_CAPACITY))
        canon = synthesize_trip([requests[r] for r in members[:VEHICLE_CAPACITY]], p)
        if canon.reserve > canon.revenue:
            continue
        mx, my = canon.meet_point.x, canon.meet_point.y
        for b in vehicles:
            if abs(b.location.x - mx) + abs(b.location.y - my) <= p.xi:
                adj[b.id].append(k)
    for b in vehicles:
        if adj[b.id]:
            net.add_edge(SOURCE, taxi(b.id), 1)
            for k in adj[b.id]:
                net.add_edge(taxi(b.id), super_node(k), 1)
    net.finalize()
    return net


def _swap_gain(remaining: int, old: int) -> int:
    # a taxi entering a super node takes over the award of the taxi it displaces
    return min(VEHICLE_CAPACITY, remaining + old) - old


def path_score(net: FlowNetwork, scores: ScoreState, path: Sequence) -> int:
    """Change in total score if one unit is pushed along ``path``."""
    gain = 0
    for i in range(1, len(path) - 1):
        v = path[i]
        if v[0] != "v":
            continue
        k, nxt = v[1], path[i + 1]
        if nxt == SINK:
            gain += min(VEHICLE_CAPACITY, scores.remaining[k])
        else:
            gain += _swap_gain(scores.remaining[k], scores.awarded.get((nxt[1], k), 0))
    return gain


def find_max_score_augmenting_path(net: FlowNetwork, scores: ScoreState):
    """Best-scoring s-t path in the residual graph, or None.

    Residual paths alternate s, b1, v1, b2, v2, ..., vk, t where every
    intermediate super node swaps one taxi for another. Awards keep the
    invariant that a super node with unserved passengers has only full
    (4-passenger) awards, so a swap never changes the score and the
    path score is decided by the last super node. A breadth-first search
    with sorted adjacency therefore reaches every super node along its
    shortest, lexicographically smallest path, and the best path is the
    one ending at the highest-scoring open super node. The search stops
    at the first path worth a full award.
    """
    parent = {SOURCE: None}
    queue = deque([SOURCE])
    best = None
    while queue:
        u = queue.popleft()
        for w in net.residual_neighbors(u):
            if w in parent or w == SOURCE:
                continue
            if w == SINK:
                path = [w]
                x = u
                while x is not None:
                    path.append(x)
                    x = parent[x]
                path.reverse()
                cand = (path_score(net, scores, path), -len(path))
                if best is None or cand > best[0]:
                    best = (cand, path)
                # sinks are reached in nondecreasing path length, so a full award is final
                if cand[0] >= VEHICLE_CAPACITY:
                    return best[1]
                continue
            parent[w] = u
            queue.append(w)
    return None if best is None else best[1]


def one_augment(net: FlowNetwork, scores: ScoreState, path: Sequence) -> tuple:
    """Push one unit along ``path`` and update awards in place.

    At each intermediate super node the displaced taxi's award is revoked
    before the entering taxi is awarded; at the last super node the
    entering taxi is awarded min(4, remaining).
    """
    if len(path) < 2 or path[0] != SOURCE or path[-1] != SINK:
        raise ValueError("augmenting path must run from source to sink")
    if len(set(path)) != len(path):
        raise ValueError("augmenting path is not simple")
    for u, w in zip(path, path[1:]):
        if net.residual(u, w) < 1:
            raise ValueError(f"no residual capacity on {u}->{w}")
    for i in range(1, len(path) - 1):
        v = path[i]
        if v[0] != "v":
            continue
        k, prev, nxt = v[1], path[i - 1], path[i + 1]
        if prev[0] != "b" or net.flow.get((prev, v), 1) != 0:
            raise ValueError(f"super node {v} must be entered along an unused taxi edge")
        if nxt != SINK:
            old = scores.awarded.pop((nxt[1], k), 0)
            scores.remaining[k] += old
            scores.total -= old
        award = min(VEHICLE_CAPACITY, scores.remaining[k])
        scores.awarded[(prev[1], k)] = award
        scores.remaining[k] -= award
        scores.total += award
    for u, w in zip(path, path[1:]):
        if (u, w) in net.cap and net.flow[(u, w)] < net.cap[(u, w)]:
            net.flow[(u, w)] += 1
        else:
            net.flow[(w, u)] -= 1
    return net, scores


def _move(net: FlowNetwork, scores: ScoreState, vid, k0: int, k1: int):
    b = taxi(vid)
    old = scores.awarded.pop((vid, k0), 0)
    scores.remaining[k0] += old
    award = min(VEHICLE_CAPACITY, scores.remaining[k1])
    scores.awarded[(vid, k1)] = award
    scores.remaining[k1] -= award
    scores.total += award - old
    net.flow[(b, super_node(k0))] -= 1
    net.flow[(super_node(k0), SINK)] -= 1
    net.flow[(b, super_node(k1))] += 1
    net.flow[(super_node(k1), SINK)] += 1


def solve_modified_ff(net: FlowNetwork, trace: bool = False) -> tuple:
    """Run both phases on ``net`` in place; returns (flow value, scores, stats)."""
    scores = ScoreState.fresh(net)
    stats = SolveStats()
    if trace:
        stats.trace.append(("start", 0))
    while True:
        path = find_max_score_augmenting_path(net, scores)
        if path is None:
            break
        one_augment(net, scores, path)
        stats.augmentations += 1
        if trace:
            stats.trace.append(("augment", scores.total))
    stats.phase1_flow = net.value
    stats.phase1_total = scores.total
    reallocate(net, scores, stats, trace=trace)
    return net.value, scores, stats


def reallocate(net: FlowNetwork, scores: ScoreState, stats: SolveStats | None = None,
               trace: bool = False) -> SolveStats:
    """Phase 2: move matched taxis to open super nodes that award strictly more.

    Taxis are scanned in id order; each takes the best candidate node
    (highest award, then smallest index) with spare sink capacity.
    """
    stats = stats if stats is not None else SolveStats()
    moved = True
    while moved:
        moved = False
        for vid in sorted(net.vehicles):
            k0 = net.node_of(vid)
            if k0 is None:
                continue
            current = scores.awarded.get((vid, k0), 0)
            cands = []
            for w in net.out.get(taxi(vid), ()):
                k1 = w[1]
                if k1 == k0:
                    continue
                edge = (w, SINK)
                if net.flow[edge] >= net.cap[edge]:
                    continue
                gain = min(VEHICLE_CAPACITY, scores.remaining[k1])
                if gain > current:
                    cands.append((-gain, k1))
            if not cands:
                continue
            k1 = min(cands)[1]
            _move(net, scores, vid, k0, k1)
            stats.moves += 1
            if not net.taxi_at(k0):
                stats.unmatched_by_moves += 1
            if trace:
                stats.trace.append(("move", scores.total))
            moved = True
    return stats


def _default_acceptor(requests, vehicles, p):
    cache = {}
    fleet = sorted(vehicles.values(), key=lambda b: b.id)

    def accept(member_ids, vehicle) -> bool:
        trip = synthesize_trip([requests[r] for r in member_ids], p)
        if not (passenger_feasible(trip, p) and driver_economics(vehicle, trip, p).willing):
            return False
        order = [vehicle] + [b for b in fleet if b.id != vehicle.id]
        return trip_admissible(member_ids, requests, order, p, _cache=cache)

    return accept


def assign_passengers_to_taxis(net: FlowNetwork, scores: ScoreState, requests: Mapping[int, Request],
                               p: EconomicParams,
                               accept: Callable | None = None) -> Assignment:
    """Split each super node's members into per-taxi blocks and price them.

    Taxis at a node are taken in id order and receive consecutive blocks
    (members sorted by id) sized by their awards. A block that ``accept``
    rejects is shortened from the end until accepted; the default accepts
    a block when the taxi is willing, every member is better off, and
    every sub-block is itself a servable trip.
    """
    vehicles = net.vehicles
    accept = accept or _default_acceptor(requests, vehicles, p)
    matches = []
    for k, members in enumerate(net.groups):
        taxis = sorted(net.taxi_at(k))
        flow_in = net.flow.get((super_node(k), SINK), 0)
        if len(taxis) != flow_in:
            raise AssertionError(f"super node {k}: {len(taxis)} taxis but sink flow {flow_in}")
        start = 0
        for vid in taxis:
            if (vid, k) not in scores.awarded:
                raise AssertionError(f"taxi {vid} routed to super node {k} without an award")
            award = scores.awarded[(vid, k)]
            block = members[start:start + award]
            start += award
            while block and not accept(block, vehicles[vid]):
                block = block[:-1]
            if block:
                matches.append(Match(vid, synthesize_trip([requests[r] for r in block], p)))
        if start > len(members):
            raise AssertionError(f"super node {k}: awards exceed its {len(members)} members")
    return Assignment.from_matches(matches, vehicles, p)


def solve_flow(groups, vehicles: Sequence[Vehicle], requests: Mapping[int, Request],
               p: EconomicParams, trace: bool = False) -> tuple:
    """Build, solve and assign in one call; returns (assignment, net, scores, stats)."""
    net = build_flow_network(groups, vehicles, requests, p)
    _, scores, stats = solve_modified_ff(net, trace=trace)
    assignment = assign_passengers_to_taxis(net, scores, requests, p)
    return assignment, net, scores, stats
