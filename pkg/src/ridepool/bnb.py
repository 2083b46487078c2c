"""Exact vehicle-trip matching by branching on edges.

Each search node either excludes its first live edge or includes it, in
which case the vehicle, the trip and every trip sharing a passenger with
it leave the graph. Independent connected components are solved
separately, and two polynomial cases skip branching: components whose
trips are all single passengers (a bipartite assignment) and components
with a single vehicle (take its largest trip).
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import Assignment, EconomicParams, Match, Vehicle, match_weight
from .vtg import VTGraph

_DIGITS = 9


@dataclass(frozen=True)
class EdgeTable:
    """Root edge list shared by every search node of one solve.

    ``vbit`` and ``tmask`` are bitmasks over vehicles and passengers used
    for fast conflict and connectivity tests.
    """
    vehicle: tuple
    trip: tuple
    weight: tuple
    vbit: tuple = ()
    tmask: tuple = ()

    @classmethod
    def build(cls, vehicle, trip, weight) -> "EdgeTable":
        vidx = {v: i for i, v in enumerate(sorted(set(vehicle)))}
        ridx = {r: i for i, r in enumerate(sorted({r for key in trip for r in key}))}
        vbit = tuple(1 << vidx[v] for v in vehicle)
        tmask = tuple(sum(1 << ridx[r] for r in key) for key in trip)
        return cls(tuple(vehicle), tuple(trip), tuple(weight), vbit, tmask)

    def __len__(self):
        return len(self.vehicle)


@dataclass(frozen=True)
class SearchGraph:
    table: EdgeTable
    live: tuple

    @property
    def vehicles(self) -> list:
        return sorted({self.table.vehicle[e] for e in self.live})

    @property
    def trips(self) -> list:
        return sorted({self.table.trip[e] for e in self.live})

    def __len__(self):
        return len(self.live)


@dataclass
class SearchStats:
    nodes: int = 0
    max_depth: int = 0
    includes: int = 0
    fast_bipartite: int = 0
    fast_single_vehicle: int = 0
    pruned: int = 0
    bound_checked: int = 0
    bound_misses: int = 0


@dataclass
class BnBSolution:
    served: int = 0
    decisions: dict = field(default_factory=dict)
    weight: float = 0.0
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def included(self) -> tuple:
        return tuple(sorted(e for e, s in self.decisions.items() if s == 1))


def search_graph_from_vtg(vtg: VTGraph, vehicles: Mapping[int, Vehicle], p: EconomicParams) -> SearchGraph:
    """Edges ordered by vehicle id, then trips by descending size, then member ids."""
    trips = vtg.trips()
    vs, ts, ws = [], [], []
    for vid in sorted(vtg.vehicle_edges):
        for key in sorted(vtg.vehicle_edges[vid], key=lambda k: (-len(k), k)):
            vs.append(vid)
            ts.append(key)
            ws.append(match_weight(vehicles[vid], trips[key], p))
    table = EdgeTable.build(vs, ts, ws)
    return SearchGraph(table, tuple(range(len(vs))))


def search_graph_from_edges(edges: Sequence[tuple], weights: Sequence[float] | None = None) -> SearchGraph:
    """Search graph with an explicit edge order; trips are member-id tuples."""
    vs = tuple(e[0] for e in edges)
    ts = tuple(tuple(sorted(e[1])) for e in edges)
    ws = tuple(weights) if weights is not None else tuple(0.0 for _ in edges)
    return SearchGraph(EdgeTable.build(vs, ts, ws), tuple(range(len(edges))))


def split_components(g: SearchGraph) -> list:
    """Connected components over vehicles, trips and the passengers they share.

    Trips with a common passenger conflict, so they must land in the same
    component even when no vehicle links them.
    """
    t = g.table
    comps = []  # [vehicle mask, passenger mask, edges]
    for e in g.live:
        vm, rm, es = t.vbit[e], t.tmask[e], [e]
        keep = []
        for c in comps:
            if c[0] & vm or c[1] & rm:
                vm |= c[0]
                rm |= c[1]
                es.extend(c[2])
            else:
                keep.append(c)
        keep.append([vm, rm, es])
        comps = keep
    return [SearchGraph(t, tuple(sorted(c[2]))) for c in sorted(comps, key=lambda c: min(c[2]))]


@dataclass(frozen=True)
class Reduction:
    graph: SearchGraph
    credit: int
    removed: int
    bound: int


def apply_include_reduction(g: SearchGraph, edge: int) -> Reduction:
    """Commit ``edge``: drop its vehicle, its trip and every overlapping trip.

    ``bound`` is d_b + sum of in-degrees of the trip and its overlapping
    neighbours - (number of neighbours) - 1, the edge count the recurrence
    analysis assumes is removed at least.
    """
    if edge not in g.live:
        raise ValueError(f"edge {edge} is not live")
    t = g.table
    vb, rm = t.vbit[edge], t.tmask[edge]
    keep, d_b, in_deg, overlapping = [], 0, 0, set()
    for e in g.live:
        hit_v, hit_t = t.vbit[e] == vb, bool(t.tmask[e] & rm)
        d_b += hit_v
        if hit_t:
            in_deg += 1
            overlapping.add(t.trip[e])
        if not (hit_v or hit_t):
            keep.append(e)
    keep = tuple(keep)
    v1 = t.trip[edge]
    d = len(overlapping) - 1
    bound = d_b + in_deg - d - 1
    return Reduction(SearchGraph(t, keep), len(v1), len(g.live) - len(keep), bound)


def dominance_prune(g: SearchGraph, edge: int) -> bool:
    """True when excluding ``edge`` can only lead to dominated solutions.

    That holds when the edge is its vehicle's last one, its trip has no
    other vehicle, and no other live trip shares a passenger with it: the
    vehicle would end idle while a trip it could serve stays empty.
    """
    if edge not in g.live:
        return False
    t = g.table
    vb, rm = t.vbit[edge], t.tmask[edge]
    for e in g.live:
        if e != edge and (t.vbit[e] == vb or t.tmask[e] & rm):
            return False
    return True


def _key(sol: BnBSolution):
    return (sol.served, round(sol.weight, _DIGITS))


def tie_break_by_weight(solutions: Sequence[BnBSolution]) -> BnBSolution:
    """Greatest weight among equal-served candidates, then the smallest decision vector."""
    if not solutions:
        raise ValueError("no candidate solutions")
    best = solutions[0]
    for sol in solutions[1:]:
        if _better(sol, best):
            best = sol
    return best


def _better(a: BnBSolution, b: BnBSolution) -> bool:
    ka, kb = _key(a), _key(b)
    if ka != kb:
        return ka > kb
    # lexicographically smaller 0/1 decision vector; undecided edges count as 0
    diff = set(a.included) ^ set(b.included)
    return bool(diff) and min(diff) not in a.included


def _solve_bipartite(g: SearchGraph) -> BnBSolution:
    t = g.table
    vids = g.vehicles
    rids = sorted({t.trip[e][0] for e in g.live})
    row = {v: i for i, v in enumerate(vids)}
    col = {r: i for i, r in enumerate(rids)}
    w = np.array([t.weight[e] for e in g.live])
    big = 1.0 + 2.0 * float(np.abs(w).sum())
    value = np.zeros((len(vids), len(rids)))
    edge_at = {}
    for e in g.live:
        i, j = row[t.vehicle[e]], col[t.trip[e][0]]
        value[i, j] = big + t.weight[e]
        edge_at[(i, j)] = e
    rows, cols = linear_sum_assignment(value, maximize=True)
    chosen = sorted(edge_at[(i, j)] for i, j in zip(rows.tolist(), cols.tolist()) if (i, j) in edge_at)
    decisions = {e: 0 for e in g.live}
    decisions.update({e: 1 for e in chosen})
    return BnBSolution(served=len(chosen), decisions=decisions,
                       weight=sum(t.weight[e] for e in chosen))


def _solve_single_vehicle(g: SearchGraph) -> BnBSolution:
    t = g.table
    # on exact ties the latest edge gives the smallest decision vector
    best = min(g.live, key=lambda e: (-len(t.trip[e]), -round(t.weight[e], _DIGITS), -e))
    decisions = {e: 0 for e in g.live}
    decisions[best] = 1
    return BnBSolution(served=len(t.trip[best]), decisions=decisions, weight=t.weight[best])


def _merge(parts: Sequence[BnBSolution]) -> BnBSolution:
    out = BnBSolution()
    for sol in parts:
        out.served += sol.served
        out.weight += sol.weight
        out.decisions.update(sol.decisions)
    return out


def branch_solve(g: SearchGraph, prune: bool = False, fast_paths: bool = True) -> BnBSolution:
    """Exact maximum of passengers served, ties broken by weight."""
    stats = SearchStats()
    limit = len(g.live)

    def solve(sg: SearchGraph, depth: int) -> BnBSolution:
        stats.nodes += 1
        stats.max_depth = max(stats.max_depth, depth)
        if depth > limit:
            raise RuntimeError(f"search depth {depth} exceeds edge count {limit}")
        if not sg.live:
            return BnBSolution()
        comps = split_components(sg)
        if len(comps) > 1:
            return _merge([solve(c, depth) for c in comps])
        t = sg.table
        if fast_paths:
            if all(len(t.trip[e]) == 1 for e in sg.live):
                stats.fast_bipartite += 1
                return _solve_bipartite(sg)
            if len({t.vehicle[e] for e in sg.live}) == 1:
                stats.fast_single_vehicle += 1
                return _solve_single_vehicle(sg)
        e1 = sg.live[0]
        red = apply_include_reduction(sg, e1)
        stats.includes += 1
        stats.bound_checked += 1
        if red.removed < red.bound:
            stats.bound_misses += 1
        inc = solve(red.graph, depth + 1)
        inc = BnBSolution(inc.served + red.credit, {**inc.decisions, e1: 1}, inc.weight + t.weight[e1])
        if prune and dominance_prune(sg, e1):
            stats.pruned += 1
            return inc
        exc = solve(SearchGraph(t, sg.live[1:]), depth + 1)
        exc = BnBSolution(exc.served, {**exc.decisions, e1: 0}, exc.weight)
        return inc if not _better(exc, inc) else exc

    # the exclude chain nests up to |E| calls deep
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 3 * limit + 200))
    try:
        sol = solve(g, 0)
    finally:
        sys.setrecursionlimit(old_limit)
    sol.stats = stats
    return sol


def decode(sol: BnBSolution, g: SearchGraph, vtg: VTGraph, vehicles: Mapping[int, Vehicle],
           p: EconomicParams) -> Assignment:
    trips = vtg.trips()
    t = g.table
    matches = [Match(t.vehicle[e], trips[t.trip[e]]) for e in sol.included]
    return Assignment.from_matches(matches, vehicles, p)


def solve_bnb(vtg: VTGraph, vehicles: Sequence[Vehicle], p: EconomicParams,
              prune: bool = False) -> tuple:
    """Search graph, solution and decoded assignment for a vehicle-trip graph."""
    by_id = {b.id: b for b in vehicles}
    g = search_graph_from_vtg(vtg, by_id, p)
    sol = branch_solve(g, prune=prune)
    return decode(sol, g, vtg, by_id, p), sol, g
