"""Vehicle-trip graph: layered feasible trips of size 1..4 with vehicle edges."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .grouping import build_close_sets, is_stable_pair
from .model import (
    VEHICLE_CAPACITY,
    EconomicParams,
    Request,
    TripPlan,
    Vehicle,
    driver_economics,
    passenger_feasible,
    synthesize_trip,
)

NU = VEHICLE_CAPACITY


@dataclass
class ShareabilityGraph:
    rr_edges: set = field(default_factory=set)
    vr_edges: set = field(default_factory=set)


@dataclass
class VTGraph:
    """Trip layers plus request and vehicle adjacency.

    ``layers[j-1]`` maps a sorted member-id tuple to its TripPlan for
    trips of size j. ``vehicle_edges`` maps vehicle id to trip keys.
    """
    layers: list = field(default_factory=lambda: [dict() for _ in range(NU)])
    request_edges: dict = field(default_factory=dict)
    vehicle_edges: dict = field(default_factory=dict)

    def trips(self) -> dict:
        out = {}
        for layer in self.layers:
            out.update(layer)
        return out

    def trip_keys(self) -> list:
        return [key for layer in self.layers for key in sorted(layer)]

    def edges(self) -> list:
        return [(vid, key) for vid in sorted(self.vehicle_edges) for key in self.vehicle_edges[vid]]

    def check_downward_closure(self) -> list:
        """Trips with a missing (j-1)-subset; empty when closed."""
        bad = []
        for j in range(2, NU + 1):
            below = self.layers[j - 2]
            for key in self.layers[j - 1]:
                if any(sub not in below for sub in combinations(key, j - 1)):
                    bad.append(key)
        return bad


def _pair(a, b) -> tuple:
    return (a, b) if a < b else (b, a)


def build_shareability_graph(requests: Iterable[Request], vehicles: Iterable[Vehicle],
                             p: EconomicParams) -> ShareabilityGraph:
    requests = sorted(requests, key=lambda r: r.id)
    vehicles = sorted(vehicles, key=lambda b: b.id)
    by_id = {r.id: r for r in requests}
    g = ShareabilityGraph()
    for i, nbrs in build_close_sets(requests, p).neighbors.items():
        for j in nbrs:
            if i >= j or not is_stable_pair(by_id[i], by_id[j], p):
                continue
            if passenger_feasible(synthesize_trip([by_id[i], by_id[j]], p), p):
                g.rr_edges.add((i, j))
    for r in requests:
        solo = synthesize_trip([r], p)
        for b in vehicles:
            if driver_economics(b, solo, p).willing:
                g.vr_edges.add((b.id, r.id))
    return g


def _any_willing(trip: TripPlan, vehicles: Sequence[Vehicle], p: EconomicParams) -> bool:
    return any(driver_economics(b, trip, p).willing for b in vehicles)


def generate_trip_layers(G: ShareabilityGraph, requests: Iterable[Request],
                         vehicles: Iterable[Vehicle], p: EconomicParams) -> VTGraph:
    """Grow trips layer by layer, admitting only downward-closed feasible sets.

    Edges of the final graph are attached by :func:`attach_vehicle_edges`,
    which is called here so the returned graph is complete.
    """
    by_id = {r.id: r for r in requests}
    vehicles = sorted(vehicles, key=lambda b: b.id)
    vtg = VTGraph()
    t1 = vtg.layers[0]
    solo_ok = {rid for _, rid in G.vr_edges}
    for rid in sorted(solo_ok):
        t1[(rid,)] = synthesize_trip([by_id[rid]], p)
    t2 = vtg.layers[1]
    for i, j in sorted(G.rr_edges):
        if (i,) in t1 and (j,) in t1:
            trip = synthesize_trip([by_id[i], by_id[j]], p)
            if _any_willing(trip, vehicles, p):
                t2[(i, j)] = trip
    for j in range(3, NU + 1):
        below = vtg.layers[j - 2]
        layer = vtg.layers[j - 1]
        keys = sorted(below)
        rejected = set()
        # two (j-1)-trips whose union has size j share j-2 members
        by_prefix = {}
        for key in keys:
            for drop in range(len(key)):
                by_prefix.setdefault(key[:drop] + key[drop + 1:], []).append(key)
        for bucket in by_prefix.values():
            for a, b in combinations(bucket, 2):
                cand = tuple(sorted(set(a) | set(b)))
                if len(cand) != j or cand in layer or cand in rejected:
                    continue
                if not all(sub in below for sub in combinations(cand, j - 1)):
                    rejected.add(cand)
                    continue
                trip = synthesize_trip([by_id[r] for r in cand], p)
                if passenger_feasible(trip, p) and _any_willing(trip, vehicles, p):
                    layer[cand] = trip
                else:
                    rejected.add(cand)
    for layer_idx in range(NU):
        vtg.layers[layer_idx] = dict(sorted(vtg.layers[layer_idx].items()))
    return attach_vehicle_edges(vtg, vehicles, p)


def _index_requests(vtg: VTGraph):
    vtg.request_edges = {}
    for layer in vtg.layers:
        for key in layer:
            for rid in key:
                vtg.request_edges.setdefault(rid, []).append(key)


def attach_vehicle_edges(vtg: VTGraph, vehicles: Iterable[Vehicle], p: EconomicParams) -> VTGraph:
    """Recompute every vehicle-trip edge and drop trips nobody will drive.

    Dropping a trip can break closure for larger trips, so removal cascades
    upward until the layers are closed again.
    """
    vehicles = sorted(vehicles, key=lambda b: b.id)
    while True:
        edges = {b.id: [] for b in vehicles}
        served = set()
        for layer in vtg.layers:
            for key, trip in layer.items():
                for b in vehicles:
                    if driver_economics(b, trip, p).willing:
                        edges[b.id].append(key)
                        served.add(key)
        changed = False
        for j, layer in enumerate(vtg.layers):
            below = vtg.layers[j - 1] if j else None
            for key in list(layer):
                orphan = key not in served
                open_below = below is not None and any(
                    sub not in below for sub in combinations(key, j))
                if orphan or open_below:
                    del layer[key]
                    changed = True
        if not changed:
            break
    for vid in edges:
        edges[vid].sort(key=lambda k: (-len(k), k))
    vtg.vehicle_edges = {vid: keys for vid, keys in edges.items() if keys}
    _index_requests(vtg)
    return vtg


def build_vtg(requests: Sequence[Request], vehicles: Sequence[Vehicle], p: EconomicParams) -> VTGraph:
    return generate_trip_layers(build_shareability_graph(requests, vehicles, p), requests, vehicles, p)
