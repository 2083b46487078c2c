"""Ground-truth solvers used only to check the heuristic and the exact search."""
from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from .model import EconomicParams, Vehicle, match_weight
from .vtg import VTGraph

MAX_REQUESTS = 12
MAX_VEHICLES = 5
_DIGITS = 9


class OracleGuardError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best_served: int
    best_weight: float
    optimal_assignments: int
    elapsed: float


def brute_force_optimal(vtg: VTGraph, vehicles: Sequence[Vehicle], p: EconomicParams) -> OracleResult:
    """Exhaustive optimum over every vehicle-to-trip assignment in ``vtg``.

    Vehicles are visited in id order; each stays idle or takes one of its
    trips that shares no passenger with trips already taken. Sub-results
    are memoized on (vehicle position, passengers used). The count is the
    number of distinct assignments reaching the best served total.
    """
    start = time.perf_counter()
    rids = sorted(vtg.request_edges)
    if len(rids) > MAX_REQUESTS or len(vehicles) > MAX_VEHICLES:
        raise OracleGuardError(f"oracle limited to {MAX_REQUESTS} requests and "
                               f"{MAX_VEHICLES} vehicles, got {len(rids)} and {len(vehicles)}")
    bit = {r: 1 << i for i, r in enumerate(rids)}
    trips = vtg.trips()
    fleet = sorted(vehicles, key=lambda b: b.id)
    options = []
    for b in fleet:
        opts = []
        for key in vtg.vehicle_edges.get(b.id, ()):
            mask = 0
            for r in key:
                mask |= bit[r]
            opts.append((mask, len(key), match_weight(b, trips[key], p)))
        options.append(opts)

    @lru_cache(maxsize=None)
    def best(i: int, used: int):
        if i == len(fleet):
            return 0, 0.0, 1
        served, weight, count = best(i + 1, used)
        for mask, size, w in options[i]:
            if mask & used:
                continue
            s, ww, c = best(i + 1, used | mask)
            s, ww = s + size, ww + w
            if s > served:
                served, weight, count = s, ww, c
            elif s == served:
                weight = max(weight, ww)
                count += c
        return served, weight, count

    served, weight, count = best(0, 0)
    return OracleResult(served, round(weight, _DIGITS), count, time.perf_counter() - start)


def reference_max_flow(net) -> int:
    """Edmonds-Karp max-flow value on the capacities of a FlowNetwork."""
    g = nx.DiGraph()
    for (u, w), c in net.cap.items():
        g.add_edge(repr(u), repr(w), capacity=c)
    s, t = repr(("s",)), repr(("t",))
    if s not in g or t not in g:
        return 0
    return int(nx.maximum_flow_value(g, s, t, flow_func=edmonds_karp))
