"""Synthetic benchmark suites: flow-heuristic scaling and branch-count reporting."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bnb import branch_solve, search_graph_from_vtg
from .flownet import assign_passengers_to_taxis, build_flow_network, solve_modified_ff
from .instance import InstanceConfig, generate_random_instance, compact_config
from .model import EconomicParams, GeoPoint, Request, Vehicle
from .vtg import build_vtg

BRANCH_BASE = 1.2321


@dataclass
class CliqueInstance:
    requests: list
    vehicles: list
    groups: list
    params: EconomicParams


def clique_instance(n_requests: int, n_vehicles: int, seed: int = 0, side: float = 6000.0,
                    max_group: int = 8, p: EconomicParams | None = None) -> CliqueInstance:
    """Requests pre-grouped into tight spatial clusters in a fixed square.

    Group sizes are uniform in 1..max_group. Members of a group start and
    end within 30 m of each other and depart within a minute, so each group
    is a clique of mutually stable requests. Taxis and group origins are
    uniform in the same ``side`` x ``side`` square, so with the default
    pickup radius a taxi reaches about an eighth of all groups.
    """
    p = p or EconomicParams()
    rng = np.random.default_rng(seed)
    sizes = []
    while sum(sizes) < n_requests:
        sizes.append(int(min(rng.integers(1, max_group + 1), n_requests - sum(sizes))))
    requests, groups = [], []
    for size in sizes:
        cx, cy = rng.uniform(0, side, size=2)
        ang = rng.uniform(0, 2 * math.pi)
        length = rng.uniform(1500, 3000)
        dx, dy = cx + length * math.cos(ang), cy + length * math.sin(ang)
        t0 = rng.uniform(0, 900)
        members = []
        for _ in range(size):
            o = GeoPoint(float(cx + rng.uniform(-30, 30)), float(cy + rng.uniform(-30, 30)))
            d = GeoPoint(float(dx + rng.uniform(-30, 30)), float(dy + rng.uniform(-30, 30)))
            dt = float(t0 + rng.uniform(0, 60))
            rid = len(requests)
            requests.append(Request(rid, o, d, dt, dt + 3600.0))
            members.append(rid)
        groups.append(members)
    vehicles = [Vehicle(i, GeoPoint(float(x), float(y)))
                for i, (x, y) in enumerate(rng.uniform(0, side, size=(n_vehicles, 2)))]
    return CliqueInstance(requests, vehicles, groups, p)


def time_flow(inst: CliqueInstance, repeats: int = 1) -> tuple:
    """Best wall time of build + both phases + passenger assignment."""
    reqs = {r.id: r for r in inst.requests}
    best, served = math.inf, 0
    for _ in range(repeats):
        t0 = time.perf_counter()
        net = build_flow_network(inst.groups, inst.vehicles, reqs, inst.params)
        _, scores, stats = solve_modified_ff(net)
        a = assign_passengers_to_taxis(net, scores, reqs, inst.params)
        best = min(best, time.perf_counter() - t0)
        served = a.served
    return best, served, stats


def scaling_suite(p_sizes=(100, 1000, 10000), b_sizes=(10, 100, 1000), seed: int = 0) -> dict:
    """Time the flow pipeline over a grid and fit log time against log(|B||P| + |B|^2)."""
    rows = []
    for n_p in p_sizes:
        for n_b in b_sizes:
            inst = clique_instance(n_p, n_b, seed=seed)
            repeats = 3 if n_p * n_b <= 100_000 else 1
            secs, served, stats = time_flow(inst, repeats=repeats)
            rows.append({"requests": n_p, "vehicles": n_b, "groups": len(inst.groups),
                         "work": n_b * n_p + n_b * n_b, "seconds": secs, "served": served,
                         "augmentations": stats.augmentations, "moves": stats.moves})
    x = np.log([r["work"] for r in rows])
    y = np.log([r["seconds"] for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    return {"rows": rows, "slope": float(slope), "intercept": float(intercept)}


def branch_count_suite(n_instances: int = 30, seed: int = 0,
                       config: InstanceConfig | None = None) -> dict:
    """Branch-and-bound node counts on guarded random instances."""
    config = config or compact_config()
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(n_instances):
        n_req, n_veh = int(rng.integers(4, 9)), int(rng.integers(2, 5))
        inst = generate_random_instance(int(rng.integers(2**31)), n_req, n_veh, config)
        vtg = build_vtg(inst.requests, inst.vehicles, inst.params)
        g = search_graph_from_vtg(vtg, inst.vehicle_map, inst.params)
        sol = branch_solve(g)
        n_e = len(g.live)
        rows.append({"instance": k, "requests": n_req, "vehicles": n_veh, "edges": n_e,
                     "nodes_expanded": sol.stats.nodes, "served": sol.served,
                     "ratio": node_ratio(sol.stats.nodes, n_e),
                     "within_trivial_bound": sol.stats.nodes <= 2 ** (n_e + 1)})
    return {"rows": rows, "base": BRANCH_BASE}


def node_ratio(nodes: int, n_edges: int) -> float:
    """nodes / 1.2321**n_edges, computed in log space."""
    return math.exp(math.log(nodes) - n_edges * math.log(BRANCH_BASE)) if nodes else 0.0


def run_bench(seed: int = 0, p_sizes=(100, 1000, 10000), b_sizes=(10, 100, 1000),
              n_branch: int = 30) -> dict:
    t0 = time.perf_counter()
    out = {"scaling": scaling_suite(p_sizes, b_sizes, seed),
           "branch_counts": branch_count_suite(n_branch, seed)}
    out["elapsed"] = time.perf_counter() - t0
    return out
