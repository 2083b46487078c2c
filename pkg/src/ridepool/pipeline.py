"""Grouping, both solvers, validation and the JSON run report."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .bench import node_ratio
from .bnb import solve_bnb
from .flownet import solve_flow
from .grouping import partition_stable_groups
from .instance import Instance, InstanceConfig
from .model import Assignment, Match, synthesize_trip, validate_assignment
from .oracle import MAX_REQUESTS, MAX_VEHICLES, brute_force_optimal
from .vtg import build_vtg

PRECISION = 6


def _round(obj):
    if isinstance(obj, float):
        return round(obj, PRECISION) + 0.0
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def assignment_to_dict(a: Assignment) -> dict:
    return {
        "served": a.served,
        "weight": a.weight,
        "matches": [{"vehicle": m.vehicle_id, "members": list(m.trip.key)}
                    for m in sorted(a.matches, key=lambda m: m.vehicle_id)],
    }


def assignment_from_dict(data, instance: Instance) -> Assignment:
    """Rebuild an assignment from vehicle/member lists; trips re-synthesized."""
    reqs = instance.request_map
    matches = []
    for m in data.get("matches", []):
        members = [reqs[r] for r in m["members"] if r in reqs]
        trip = synthesize_trip(members, instance.params) if members else None
        if trip is None or len(members) != len(m["members"]):
            raise ValueError(f"match for vehicle {m['vehicle']} names unknown requests")
        matches.append(Match(m["vehicle"], trip))
    rider_of = {r: m.vehicle_id for m in matches for r in m.trip.members}
    return Assignment(matches=matches, rider_of=rider_of,
                      served=data.get("served", sum(m.trip.size for m in matches)),
                      weight=data.get("weight", 0.0))


@dataclass
class RunReport:
    summary: dict = field(default_factory=dict)
    solvers: dict = field(default_factory=dict)
    oracle: dict | None = None

    def to_dict(self) -> dict:
        out = {"instance": self.summary, "solvers": self.solvers}
        if self.oracle is not None:
            out["oracle"] = self.oracle
        return _round(out)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @property
    def violations(self) -> int:
        return sum(len(s["violations"]) for s in self.solvers.values())


def _violations(a, instance, config):
    found = validate_assignment(a, instance.request_map, instance.vehicle_map, instance.params,
                                strict_arrival=config.strict_arrival)
    return [f"{v.constraint}: {v.detail}" for v in found]


def run_pipeline(instance: Instance, config: InstanceConfig | None = None,
                 timing: bool = False, oracle: bool = True) -> RunReport:
    """Solve ``instance`` with the configured solvers and validate every answer.

    Wall-clock times are only reported with ``timing=True`` so that the
    default report is byte-stable. The oracle runs when the instance is
    within its size guard.
    """
    config = config or InstanceConfig()
    p = instance.params
    report = RunReport()
    report.summary = {"requests": len(instance.requests), "vehicles": len(instance.vehicles)}
    vtg = None

    if config.solver in ("flow", "both"):
        t0 = time.perf_counter()
        groups = partition_stable_groups(instance.requests, p, config.mode)
        assignment, net, scores, stats = solve_flow(groups, instance.vehicles, instance.request_map, p)
        elapsed = time.perf_counter() - t0
        report.summary["groups"] = len(groups.all_groups())
        report.summary["multi_member_groups"] = len(groups.groups)
        entry = {
            **assignment_to_dict(assignment),
            "score": scores.total,
            "violations": _violations(assignment, instance, config),
            "stats": {"flow": stats.phase1_flow, "augmentations": stats.augmentations,
                      "reallocation_moves": stats.moves, "phase1_score": stats.phase1_total,
                      "network_edges": len(net.cap)},
        }
        if timing:
            entry["elapsed"] = elapsed
        report.solvers["flow"] = entry

    if config.solver in ("bnb", "both"):
        t0 = time.perf_counter()
        vtg = build_vtg(instance.requests, instance.vehicles, p)
        assignment, sol, g = solve_bnb(vtg, instance.vehicles, p, prune=config.prune)
        elapsed = time.perf_counter() - t0
        report.summary["trips"] = len(vtg.trips())
        report.summary["edges"] = len(g.live)
        s = sol.stats
        entry = {
            **assignment_to_dict(assignment),
            "violations": _violations(assignment, instance, config),
            "stats": {"nodes_expanded": s.nodes, "max_depth": s.max_depth, "includes": s.includes,
                      "fast_bipartite": s.fast_bipartite, "fast_single_vehicle": s.fast_single_vehicle, "pruned": s.pruned,
                      "node_ratio_1_2321": node_ratio(s.nodes, len(g.live))},
        }
        if timing:
            entry["elapsed"] = elapsed
        report.solvers["bnb"] = entry

    guarded = len(instance.requests) <= MAX_REQUESTS and len(instance.vehicles) <= MAX_VEHICLES
    if oracle and guarded:
        vtg = vtg or build_vtg(instance.requests, instance.vehicles, p)
        res = brute_force_optimal(vtg, instance.vehicles, p)
        report.oracle = {"served": res.best_served, "weight": res.best_weight,
                         "optimal_assignments": res.optimal_assignments,
                         "gap": {name: res.best_served - e["served"] for name, e in report.solvers.items()}}
    return report
