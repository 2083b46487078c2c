"""Walk through one small instance: groups, trips, both solvers, and the exhaustive optimum.

Run with ``python demos/small_instance.py``.
"""
from ridepool.bnb import solve_bnb
from ridepool.flownet import solve_flow
from ridepool.grouping import partition_stable_groups
from ridepool.instance import compact_config, generate_random_instance
from ridepool.model import validate_assignment
from ridepool.oracle import brute_force_optimal
from ridepool.vtg import build_vtg

# Eight requests and four taxis inside a 500 m square. The compact config
# widens the closeness thresholds so that pooling actually happens.
config = compact_config()
inst = generate_random_instance(1, 8, 4, config)
p = inst.params
print(f"{len(inst.requests)} requests, {len(inst.vehicles)} vehicles")

# The heuristic first partitions requests into stable groups: sets whose
# members all pairwise gain at least as much from sharing as they lose.
groups = partition_stable_groups(inst.requests, p, mode="greedy")
print("stable groups:", [sorted(g) for g in groups.groups], "singles:", sorted(groups.leftover))

# Each taxi then routes to one group through a max-flow network; a taxi
# can carry at most four members of the group it lands on.
flow, net, scores, stats = solve_flow(groups, inst.vehicles, inst.request_map, p)
print(f"flow: {stats.augmentations} augmentations, {stats.moves} moves, score {scores.total}")
for m in flow.matches:
    print(f"  taxi {m.vehicle_id} -> riders {list(m.trip.key)}")

# The exact solver works on every feasible trip of up to four riders
# instead of on fixed groups, and branches over vehicle-trip edges.
vtg = build_vtg(inst.requests, inst.vehicles, p)
print("trips per size:", [len(layer) for layer in vtg.layers])
exact, sol, g = solve_bnb(vtg, inst.vehicles, p)
print(f"branch-and-bound: {sol.stats.nodes} nodes over {len(g.live)} edges")
for m in exact.matches:
    print(f"  taxi {m.vehicle_id} -> riders {list(m.trip.key)}")

# Both answers are re-checked from scratch, and compared to the optimum
# found by trying every assignment.
ref = brute_force_optimal(vtg, inst.vehicles, p)
for name, a in (("flow", flow), ("branch-and-bound", exact)):
    bad = validate_assignment(a, inst.request_map, inst.vehicle_map, p)
    print(f"{name}: serves {a.served} of optimum {ref.best_served}, {len(bad)} violations")
