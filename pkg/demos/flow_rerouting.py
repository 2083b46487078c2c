"""How the max-score augmenting path reroutes a taxi, on a hand-built network.

Run with ``python demos/flow_rerouting.py``.
"""
from ridepool.flownet import (
    SINK,
    SOURCE,
    FlowNetwork,
    ScoreState,
    find_max_score_augmenting_path,
    one_augment,
    reallocate,
    super_node,
    taxi,
)
from ridepool.model import GeoPoint, Vehicle


def network(sizes, reach):
    """Super node k holds sizes[k] riders; reach maps taxi id to the nodes it may serve."""
    groups, nxt = [], 0
    for s in sizes:
        groups.append(list(range(nxt, nxt + s)))
        nxt += s
    net = FlowNetwork(groups=groups, vehicles={v: Vehicle(v, GeoPoint(0, 0)) for v in reach})
    for k, g in enumerate(groups):
        net.add_edge(super_node(k), SINK, -(-len(g) // 4))
    for v, nodes in reach.items():
        net.add_edge(SOURCE, taxi(v), 1)
        for k in nodes:
            net.add_edge(taxi(v), super_node(k), 1)
    net.finalize()
    return net


# Group A has 2 riders, group B has 4. Taxi 0 can reach both; taxi 1 only A.
net = network([2, 4], {0: [0, 1], 1: [0]})
scores = ScoreState.fresh(net)

# Suppose taxi 0 went to A first.
one_augment(net, scores, [SOURCE, taxi(0), super_node(0), SINK])
print("after taxi 0 -> A:", scores.awarded, "total", scores.total)

# The best residual path now sends taxi 1 into A and pushes taxi 0 on to B.
# Taxi 0 gives back its 2 riders and takes 4; taxi 1 picks up the 2.
path = find_max_score_augmenting_path(net, scores)
print("max-score path:", " -> ".join(map(str, path)))
one_augment(net, scores, path)
print("after reroute:", scores.awarded, "total", scores.total)

# Reallocation moves a lone taxi to an open node only when it gains.
# Starting it on a 1-rider group next to a 5-rider group shows one move.
net = network([1, 5], {0: [0, 1]})
scores = ScoreState.fresh(net)
one_augment(net, scores, [SOURCE, taxi(0), super_node(0), SINK])
stats = reallocate(net, scores, trace=True)
print(f"reallocation: {stats.moves} move, awards {scores.awarded}, trace {stats.trace}")
