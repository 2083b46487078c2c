import random

import pytest
from hypothesis import HealthCheck, settings

from ridepool.flownet import SINK, SOURCE, FlowNetwork, super_node, taxi
from ridepool.model import EconomicParams, GeoPoint, Request, Vehicle

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def req(rid, ox, oy, dx, dy, dt=0.0, at=None):
    return Request(rid, GeoPoint(ox, oy), GeoPoint(dx, dy), dt, dt + 7200.0 if at is None else at)


def veh(vid, x, y):
    return Vehicle(vid, GeoPoint(x, y))


def cluster(first_id, n, x=0.0, y=0.0, length=2000.0, dt=0.0):
    """n requests sharing one itinerary, so every subset pools cleanly."""
    return [req(first_id + i, x, y, x, y + length, dt) for i in range(n)]


def manual_network(sizes, adjacency, vehicle_ids=None):
    """FlowNetwork from group sizes and (vehicle id -> group indices)."""
    groups, nxt = [], 0
    for s in sizes:
        groups.append(list(range(nxt, nxt + s)))
        nxt += s
    vids = sorted(vehicle_ids if vehicle_ids is not None else adjacency)
    net = FlowNetwork(groups=groups, vehicles={v: veh(v, 0.0, 0.0) for v in vids})
    for k, g in enumerate(groups):
        net.add_edge(super_node(k), SINK, -(-len(g) // 4))
    for v in vids:
        if adjacency.get(v):
            net.add_edge(SOURCE, taxi(v), 1)
            for k in sorted(adjacency[v]):
                net.add_edge(taxi(v), super_node(k), 1)
    net.finalize()
    return net


def random_network(rng: random.Random, max_vehicles=8, max_groups=6, max_size=10, density=None):
    n_b = rng.randint(0, max_vehicles)
    sizes = [rng.randint(1, max_size) for _ in range(rng.randint(0, max_groups))]
    dens = rng.random() if density is None else density
    adjacency = {v: [k for k in range(len(sizes)) if rng.random() < dens] for v in range(n_b)}
    return manual_network(sizes, adjacency, vehicle_ids=range(n_b))


@pytest.fixture
def params():
    return EconomicParams()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def jittered_requests(rng: random.Random, n, n_hubs=2, spread=150.0, dt_spread=200.0):
    """Requests scattered around a few shared itineraries, so triples and quads form."""
    hubs = [(rng.uniform(0, 800), rng.uniform(0, 800), rng.uniform(1500, 3000)) for _ in range(n_hubs)]
    out = []
    for i in range(n):
        x, y, length = rng.choice(hubs)
        j = lambda: rng.uniform(-spread, spread)  # noqa: E731
        out.append(req(i, x + j(), y + j(), x + j(), y + length + j(), rng.uniform(0, dt_spread)))
    return out


def jittered_vehicles(rng: random.Random, n):
    return [veh(i, rng.uniform(-500, 1300), rng.uniform(-500, 1300)) for i in range(n)]
