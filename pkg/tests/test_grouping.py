from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import cluster, req
from ridepool.grouping import (
    GroupingError,
    build_close_sets,
    is_stable_pair,
    partition_stable_groups,
    stable_pair_graph,
)
from ridepool.model import EconomicParams, is_close, synthesize_trip


def random_requests(draw_rows):
    out = []
    for i, (ox, oy, dx, dy, dt) in enumerate(draw_rows):
        if (ox, oy) == (dx, dy):
            dy += 1.0
        out.append(req(i, ox, oy, dx, dy, dt))
    return out


rows = st.lists(st.tuples(*(st.floats(0, 1500) for _ in range(4)), st.floats(0, 600)),
                min_size=0, max_size=9)


def test_close_sets_examples(params):
    assert build_close_sets([req(0, 0, 0, 10, 10)], params).neighbors == {0: set()}
    same = build_close_sets(cluster(0, 2), params).neighbors
    assert same == {0: {1}, 1: {0}}


@given(rows)
def test_close_sets_match_pairwise(data):
    p = EconomicParams()
    rs = random_requests(data)
    got = build_close_sets(rs, p).neighbors
    for i in rs:
        expect = {j.id for j in rs if j.id != i.id and is_close(i, j, p)}
        assert got[i.id] == expect
        assert i.id not in got[i.id]
        assert all(i.id in got[j] for j in got[i.id])


def test_close_sets_chunking_agrees():
    p = EconomicParams(delta=3000, t_window=900)
    rs = [req(i, (i * 37) % 2000, (i * 91) % 2000, 5000 + (i * 13) % 900, 4000, (i * 7) % 600)
          for i in range(300)]
    got = build_close_sets(rs, p).neighbors
    for i in (0, 17, 150, 299):
        assert got[i] == {j.id for j in rs if j.id != i and is_close(rs[i], j, p)}


def test_stable_pair_examples():
    p = EconomicParams()
    a, b = cluster(0, 2)
    assert is_stable_pair(a, b, p)
    assert not is_stable_pair(a, req(1, 100, 0, 100, 2000), EconomicParams(walk_cost=10.0))


def test_stable_pair_boundary_equality():
    # powers of two keep loss and gain exact: loss = 200 / 1024 = gain = 0.25 * 800 / 1024
    p = EconomicParams(fare_base=0.0, fare_rate=2 ** -10, walk_cost=2 ** -10, wait_cost=0.0,
                       discount_per_corider=0.25, discount_cap=0.5)
    a, b = req(0, 0, 0, 0, 800), req(1, 200, 0, 200, 800)
    pr = synthesize_trip([a, b], p).pricing
    assert pr[0].loss == pr[0].gain
    assert is_stable_pair(a, b, p)


def _path(params):
    d = params.delta
    return [req(0, 0, 0, 0, 2000), req(1, d, 0, d, 2000), req(2, 2 * d, 0, 2 * d, 2000)]


def test_partition_examples(params):
    empty = partition_stable_groups([], params)
    assert empty.groups == [] and empty.leftover == set()
    four = partition_stable_groups(cluster(0, 4), params)
    assert four.groups == [{0, 1, 2, 3}] and not four.leftover


def test_partition_path(params):
    rs = _path(params)
    adj = stable_pair_graph(rs, params)
    assert adj == {0: {1}, 1: {0, 2}, 2: {1}}
    with pytest.raises(GroupingError) as err:
        partition_stable_groups(rs, params, mode="strict")
    assert err.value.triple == (0, 1, 2)
    greedy = partition_stable_groups(rs, params, mode="greedy")
    assert greedy.groups == [{0, 1}] and greedy.leftover == {2}


def _clique_partitions(nodes, adj):
    if not nodes:
        yield []
        return
    first, rest = nodes[0], nodes[1:]
    for k in range(len(rest) + 1):
        for others in combinations(rest, k):
            block = (first,) + others
            if all(b in adj[a] for a, b in combinations(block, 2)):
                remaining = [n for n in rest if n not in others]
                for tail in _clique_partitions(remaining, adj):
                    yield [set(block)] + tail


def test_path_greedy_matches_enumeration(params):
    rs = _path(params)
    adj = stable_pair_graph(rs, params)
    parts = list(_clique_partitions([0, 1, 2], adj))
    # largest block first, then smallest ids
    best = min(parts, key=lambda pt: sorted((-len(b), sorted(b)) for b in pt))
    greedy = partition_stable_groups(rs, params, mode="greedy")
    assert sorted(map(sorted, best)) == sorted(map(sorted, greedy.groups + [{r} for r in greedy.leftover]))


@given(rows, st.sampled_from(["strict", "greedy"]))
def test_partition_invariants(data, mode):
    p = EconomicParams(delta=800, t_window=600)
    rs = random_requests(data)
    by_id = {r.id: r for r in rs}
    try:
        out = partition_stable_groups(rs, p, mode=mode)
    except GroupingError as err:
        assert mode == "strict"
        i, j, k = err.triple
        adj = stable_pair_graph(rs, p)
        assert j in adj[i] and k in adj[j] and k not in adj[i]
        return
    seen = set()
    for g in out.groups:
        assert len(g) > 1 and not (g & seen)
        seen |= g
        for a, b in combinations(sorted(g), 2):
            assert is_stable_pair(by_id[a], by_id[b], p)
    assert not (seen & out.leftover)
    assert seen | out.leftover == set(by_id)
    again = partition_stable_groups(rs, p, mode=mode)
    assert again.groups == out.groups and again.leftover == out.leftover
    if mode == "strict":
        adj = stable_pair_graph(rs, p)
        for g in out.groups:
            for a in g:
                assert adj[a] | {a} == g


def test_unknown_mode(params):
    with pytest.raises(ValueError):
        partition_stable_groups([], params, mode="fuzzy")
