"""Close sets, stable pairs and the partition of passengers into stable groups."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import EconomicParams, Request, is_close, synthesize_trip


class GroupingError(ValueError):
    """Stable-pair graph is not a disjoint union of cliques (strict mode)."""

    def __init__(self, triple):
        self.triple = tuple(triple)
        i, j, k = self.triple
        super().__init__(f"requests {i}-{j} and {j}-{k} are stable pairs but {i}-{k} is not")


@dataclass
class CloseSets:
    neighbors: dict = field(default_factory=dict)


@dataclass
class StableGroups:
    groups: list = field(default_factory=list)
    leftover: set = field(default_factory=set)

    def all_groups(self) -> list:
        """Multi-member groups followed by every leftover request as a singleton."""
        return [sorted(g) for g in self.groups] + [[rid] for rid in sorted(self.leftover)]


def _close_pairs(requests: Sequence[Request], p: EconomicParams, chunk: int = 256):
    """Index pairs (a, b), a < b, of close requests, computed in row blocks."""
    o = np.array([[r.origin.x, r.origin.y] for r in requests], dtype=float)
    d = np.array([[r.destination.x, r.destination.y] for r in requests], dtype=float)
    t = np.array([r.depart_time for r in requests], dtype=float)
    n = len(requests)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        close = np.abs(o[lo:hi, None, :] - o[None, :, :]).sum(axis=2) <= p.delta
        close &= np.abs(d[lo:hi, None, :] - d[None, :, :]).sum(axis=2) <= p.delta
        close &= np.abs(t[lo:hi, None] - t[None, :]) <= p.t_window
        ii, jj = np.nonzero(close)
        keep = jj > ii + lo
        yield from zip((ii[keep] + lo).tolist(), jj[keep].tolist())


def build_close_sets(requests: Iterable[Request], p: EconomicParams) -> CloseSets:
    requests = list(requests)
    neighbors = {r.id: set() for r in requests}
    for a, b in _close_pairs(requests, p):
        ra, rb = requests[a], requests[b]
        neighbors[ra.id].add(rb.id)
        neighbors[rb.id].add(ra.id)
    return CloseSets(neighbors)


def is_stable_pair(i: Request, j: Request, p: EconomicParams) -> bool:
    if not is_close(i, j, p):
        return False
    trip = synthesize_trip([i, j], p)
    return all(pr.gain >= pr.loss for pr in trip.pricing.values())


def stable_pair_graph(requests: Iterable[Request], p: EconomicParams,
                      close: CloseSets | None = None) -> dict:
    requests = list(requests)
    by_id = {r.id: r for r in requests}
    close = close or build_close_sets(requests, p)
    adj = {r.id: set() for r in requests}
    for i, nbrs in close.neighbors.items():
        for j in nbrs:
            if i < j and is_stable_pair(by_id[i], by_id[j], p):
                adj[i].add(j)
                adj[j].add(i)
    return adj


def _components(adj: dict) -> list:
    seen = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _non_clique_triple(comp: list, adj: dict):
    for j in comp:
        nbrs = sorted(adj[j])
        for a in range(len(nbrs)):
            for b in range(a + 1, len(nbrs)):
                if nbrs[b] not in adj[nbrs[a]]:
                    return nbrs[a], j, nbrs[b]
    return None


def _peel_cliques(comp: list, adj: dict) -> list:
    alive = set(comp)
    cliques = []
    while alive:
        seed = min(alive, key=lambda u: (-len(adj[u] & alive), u))
        clique = [seed]
        for w in sorted(adj[seed] & alive):
            if all(w in adj[c] for c in clique):
                clique.append(w)
        cliques.append(sorted(clique))
        alive -= set(clique)
    return cliques


def partition_stable_groups(requests: Iterable[Request], p: EconomicParams,
                            mode: str = "strict") -> StableGroups:
    """Connected components of the stable-pair graph, one group each.

    In ``strict`` mode every component must be a clique, otherwise
    :class:`GroupingError` names an offending path i-j-k. ``greedy`` mode
    splits a non-clique component by repeatedly peeling a maximal clique
    grown from its highest-degree vertex (ties by smallest id).
    """
    if mode not in ("strict", "greedy"):
        raise ValueError(f"unknown grouping mode {mode!r}")
    adj = stable_pair_graph(requests, p)
    out = StableGroups()
    for comp in _components(adj):
        triple = _non_clique_triple(comp, adj)
        if triple is None:
            parts = [comp]
        elif mode == "strict":
            raise GroupingError(triple)
        else:
            parts = _peel_cliques(comp, adj)
        for part in parts:
            if len(part) > 1:
                out.groups.append(set(part))
            else:
                out.leftover.add(part[0])
    out.groups.sort(key=lambda g: min(g))
    return out
