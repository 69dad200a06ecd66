"""Baseline oblivious adversary: random connected graph per round.

Each round is a uniformly random labeled spanning tree (Wilson's algorithm on
the complete graph) plus every non-tree edge independently with a given
probability.  Connectivity per round holds by construction.
"""

from __future__ import annotations

import random

from .core import AdversarySchedule, NetworkSnapshot, canonical_edge, derive_rng


def random_spanning_tree(n: int, rng: random.Random) -> set[tuple[int, int]]:
    """Uniform labeled spanning tree via loop-erased random walks.

    On the complete graph Wilson's walk from each unattached vertex hits the
    tree quickly, so the expected cost is near-linear.
    """
    if n == 1:
        return set()
    in_tree = [False] * n
    parent = [-1] * n
    root = 0
    in_tree[root] = True
    for start in range(1, n):
        if in_tree[start]:
            continue
        u = start
        # Random walk recording successors; loops are erased implicitly
        # because parent[u] is overwritten on revisits.
        while not in_tree[u]:
            nxt = rng.randrange(n - 1)
            if nxt >= u:
                nxt += 1
            parent[u] = nxt
            u = nxt
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = parent[u]
    return {canonical_edge(v, parent[v]) for v in range(n) if parent[v] >= 0 and in_tree[v]}


def build_random_interval_connected(
    n: int, extra_edge_prob: float, seed: int, horizon: int
) -> AdversarySchedule:
    """Random 1-interval-connected schedule: tree plus random extra edges."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not (0.0 <= extra_edge_prob <= 1.0):
        raise ValueError("extra_edge_prob must be in [0, 1]")
    rng = derive_rng(seed, "random-interval", n, horizon)
    snapshots = []
    for _ in range(horizon):
        edges = random_spanning_tree(n, rng)
        if extra_edge_prob > 0.0:
            for u in range(n):
                for v in range(u + 1, n):
                    if (u, v) in edges:
                        continue
                    if extra_edge_prob >= 1.0 or rng.random() < extra_edge_prob:
                        edges.add((u, v))
        snapshots.append(NetworkSnapshot(n, edges))
    return AdversarySchedule(
        n=n,
        horizon=horizon,
        snapshots=snapshots,
        mode="oblivious",
        metadata={
            "generator": "random-interval-connected",
            "params": {"n": n, "extra_edge_prob": extra_edge_prob, "horizon": horizon},
            "seed": seed,
        },
        cyclic_extendable=True,
    )
