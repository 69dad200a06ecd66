"""Paths-respecting adversaries and their constraint validator.

A paths-respecting schedule keeps every round's graph inside a fixed
infrastructure graph and declares, per node pair, a set of vertex-disjoint
paths of which at most (path count - 1) edges may be inactive in any round.

Two generator families:

* ring-failure: the n-cycle with one edge removed per round,
* center-terminal: r hub nodes adjacent to every other node; per round a
  fixed-size group of hubs loses all its terminal edges (a constant fraction
  of the infrastructure).
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    AdversarySchedule,
    Edge,
    NetworkSnapshot,
    canonical_edge,
    derive_rng,
)


@dataclass(frozen=True)
class PathSystem:
    """Vertex-disjoint simple paths between one source/destination pair."""

    source: int
    dest: int
    paths: tuple[tuple[int, ...], ...]

    def edges(self) -> list[frozenset[Edge]]:
        out = []
        for path in self.paths:
            out.append(
                frozenset(canonical_edge(a, b) for a, b in zip(path, path[1:]))
            )
        return out

    def validate(self, infrastructure: NetworkSnapshot) -> list[str]:
        problems = []
        interior_seen: set[int] = set()
        for path in self.paths:
            if len(path) < 2 or path[0] != self.source or path[-1] != self.dest:
                problems.append(f"path {path} does not join {self.source}->{self.dest}")
                continue
            if len(set(path)) != len(path):
                problems.append(f"path {path} is not simple")
            for a, b in zip(path, path[1:]):
                if not infrastructure.has_edge(a, b):
                    problems.append(f"path edge ({a}, {b}) outside infrastructure")
            interior = set(path[1:-1])
            overlap = interior & interior_seen
            if overlap:
                problems.append(f"paths share interior nodes {sorted(overlap)}")
            interior_seen |= interior
        return problems


@dataclass
class PathsReport:
    ok: bool
    reason: str | None = None
    violation: tuple | None = None  # (system index, round, inactive count, budget)


def validate_paths_respecting(
    schedule: AdversarySchedule,
    infrastructure: NetworkSnapshot,
    systems: list[PathSystem],
) -> PathsReport:
    """Check every (system, round) pair against the inactive-edge budget.

    Rejects outright if some snapshot uses an edge outside the
    infrastructure; otherwise reports the first budget or structure
    violation.
    """
    for t, snap in enumerate(schedule.snapshots, start=1):
        extra = snap.edges - infrastructure.edges
        if extra:
            return PathsReport(
                False, "edge-outside-infrastructure", (t, sorted(extra)[0])
            )
    for idx, system in enumerate(systems):
        problems = system.validate(infrastructure)
        if problems:
            return PathsReport(False, "bad-path-system", (idx, problems[0]))
    system_edges = [
        (idx, [e for group in system.edges() for e in group])
        for idx, system in enumerate(systems)
    ]
    budgets = [len(system.paths) - 1 for system in systems]
    for t, snap in enumerate(schedule.snapshots, start=1):
        inactive = infrastructure.edges - snap.edges
        if not inactive:
            continue
        for idx, edges in system_edges:
            count = sum(1 for e in edges if e in inactive)
            if count > budgets[idx]:
                return PathsReport(
                    False, "budget-exceeded", (idx, t, count, budgets[idx])
                )
    return PathsReport(True)


# ---------------------------------------------------------------------------
# Ring with one failing edge


def ring_infrastructure(n: int) -> NetworkSnapshot:
    return NetworkSnapshot(n, {canonical_edge(i, (i + 1) % n) for i in range(n)})


def ring_path_systems(n: int) -> list[PathSystem]:
    """For every pair, the two arcs of the cycle (vertex-disjoint)."""
    systems = []
    for s in range(n):
        for d in range(s + 1, n):
            clockwise = tuple(range(s, d + 1))
            counter = tuple([s] + list(range(s - 1, -1, -1)) + list(range(n - 1, d - 1, -1)))
            systems.append(PathSystem(s, d, (clockwise, counter)))
    return systems


def build_ring_failure(
    n: int, policy: str, seed: int, horizon: int
) -> tuple[AdversarySchedule, NetworkSnapshot, list[PathSystem]]:
    """n-cycle minus exactly one edge per round; emits the pair path systems.

    Policies: `round-robin` removes edge (t-1 mod n, t mod n) in round t,
    `random` removes a seeded uniform edge, `fixed-edge` always removes
    edge (0, 1).
    """
    if n < 3:
        raise ValueError("need n >= 3")
    infra = ring_infrastructure(n)
    ring_edges = [canonical_edge(i, (i + 1) % n) for i in range(n)]
    rng = derive_rng(seed, "ring-failure", n, horizon)
    # Only n distinct snapshots exist; build once and reuse per round.
    variants = [
        NetworkSnapshot(n, infra.edges - {edge}) for edge in ring_edges
    ]
    snapshots = []
    for t in range(horizon):
        if policy == "round-robin":
            k = t % n
        elif policy == "random":
            k = rng.randrange(n)
        elif policy == "fixed-edge":
            k = 0
        else:
            raise ValueError(f"unknown policy {policy!r}")
        snapshots.append(variants[k])
    schedule = AdversarySchedule(
        n=n,
        horizon=horizon,
        snapshots=snapshots,
        mode="oblivious",
        metadata={
            "generator": "ring-failure",
            "params": {"n": n, "policy": policy, "horizon": horizon},
            "seed": seed,
        },
        cyclic_extendable=True,
    )
    return schedule, infra, ring_path_systems(n)


# ---------------------------------------------------------------------------
# Center-terminal infrastructure


def center_terminal_infrastructure(n: int, r: int) -> NetworkSnapshot:
    """r centers adjacent to every other vertex; terminals only meet centers."""
    edges = set()
    for c in range(r):
        for v in range(n):
            if v != c:
                edges.add(canonical_edge(c, v))
    return NetworkSnapshot(n, edges)


def center_terminal_path_systems(n: int, r: int) -> list[PathSystem]:
    """Disjoint path families: center pairs use their direct edge (never
    failed); any pair involving a terminal routes through distinct centers."""
    systems = []
    centers = list(range(r))
    for s in range(n):
        for d in range(s + 1, n):
            if s < r and d < r:
                systems.append(PathSystem(s, d, ((s, d),)))
                continue
            paths = []
            if s < r:  # center-terminal pair
                paths.append((s, d))
                for c in centers:
                    if c != s:
                        paths.append((s, c, d))
            else:  # terminal-terminal pair
                for c in centers:
                    paths.append((s, c, d))
            systems.append(PathSystem(s, d, tuple(paths)))
    return systems


def build_center_terminal(
    n: int, r: int, seed: int, horizon: int
) -> tuple[AdversarySchedule, NetworkSnapshot, list[PathSystem]]:
    """Per round, floor((r-2)/2) centers lose every terminal edge.

    The disabled group advances by a seeded rotation (committed up front, so
    the adversary stays oblivious).  Center-center edges survive, keeping
    each round connected.
    """
    if not (3 <= r <= n - 1):
        raise ValueError("need 3 <= r <= n-1")
    infra = center_terminal_infrastructure(n, r)
    fail_count = (r - 2) // 2
    rng = derive_rng(seed, "center-terminal", n, r, horizon)
    offset = rng.randrange(r)
    variants: dict[tuple[int, ...], NetworkSnapshot] = {}
    snapshots = []
    for t in range(horizon):
        disabled = tuple(sorted((offset + t + i) % r for i in range(fail_count)))
        snap = variants.get(disabled)
        if snap is None:
            removed = {
                canonical_edge(c, v)
                for c in disabled
                for v in range(r, n)
            }
            snap = NetworkSnapshot(n, infra.edges - removed)
            variants[disabled] = snap
        snapshots.append(snap)
    schedule = AdversarySchedule(
        n=n,
        horizon=horizon,
        snapshots=snapshots,
        mode="oblivious",
        metadata={
            "generator": "center-terminal",
            "params": {"n": n, "r": r, "horizon": horizon, "fail_count": fail_count},
            "seed": seed,
        },
        cyclic_extendable=True,
    )
    return schedule, infra, center_terminal_path_systems(n, r)
