"""Blocker-line adversaries: dynamic line networks that quarantine tokens.

The construction keeps the network a line anchored at a source node (node 0,
which initially holds every token).  Time is split into phases; each phase
into segments.  Per segment, a designated 2*sqrt(n)-node interval fronts the
source, a reserved "blocker" token group is scattered over the interval's
first sqrt(n) nodes to dilute difference-based protocols, and after the
segment the interval's first `inner_width` nodes are retired to the left of
the source while the rest are exiled to the far right end.  Nodes that end up
right of the source should stay starved of the never-scattered token groups.

Two variants share the same layout trajectory, token-group partition, and
interval boundaries (equal parameters and seed give matching metadata):

* invasive: blocker tokens are force-inserted by pre-committed events,
* oblivious: insertions are simulated purely by extra topology rounds
  (source-to-interval star, random pair edges, cliques between segments, a
  biclique hand-off, and a right-line clique after each phase).

All asymptotic parameter expressions are concretized with floor and clamped
below at 1; logs are base 2.  Effective values and every clamp are recorded
in the schedule metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import (
    AdversarySchedule,
    InsertionEvent,
    NetworkSnapshot,
    canonical_edge,
    derive_rng,
)

DEFAULT_EPSILON = 1.0 / 32.0  # largest scatter fraction the dilution bound tolerates
DEFAULT_C_CLIQUE = 3.0


@dataclass(frozen=True)
class BlockerLineParams:
    """Effective (clamped) parameters for a blocker-line schedule."""

    n: int
    seed: int
    epsilon: float = DEFAULT_EPSILON
    c_clique: float = DEFAULT_C_CLIQUE
    sqrt_n: int = field(init=False, default=0)
    phases: int = field(init=False, default=0)
    segments_per_phase: int = field(init=False, default=0)
    segment_rounds: int = field(init=False, default=0)
    inner_width: int = field(init=False, default=0)
    clique_rounds: int = field(init=False, default=0)

    def __post_init__(self):
        n = self.n
        m = math.isqrt(n)
        if m * m != n:
            raise ValueError(f"n={n} must be a perfect square")
        log2n = math.log2(n)
        object.__setattr__(self, "sqrt_n", m)
        object.__setattr__(self, "phases", max(1, int(m / (2 * log2n))))
        object.__setattr__(self, "segments_per_phase", max(1, m // 3))
        object.__setattr__(self, "segment_rounds", max(1, int(self.epsilon * m)))
        object.__setattr__(self, "inner_width", math.ceil(log2n))
        object.__setattr__(self, "clique_rounds", math.ceil(self.c_clique * log2n))
        if self.inner_width >= m:
            raise ValueError(
                f"n={n} too small: inner width {self.inner_width} must be below "
                f"the scatter width {m}"
            )
        need = 2 * m * self.segments_per_phase
        last_phase_right = (n - 1) - (self.phases - 1) * self.segments_per_phase * self.inner_width
        if need > last_phase_right:
            raise ValueError(
                f"n={n} too small to host {self.phases} phases of "
                f"{self.segments_per_phase} segments (need {need} right-line nodes, "
                f"have {last_phase_right} in the last phase)"
            )

    def clamp_report(self) -> dict:
        m = self.sqrt_n
        log2n = math.log2(self.n)
        return {
            "phases_clamped": m / (2 * log2n) < 1,
            "segment_rounds_clamped": self.epsilon * m < 1,
            "segments_clamped": m // 3 < 1,
        }

    def invasive_horizon(self) -> int:
        return self.phases * self.segments_per_phase * self.segment_rounds

    def oblivious_horizon(self) -> int:
        per_phase = (
            2
            + self.segments_per_phase * self.segment_rounds
            + (self.segments_per_phase - 1) * (1 + self.clique_rounds)
            + 1
        )
        return self.phases * per_phase


def blocker_partition(params: BlockerLineParams) -> list[list[int]]:
    """Contiguous token groups of size sqrt(n); group i (1-indexed) backs
    phase i.  Groups beyond the phase count are never scattered."""
    m = params.sqrt_n
    return [list(range(g * m, (g + 1) * m)) for g in range(m)]


class _LineLayout:
    """Mutable line bookkeeping shared by both schedule variants.

    The line is left + [0] + right.  `left` is ordered far-to-near (the most
    recently retired inner node sits adjacent to node 0), `right` near-to-far
    (index 0 is node 0's right neighbor).
    """

    def __init__(self, n: int):
        self.n = n
        self.left: list[int] = []
        self.right: list[int] = list(range(1, n))

    def order(self) -> list[int]:
        return self.left + [0] + self.right

    def snapshot(self) -> NetworkSnapshot:
        order = self.order()
        return NetworkSnapshot(
            self.n, {canonical_edge(a, b) for a, b in zip(order, order[1:])}
        )

    def shift(self, interval: list[int], inner_width: int) -> None:
        """Retire the interval's inner nodes leftward, exile the rest to the
        far right end, and let the next interval front node 0."""
        width = len(interval)
        assert self.right[:width] == interval
        inner = interval[:inner_width]
        outer = interval[inner_width:]
        self.left = self.left + list(reversed(inner))
        self.right = self.right[width:] + outer


@dataclass
class _PhasePlan:
    phase: int
    intervals: list[list[int]]

    def interval(self, j: int) -> list[int]:
        return self.intervals[j - 1]


def _phase_plan(layout: _LineLayout, params: BlockerLineParams, phase: int) -> _PhasePlan:
    width = 2 * params.sqrt_n
    right = layout.right
    intervals = [
        right[(j - 1) * width : j * width] for j in range(1, params.segments_per_phase + 1)
    ]
    return _PhasePlan(phase, intervals)


def _base_metadata(params: BlockerLineParams, variant: str) -> dict:
    groups = blocker_partition(params)
    sentinel = sorted(
        tok for g in range(params.phases, params.sqrt_n) for tok in groups[g]
    )
    return {
        "generator": f"blocker-line-{variant}",
        "params": {
            "n": params.n,
            "epsilon": params.epsilon,
            "c_clique": params.c_clique,
            "phases": params.phases,
            "segments_per_phase": params.segments_per_phase,
            "segment_rounds": params.segment_rounds,
            "inner_width": params.inner_width,
            "clique_rounds": params.clique_rounds,
        },
        "clamped": params.clamp_report(),
        "seed": params.seed,
        "source": 0,
        "blocker_groups": groups,
        "used_groups": params.phases,
        "sentinel_tokens": sentinel,
        "layout_note": (
            "line = left + [source] + right; retired inner nodes keep their "
            "source-adjacent order on the left; exiled interval remainders are "
            "appended at the far right end; untouched right-line tail sits "
            "between the last interval and the exiled nodes"
        ),
        "segments": [],
        "right_line_per_phase": [],
    }


def build_blocker_line_invasive(params: BlockerLineParams) -> AdversarySchedule:
    """Blocker-line schedule whose insertions are explicit pre-committed events.

    Per segment, every blocker token of the phase's group is inserted into
    each of the interval's first sqrt(n) nodes independently with probability
    1/2 (committed at schedule-build time).  After each phase, the full group
    is inserted at every right-line node.  Insertion events are attached to
    the round *before* a segment starts so the scatter is visible throughout
    the segment (round 0 events apply before the first round).
    """
    rng = derive_rng(params.seed, "blocker-line", "insertions")
    groups = blocker_partition(params)
    layout = _LineLayout(params.n)
    meta = _base_metadata(params, "invasive")
    snapshots: list[NetworkSnapshot] = []
    insertions: list[InsertionEvent] = []
    round_index = 0

    for phase in range(1, params.phases + 1):
        plan = _phase_plan(layout, params, phase)
        group = groups[phase - 1]
        for j in range(1, params.segments_per_phase + 1):
            interval = plan.interval(j)
            scatter_nodes = interval[: params.sqrt_n]
            for tok in group:
                for node in scatter_nodes:
                    if rng.random() < 0.5:
                        insertions.append(InsertionEvent(round_index, node, tok))
            snap = layout.snapshot()
            start = round_index + 1
            for _ in range(params.segment_rounds):
                snapshots.append(snap)
                round_index += 1
            meta["segments"].append(
                {
                    "phase": phase,
                    "segment": j,
                    "rounds": [start, round_index],
                    "interval": list(interval),
                    "insert_nodes": list(scatter_nodes),
                    "inner": interval[: params.inner_width],
                    "outer": interval[params.inner_width :],
                }
            )
            layout.shift(interval, params.inner_width)
        for node in layout.right:
            for tok in group:
                insertions.append(InsertionEvent(round_index, node, tok))
        meta["right_line_per_phase"].append(list(layout.right))

    meta["target_nodes"] = list(layout.right)
    insertions.sort(key=lambda ev: (ev.round, ev.node, ev.token))
    return AdversarySchedule(
        n=params.n,
        horizon=round_index,
        snapshots=snapshots,
        insertions=insertions,
        mode="invasive",
        metadata=meta,
        cyclic_extendable=True,
    )


def build_blocker_line_oblivious(params: BlockerLineParams) -> AdversarySchedule:
    """Blocker-line schedule with insertions replaced by topology rounds.

    Phase start: one round with a star from the source to the first
    interval's scatter nodes, then one round with each scatter-node pair
    joined independently with probability 1/2.  Between segments: the
    previous interval's scatter-overflow nodes form a clique for
    ceil(c_clique * log2 n) rounds, then one biclique round hands their
    tokens to the next interval's scatter nodes.  After each phase, one round
    adds a clique over the whole right line.  The base line is retained in
    every round, so every snapshot stays connected.
    """
    rng = derive_rng(params.seed, "blocker-line", "topology")
    layout = _LineLayout(params.n)
    meta = _base_metadata(params, "oblivious")
    snapshots: list[NetworkSnapshot] = []
    round_index = 0

    def emit(snapshot: NetworkSnapshot, copies: int = 1) -> None:
        nonlocal round_index
        for _ in range(copies):
            snapshots.append(snapshot)
            round_index += 1

    for phase in range(1, params.phases + 1):
        plan = _phase_plan(layout, params, phase)
        first_scatter = plan.interval(1)[: params.sqrt_n]
        line = layout.snapshot()
        emit(NetworkSnapshot(params.n, line.edges | {canonical_edge(0, x) for x in first_scatter}))
        pair_edges = set()
        for a_idx in range(len(first_scatter)):
            for b_idx in range(a_idx + 1, len(first_scatter)):
                if rng.random() < 0.5:
                    pair_edges.add(canonical_edge(first_scatter[a_idx], first_scatter[b_idx]))
        emit(NetworkSnapshot(params.n, line.edges | pair_edges))

        for j in range(1, params.segments_per_phase + 1):
            interval = plan.interval(j)
            snap = layout.snapshot()
            start = round_index + 1
            emit(snap, params.segment_rounds)
            meta["segments"].append(
                {
                    "phase": phase,
                    "segment": j,
                    "rounds": [start, round_index],
                    "interval": list(interval),
                    "insert_nodes": interval[: params.sqrt_n],
                    "inner": interval[: params.inner_width],
                    "outer": interval[params.inner_width :],
                }
            )
            hand_off = interval[params.inner_width : params.sqrt_n]
            if j < params.segments_per_phase:
                clique_edges = {
                    canonical_edge(a, b)
                    for idx, a in enumerate(hand_off)
                    for b in hand_off[idx + 1 :]
                }
                emit(NetworkSnapshot(params.n, snap.edges | clique_edges), params.clique_rounds)
                layout.shift(interval, params.inner_width)
                next_scatter = plan.interval(j + 1)[: params.sqrt_n]
                shifted_line = layout.snapshot()
                biclique = {
                    canonical_edge(a, b) for a in hand_off for b in next_scatter
                }
                emit(NetworkSnapshot(params.n, shifted_line.edges | biclique))
            else:
                layout.shift(interval, params.inner_width)

        line = layout.snapshot()
        right = layout.right
        clique = {
            canonical_edge(a, b)
            for idx, a in enumerate(right)
            for b in right[idx + 1 :]
        }
        emit(NetworkSnapshot(params.n, line.edges | clique))
        meta["right_line_per_phase"].append(list(right))

    meta["target_nodes"] = list(layout.right)
    assert round_index == params.oblivious_horizon()
    return AdversarySchedule(
        n=params.n,
        horizon=round_index,
        snapshots=snapshots,
        insertions=[],
        mode="oblivious",
        metadata=meta,
        cyclic_extendable=True,
    )
