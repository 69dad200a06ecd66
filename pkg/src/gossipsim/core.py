"""Round-synchronous simulation core for token dissemination on dynamic graphs.

The model: a fixed vertex set, one communication graph per round (always
connected), and token-forwarding semantics -- nodes store, copy, and forward
tokens, never combine or drop them.  One token may cross each *directed* edge
per round.  A schedule (graph sequence plus optional pre-committed token
insertions) is fully materialized before any protocol randomness is drawn, so
the adversary is oblivious to protocol coins.

Round structure:
  1. the protocol observes the state and the current snapshot,
  2. a transfer plan is fixed,
  3. transfers and this round's insertions apply atomically,
  4. the round counter advances.

Arrival times of initially-held tokens are round 0; a transfer or insertion
executed in round t records arrival time t.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Protocol, Sequence

NodeId = int
TokenId = int
Edge = tuple[int, int]        # canonical form (u, v) with u <= v
Send = tuple[int, int, int]   # (sender, receiver, token)

# A transfer plan is the set of directed sends executed in one round.
TransferPlan = list


class PlanError(ValueError):
    """A transfer plan violated edge or holding preconditions.

    This signals a buggy protocol implementation, not an adversary action.
    """


class ScheduleError(ValueError):
    """A schedule failed structural validation."""


class RoundBudgetExhausted(ScheduleError):
    """An engine run was asked to execute past its round budget."""


def canonical_edge(u: int, v: int) -> Edge:
    return (u, v) if u <= v else (v, u)


def derive_rng(*keys) -> random.Random:
    """Deterministic RNG derivation from a key tuple.

    Hash-based so the stream is stable across processes and Python versions,
    which the reproducibility contract requires.
    """
    material = "|".join(repr(k) for k in keys).encode()
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


# ---------------------------------------------------------------------------
# Snapshots


class NetworkSnapshot:
    """One round's communication graph: undirected, expected connected."""

    __slots__ = ("n", "edges", "_adjacency", "_directed")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        self.n = n
        self.edges: frozenset[Edge] = frozenset(canonical_edge(u, v) for u, v in edges)
        self._adjacency = None
        self._directed = None

    def __eq__(self, other):
        return (
            isinstance(other, NetworkSnapshot)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"NetworkSnapshot(n={self.n}, m={len(self.edges)})"

    @property
    def adjacency(self) -> list[list[int]]:
        """Sorted neighbor lists, computed once and shared across rounds."""
        if self._adjacency is None:
            adj: list[list[int]] = [[] for _ in range(self.n)]
            for u, v in self.edges:
                if u != v:
                    adj[u].append(v)
                    adj[v].append(u)
            for lst in adj:
                lst.sort()
            self._adjacency = adj
        return self._adjacency

    @property
    def directed_edges(self) -> list[tuple[int, int]]:
        """All directed edges in ascending (sender, receiver) order."""
        if self._directed is None:
            directed = []
            for u, v in self.edges:
                if u != v:
                    directed.append((u, v))
                    directed.append((v, u))
            directed.sort()
            self._directed = directed
        return self._directed

    def has_edge(self, u: int, v: int) -> bool:
        return canonical_edge(u, v) in self.edges


@dataclass
class SnapshotCheck:
    ok: bool
    reason: str | None = None
    witness: object = None

    def __bool__(self):
        return self.ok


def validate_snapshot(snapshot: NetworkSnapshot) -> SnapshotCheck:
    """Accept iff the graph is simple, loop-free, in-range, and connected.

    Rejection is a value naming the first violated property and a witness,
    not an exception.
    """
    n = snapshot.n
    if n < 1:
        return SnapshotCheck(False, "empty-node-set", n)
    for u, v in snapshot.edges:
        if u == v:
            return SnapshotCheck(False, "self-loop", (u, v))
        if not (0 <= u < n and 0 <= v < n):
            return SnapshotCheck(False, "node-out-of-range", (u, v))
    if n == 1:
        return SnapshotCheck(True)
    # BFS connectivity from node 0; witness is the unreachable component.
    adj = snapshot.adjacency
    seen = bytearray(n)
    seen[0] = 1
    frontier = [0]
    count = 1
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    nxt.append(v)
        frontier = nxt
    if count != n:
        unreachable = [v for v in range(n) if not seen[v]]
        return SnapshotCheck(False, "disconnected", unreachable)
    return SnapshotCheck(True)


# ---------------------------------------------------------------------------
# Schedules


@dataclass(frozen=True)
class InsertionEvent:
    """Pre-committed token insertion: token appears at node at end of round.

    Round 0 events apply before the first round (arrival time 0).  Only
    invasive-mode schedules may carry insertions.
    """

    round: int
    node: NodeId
    token: TokenId


@dataclass
class AdversarySchedule:
    """A pre-committed sequence of snapshots plus optional insertions.

    `snapshots[t-1]` is the graph for round t (rounds are 1-indexed).  When
    `cyclic_extendable` is set, rounds beyond the horizon repeat the final
    snapshot (a static, still-connected tail).
    """

    n: int
    horizon: int
    snapshots: list[NetworkSnapshot]
    insertions: list[InsertionEvent] = field(default_factory=list)
    mode: str = "oblivious"  # "oblivious" | "invasive"
    metadata: dict = field(default_factory=dict)
    cyclic_extendable: bool = False

    def snapshot_at(self, t: int) -> NetworkSnapshot:
        if t < 1:
            raise ScheduleError(f"round index {t} < 1")
        if t <= self.horizon:
            return self.snapshots[t - 1]
        if self.cyclic_extendable:
            return self.snapshots[-1]
        raise ScheduleError(f"round {t} beyond horizon {self.horizon} (not extendable)")

    def insertions_by_round(self) -> dict[int, list[InsertionEvent]]:
        by_round: dict[int, list[InsertionEvent]] = {}
        for ev in self.insertions:
            by_round.setdefault(ev.round, []).append(ev)
        return by_round

    def validate(self) -> list[str]:
        """Structural checks; returns a list of problems (empty means valid)."""
        problems = []
        if len(self.snapshots) != self.horizon:
            problems.append(
                f"snapshot count {len(self.snapshots)} != horizon {self.horizon}"
            )
        if self.mode not in ("oblivious", "invasive"):
            problems.append(f"unknown mode {self.mode!r}")
        if self.mode == "oblivious" and self.insertions:
            problems.append("oblivious schedule carries insertion events")
        for t, snap in enumerate(self.snapshots, start=1):
            if snap.n != self.n:
                problems.append(f"round {t}: snapshot n={snap.n} != schedule n={self.n}")
            check = validate_snapshot(snap)
            if not check:
                problems.append(f"round {t}: {check.reason} (witness {check.witness})")
                break
        for ev in self.insertions:
            if not (0 <= ev.round <= self.horizon):
                problems.append(f"insertion round {ev.round} outside [0, {self.horizon}]")
                break
        return problems


# ---------------------------------------------------------------------------
# Token state


@dataclass(frozen=True)
class TokenUniverse:
    """Token id space.  Ids >= real_count are dummies added by reductions."""

    size: int
    real_count: int

    def __post_init__(self):
        if not (0 <= self.real_count <= self.size):
            raise ValueError("real_count must be within [0, size]")

    def is_dummy(self, token: TokenId) -> bool:
        return token >= self.real_count


class TokenState:
    """Per-node token sets with first-arrival times.

    Holdings only grow (store/copy/forward semantics).  `arrivals[v][tok]` is
    the round at which `tok` first appeared at `v`; initially-held tokens have
    arrival round 0.  `holdings_seq[v]` lists the node's tokens in arrival
    order, which gives O(1) uniform sampling over held tokens.
    """

    __slots__ = (
        "n",
        "universe",
        "holdings",
        "holdings_seq",
        "arrivals",
        "current_round",
        "_real_counts",
    )

    def __init__(
        self,
        n: int,
        universe: TokenUniverse,
        initial: Mapping[int, Iterable[int]] | None = None,
    ):
        self.n = n
        self.universe = universe
        self.holdings: list[set[int]] = [set() for _ in range(n)]
        self.holdings_seq: list[list[int]] = [[] for _ in range(n)]
        self.arrivals: list[dict[int, int]] = [{} for _ in range(n)]
        self.current_round = 0
        self._real_counts = [0] * n
        if initial:
            for node, tokens in initial.items():
                for tok in sorted(set(tokens)):
                    self._add(node, tok, 0)

    def _add(self, node: int, token: int, rnd: int) -> bool:
        held = self.holdings[node]
        if token in held:
            return False
        if not (0 <= token < self.universe.size):
            raise ValueError(f"token {token} outside universe of size {self.universe.size}")
        held.add(token)
        self.holdings_seq[node].append(token)
        self.arrivals[node][token] = rnd
        if token < self.universe.real_count:
            self._real_counts[node] += 1
        return True

    def holds(self, node: int, token: int) -> bool:
        return token in self.holdings[node]

    def real_count(self, node: int) -> int:
        return self._real_counts[node]

    def node_complete(self, node: int) -> bool:
        return self._real_counts[node] == self.universe.real_count

    def all_complete(self) -> bool:
        target = self.universe.real_count
        return all(c == target for c in self._real_counts)

    def copy(self) -> "TokenState":
        dup = TokenState(self.n, self.universe)
        dup.current_round = self.current_round
        dup.holdings = [set(s) for s in self.holdings]
        dup.holdings_seq = [list(s) for s in self.holdings_seq]
        dup.arrivals = [dict(d) for d in self.arrivals]
        dup._real_counts = list(self._real_counts)
        return dup

    def __eq__(self, other):
        return (
            isinstance(other, TokenState)
            and self.n == other.n
            and self.universe == other.universe
            and self.current_round == other.current_round
            and self.holdings == other.holdings
            and self.arrivals == other.arrivals
        )


def validate_plan(plan: Sequence[Send], snapshot: NetworkSnapshot, state: TokenState) -> None:
    """Raise PlanError unless every send uses a live edge, a held token, and
    each directed edge carries at most one token."""
    used: set[tuple[int, int]] = set()
    for send in plan:
        u, v, tok = send
        if u == v:
            raise PlanError(f"self-send {send}")
        if not snapshot.has_edge(u, v):
            raise PlanError(f"send {send} uses absent edge")
        if (u, v) in used:
            raise PlanError(f"directed edge ({u}, {v}) used twice")
        used.add((u, v))
        if tok not in state.holdings[u]:
            raise PlanError(f"sender {u} does not hold token {tok}")


def apply_round(
    state: TokenState,
    snapshot: NetworkSnapshot,
    plan: Sequence[Send],
    insertions: Sequence[InsertionEvent] = (),
    check: bool = True,
) -> TokenState:
    """Execute one round: transfers and insertions land atomically.

    Mutates `state` in place and returns it.  New arrivals are recorded at
    the executed round index (current_round + 1); nothing is ever removed.
    """
    t = state.current_round + 1
    if check:
        validate_plan(plan, snapshot, state)
        for ev in insertions:
            if ev.round != t:
                raise PlanError(f"insertion {ev} applied in round {t}")
    for u, v, tok in plan:
        state._add(v, tok, t)
    for ev in insertions:
        state._add(ev.node, ev.token, t)
    state.current_round = t
    return state


# ---------------------------------------------------------------------------
# Engine


class SteppedProtocol(Protocol):
    name: str

    def plan_round(
        self, state: TokenState, snapshot: NetworkSnapshot, rng: random.Random
    ) -> list[Send]: ...


TIMEOUT = "TIMEOUT"


@dataclass
class SimulationResult:
    """Outcome of one run.  `completion_round` is None on timeout."""

    completion_round: int | None
    timed_out: bool
    rounds_executed: int
    per_round_new_arrivals: list[int]
    per_node_completion: dict[int, int]
    rng_seed: int
    final_state: TokenState
    stopped_early: bool = False


class EngineRun:
    """Driver for a single run: owns the state, round counter, and rng streams.

    Used directly by centralized schedulers (which plan each round with full
    knowledge of the current snapshot but never future ones) and wrapped by
    `run_simulation` for distributed per-round protocols.
    """

    def __init__(
        self,
        schedule: AdversarySchedule,
        state: TokenState,
        seed: int,
        max_rounds: int,
        validate: bool = False,
    ):
        if schedule.horizon < max_rounds and not schedule.cyclic_extendable:
            raise ScheduleError(
                f"horizon {schedule.horizon} < max_rounds {max_rounds} and schedule "
                "is not cyclic-extendable"
            )
        if state.current_round != 0:
            raise ValueError("EngineRun requires a fresh state (current_round == 0)")
        self.schedule = schedule
        self.state = state
        self.seed = seed
        self.max_rounds = max_rounds
        self.validate = validate
        self._insertions = schedule.insertions_by_round()
        self.per_round_new_arrivals: list[int] = []
        self.per_node_completion: dict[int, int] = {}
        self._complete_nodes = 0
        for v in range(state.n):
            if state.node_complete(v):
                self.per_node_completion[v] = 0
                self._complete_nodes += 1
        # Round-0 insertions land before the first round with arrival time 0.
        for ev in self._insertions.get(0, ()):
            if state._add(ev.node, ev.token, 0):
                self._note_arrival(ev.node, 0)

    def _note_arrival(self, node: int, t: int) -> None:
        if node not in self.per_node_completion and self.state.node_complete(node):
            self.per_node_completion[node] = t
            self._complete_nodes += 1

    @property
    def next_round(self) -> int:
        return self.state.current_round + 1

    @property
    def rounds_executed(self) -> int:
        return self.state.current_round

    def exhausted(self) -> bool:
        return self.next_round > self.max_rounds

    def complete(self) -> bool:
        return self._complete_nodes == self.state.n

    def current_snapshot(self) -> NetworkSnapshot:
        return self.schedule.snapshot_at(self.next_round)

    def round_rng(self) -> random.Random:
        return derive_rng(self.seed, "round", self.next_round)

    def subsystem_rng(self, *keys) -> random.Random:
        """Named stream for scheduler-internal randomness (e.g. permutations)."""
        return derive_rng(self.seed, *keys)

    def execute(self, plan: Sequence[Send]) -> list[tuple[int, int]]:
        """Apply `plan` for the next round; returns new (token, node) arrivals."""
        t = self.next_round
        if t > self.max_rounds:
            raise RoundBudgetExhausted(f"round budget {self.max_rounds} exhausted")
        snapshot = self.schedule.snapshot_at(t)
        if self.validate:
            check = validate_snapshot(snapshot)
            if not check:
                raise ScheduleError(f"round {t}: invalid snapshot: {check.reason}")
        state = self.state
        inserts = self._insertions.get(t, ())
        validate_plan(plan, snapshot, state)
        for ev in inserts:
            if ev.round != t:
                raise PlanError(f"insertion {ev} scheduled for round {t}")
        new_arrivals: list[tuple[int, int]] = []
        for u, v, tok in plan:
            if state._add(v, tok, t):
                new_arrivals.append((tok, v))
        for ev in inserts:
            if state._add(ev.node, ev.token, t):
                new_arrivals.append((ev.token, ev.node))
        state.current_round = t
        for _, node in new_arrivals:
            self._note_arrival(node, t)
        self.per_round_new_arrivals.append(len(new_arrivals))
        return new_arrivals

    def idle_round(self) -> None:
        self.execute([])

    def result(self, stopped_early: bool = False) -> SimulationResult:
        done = self.complete()
        completion = max(self.per_node_completion.values()) if done else None
        return SimulationResult(
            completion_round=completion,
            timed_out=not done,
            rounds_executed=self.rounds_executed,
            per_round_new_arrivals=list(self.per_round_new_arrivals),
            per_node_completion=dict(self.per_node_completion),
            rng_seed=self.seed,
            final_state=self.state,
            stopped_early=stopped_early,
        )


StopHook = Callable[[TokenState, int, list], bool]


def run_simulation(
    schedule: AdversarySchedule,
    protocol: SteppedProtocol,
    initial: TokenState,
    max_rounds: int,
    seed: int,
    validate: bool = False,
    stop_when: StopHook | None = None,
) -> SimulationResult:
    """Run a per-round protocol against a schedule.

    Runs rounds 1..max_rounds or until every node holds every non-dummy
    token.  Identical (schedule, protocol, initial, seed) inputs reproduce
    identical results: protocol randomness comes from a per-round stream
    derived from the run seed, never from the schedule's generation seed, and
    draws within a round follow the protocol's canonical order.

    `stop_when(state, round, new_arrivals)` may end the run early (used for
    sentinel-arrival measurements); the result is then marked stopped_early.
    """
    run = EngineRun(schedule, initial, seed, max_rounds, validate=validate)
    stopped = False
    while not run.complete() and not run.exhausted():
        snapshot = run.current_snapshot()
        rng = run.round_rng()
        plan = protocol.plan_round(run.state, snapshot, rng)
        arrivals = run.execute(plan)
        if stop_when is not None and stop_when(run.state, run.rounds_executed, arrivals):
            stopped = True
            break
    return run.result(stopped_early=stopped)
