"""Centralized token dissemination: load balancing, greedy exchange stages,
single-source broadcast, and the full k-token pipeline.

The scheduler sees the full current snapshot and token state each round but
never future snapshots.  Stage budgets follow the floor-and-clamp convention
with config-exposed constants; every stage logs the rounds it consumed and
any overage beyond its nominal budget.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import (
    EngineRun,
    NetworkSnapshot,
    RoundBudgetExhausted,
    Send,
    SimulationResult,
)
from .matching import greedy_exchange_round
from .protocols import flood_step


class LoadBalanceStalled(RuntimeError):
    """Relay pipeline made no progress within its safety allowance."""


class CoverSetError(RuntimeError):
    """Greedy cover needed more nodes than the stage allows."""


@dataclass
class StageLog:
    stage: str
    rounds: int
    placed: int = 0
    overage: int = 0
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Item:
    """One distributable unit: a copy of a token, or a padding blank.

    Padding items (token None) occupy pipeline slots and satisfy size
    requirements but produce no wire transmission.
    """

    item_id: int
    token: int | None


class ItemPool:
    """Multiset of items with a seeded random rank permutation."""

    def __init__(self, tokens: Sequence[int | None], rng: random.Random):
        self.items = [Item(i, tok) for i, tok in enumerate(tokens)]
        order = list(range(len(self.items)))
        rng.shuffle(order)
        # ranks[item_id] = position in injection order
        self.ranks = {item_id: pos for pos, item_id in enumerate(order)}
        self._by_rank = [self.items[item_id] for item_id in order]

    def __len__(self):
        return len(self.items)

    def in_rank_order(self) -> list[Item]:
        return list(self._by_rank)

    def underlying_tokens(self) -> set[int]:
        return {it.token for it in self.items if it.token is not None}


def _bfs_distances(snapshot: NetworkSnapshot, sources: Sequence[int]) -> list[int]:
    n = snapshot.n
    inf = n + 1
    dist = [inf] * n
    frontier = sorted(set(sources))
    for s in frontier:
        dist[s] = 0
    adj = snapshot.adjacency
    while frontier:
        nxt = []
        for u in frontier:
            du = dist[u] + 1
            for v in adj[u]:
                if dist[v] > du:
                    dist[v] = du
                    nxt.append(v)
        frontier = sorted(nxt)
    return dist


def _shortest_path(snapshot: NetworkSnapshot, dist: list[int], target: int) -> list[int]:
    """Walk back from target along lowest-id neighbors one BFS level up."""
    path = [target]
    node = target
    adj = snapshot.adjacency
    while dist[node] > 0:
        node = min(v for v in adj[node] if dist[v] == dist[node] - 1)
        path.append(node)
    path.reverse()
    return path


def load_balance(
    run: EngineRun,
    full_nodes: Iterable[int],
    targets: Iterable[int],
    pool: ItemPool,
) -> tuple[list[list[Send]], dict[int, int], StageLog]:
    """Distribute the pool's items over the target nodes, one placement per
    round in rank order.

    Guarantees: every item lands on exactly one target; per-target counts are
    floor(|pool|/|targets|) or the ceiling; which items land where depends
    only on the rank permutation, because routing is item-blind.

    Routing: each round, the neediest-then-closest target is chosen (nodes
    below the floor quota first, then below the ceiling; ties by distance
    then node id).  While unintroduced items remain, the nearest full node
    injects the next rank onto a shortest path; relay nodes along the path
    forward their oldest undelivered item one hop toward the target.  A hop
    with no item idles and the delivery is deferred; extra rounds beyond the
    nominal |pool| budget are logged as overage.
    """
    F = sorted(set(full_nodes))
    R = sorted(set(targets))
    if not R:
        raise ValueError("empty target set")
    if len(pool) == 0:
        raise ValueError("empty item pool")
    state = run.state
    if set(F) | set(R) != set(range(state.n)):
        raise ValueError("full set and target set must cover all nodes")
    needed = pool.underlying_tokens()
    for f in F:
        missing = needed - state.holdings[f]
        if missing:
            raise ValueError(f"full node {f} is missing pool tokens {sorted(missing)}")

    total = len(pool)
    floor_q, rem = divmod(total, len(R))
    ceil_q = floor_q + (1 if rem else 0)
    pending = pool.in_rank_order()
    queues: dict[int, list[Item]] = {}
    counts = {v: 0 for v in R}
    assignment: dict[int, int] = {}
    plans: list[list[Send]] = []
    placed = 0
    rounds = 0
    max_extra = 64 + 8 * (total + state.n)

    while placed < total:
        if rounds - total > max_extra:
            raise LoadBalanceStalled(
                f"{total - placed} items unplaced after {rounds} rounds"
            )
        snapshot = run.current_snapshot()
        below_floor = [v for v in R if counts[v] < floor_q]
        candidates = below_floor or [v for v in R if counts[v] < ceil_q]
        if pending:
            sources = F
        else:
            sources = sorted(queues)
            if not sources:
                break  # unreachable: placed < total implies items somewhere
        dist = _bfs_distances(snapshot, sources)
        target = min(candidates, key=lambda v: (dist[v], v))
        path = _shortest_path(snapshot, dist, target)

        plan: list[Send] = []
        moves: list[tuple[Item, int | None, int]] = []  # (item, from-queue, to)
        for idx in range(len(path) - 1):
            node, nxt = path[idx], path[idx + 1]
            if idx == 0 and pending:
                item = pending[0]
                moves.append((item, None, nxt))
                if item.token is not None:
                    plan.append((node, nxt, item.token))
            else:
                q = queues.get(node)
                if q:
                    item = q[0]
                    moves.append((item, node, nxt))
                    if item.token is not None:
                        plan.append((node, nxt, item.token))
        if len(path) == 1:
            # Target coincides with the source; the item lands with no send.
            if pending:
                moves.append((pending[0], None, target))
            elif queues.get(target):
                moves.append((queues[target][0], target, target))

        run.execute(plan)
        plans.append(plan)
        rounds += 1
        for item, origin, dest in moves:
            if origin is None:
                pending.pop(0)
            else:
                queues[origin].pop(0)
                if not queues[origin]:
                    del queues[origin]
            if dest == target:
                assignment[item.item_id] = dest
                counts[dest] += 1
                placed += 1
                # One delivery per round: only the path's last hop reaches
                # the target, so later moves cannot also land there.
            else:
                queues.setdefault(dest, []).append(item)

    log = StageLog(
        stage="load-balance",
        rounds=rounds,
        placed=placed,
        overage=max(0, rounds - total),
        detail={"pool": total, "targets": len(R), "counts": dict(counts)},
    )
    return plans, assignment, log


# ---------------------------------------------------------------------------
# Broadcast and gossip stages


@dataclass(frozen=True)
class CentralParams:
    """Stage constants (the analysis fixes only asymptotics)."""

    c_phase: float = 1.0
    c_stage: float = 3.0
    c_ex: float = 1.0
    c_cap: float = 8.0
    c_s: float = 2.0
    mode: str = "auto"  # k-gossip strategy: auto | staged | naive


@dataclass
class BroadcastOutcome:
    done: bool
    stalled: str | None
    stage_logs: list[StageLog]


def _holders(state, token: int) -> int:
    return sum(1 for v in range(state.n) if token in state.holdings[v])


def _flood_token(run: EngineRun, token: int, max_rounds: int) -> int:
    """Flood one token until universal or the round allowance ends; returns
    rounds used."""
    state = run.state
    holders = _holders(state, token)
    used = 0
    while holders < state.n and used < max_rounds:
        plan = flood_step(token, state, run.current_snapshot())
        arrivals = run.execute(plan)
        used += 1
        holders += sum(1 for tok, _ in arrivals if tok == token)
    return used


def n_broadcast(
    run: EngineRun,
    source: int,
    params: CentralParams = CentralParams(),
    tokens: Iterable[int] | None = None,
) -> BroadcastOutcome:
    """Disseminate the source's token set to every node.

    Runs stages of distribute-then-exchange phases: each phase load-balances
    one item per token over the currently non-full nodes, then runs n greedy
    exchange rounds.  Stage count is capped at ceil(c_stage * log2 n) and
    phases per stage at ceil(c_phase * sqrt(n) * log2 n); exhausting the caps
    yields a marked outcome, never a silent loop.
    """
    state = run.state
    n = state.n
    token_set = set(tokens) if tokens is not None else set(state.holdings[source])
    if not token_set <= state.holdings[source]:
        raise ValueError("source does not hold the full broadcast set")
    if not token_set:
        return BroadcastOutcome(True, None, [])
    log2n = math.log2(max(2, n))
    stage_cap = max(1, math.ceil(params.c_stage * log2n))
    phase_cap = max(1, math.ceil(params.c_phase * math.sqrt(n) * log2n))
    ordered = sorted(token_set)
    logs: list[StageLog] = []

    def non_full() -> list[int]:
        return [v for v in range(n) if not token_set <= state.holdings[v]]

    lb_counter = 0
    try:
        for stage in range(stage_cap):
            remaining = non_full()
            if not remaining:
                break
            stage_rounds = 0
            for _ in range(phase_cap):
                remaining = non_full()
                if not remaining:
                    break
                full = [v for v in range(n) if v not in set(remaining)]
                rng = run.subsystem_rng("n-broadcast", "ranks", lb_counter)
                lb_counter += 1
                pool = ItemPool(ordered, rng)
                _, _, lb_log = load_balance(run, full, remaining, pool)
                stage_rounds += lb_log.rounds
                for _ in range(n):
                    if not non_full():
                        break
                    plan = greedy_exchange_round(state, run.current_snapshot(), token_set)
                    run.execute(plan)
                    stage_rounds += 1
            logs.append(
                StageLog(
                    stage=f"broadcast-stage-{stage}",
                    rounds=stage_rounds,
                    detail={"non_full_after": len(non_full())},
                )
            )
        done = not non_full()
        return BroadcastOutcome(done, None if done else "stage-budget", logs)
    except RoundBudgetExhausted:
        return BroadcastOutcome(False, "round-budget", logs)


def reduce_k_to_n(k: int, n: int) -> tuple[list[list[int]], list[int]]:
    """Group k token ids into ceil(k/n) groups of exactly n, padding the last
    group with fresh dummy ids (>= k)."""
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    group_count = -(-k // n)
    dummies = list(range(k, group_count * n))
    ids = list(range(k)) + dummies
    groups = [ids[g * n : (g + 1) * n] for g in range(group_count)]
    return groups, dummies


@dataclass
class GossipOutcome:
    result: SimulationResult
    stage_logs: list[StageLog]
    stalled: str | None = None
    strategy: str = "staged"


def _staged_bound(n: int, k: int) -> int:
    log2n = math.log2(max(2, n))
    return math.ceil(64 * (n + k) * math.sqrt(n) * log2n * log2n)


def k_gossip_centralized(
    run: EngineRun,
    k: int,
    params: CentralParams = CentralParams(),
) -> GossipOutcome:
    """Complete k-token gossip under full current-round knowledge.

    Two strategies, chosen by whichever worst-case bound is smaller (mode
    `auto`), or forced via params.mode:

    * naive: flood each real token in sequence (at most n rounds each, so at
      most nk in total);
    * staged: per reduction group, (a) flood each group token for
      ceil(sqrt(n)) rounds, (b) pick a greedy cover of token holders,
      (c) load-balance each cover node's copied-and-padded multiset over all
      nodes, (d) greedy-exchange until some node nears group completion,
      (e) broadcast that node's set, (f) flood the leftovers.

    Stalls (cover too large, exchange cap, round budget) yield a marked
    outcome identifying the stage.
    """
    state = run.state
    n = state.n
    if k != state.universe.real_count:
        raise ValueError("k must match the universe's real token count")
    groups, dummies = reduce_k_to_n(k, n)
    if state.universe.size != len(groups) * n:
        raise ValueError(
            f"universe size {state.universe.size} != padded size {len(groups) * n}"
        )
    strategy = params.mode
    if strategy == "auto":
        strategy = "naive" if n * k <= _staged_bound(n, k) else "staged"

    logs: list[StageLog] = []
    try:
        if strategy == "naive":
            start = run.rounds_executed
            for tok in range(k):
                if run.complete():
                    break
                _flood_token(run, tok, max_rounds=n)
            logs.append(StageLog("naive-broadcast", run.rounds_executed - start))
            return GossipOutcome(run.result(), logs, None, strategy)

        sqrt_rounds = math.ceil(math.sqrt(n))
        log2n = math.log2(max(2, n))
        for g_index, group in enumerate(groups):
            if run.complete():
                break
            group_set = set(group)
            tag = f"group-{g_index}"

            start = run.rounds_executed
            for tok in group:
                _flood_token(run, tok, max_rounds=sqrt_rounds)
                spread = _holders(state, tok)
                assert spread >= min(n, sqrt_rounds + 1), (
                    f"token {tok} at only {spread} nodes after consolidation"
                )
            logs.append(StageLog(f"{tag}-consolidation", run.rounds_executed - start))

            cover_cap = max(1, math.ceil(params.c_s * math.sqrt(n) * log2n))
            uncovered = set(group_set)
            allocation: dict[int, list[int]] = {}
            while uncovered:
                best = max(
                    range(n),
                    key=lambda v: (len(state.holdings[v] & uncovered), -v),
                )
                gain = state.holdings[best] & uncovered
                if not gain:
                    return GossipOutcome(run.result(), logs, f"{tag}-cover-unhit", strategy)
                allocation[best] = sorted(gain)
                uncovered -= gain
                if len(allocation) > cover_cap:
                    return GossipOutcome(run.result(), logs, f"{tag}-cover-cap", strategy)

            start = run.rounds_executed
            lb_counter = 0
            for u in sorted(allocation):
                copies: list[int | None] = []
                for tok in allocation[u]:
                    copies.extend([tok] * sqrt_rounds)
                while len(copies) < n:
                    copies.append(None)
                rng = run.subsystem_rng("k-gossip", tag, "ranks", lb_counter)
                lb_counter += 1
                pool = ItemPool(copies, rng)
                load_balance(run, [u], list(range(n)), pool)
            logs.append(StageLog(f"{tag}-distribution", run.rounds_executed - start))

            threshold = n - math.ceil(params.c_ex * math.sqrt(n) * log2n)
            exchange_cap = math.ceil(params.c_cap * n * math.sqrt(n) * log2n)
            counts = [len(state.holdings[v] & group_set) for v in range(n)]
            start = run.rounds_executed
            while max(counts) < threshold:
                if run.rounds_executed - start >= exchange_cap:
                    logs.append(StageLog(f"{tag}-exchange", run.rounds_executed - start))
                    return GossipOutcome(run.result(), logs, f"{tag}-exchange-cap", strategy)
                plan = greedy_exchange_round(state, run.current_snapshot(), group_set)
                arrivals = run.execute(plan)
                for tok, node in arrivals:
                    if tok in group_set:
                        counts[node] += 1
            logs.append(StageLog(f"{tag}-exchange", run.rounds_executed - start))

            best = max(range(n), key=lambda v: (counts[v], -v))
            broadcast_set = sorted(state.holdings[best] & group_set)
            start = run.rounds_executed
            outcome = n_broadcast(run, best, params, tokens=broadcast_set)
            logs.extend(outcome.stage_logs)
            logs.append(StageLog(f"{tag}-broadcast", run.rounds_executed - start))
            if not outcome.done:
                return GossipOutcome(
                    run.result(), logs, f"{tag}-broadcast-{outcome.stalled}", strategy
                )

            start = run.rounds_executed
            residual = [tok for tok in group if _holders(state, tok) < n]
            for tok in residual:
                _flood_token(run, tok, max_rounds=n)
            logs.append(
                StageLog(
                    f"{tag}-residual",
                    run.rounds_executed - start,
                    detail={"residual_tokens": len(residual)},
                )
            )
        return GossipOutcome(run.result(), logs, None, strategy)
    except RoundBudgetExhausted:
        return GossipOutcome(run.result(), logs, "round-budget", strategy)
