"""Distributed token-forwarding protocols.

Three families:

* difference-based (`rand-diff`, `sym-diff`): a node sees its neighbors'
  token sets as of the start of the round and sends a uniformly random token
  from a set difference,
* arrival-history based (`skb-*`): a node sees only its own tokens and their
  first-arrival times, samples at most one token per round, and broadcasts it
  on every incident edge; tokens with equal arrival time must get equal
  probability,
* flooding (`flood:<token>`): every holder of a designated token forwards it
  to every neighbor that lacks it.

Randomness is drawn in a canonical order (ascending directed edges for the
difference protocols, ascending nodes for the history-based ones) so runs are
reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Mapping

from .core import NetworkSnapshot, Send, TokenState


@dataclass(frozen=True)
class LocalView:
    """What one node may legally observe in one round."""

    node: int
    round: int
    own_tokens: frozenset[int]
    neighbor_tokens: Mapping[int, frozenset[int]] | None = None
    arrivals: Mapping[int, int] | None = None


def build_local_view(
    state: TokenState,
    snapshot: NetworkSnapshot,
    node: int,
    with_neighbors: bool = True,
    with_arrivals: bool = False,
) -> LocalView:
    neighbor_tokens = None
    if with_neighbors:
        neighbor_tokens = {
            u: frozenset(state.holdings[u]) for u in snapshot.adjacency[node]
        }
    arrivals = dict(state.arrivals[node]) if with_arrivals else None
    return LocalView(
        node=node,
        round=state.current_round + 1,
        own_tokens=frozenset(state.holdings[node]),
        neighbor_tokens=neighbor_tokens,
        arrivals=arrivals,
    )


# ---------------------------------------------------------------------------
# Difference-based protocols


def rand_diff_step(
    state: TokenState, snapshot: NetworkSnapshot, rng: random.Random
) -> list[Send]:
    """One send per directed edge: uniform over sender-minus-receiver tokens.

    Never idles on an edge where progress is possible; draws on distinct
    directed edges are independent.
    """
    plan: list[Send] = []
    holdings = state.holdings
    for u, v in snapshot.directed_edges:
        diff = holdings[u] - holdings[v]
        if diff:
            if len(diff) == 1:
                (tok,) = diff
            else:
                tok = rng.choice(sorted(diff))
            plan.append((u, v, tok))
    return plan


def sym_diff_step(
    state: TokenState, snapshot: NetworkSnapshot, rng: random.Random
) -> list[Send]:
    """One token per undirected edge, uniform over the symmetric difference.

    The endpoint holding the drawn token sends it, so at most one send
    happens per undirected edge per round.
    """
    plan: list[Send] = []
    holdings = state.holdings
    for u, v in sorted(snapshot.edges):
        sym = holdings[u] ^ holdings[v]
        if not sym:
            continue
        tok = sym.pop() if len(sym) == 1 else rng.choice(sorted(sym))
        if tok in holdings[u]:
            plan.append((u, v, tok))
        else:
            plan.append((v, u, tok))
    return plan


# ---------------------------------------------------------------------------
# Arrival-history protocols


class SkbPolicy:
    """Send distribution depending only on (round, node, arrival times).

    `masses` maps each held token to its send probability for the round; the
    remainder up to 1 is the probability of sending nothing.  Weights may not
    distinguish tokens with equal arrival times.
    """

    name = "skb"

    def masses(
        self, round_index: int, node: int, arrivals: Mapping[int, int]
    ) -> dict[int, float]:
        raise NotImplementedError

    def sample(
        self,
        rng: random.Random,
        round_index: int,
        node: int,
        arrivals: Mapping[int, int],
        held_in_order: list[int],
    ) -> int | None:
        """Draw one token (or None for idle).  One rng draw per node."""
        masses = self.masses(round_index, node, arrivals)
        x = rng.random()
        acc = 0.0
        for tok in sorted(masses):
            acc += masses[tok]
            if x < acc:
                return tok
        return None


class UniformSkbPolicy(SkbPolicy):
    """Uniform over held tokens, never idle.  Symmetric by construction."""

    name = "skb-uniform"

    def masses(self, round_index, node, arrivals):
        if not arrivals:
            return {}
        w = 1.0 / len(arrivals)
        return {tok: w for tok in arrivals}

    def sample(self, rng, round_index, node, arrivals, held_in_order):
        if not held_in_order:
            return None
        return held_in_order[rng.randrange(len(held_in_order))]


def uniform_skb() -> SkbPolicy:
    return UniformSkbPolicy()


@dataclass
class PolicyCheck:
    ok: bool
    violations: list[str]


def check_skb_policy(
    policy: SkbPolicy, state: TokenState, round_index: int, tol: float = 1e-9
) -> PolicyCheck:
    """Verify the transmission and symmetry constraints at the given state.

    Checks, per node: zero mass on unheld tokens, total mass at most 1, and
    equal mass for tokens with equal arrival times.  Violations are reported
    with witnesses rather than raised.
    """
    violations = []
    for node in range(state.n):
        arrivals = state.arrivals[node]
        masses = policy.masses(round_index, node, arrivals)
        for tok, mass in masses.items():
            if tok not in arrivals and mass > tol:
                violations.append(f"node {node}: mass {mass} on unheld token {tok}")
        total = sum(masses.values())
        if total > 1.0 + tol:
            violations.append(f"node {node}: total mass {total} exceeds 1")
        by_arrival: dict[int, list[int]] = {}
        for tok in arrivals:
            by_arrival.setdefault(arrivals[tok], []).append(tok)
        for when, toks in by_arrival.items():
            if len(toks) < 2:
                continue
            ref = masses.get(toks[0], 0.0)
            for tok in toks[1:]:
                if abs(masses.get(tok, 0.0) - ref) > tol:
                    violations.append(
                        f"node {node}: tokens {toks[0]} and {tok} arrived at "
                        f"round {when} but have masses {ref} != {masses.get(tok, 0.0)}"
                    )
                    break
    return PolicyCheck(not violations, violations)


def skb_step(
    policy: SkbPolicy,
    state: TokenState,
    snapshot: NetworkSnapshot,
    rng: random.Random,
) -> list[Send]:
    """Each node samples at most one held token and broadcasts it.

    Sends where the receiver already holds the token are omitted from the
    plan; they would be no-ops under store-copy-forward semantics.  Draws are
    made in ascending node order.
    """
    plan: list[Send] = []
    round_index = state.current_round + 1
    adjacency = snapshot.adjacency
    holdings = state.holdings
    for node in range(state.n):
        seq = state.holdings_seq[node]
        if not seq:
            continue
        tok = policy.sample(rng, round_index, node, state.arrivals[node], seq)
        if tok is None:
            continue
        for nb in adjacency[node]:
            if tok not in holdings[nb]:
                plan.append((node, nb, tok))
    return plan


# ---------------------------------------------------------------------------
# Flooding


def flood_step(token: int, state: TokenState, snapshot: NetworkSnapshot) -> list[Send]:
    """Every holder forwards the token on edges whose far end lacks it."""
    plan: list[Send] = []
    holdings = state.holdings
    for u, v in snapshot.edges:
        u_has = token in holdings[u]
        v_has = token in holdings[v]
        if u_has and not v_has:
            plan.append((u, v, token))
        elif v_has and not u_has:
            plan.append((v, u, token))
    return plan


# ---------------------------------------------------------------------------
# Protocol objects and registry


class RandDiff:
    name = "rand-diff"

    def plan_round(self, state, snapshot, rng):
        return rand_diff_step(state, snapshot, rng)


class SymDiff:
    name = "sym-diff"

    def plan_round(self, state, snapshot, rng):
        return sym_diff_step(state, snapshot, rng)


class SkbProtocol:
    def __init__(self, policy: SkbPolicy):
        self.policy = policy
        self.name = policy.name

    def plan_round(self, state, snapshot, rng):
        return skb_step(self.policy, state, snapshot, rng)


class Flood:
    def __init__(self, token: int):
        self.token = token
        self.name = f"flood:{token}"

    def plan_round(self, state, snapshot, rng):
        return flood_step(self.token, state, snapshot)


STEPPED_PROTOCOLS: dict[str, Callable[[], object]] = {
    "rand-diff": RandDiff,
    "sym-diff": SymDiff,
    "skb-uniform": lambda: SkbProtocol(uniform_skb()),
}


def get_protocol(name: str):
    """Resolve a protocol by CLI name (`flood:<token>` carries a parameter)."""
    if name in STEPPED_PROTOCOLS:
        return STEPPED_PROTOCOLS[name]()
    if name.startswith("flood:"):
        return Flood(int(name.split(":", 1)[1]))
    raise KeyError(f"unknown protocol {name!r}")
