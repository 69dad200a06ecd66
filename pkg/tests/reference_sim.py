"""Straight-line reference simulator, independent of the package internals.

Implements the round contract directly over dicts of sets: per round, every
directed edge carries one token drawn uniformly from the sender-minus-
receiver difference (ascending directed-edge draw order, per-round rng
derived by the same published keying rule).  Used as the oracle for engine
completion values; kept free of gossipsim imports on purpose.
"""

import hashlib
import random


def _round_rng(seed, t):
    material = "|".join(repr(k) for k in (seed, "round", t)).encode()
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


def reference_rand_diff_completion(n, edges, holdings, max_rounds, seed):
    """Rounds until every node holds every token, or None on timeout.

    `edges` is a static undirected edge list; `holdings` maps node -> set of
    tokens at round 0.
    """
    sets = {v: set(holdings.get(v, ())) for v in range(n)}
    universe = set()
    for toks in sets.values():
        universe |= toks
    directed = sorted([(u, v) for u, v in edges] + [(v, u) for u, v in edges])
    for t in range(1, max_rounds + 1):
        rng = _round_rng(seed, t)
        sends = []
        for u, v in directed:
            diff = sets[u] - sets[v]
            if diff:
                if len(diff) == 1:
                    (tok,) = diff
                else:
                    tok = rng.choice(sorted(diff))
                sends.append((v, tok))
        for v, tok in sends:
            sets[v].add(tok)
        if all(sets[v] == universe for v in range(n)):
            return t
    return None
