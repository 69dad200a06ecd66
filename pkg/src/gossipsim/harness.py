"""Experiment orchestration: schedule dispatch, seeded batch runs, sweeps.

Configs are JSON with explicit seeds (no ambient entropy).  Each (n, seed)
cell generates or loads a schedule, runs one simulation, and contributes one
CSV row with the fixed header::

    n,seed,adversary,protocol,completion_round,sentinel_round,wall_time_ms

Timeouts are data, not errors.  For schedules whose metadata designates
sentinel tokens and target nodes, the sentinel column records the first round
any sentinel token reached any target node.  Cells may run across a worker
pool (GOSSIPSIM_WORKERS); rows are collected and written in (n, seed) order
so output bytes never depend on scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from .blocker_line import BlockerLineParams, build_blocker_line_invasive, build_blocker_line_oblivious
from .central import CentralParams, k_gossip_centralized, n_broadcast
from .core import (
    AdversarySchedule,
    EngineRun,
    NetworkSnapshot,
    SimulationResult,
    TokenState,
    TokenUniverse,
    run_simulation,
)
from .dgs1 import import_schedule
from .paths import build_center_terminal, build_ring_failure
from .protocols import get_protocol
from .random_schedules import build_random_interval_connected
from .skb_adversary import SkbAdversaryParams, build_skb_adversary

CSV_HEADER = ["n", "seed", "adversary", "protocol", "completion_round", "sentinel_round", "wall_time_ms"]


# ---------------------------------------------------------------------------
# Schedule dispatch


def _static_schedule(n: int, edges, name: str, horizon: int) -> AdversarySchedule:
    snap = NetworkSnapshot(n, edges)
    return AdversarySchedule(
        n=n,
        horizon=horizon,
        snapshots=[snap] * horizon,
        metadata={"generator": name, "params": {"n": n, "horizon": horizon}},
        cyclic_extendable=True,
    )


def build_schedule(spec: dict, n: int, fallback_seed: int) -> AdversarySchedule:
    """Instantiate the adversary named in `spec` for the given n.

    A seed inside the adversary dict pins the schedule across cells;
    otherwise the cell seed applies (schedule-construction randomness and
    protocol randomness still come from disjoint derivation streams).
    """
    name = spec["name"]
    seed = spec.get("seed", fallback_seed)
    horizon = spec.get("horizon", 1)
    if name == "static-line":
        return _static_schedule(n, [(i, i + 1) for i in range(n - 1)], name, horizon)
    if name == "static-cycle":
        return _static_schedule(n, [(i, (i + 1) % n) for i in range(n)], name, horizon)
    if name == "static-complete":
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
        return _static_schedule(n, edges, name, horizon)
    if name == "random":
        return build_random_interval_connected(
            n, spec.get("extra_edge_prob", 0.1), seed, horizon
        )
    if name == "ring-failure":
        schedule, _, _ = build_ring_failure(
            n, spec.get("policy", "round-robin"), seed, horizon
        )
        return schedule
    if name == "center-terminal":
        schedule, _, _ = build_center_terminal(n, spec["r"], seed, horizon)
        return schedule
    if name == "blocker-invasive":
        params = BlockerLineParams(
            n, seed, epsilon=spec.get("epsilon", 1.0 / 32.0), c_clique=spec.get("c_clique", 3.0)
        )
        return build_blocker_line_invasive(params)
    if name == "blocker-oblivious":
        params = BlockerLineParams(
            n, seed, epsilon=spec.get("epsilon", 1.0 / 32.0), c_clique=spec.get("c_clique", 3.0)
        )
        return build_blocker_line_oblivious(params)
    if name == "skb-blocker":
        return build_skb_adversary(SkbAdversaryParams(n, seed))
    if name == "file":
        return import_schedule(spec["path"], spec.get("metadata_path"))
    raise KeyError(f"unknown adversary {name!r}")


# ---------------------------------------------------------------------------
# Initial distributions


def initial_state(spec: dict, n: int, schedule: AdversarySchedule) -> TokenState:
    kind = spec.get("kind", "single-source")
    if kind == "single-source":
        source = spec.get("source", schedule.metadata.get("source", 0))
        size = spec.get("tokens", n)
        universe = TokenUniverse(size=size, real_count=spec.get("real_tokens", size))
        return TokenState(n, universe, {source: range(size)})
    if kind == "one-token-per-node":
        universe = TokenUniverse(size=n, real_count=n)
        return TokenState(n, universe, {v: [v] for v in range(n)})
    if kind == "file":
        payload = json.loads(Path(spec["path"]).read_text(encoding="utf-8"))
        universe = TokenUniverse(
            size=payload["universe"]["size"], real_count=payload["universe"]["real"]
        )
        holdings = {int(node): toks for node, toks in payload["holdings"].items()}
        return TokenState(n, universe, holdings)
    raise KeyError(f"unknown initial distribution {kind!r}")


# ---------------------------------------------------------------------------
# Sentinel measurement


def sentinel_round_from_state(state: TokenState, metadata: dict) -> int | None:
    """First round any metadata-designated sentinel token reached any target
    node, or None if that never happened (or no sentinels are designated)."""
    sentinels = metadata.get("sentinel_tokens")
    targets = metadata.get("target_nodes")
    if not sentinels or not targets:
        return None
    sentinel_set = set(sentinels)
    best = None
    for node in targets:
        for tok, rnd in state.arrivals[node].items():
            if tok in sentinel_set and (best is None or rnd < best):
                best = rnd
    return best


def make_sentinel_stop(metadata: dict):
    sentinels = set(metadata.get("sentinel_tokens") or ())
    targets = set(metadata.get("target_nodes") or ())
    if not sentinels or not targets:
        return None

    def stop(state, round_index, new_arrivals):
        return any(tok in sentinels and node in targets for tok, node in new_arrivals)

    return stop


# ---------------------------------------------------------------------------
# Single cells


@dataclass
class ExperimentConfig:
    adversary: dict
    protocol: dict
    initial: dict
    n_list: list[int]
    seeds: list[int]
    max_rounds: int
    out: str | None = None
    stop_at_sentinel: bool = False
    emit_trace: bool = False
    measure: str = "completion"  # sweep aggregation: completion | sentinel

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        cfg = cls(
            adversary=raw["adversary"],
            protocol=raw["protocol"],
            initial=raw.get("initial", {"kind": "single-source"}),
            n_list=list(raw["n"]),
            seeds=list(raw["seeds"]),
            max_rounds=int(raw["max_rounds"]),
            out=raw.get("out"),
            stop_at_sentinel=bool(raw.get("stop_at_sentinel", False)),
            emit_trace=bool(raw.get("emit_trace", False)),
            measure=raw.get("measure", "completion"),
        )
        if not cfg.n_list or not cfg.seeds:
            raise ValueError("config needs nonempty n list and seeds")
        return cfg

    def to_canonical_json(self) -> str:
        payload = {
            "adversary": self.adversary,
            "protocol": self.protocol,
            "initial": self.initial,
            "n": self.n_list,
            "seeds": self.seeds,
            "max_rounds": self.max_rounds,
            "stop_at_sentinel": self.stop_at_sentinel,
            "measure": self.measure,
        }
        return json.dumps(payload, sort_keys=True)

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_canonical_json().encode()).hexdigest()


@dataclass
class CellResult:
    n: int
    seed: int
    completion_round: int | None
    sentinel_round: int | None
    wall_time_ms: float
    timed_out: bool
    result: SimulationResult | None = None


def pad_state_for_kgossip(state: TokenState) -> TokenState:
    """Extend the universe to a whole number of n-token groups; the dummy ids
    start out at node 0 so every token is held somewhere."""
    n, k = state.n, state.universe.real_count
    group_count = -(-k // n)
    size = group_count * n
    if state.universe.size == size:
        return state
    holdings = {v: set(state.holdings[v]) for v in range(n)}
    holdings[0] = holdings.get(0, set()) | set(range(k, size))
    return TokenState(n, TokenUniverse(size, k), holdings)


def run_cell(config: ExperimentConfig, n: int, seed: int, keep_result: bool = False) -> CellResult:
    schedule = build_schedule(config.adversary, n, seed)
    state = initial_state(config.initial, n, schedule)
    name = config.protocol["name"]
    start = time.perf_counter()
    if name == "central-broadcast":
        run = EngineRun(schedule, state, seed, config.max_rounds)
        source = config.initial.get("source", schedule.metadata.get("source", 0))
        n_broadcast(run, source, _central_params(config.protocol))
        result = run.result()
    elif name == "central-kgossip":
        state = pad_state_for_kgossip(state)
        run = EngineRun(schedule, state, seed, config.max_rounds)
        outcome = k_gossip_centralized(
            run, state.universe.real_count, _central_params(config.protocol)
        )
        result = outcome.result
    else:
        protocol = get_protocol(name)
        stop = make_sentinel_stop(schedule.metadata) if config.stop_at_sentinel else None
        result = run_simulation(
            schedule, protocol, state, config.max_rounds, seed, stop_when=stop
        )
    wall_ms = (time.perf_counter() - start) * 1000.0
    sentinel = sentinel_round_from_state(result.final_state, schedule.metadata)
    if config.emit_trace and config.out:
        save_trace(result.final_state, f"{config.out}.trace-n{n}-s{seed}.json")
    return CellResult(
        n=n,
        seed=seed,
        completion_round=result.completion_round,
        sentinel_round=sentinel,
        wall_time_ms=wall_ms,
        timed_out=result.timed_out,
        result=result if keep_result else None,
    )


def _central_params(protocol_spec: dict) -> CentralParams:
    fields = {}
    for key in ("c_phase", "c_stage", "c_ex", "c_cap", "c_s", "mode"):
        if key in protocol_spec:
            fields[key] = protocol_spec[key]
    if "c_S" in protocol_spec:
        fields["c_s"] = protocol_spec["c_S"]
    return CentralParams(**fields)


def _cell_task(payload):
    raw, n, seed = payload
    cell = run_cell(ExperimentConfig.from_dict(raw), n, seed)
    return (n, seed, cell.completion_round, cell.sentinel_round, cell.wall_time_ms, cell.timed_out)


# ---------------------------------------------------------------------------
# Batch runs


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("GOSSIPSIM_WORKERS", "1")))
    except ValueError:
        return 1


def run_experiment(config: ExperimentConfig) -> list[dict]:
    """Run the full (n, seed) grid; returns rows and writes CSV when
    config.out is set.  Identical configs produce identical data columns."""
    cells = [(n, seed) for n in config.n_list for seed in config.seeds]
    workers = worker_count()
    results = {}
    if workers > 1 and len(cells) > 1:
        import multiprocessing

        raw = _config_raw(config)
        with multiprocessing.Pool(workers) as pool:
            for n, seed, comp, sent, wall, timed in pool.map(
                _cell_task, [(raw, n, seed) for n, seed in cells]
            ):
                results[(n, seed)] = (comp, sent, wall, timed)
    else:
        for n, seed in cells:
            cell = run_cell(config, n, seed)
            results[(n, seed)] = (
                cell.completion_round,
                cell.sentinel_round,
                cell.wall_time_ms,
                cell.timed_out,
            )

    rows = []
    for n, seed in sorted(cells):
        comp, sent, wall, timed = results[(n, seed)]
        rows.append(
            {
                "n": n,
                "seed": seed,
                "adversary": config.adversary["name"],
                "protocol": config.protocol["name"],
                "completion_round": "TIMEOUT" if timed else comp,
                "sentinel_round": "" if sent is None else sent,
                "wall_time_ms": f"{wall:.3f}",
            }
        )
    if config.out:
        write_rows(config.out, rows)
        meta_path = Path(config.out + ".meta.json")
        meta_path.write_text(
            json.dumps(
                {"config_hash": config.content_hash(), "config": _config_raw(config)},
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
    return rows


def _config_raw(config: ExperimentConfig) -> dict:
    return {
        "adversary": config.adversary,
        "protocol": config.protocol,
        "initial": config.initial,
        "n": config.n_list,
        "seeds": config.seeds,
        "max_rounds": config.max_rounds,
        "out": config.out,
        "stop_at_sentinel": config.stop_at_sentinel,
        "emit_trace": config.emit_trace,
        "measure": config.measure,
    }


def write_rows(path: str | Path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(rows)


def rows_to_csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_HEADER)
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Sweeps


def fit_loglog_slope(pairs: list[tuple[float, float]]) -> float:
    """Least-squares slope of log2(y) against log2(x)."""
    if len(pairs) < 2:
        raise ValueError("need at least two points")
    xs = [math.log2(x) for x, _ in pairs]
    ys = [math.log2(y) for _, y in pairs]
    mean_x = sum(xs) / len(xs)
    mean_y = sum(ys) / len(ys)
    num = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    den = sum((x - mean_x) ** 2 for x in xs)
    return num / den


def median(values: list[float]) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2.0


@dataclass
class SweepSummary:
    per_n: dict[int, dict] = field(default_factory=dict)
    slope: float | None = None
    measure: str = "completion"


def summarize_sweep(rows: list[dict], config: ExperimentConfig) -> SweepSummary:
    summary = SweepSummary(measure=config.measure)
    for n in sorted(config.n_list):
        cell_rows = [r for r in rows if r["n"] == n]
        if config.measure == "sentinel":
            values = [
                float(r["sentinel_round"]) for r in cell_rows if r["sentinel_round"] != ""
            ]
        else:
            values = [
                float(r["completion_round"])
                for r in cell_rows
                if r["completion_round"] != "TIMEOUT"
            ]
        timeouts = sum(1 for r in cell_rows if r["completion_round"] == "TIMEOUT")
        entry = {
            "count": len(cell_rows),
            "completed": len(values),
            "timeout_fraction": timeouts / len(cell_rows) if cell_rows else 0.0,
        }
        if values:
            entry["median"] = median(values)
            entry["mean"] = sum(values) / len(values)
        summary.per_n[n] = entry
    points = [
        (n, e["median"])
        for n, e in summary.per_n.items()
        if e.get("median") and e["median"] > 0
    ]
    if len(points) >= 3:
        summary.slope = fit_loglog_slope(points)
    return summary


def sweep(config: ExperimentConfig) -> SweepSummary:
    """Run the grid, aggregate medians per n, and fit the log-log slope.

    Censored (timeout) cells are excluded from the fit; their fraction is
    reported per n.  Writes a summary CSV and a two-column plot-data file
    next to config.out when set.
    """
    if len(config.n_list) < 3:
        raise ValueError("sweep needs at least 3 n values")
    rows = run_experiment(config)
    summary = summarize_sweep(rows, config)
    if summary.slope is None:
        raise ValueError("insufficient completed n-values for slope")
    if config.out:
        base = Path(config.out)
        with open(str(base) + ".summary.csv", "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "count", "completed", "timeout_fraction", "median", "mean"])
            for n in sorted(summary.per_n):
                e = summary.per_n[n]
                writer.writerow(
                    [n, e["count"], e["completed"], f"{e['timeout_fraction']:.4f}",
                     e.get("median", ""), e.get("mean", "")]
                )
        with open(str(base) + ".plot.dat", "w", encoding="ascii") as fh:
            for n in sorted(summary.per_n):
                e = summary.per_n[n]
                if e.get("median"):
                    fh.write(f"{math.log2(n):.6f} {math.log2(e['median']):.6f}\n")
    return summary


# ---------------------------------------------------------------------------
# Blocker separation measurement


def save_trace(state: TokenState, path: str | Path) -> None:
    payload = {
        "n": state.n,
        "arrivals": [
            {str(tok): rnd for tok, rnd in state.arrivals[v].items()}
            for v in range(state.n)
        ],
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_trace(path: str | Path) -> list[dict[int, int]]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        {int(tok): rnd for tok, rnd in entry.items()} for entry in payload["arrivals"]
    ]


def measure_blocker_separation(
    arrivals: list[dict[int, int]], metadata: dict
) -> dict:
    """Fraction of ordered adjacent inner-node pairs, over all segment run
    rounds, whose one-sided holding difference is below sqrt(n)/16.

    Holdings during round t are those with arrival time at most t-1.
    """
    segments = metadata.get("segments")
    if not segments:
        raise ValueError("metadata does not describe blocker segments")
    n = metadata["params"]["n"]
    threshold = math.sqrt(n) / 16.0
    small = 0
    total = 0
    for seg in segments:
        inner = seg["inner"]
        lo, hi = seg["rounds"]
        for t in range(lo, hi + 1):
            for a, b in zip(inner, inner[1:]):
                held_a = {tok for tok, r in arrivals[a].items() if r <= t - 1}
                held_b = {tok for tok, r in arrivals[b].items() if r <= t - 1}
                for diff in (len(held_a - held_b), len(held_b - held_a)):
                    total += 1
                    if diff < threshold:
                        small += 1
    if total == 0:
        raise ValueError("no adjacent inner pairs to measure")
    return {"fraction_small": small / total, "pairs_measured": total, "threshold": threshold}
