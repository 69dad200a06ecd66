"""DGS1 schedule files: a line-oriented, bit-exact text format.

Layout::

    DGS1 <n> <horizon> <mode>
    R 0                      # only when setup insertions exist
    I <node> <token>
    R 1
    E <u> <v>                # u < v, ascending
    I <node> <token>         # ascending (node, token)
    ...

Round blocks run 1..horizon; the optional round-0 block carries insertions
that apply before the first round.  The writer emits canonical ordering and
the reader enforces it, so export -> import -> export is byte-identical.
A JSON sidecar carries generator metadata (parameters, blocker partitions,
interval boundaries, sentinel sets, extendability).
"""

from __future__ import annotations

import json
from pathlib import Path

from .core import AdversarySchedule, InsertionEvent, NetworkSnapshot, validate_snapshot


class Dgs1Error(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def schedule_to_text(schedule: AdversarySchedule) -> str:
    problems = schedule.validate()
    if problems:
        raise Dgs1Error(f"refusing to export invalid schedule: {problems[0]}")
    by_round = schedule.insertions_by_round()
    out = [f"DGS1 {schedule.n} {schedule.horizon} {schedule.mode}"]
    if by_round.get(0):
        out.append("R 0")
        for ev in sorted(by_round[0], key=lambda e: (e.node, e.token)):
            out.append(f"I {ev.node} {ev.token}")
    for t in range(1, schedule.horizon + 1):
        out.append(f"R {t}")
        for u, v in sorted(schedule.snapshots[t - 1].edges):
            out.append(f"E {u} {v}")
        for ev in sorted(by_round.get(t, ()), key=lambda e: (e.node, e.token)):
            out.append(f"I {ev.node} {ev.token}")
    return "\n".join(out) + "\n"


def export_schedule(schedule: AdversarySchedule, path: str | Path) -> None:
    Path(path).write_text(schedule_to_text(schedule), encoding="ascii")


def schedule_from_text(text: str) -> AdversarySchedule:
    lines = text.split("\n")
    if not text.endswith("\n"):
        raise Dgs1Error("missing trailing newline")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise Dgs1Error("empty file")
    header = lines[0].split()
    if len(header) != 4 or header[0] != "DGS1":
        raise Dgs1Error("bad header", 1)
    try:
        n, horizon = int(header[1]), int(header[2])
    except ValueError:
        raise Dgs1Error("non-integer header fields", 1) from None
    mode = header[3]
    if mode not in ("oblivious", "invasive"):
        raise Dgs1Error(f"unknown mode {mode!r}", 1)

    snapshots: list[NetworkSnapshot] = []
    insertions: list[InsertionEvent] = []
    current_round: int | None = None
    edges: list[tuple[int, int]] = []
    round_inserts: list[tuple[int, int]] = []
    expected_next = 0

    def close_round(line_no: int) -> None:
        nonlocal edges, round_inserts
        if current_round is None:
            return
        if current_round >= 1:
            snap = NetworkSnapshot(n, edges)
            if len(snap.edges) != len(edges):
                raise Dgs1Error(f"duplicate edge in round {current_round}", line_no)
            check = validate_snapshot(snap)
            if not check:
                raise Dgs1Error(
                    f"round {current_round}: {check.reason} (witness {check.witness})",
                    line_no,
                )
            snapshots.append(snap)
        elif edges:
            raise Dgs1Error("round 0 may not contain edges", line_no)
        for node, token in round_inserts:
            insertions.append(InsertionEvent(current_round, node, token))
        edges = []
        round_inserts = []

    for line_no, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if not parts:
            raise Dgs1Error("blank line", line_no)
        kind = parts[0]
        if kind == "R":
            if len(parts) != 2:
                raise Dgs1Error("malformed round line", line_no)
            close_round(line_no)
            t = int(parts[1])
            if current_round is None:
                if t not in (0, 1):
                    raise Dgs1Error(f"first round block must be 0 or 1, got {t}", line_no)
            elif t != current_round + 1:
                raise Dgs1Error(
                    f"round {t} out of order (expected {current_round + 1})", line_no
                )
            current_round = t
        elif kind == "E":
            if current_round is None or len(parts) != 3:
                raise Dgs1Error("edge line outside round block or malformed", line_no)
            u, v = int(parts[1]), int(parts[2])
            if u >= v:
                raise Dgs1Error(f"edge ({u}, {v}) not in u < v form", line_no)
            if edges and (u, v) <= edges[-1]:
                raise Dgs1Error(f"edge ({u}, {v}) out of order", line_no)
            if round_inserts:
                raise Dgs1Error("edge line after insertion lines", line_no)
            edges.append((u, v))
        elif kind == "I":
            if current_round is None or len(parts) != 3:
                raise Dgs1Error("insertion line outside round block or malformed", line_no)
            node, token = int(parts[1]), int(parts[2])
            if round_inserts and (node, token) <= round_inserts[-1]:
                raise Dgs1Error(f"insertion ({node}, {token}) out of order", line_no)
            round_inserts.append((node, token))
        else:
            raise Dgs1Error(f"unknown record {kind!r}", line_no)
    close_round(len(lines))

    if len(snapshots) != horizon:
        raise Dgs1Error(f"found {len(snapshots)} rounds, header says {horizon}")
    if mode == "oblivious" and insertions:
        raise Dgs1Error("oblivious schedule carries insertions")
    return AdversarySchedule(
        n=n,
        horizon=horizon,
        snapshots=snapshots,
        insertions=insertions,
        mode=mode,
    )


def import_schedule(path: str | Path, metadata_path: str | Path | None = None) -> AdversarySchedule:
    schedule = schedule_from_text(Path(path).read_text(encoding="ascii"))
    meta_file = Path(metadata_path) if metadata_path else default_metadata_path(path)
    if meta_file.exists():
        sidecar = json.loads(meta_file.read_text(encoding="utf-8"))
        schedule.cyclic_extendable = bool(sidecar.pop("cyclic_extendable", False))
        schedule.metadata = sidecar
    return schedule


def default_metadata_path(schedule_path: str | Path) -> Path:
    return Path(str(schedule_path) + ".meta.json")


def save_metadata(schedule: AdversarySchedule, path: str | Path) -> None:
    payload = dict(schedule.metadata)
    payload["cyclic_extendable"] = schedule.cyclic_extendable
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
