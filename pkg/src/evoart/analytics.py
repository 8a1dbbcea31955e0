"""Chart-ready distribution data and the append-only session transcript.

Radar data normalizes discrete-value weights per attribute; bar data
pairs each continuous model with a 10-bin histogram of the voted
individuals' gene values; stream data strings the radar series across
iterations. The session log is a JSONL transcript (header + one record
per iteration) written atomically, from which the whole session can be
replayed bit-exactly.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from pathlib import Path

from .chromosome import random_chromosome  # noqa: F401  (re-exported for demos)
from .genetics import (
    EvolutionState,
    Generation,
    IterationSnapshot,
    NormalModel,
    evolve,
    generation_from_doc,
    generation_to_doc,
    initial_generation,
    initial_state,
    state_to_doc,
)
from .guideline import AttributeSchema, schema_from_doc

HIST_BINS = 10
LOG_VERSION = 1


@dataclass(frozen=True)
class BarStats:
    mean: float
    var: float
    hist: tuple[int, ...]


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    radar: dict[str, dict[str, float]]
    bars: dict[str, BarStats]
    votes_total: int


@dataclass(frozen=True)
class StreamSeries:
    """Per value token, its normalized weight at every iteration so far."""

    series: dict[str, tuple[float, ...]]
    iterations: int


def compute_stats(
    state: EvolutionState,
    g: Generation,
    schema: AttributeSchema,
    *,
    population: bool = False,
) -> IterationStats:
    """Distribution snapshot after a ballot. Histograms cover voted
    individuals only unless `population` asks for everyone."""
    radar: dict[str, dict[str, float]] = {}
    for attr in schema.discrete_attributes:
        total = sum(state.weights[v] for v in attr.values)
        radar[attr.id] = {v: state.weights[v] / total for v in attr.values}
    bars: dict[str, BarStats] = {}
    for attr in schema.continuous_attributes:
        model = state.models[attr.id]
        hist = [0] * HIST_BINS
        for ind in g.individuals:
            if population or ind.votes > 0:
                x = ind.chromosome.continuous_genes[attr.id]
                hist[min(HIST_BINS - 1, int(x * HIST_BINS))] += 1
        bars[attr.id] = BarStats(model.mean, model.var, tuple(hist))
    return IterationStats(
        iteration=g.index,
        radar=radar,
        bars=bars,
        votes_total=sum(i.votes for i in g.individuals),
    )


def stats_to_doc(s: IterationStats) -> dict:
    return {
        "iteration": s.iteration,
        "radar": {a: {v: float(x) for v, x in vals.items()} for a, vals in s.radar.items()},
        "bars": {
            a: {"mean": float(b.mean), "var": float(b.var), "hist": list(b.hist)}
            for a, b in s.bars.items()
        },
        "votes_total": s.votes_total,
    }


def stats_from_doc(doc) -> IterationStats:
    return IterationStats(
        iteration=int(doc["iteration"]),
        radar={a: dict(vals) for a, vals in doc["radar"].items()},
        bars={
            a: BarStats(b["mean"], b["var"], tuple(b["hist"])) for a, b in doc["bars"].items()
        },
        votes_total=int(doc["votes_total"]),
    )


def stream(log: "SessionLog") -> StreamSeries:
    """Normalized-weight trajectory of every discrete value."""
    if not log.records:
        raise ValueError("empty session log")
    series: dict[str, list[float]] = {}
    for rec in log.records:
        for vals in rec.stats["radar"].values():
            for v, x in vals.items():
                series.setdefault(v, []).append(float(x))
    n = len(log.records)
    bad = [v for v, xs in series.items() if len(xs) != n]
    if bad:
        raise ValueError(f"value '{bad[0]}' missing from some iterations")
    return StreamSeries({v: tuple(xs) for v, xs in series.items()}, n)


# ---------------------------------------------------------------------------
# Session log
# ---------------------------------------------------------------------------


@dataclass
class LogRecord:
    index: int
    ballot: dict[str, int] | None
    nonce: str | None
    generation: dict
    state: dict
    stats: dict


@dataclass
class SessionLog:
    session_id: str
    schema_doc: dict
    config: dict
    records: list[LogRecord] = field(default_factory=list)


def append(log: SessionLog, record: LogRecord) -> None:
    """In-memory append; records must arrive densely ordered."""
    expected = log.records[-1].index + 1 if log.records else 0
    if record.index != expected:
        raise ValueError(f"record index {record.index} out of order, expected {expected}")
    log.records.append(record)


def _record_to_doc(r: LogRecord) -> dict:
    return {
        "index": r.index,
        "ballot": r.ballot,
        "nonce": r.nonce,
        "generation": r.generation,
        "state": r.state,
        "stats": r.stats,
    }


def _record_from_doc(doc) -> LogRecord:
    return LogRecord(
        index=int(doc["index"]),
        ballot=doc.get("ballot"),
        nonce=doc.get("nonce"),
        generation=doc["generation"],
        state=doc["state"],
        stats=doc["stats"],
    )


class SessionLogStore:
    """One JSONL file per session under `root`. Appends rewrite the file to
    a temp path and rename it, so a crash leaves either the old or the new
    transcript, never a torn one."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def exists(self, session_id: str) -> bool:
        return self.path(session_id).is_file()

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))

    def _serialize(self, log: SessionLog, records: list[LogRecord]) -> str:
        header = {
            "version": LOG_VERSION,
            "session": log.session_id,
            "schema": log.schema_doc,
            "config": log.config,
        }
        lines = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
        lines += [
            json.dumps(_record_to_doc(r), sort_keys=True, separators=(",", ":"))
            for r in records
        ]
        return "\n".join(lines) + "\n"

    def _flush(self, log: SessionLog, records: list[LogRecord]) -> None:
        path = self.path(log.session_id)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self._serialize(log, records))
        os.replace(tmp, path)

    def write(self, log: SessionLog) -> None:
        self._flush(log, log.records)

    def append(self, log: SessionLog, record: LogRecord) -> None:
        """Durable write first; the in-memory log only sees the record once
        the rename succeeded."""
        expected = log.records[-1].index + 1 if log.records else 0
        if record.index != expected:
            raise ValueError(f"record index {record.index} out of order, expected {expected}")
        self._flush(log, log.records + [record])
        log.records.append(record)

    def load(self, session_id: str) -> SessionLog:
        path = self.path(session_id)
        if not path.is_file():
            raise KeyError(session_id)
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        if header.get("version") != LOG_VERSION:
            raise ValueError(f"unsupported log version {header.get('version')!r}")
        log = SessionLog(header["session"], header["schema"], header["config"])
        for line in lines[1:]:
            if line.strip():
                append(log, _record_from_doc(json.loads(line)))
        return log

    def load_path(self, path: str | Path) -> SessionLog:
        path = Path(path)
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        log = SessionLog(header["session"], header["schema"], header["config"])
        for line in lines[1:]:
            if line.strip():
                append(log, _record_from_doc(json.loads(line)))
        return log


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


class ReplayError(ValueError):
    pass


def _refs_from_record(gen_doc) -> dict[str, tuple[str | None, bool]]:
    return {
        d["id"]: (d.get("image_ref"), bool(d.get("degraded", False)))
        for d in gen_doc["individuals"]
    }


def replay_session(log: SessionLog, *, strict: bool = True):
    """Re-run the whole session from the logged config and ballots.

    Returns (schema, state, generation, rng) positioned after the last
    record. With `strict`, every recomputed state and generation must
    equal the stored snapshot — the log is a deterministic transcript.
    """
    if not log.records:
        raise ReplayError("log has no records")
    schema = schema_from_doc(log.schema_doc)
    cfg = log.config
    rng = random.Random(cfg["master_seed"])

    refs0 = _refs_from_record(log.records[0].generation)
    g = initial_generation(
        schema, int(cfg["n"]), rng, render=lambda iid, c: refs0.get(iid, (None, False))
    )
    state = initial_state(schema)
    if strict:
        if generation_to_doc(g) != log.records[0].generation:
            raise ReplayError("initial generation does not replay to the stored record")
        if state_to_doc(state) != log.records[0].state:
            raise ReplayError("initial state does not replay to the stored record")

    for rec in log.records[1:]:
        refs = _refs_from_record(rec.generation)
        g, state = evolve(
            g,
            rec.ballot or {},
            state,
            schema,
            rng,
            mutation_rate=float(cfg["mutation_rate"]),
            render=lambda iid, c, _refs=refs: _refs.get(iid, (None, False)),
            rerender_survivors=bool(cfg.get("rerender_survivors", False)),
        )
        if strict:
            if generation_to_doc(g) != rec.generation:
                raise ReplayError(f"generation {rec.index} does not replay to the stored record")
            if state_to_doc(state) != rec.state:
                raise ReplayError(f"state {rec.index} does not replay to the stored record")
    return schema, state, g, rng
