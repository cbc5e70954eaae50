"""Match runner: the Zerg pipeline against the scripted Terran, with
replays, statistics, and series aggregation.

A match is a plain tick loop — agent orders, opponent orders, one engine
step — recorded as one JSON line per tick.  The replay is hashed so that
determinism is checkable across runs, and every statistic in a report can
be recomputed from the replay file alone.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .agent import ZergAgent
from .mapmatrix import load_map_file
from .opponent import DIFFICULTIES, scripted_terran
from .overmind import (
    LATENCY_PROFILES,
    BrainAdapter,
    OvermindError,
    ReplayBrain,
    RemoteBrain,
    scripted_brain,
)
from .world import TERRAN, ZERG, advance_tick, starting_state

DEFAULT_MAX_TICKS = 2400

WIN = "win"
LOSS = "loss"
TIMEOUT = "timeout"
ABORTED = "aborted"

PARSE_FAILURE = "parse-failure"
ECONOMIC_COLLAPSE = "economic-collapse"
ARMY_LOSS = "army-loss"


@dataclass(slots=True)
class MatchConfig:
    difficulty: str = "VeryEasy"
    seed: int = 0
    brain_spec: str = "scripted:rush"
    latency_ticks: int | None = None
    max_ticks: int = DEFAULT_MAX_TICKS
    map_file: str | None = None
    out_dir: str | None = None

    def validate(self) -> None:
        if self.difficulty not in DIFFICULTIES:
            raise ValueError(
                f"unknown difficulty {self.difficulty!r} "
                f"(choose from {', '.join(DIFFICULTIES)})")
        kind = self.brain_spec.split(":", 1)[0]
        if kind not in ("scripted", "replay", "remote"):
            raise ValueError(
                f"unknown brain spec {self.brain_spec!r} "
                "(expected scripted:<policy>, replay:<file>, or remote:<url>)")
        if self.max_ticks < 1:
            raise ValueError("max_ticks must be positive")


@dataclass(slots=True)
class MatchStats:
    seed: int
    difficulty: str
    brain: str
    result: str
    duration_ticks: int
    command_counts: dict[str, int]
    transition_counts: dict[str, int]
    rounds_completed: int
    parse_failures: int
    loss_cause: str | None
    replay_hash: str
    replay_lines: tuple[str, ...] = field(default=(), repr=False)

    def as_row(self) -> dict:
        return {
            "seed": self.seed,
            "difficulty": self.difficulty,
            "brain": self.brain,
            "result": self.result,
            "duration_ticks": self.duration_ticks,
            "loss_cause": self.loss_cause or "",
            "rounds_completed": self.rounds_completed,
            "parse_failures": self.parse_failures,
            "replay_hash": self.replay_hash,
            "command_counts": json.dumps(self.command_counts, sort_keys=True),
        }


def build_brain(spec: str, latency_ticks: int | None = None) -> BrainAdapter:
    """scripted:<policy> | replay:<file> | remote:<url> -> a brain."""
    kind, _, arg = spec.partition(":")
    latency = LATENCY_PROFILES["gpt-3.5"] if latency_ticks is None else latency_ticks
    if kind == "scripted":
        return scripted_brain(arg or "rush", latency_ticks=latency)
    if kind == "replay":
        return ReplayBrain.from_file(arg, latency_ticks=latency)
    if kind == "remote":
        return RemoteBrain(arg, latency_ticks=latency_ticks)
    raise ValueError(f"unknown brain spec {spec!r}")


def command_label(verb: str | None, target_kind: str | None) -> str:
    """Fig-style label for one dispatched command."""
    if verb in ("Train", "Morph", "Build") and target_kind:
        return f"{verb} {target_kind}"
    return verb or "?"


def run_match(config: MatchConfig) -> MatchStats:
    config.validate()
    matrix = load_map_file(config.map_file) if config.map_file else None
    state = starting_state(matrix, seed=config.seed)
    brain = build_brain(config.brain_spec, config.latency_ticks)
    agent = ZergAgent(brain, state)
    opponent = scripted_terran(config.difficulty, config.seed)

    replay_lines: list[str] = []
    command_counts: dict[str, int] = {}
    transition_counts: dict[str, int] = {}
    result = TIMEOUT
    loss_cause: str | None = None

    for _ in range(config.max_ticks):
        commands_before = len(agent.command_log)
        requests_before = len(agent.planner.log)
        try:
            zerg_orders = agent.step(state)
        except OvermindError as err:
            if err.kind != "brain-unavailable":
                raise
            result = ABORTED
            loss_cause = "brain-unavailable"
            break
        terran_orders = opponent.step(state)
        events = advance_tick(state, zerg_orders + terran_orders)

        record = events.as_record()
        record["commands"] = [
            r.as_record() for r in agent.command_log[commands_before:]]
        record["requests"] = agent.planner.log[requests_before:]
        replay_lines.append(json.dumps(record, sort_keys=True))

        for r in agent.command_log[commands_before:]:
            if r.status == "dispatched":
                label = command_label(r.verb, r.target_kind)
                command_counts[label] = command_counts.get(label, 0) + 1
        for t in events.transitions:
            key = f"{t['kind']}:{t['from']}->{t['to']}"
            transition_counts[key] = transition_counts.get(key, 0) + 1

        zerg_out = state.eliminated(ZERG)
        terran_out = state.eliminated(TERRAN)
        if zerg_out:
            result = LOSS  # simultaneous elimination still counts against us
            break
        if terran_out:
            result = WIN
            break

    if result == LOSS:
        if agent.parse_failures > 0:
            loss_cause = PARSE_FAILURE
        elif state.worker_count(ZERG) < 6:
            loss_cause = ECONOMIC_COLLAPSE
        else:
            loss_cause = ARMY_LOSS

    digest = hashlib.sha256(
        "\n".join(replay_lines).encode("utf-8")).hexdigest()
    stats = MatchStats(
        seed=config.seed,
        difficulty=config.difficulty,
        brain=getattr(brain, "name", config.brain_spec),
        result=result,
        duration_ticks=state.tick,
        command_counts=command_counts,
        transition_counts=transition_counts,
        rounds_completed=agent.planner.rounds_completed,
        parse_failures=agent.parse_failures,
        loss_cause=loss_cause,
        replay_hash=digest,
        replay_lines=tuple(replay_lines),
    )
    if config.out_dir:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_replay(stats, out / f"replay_{config.difficulty}_{config.seed}.jsonl")
    return stats


def write_replay(stats: MatchStats, path: str | Path) -> Path:
    path = Path(path)
    path.write_text("\n".join(stats.replay_lines) + "\n", encoding="utf-8")
    return path


def replay_command_counts(path: str | Path) -> dict[str, int]:
    """Recompute the per-label dispatched-command table from a replay file."""
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            for r in record.get("commands", ()):
                if r.get("status") == "dispatched":
                    label = command_label(r.get("verb"), r.get("target_kind"))
                    counts[label] = counts.get(label, 0) + 1
    return counts


@dataclass(slots=True)
class SeriesReport:
    matches: list[MatchStats]

    @property
    def wins(self) -> int:
        return sum(1 for m in self.matches if m.result == WIN)

    @property
    def win_rate(self) -> float:
        return self.wins / len(self.matches) if self.matches else 0.0

    @property
    def mean_duration(self) -> float:
        if not self.matches:
            return 0.0
        return sum(m.duration_ticks for m in self.matches) / len(self.matches)

    def command_frequency(self) -> dict[str, int]:
        total: dict[str, int] = {}
        for m in self.matches:
            for label, n in m.command_counts.items():
                total[label] = total.get(label, 0) + n
        return total

    def command_percentages(self) -> dict[str, float]:
        freq = self.command_frequency()
        grand = sum(freq.values())
        if not grand:
            return {}
        return {label: 100.0 * n / grand for label, n in freq.items()}

    def loss_causes(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for m in self.matches:
            if m.loss_cause:
                out[m.loss_cause] = out.get(m.loss_cause, 0) + 1
        return out

    def as_summary(self) -> dict:
        return {
            "matches": len(self.matches),
            "wins": self.wins,
            "win_rate": round(self.win_rate, 4),
            "mean_duration_ticks": round(self.mean_duration, 2),
            "command_frequency": dict(sorted(
                self.command_frequency().items())),
            "command_percentages": {
                k: round(v, 2) for k, v in sorted(
                    self.command_percentages().items())},
            "loss_causes": self.loss_causes(),
        }


def run_series(config: MatchConfig, n: int) -> SeriesReport:
    """Run n matches varying the seed from the configured one upward."""
    if n < 1:
        raise ValueError("a series needs at least one match")
    matches = []
    for offset in range(n):
        one = MatchConfig(
            difficulty=config.difficulty,
            seed=config.seed + offset,
            brain_spec=config.brain_spec,
            latency_ticks=config.latency_ticks,
            max_ticks=config.max_ticks,
            map_file=config.map_file,
            out_dir=config.out_dir,
        )
        matches.append(run_match(one))
    return SeriesReport(matches=matches)


def export_stats_csv(report: SeriesReport, path: str | Path) -> Path:
    """One row per match plus one aggregate row, stable column order."""
    path = Path(path)
    fields = ["seed", "difficulty", "brain", "result", "duration_ticks",
              "loss_cause", "rounds_completed", "parse_failures",
              "replay_hash", "command_counts"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for m in report.matches:
            writer.writerow(m.as_row())
        summary = report.as_summary()
        writer.writerow({
            "seed": "aggregate",
            "difficulty": report.matches[0].difficulty if report.matches else "",
            "brain": report.matches[0].brain if report.matches else "",
            "result": f"{summary['wins']}/{summary['matches']} wins",
            "duration_ticks": summary["mean_duration_ticks"],
            "loss_cause": json.dumps(summary["loss_causes"], sort_keys=True),
            "rounds_completed": sum(
                m.rounds_completed for m in report.matches),
            "parse_failures": sum(m.parse_failures for m in report.matches),
            "replay_hash": "",
            "command_counts": json.dumps(
                summary["command_frequency"], sort_keys=True),
        })
    return path
