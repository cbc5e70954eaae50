"""The full Zerg pipeline: observe, plan, translate, verify, dispatch.

One ``step`` per tick: fresh observation and critical-event edges feed the
planner; any translated command lines go through parse/repair/verification;
the suspension queue is pumped first so older commands get first call on
the bank.  Unit micro (fight, flee, inject) is reflex-driven inside the
engine and needs no orders from here.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import command_center as cc
from . import perception
from .overmind import BrainAdapter, Planner
from .mapmatrix import render_prompt_matrix
from .world import ZERG, EngineOrder, Observation, WorldState, observe


@dataclass(slots=True)
class CommandRecord:
    """One processed command line, kept for match statistics."""

    tick: int
    raw: str
    status: str
    verb: str | None
    kind: str | None
    target_kind: str | None
    reason: str | None

    def as_record(self) -> dict:
        return {
            "tick": self.tick, "raw": self.raw, "status": self.status,
            "verb": self.verb, "kind": self.kind,
            "target_kind": self.target_kind, "reason": self.reason,
        }


class ZergAgent:
    """Drives the strategic loop for one player over a live world state."""

    def __init__(self, brain: BrainAdapter, state: WorldState,
                 player: str = ZERG) -> None:
        self.player = player
        self.planner = Planner(brain, render_prompt_matrix(state.matrix))
        self.queue: list[cc.SuspendedCommand] = []
        self.prev_obs: Observation | None = None
        self.command_log: list[CommandRecord] = []

    def step(self, state: WorldState) -> list[EngineOrder]:
        obs = observe(state, self.player)
        events = perception.detect_critical_events(obs, self.prev_obs)
        self.prev_obs = obs
        if events:
            self.planner.note_events(events)
        report = perception.render_situation_report(obs)
        lines = self.planner.step(report, state.tick)

        spent = {"minerals": 0, "gas": 0, "supply": 0}
        outcomes = cc.pump_suspended(state, self.queue, state.tick, spent)
        outcomes += cc.process_command_list(
            lines, state, self.queue, state.tick, self.player, spent=spent)

        orders: list[EngineOrder] = []
        for outcome in outcomes:
            orders.extend(outcome.orders)
            self._record(outcome, state.tick)
        return orders

    def _record(self, outcome: cc.Outcome, tick: int) -> None:
        cmd = outcome.command
        self.command_log.append(CommandRecord(
            tick=tick,
            raw=outcome.raw,
            status=outcome.status,
            verb=cmd.verb if cmd else None,
            kind=cmd.kind if cmd else None,
            target_kind=cmd.target_kind if cmd else None,
            reason=outcome.reason,
        ))

    @property
    def parse_failures(self) -> int:
        return self.planner.parse_failures
