"""Turns translator output lines into engine orders.

Each line passes parse -> repair -> verify. Feasible commands dispatch
immediately as group orders; commands blocked on tech, funds, or a missing
worker wait in a FIFO queue that is re-checked every tick and expires after
a fixed window. Degenerate lines (free-text targets, misplaced workers) are
repaired where a deterministic reading exists and rejected otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from zergmind.gamedata import GameData, load_game_data
from zergmind.mapmatrix import BaseId
from zergmind.reflexnet import GATHER_GAS, GATHER_MINERALS, IDLE
from zergmind.world import (
    ZERG,
    BuildOrder,
    EngineOrder,
    Feasibility,
    GatherOrder,
    MorphBuildingOrder,
    MorphUnitOrder,
    MoveOrder,
    ProduceOrder,
    ResearchStart,
    WorldState,
    check_prerequisites,
)

GROUP_ALIAS = "Zerg units"
LARVA = "Larva"
EXPIRY_TICKS = 120

DISPATCHED = "dispatched"
SUSPENDED = "suspended"
REJECTED = "rejected"
EXPIRED = "expired"

_GROUP_WORDS = frozenset(
    {"zerg units", "zerg army", "zerg forces", "all units", "army"})
_LARVA_WORDS = frozenset({"larva", "larvae"})
_MOVE_VERBS = ("Move", "Attack", "Scout")
_WORKER_VERBS = ("Build", "GatherGas", "GatherMinerals")
_FREE_ACTIVITIES = (GATHER_MINERALS, GATHER_GAS, IDLE)


class CommandError(ValueError):
    """Parse/repair failure; ``kind`` is one of the defined error ids."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind


@dataclass(frozen=True, slots=True)
class Command:
    kind: str                      # subject kind, group alias, or larva
    location: BaseId | None        # subject base
    verb: str                      # canonical verb
    target_kind: str | None = None
    target_location: BaseId | None = None
    target_gas_index: int = 0
    target_text: str | None = None  # free text / research name


@dataclass(slots=True)
class SuspendedCommand:
    command: Command
    player: str
    reason: Feasibility
    enqueued_tick: int
    expiry_tick: int


@dataclass(frozen=True, slots=True)
class Outcome:
    raw: str
    command: Command | None
    status: str                     # dispatched | suspended | rejected | expired
    orders: tuple[EngineOrder, ...] = ()
    reason: str = ""


_VERB_DISPLAY = {"GatherGas": "Gather gas", "GatherMinerals": "Gather minerals"}


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_KEY_PREFIX = re.compile(r"^[\'\"‘’]?\d+[\'\"‘’]?\s*:\s*")
_TAG_FORM = re.compile(
    r"^\*?\(\s*Unit\(name='([^']+)',\s*tag=\d+\)\s*\)\s*(->.*)$")
_GRAMMAR = re.compile(
    r"^\(\s*([^()]*?)\s*\)\s*->\s*\(\s*([^()]*?)\s*\)"
    r"(?:\s*->\s*\(\s*([^()]*?)\s*\))?\s*$")
_BASE_TOKEN = re.compile(r"^[ABab][1-8]$")
_INDEXED_KIND = re.compile(r"^(.*?)(\d+)$")
_BASE_IN_TEXT = re.compile(r"\b([AB][1-8])\b")


def _fold_verb(text: str) -> str:
    return " ".join(text.lower().split())


def _parse_base(token: str) -> BaseId | None:
    if _BASE_TOKEN.match(token):
        return BaseId.parse(token.upper())
    return None


def _parse_subject(raw: str, data: GameData) -> tuple[str, BaseId | None]:
    parts = [p.strip() for p in raw.split(",")]
    kind_text = parts[0]
    folded = " ".join(kind_text.lower().split())
    if folded in _GROUP_WORDS:
        kind = GROUP_ALIAS
    elif folded in _LARVA_WORDS:
        kind = LARVA
    else:
        kind = data.resolve_kind(kind_text)
        if kind is None:
            raise CommandError("unknown-kind", kind_text)
    location = None
    for extra in parts[1:]:
        base = _parse_base(extra)
        if base is not None:
            location = base
    return kind, location


def _parse_target(raw: str | None, data: GameData) -> tuple[
        str | None, BaseId | None, int, str | None]:
    if raw is None or not raw.strip():
        return None, None, 0, None
    kind: str | None = None
    location: BaseId | None = None
    gas_index = 0
    for part in (p.strip() for p in raw.split(",")):
        base = _parse_base(part)
        if base is not None:
            location = base
            continue
        indexed = _INDEXED_KIND.match(part)
        if indexed and indexed.group(1):
            resolved = data.resolve_kind(indexed.group(1))
            if resolved is not None:
                kind = resolved
                gas_index = int(indexed.group(2))
                continue
        resolved = data.resolve_kind(part)
        if resolved is not None:
            kind = resolved
            continue
        # One opaque component makes the whole target free text.
        return None, None, 0, raw.strip()
    return kind, location, gas_index, None


def parse_command(line: str) -> Command:
    """One translator line -> canonical Command, or CommandError."""
    data = load_game_data()
    text = line.strip()
    text = _KEY_PREFIX.sub("", text)
    text = text.split("//", 1)[0].strip()
    text = text.strip(",").strip()
    while len(text) >= 2 and text[0] in "'\"‘“" and text[-1] in "'\"’”":
        text = text[1:-1].strip()
    if not text:
        raise CommandError("malformed-line", "empty")

    tagged = _TAG_FORM.match(text)
    if tagged:
        text = f"({tagged.group(1)}){tagged.group(2)}"

    m = _GRAMMAR.match(text)
    if m is None:
        raise CommandError("malformed-line", line.strip()[:60])
    subject_raw, verb_raw, target_raw = m.groups()

    kind, location = _parse_subject(subject_raw, data)
    verb = data.verb_synonyms.get(_fold_verb(verb_raw))
    if verb is None:
        raise CommandError("unknown-verb", verb_raw)
    t_kind, t_loc, t_gas, t_text = _parse_target(target_raw, data)
    return Command(
        kind=kind, location=location, verb=verb, target_kind=t_kind,
        target_location=t_loc, target_gas_index=t_gas, target_text=t_text)


def render_command(cmd: Command) -> str:
    """Canonical text form; parse(render(cmd)) round-trips."""
    data = load_game_data()

    def kind_name(kind: str) -> str:
        if kind in (GROUP_ALIAS, LARVA):
            return kind
        return data.display(kind)

    subject = kind_name(cmd.kind)
    if cmd.location is not None:
        subject += f", {cmd.location}"
    verb = _VERB_DISPLAY.get(cmd.verb, cmd.verb)
    bits = f"({subject})->({verb})"

    if cmd.target_text is not None:
        return f"{bits}->({cmd.target_text})"
    target_parts = []
    if cmd.target_kind is not None:
        name = kind_name(cmd.target_kind)
        if cmd.target_gas_index:
            name += str(cmd.target_gas_index)
        target_parts.append(name)
    if cmd.target_location is not None:
        target_parts.append(str(cmd.target_location))
    if target_parts:
        return f"{bits}->({', '.join(target_parts)})"
    return bits


# ---------------------------------------------------------------------------
# repair
# ---------------------------------------------------------------------------

def _free_workers(state: WorldState, player: str, base: BaseId) -> list:
    data = load_game_data()
    return [
        u for u in state.units_at(base, player)
        if data.units[u.kind].worker and u.activity in _FREE_ACTIVITIES
    ]


def _nearest_worker_base(state: WorldState, player: str,
                         site: BaseId) -> BaseId | None:
    candidates = sorted(
        {u.location for u in state.units.values()
         if u.owner == player and u.location != site},
        key=lambda b: (state.matrix.distance(site, b), str(b)))
    for base in candidates:
        if _free_workers(state, player, base):
            return base
    return None


def _build_kind(cmd: Command, data: GameData) -> str | None:
    if cmd.target_kind is not None and cmd.target_kind in data.buildings:
        return cmd.target_kind
    if cmd.kind in data.buildings:
        return cmd.kind
    return None


def repair_command(cmd: Command, state: WorldState,
                   player: str = ZERG) -> Command:
    """Resolve free-text targets, default build sites, rebind stray workers."""
    data = load_game_data()

    if cmd.verb == "Research":
        name = cmd.target_text
        if name is None and cmd.target_kind is not None:
            name = data.display(cmd.target_kind)
        if name is None:
            raise CommandError("unresolvable-target", "no research named")
        rid = data.resolve_research(name)
        if rid is None and cmd.kind in data.buildings:
            offered = [
                r for r in data.research_offered_by(cmd.kind)
                if r not in state.research_done[player]
                and not any(j.name == r and j.owner == player
                            for j in state.research_jobs)
            ]
            rid = offered[0] if offered else None
        if rid is None:
            raise CommandError("unknown-research", name)
        return replace(cmd, target_kind=None, target_text=rid)

    if cmd.target_text is not None:
        found = _BASE_IN_TEXT.search(cmd.target_text)
        if found:
            cmd = replace(cmd, target_text=None,
                          target_location=BaseId.parse(found.group(1)))
        else:
            folded = cmd.target_text.lower()
            if "opponent" in folded or "enemy" in folded:
                enemy_home = (state.matrix.home_b if player == ZERG
                              else state.matrix.home_a)
                cmd = replace(cmd, target_text=None,
                              target_location=enemy_home)
            else:
                raise CommandError("unresolvable-target", cmd.target_text)

    if cmd.verb == "Build":
        kind = _build_kind(cmd, load_game_data())
        if kind is None:
            raise CommandError("unresolvable-target", "nothing to build")
        site = cmd.target_location or cmd.location
        if site is None:
            founded = state.founded[player]
            site = founded[-1] if founded else (
                state.matrix.home_a if player == ZERG else state.matrix.home_b)
        cmd = replace(cmd, target_kind=kind, target_location=site)

    if (cmd.verb in _WORKER_VERBS and cmd.kind in data.units
            and data.units[cmd.kind].worker and cmd.location is not None
            and not _free_workers(state, player, cmd.location)):
        fallback = _nearest_worker_base(state, player, cmd.location)
        if fallback is not None:
            cmd = replace(cmd, location=fallback)

    return cmd


# ---------------------------------------------------------------------------
# verification and dispatch
# ---------------------------------------------------------------------------

def _cost_with_supply(data: GameData, cmd: Command) -> tuple[int, int, int]:
    if cmd.verb == "Research":
        spec = data.research[cmd.target_text]
        return spec.mineral_cost, spec.gas_cost, 0
    kind = cmd.target_kind
    if kind in data.buildings:
        m, g = data.building_cost(kind)
        return m, g, 0
    m, g, supply = data.unit_cost(kind)
    prod = data.producibles.get(kind)
    if prod is not None and prod.morph_source:
        supply -= data.units[prod.morph_source].supply
    return m, g, supply


def _affordable(state: WorldState, player: str, cost: tuple[int, int, int],
                spent: dict[str, int]) -> str | None:
    minerals, gas, supply = cost
    if state.minerals[player] - spent["minerals"] < minerals:
        return "minerals"
    if state.gas[player] - spent["gas"] < gas:
        return "gas"
    if supply > 0 and (state.supply_used(player) + spent["supply"] + supply
                       > state.supply_cap(player)):
        return "supply"
    return None


def _matching_unit_ids(state: WorldState, player: str, kind: str,
                       location: BaseId | None) -> tuple[int, ...]:
    data = load_game_data()
    picked = []
    for unit in state.units.values():
        if unit.owner != player:
            continue
        if location is not None and unit.location != location:
            continue
        stats = data.units[unit.kind]
        if kind == GROUP_ALIAS:
            if stats.armed and not stats.worker:
                picked.append(unit.id)
        elif unit.kind == kind:
            picked.append(unit.id)
    return tuple(sorted(picked))


def _escort_move(state: WorldState, player: str,
                 site: BaseId) -> tuple[EngineOrder, ...]:
    source = _nearest_worker_base(state, player, site)
    if source is None:
        return ()
    worker = _free_workers(state, player, source)[0]
    return (MoveOrder(player, (worker.id,), site),)


def _worker_wait(site: BaseId) -> Feasibility:
    return Feasibility("blocked", missing=(f"worker at {site}",))


def _attempt(cmd: Command, state: WorldState, player: str,
             spent: dict[str, int], escort: bool) -> tuple[
        str, tuple[EngineOrder, ...], Feasibility | str]:
    """One feasibility pass: ('dispatch', orders, _) / ('suspend', escorts,
    Feasibility) / ('reject', (), reason)."""
    data = load_game_data()

    if cmd.verb in _MOVE_VERBS:
        dest = cmd.target_location
        if dest is None:
            return "reject", (), "unresolvable-target"
        ids = _matching_unit_ids(state, player, cmd.kind, cmd.location)
        if not ids:
            return "reject", (), "no-units"
        return "dispatch", (MoveOrder(player, ids, dest),), ""

    if cmd.verb in ("GatherGas", "GatherMinerals"):
        site = cmd.target_location or cmd.location
        if site is None:
            return "reject", (), "unresolvable-target"
        workers = _free_workers(state, player, site)
        if cmd.kind in data.units:
            workers = [u for u in workers if u.kind == cmd.kind]
        if cmd.verb == "GatherGas":
            wanted = cmd.target_gas_index
            hosts = [
                b for b in state.buildings_at(site, player)
                if data.buildings[b.kind].gas_source and b.complete
                and (not wanted or b.gas_index == wanted)
            ]
            if not hosts:
                gas_kind = "Extractor" if player == ZERG else "Refinery"
                return "suspend", (), Feasibility(
                    "blocked", missing=(f"{gas_kind} at {site}",))
            index = wanted or hosts[0].gas_index
            movers = [u for u in workers
                      if not (u.activity == GATHER_GAS and u.gas_index == index)]
            if not movers:
                escorts = _escort_move(state, player, site) if escort else ()
                return "suspend", escorts, _worker_wait(site)
            already = sum(
                1 for u in state.units_at(site, player)
                if data.units[u.kind].worker and u.activity == GATHER_GAS
                and u.gas_index == index)
            room = max(0, data.economy.gas_slots_per_extractor - already)
            if room == 0:
                return "reject", (), "gas-slots-full"
            ids = tuple(u.id for u in movers[:room])
            return "dispatch", (GatherOrder(player, ids, "gas", index),), ""
        movers = [u for u in workers if u.activity != GATHER_MINERALS]
        if not movers:
            escorts = _escort_move(state, player, site) if escort else ()
            return "suspend", escorts, _worker_wait(site)
        ids = tuple(u.id for u in movers)
        return "dispatch", (GatherOrder(player, ids, "minerals"),), ""

    if cmd.verb in ("Train", "Morph"):
        kind = cmd.target_kind
        if kind is None or kind not in data.producibles:
            return "reject", (), "unknown-kind"
        base = cmd.location or cmd.target_location
        if base is None:
            base = state.matrix.home_a if player == ZERG else state.matrix.home_b
        if kind in data.buildings:
            return _attempt_build(cmd, state, player, spent, escort, kind, base)
        prod = data.producibles[kind]
        feas = check_prerequisites(state, kind, player)
        if not feas.ready:
            return "suspend", (), feas
        cost = _cost_with_supply(data, replace(cmd, target_kind=kind))
        short = _affordable(state, player, cost, spent)
        if short is not None:
            return "suspend", (), Feasibility("unaffordable", resource=short)
        if prod.morph_source:
            present = any(
                u.kind == prod.morph_source
                for u in state.units_at(base, player))
            if not present:
                return "suspend", (), Feasibility(
                    "blocked", missing=(f"{prod.morph_source} at {base}",))
            return "dispatch", (MorphUnitOrder(player, kind, base),), ""
        return "dispatch", (ProduceOrder(player, kind, base),), ""

    if cmd.verb == "Build":
        kind = cmd.target_kind
        site = cmd.target_location
        if kind is None or site is None or kind not in data.producibles:
            return "reject", (), "unknown-kind"
        return _attempt_build(cmd, state, player, spent, escort, kind, site)

    if cmd.verb == "Research":
        rid = cmd.target_text
        if rid not in data.research:
            return "reject", (), "unknown-research"
        started = any(j.name == rid and j.owner == player
                      for j in state.research_jobs)
        if rid in state.research_done[player] or started:
            return "reject", (), "duplicate-research"
        feas = check_prerequisites(state, rid, player)
        if not feas.ready:
            return "suspend", (), feas
        spec = data.research[rid]
        short = _affordable(
            state, player, (spec.mineral_cost, spec.gas_cost, 0), spent)
        if short is not None:
            return "suspend", (), Feasibility("unaffordable", resource=short)
        return "dispatch", (ResearchStart(player, rid),), ""

    return "reject", (), "unknown-verb"


def _attempt_build(cmd: Command, state: WorldState, player: str,
                   spent: dict[str, int], escort: bool, kind: str,
                   site: BaseId) -> tuple[
        str, tuple[EngineOrder, ...], Feasibility | str]:
    data = load_game_data()
    prod = data.producibles[kind]
    stats = data.buildings[kind]
    feas = check_prerequisites(state, kind, player)
    if not feas.ready:
        return "suspend", (), feas
    cost = _cost_with_supply(data, replace(cmd, target_kind=kind))
    short = _affordable(state, player, cost, spent)
    if short is not None:
        return "suspend", (), Feasibility("unaffordable", resource=short)

    if prod.morph_source:
        hosts = [
            b for b in state.buildings_at(site, player)
            if b.kind == prod.morph_source and b.complete
            and b.morphing_to is None
        ]
        if not hosts:
            return "suspend", (), Feasibility(
                "blocked", missing=(f"{prod.morph_source} at {site}",))
        return "dispatch", (MorphBuildingOrder(player, kind, site),), ""

    if stats.gas_source:
        taken = sum(
            1 for b in state.buildings_at(site, player)
            if data.buildings[b.kind].gas_source)
        if taken >= data.economy.max_extractors_per_base:
            return "reject", (), "no-free-geyser"

    if stats.race == ZERG and not _free_workers(state, player, site):
        escorts = _escort_move(state, player, site) if escort else ()
        return "suspend", escorts, _worker_wait(site)
    return "dispatch", (BuildOrder(player, kind, site),), ""


def _charge(data: GameData, cmd: Command, spent: dict[str, int]) -> None:
    if cmd.verb in _MOVE_VERBS or cmd.verb in ("GatherGas", "GatherMinerals"):
        return
    minerals, gas, supply = _cost_with_supply(data, cmd)
    spent["minerals"] += minerals
    spent["gas"] += gas
    spent["supply"] += max(0, supply)


def _fresh_spent() -> dict[str, int]:
    return {"minerals": 0, "gas": 0, "supply": 0}


def _one_shot_key(cmd: Command) -> tuple | None:
    if cmd.verb not in load_game_data().one_shot_verbs:
        return None
    if cmd.verb == "Research":
        return ("Research", cmd.target_text)
    return (cmd.verb, cmd.target_kind, str(cmd.target_location))


def verify_and_dispatch(cmd: Command, state: WorldState,
                        queue: list[SuspendedCommand], now_tick: int,
                        player: str = ZERG, spent: dict[str, int] | None = None,
                        raw: str | None = None) -> Outcome:
    """Dispatch a repaired command, or park it in the suspension queue."""
    if spent is None:
        spent = _fresh_spent()
    if raw is None:
        raw = render_command(cmd)
    status, orders, info = _attempt(cmd, state, player, spent, escort=True)
    if status == "dispatch":
        _charge(load_game_data(), cmd, spent)
        return Outcome(raw, cmd, DISPATCHED, orders)
    if status == "suspend":
        assert isinstance(info, Feasibility)
        queue.append(SuspendedCommand(
            command=cmd, player=player, reason=info, enqueued_tick=now_tick,
            expiry_tick=now_tick + EXPIRY_TICKS))
        reason = info.resource if info.status == "unaffordable" else (
            ", ".join(info.missing) or info.status)
        return Outcome(raw, cmd, SUSPENDED, orders, reason)
    return Outcome(raw, cmd, REJECTED, (), str(info))


def pump_suspended(state: WorldState, queue: list[SuspendedCommand],
                   now_tick: int,
                   spent: dict[str, int] | None = None) -> list[Outcome]:
    """Re-check the queue FIFO; dispatch what became feasible, drop the rest
    at expiry. Returns one Outcome per entry that left the queue."""
    if spent is None:
        spent = _fresh_spent()
    outcomes: list[Outcome] = []
    survivors: list[SuspendedCommand] = []
    for entry in queue:
        raw = render_command(entry.command)
        if now_tick >= entry.expiry_tick:
            outcomes.append(Outcome(raw, entry.command, EXPIRED, (), "expired"))
            continue
        status, orders, info = _attempt(
            entry.command, state, entry.player, spent, escort=False)
        if status == "dispatch":
            _charge(load_game_data(), entry.command, spent)
            outcomes.append(Outcome(raw, entry.command, DISPATCHED, orders))
        elif status == "reject":
            outcomes.append(Outcome(raw, entry.command, REJECTED, (), str(info)))
        else:
            assert isinstance(info, Feasibility)
            entry.reason = info
            survivors.append(entry)
    queue[:] = survivors
    return outcomes


def process_command_list(lines: list[str], state: WorldState,
                         queue: list[SuspendedCommand], now_tick: int,
                         player: str = ZERG,
                         spent: dict[str, int] | None = None) -> list[Outcome]:
    """Parse/repair/verify each line in plan order; failures never abort."""
    if spent is None:
        spent = _fresh_spent()
    issued: set[tuple] = {
        key for entry in queue
        if (key := _one_shot_key(entry.command)) is not None
    }
    outcomes: list[Outcome] = []
    for line in lines:
        try:
            cmd = repair_command(parse_command(line), state, player)
        except CommandError as err:
            outcomes.append(Outcome(line, None, REJECTED, (), err.kind))
            continue
        key = _one_shot_key(cmd)
        if key is not None and key in issued:
            outcomes.append(Outcome(line, cmd, REJECTED, (), "duplicate-command"))
            continue
        outcome = verify_and_dispatch(
            cmd, state, queue, now_tick, player, spent, raw=line)
        if key is not None and outcome.status in (DISPATCHED, SUSPENDED):
            issued.add(key)
        outcomes.append(outcome)
    return outcomes
