"""Battlefield prose: situation reports, critical-event lines, prompt text.

The strategic layer talks to its planner in natural language. This module
serializes an Observation into the fixed report grammar ("At point A1,
there are: 12 Drone are gathering minerals in Hatchery, ...;"), parses that
grammar back into counts (the scripted planners read the report text, not
engine state), detects rising-edge emergencies, and instantiates the three
prompt templates stored under ``templates/``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from zergmind import reflexnet
from zergmind.gamedata import GameData, load_game_data
from zergmind.mapmatrix import BaseId
from zergmind.world import Observation, ObservedBuilding, ObservedUnit

UNDER_ATTACK = "under-attack"
ARMY_DETECTED = "enemy-army-detected"
ASSEMBLING = "enemy-assembling"

STALE_AFTER = 30  # seconds without fresh sight before a line gets a stamp

_EMPTY_MEMORY = "None (first round)."


@dataclass(frozen=True, slots=True)
class SituationReport:
    own_units_text: str
    own_buildings_text: str
    research_text: str
    enemy_units_text: str
    enemy_buildings_text: str


@dataclass(frozen=True, slots=True)
class CriticalEvent:
    kind: str  # under-attack | enemy-army-detected | enemy-assembling
    location: BaseId
    evidence: tuple[tuple[str, int], ...]  # (unit kind, count), sorted
    detector: str  # unit kind credited with the sighting


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _gas_display(base: BaseId, index: int, buildings: list[ObservedBuilding],
                 unit_race: str, data: GameData) -> str:
    for b in buildings:
        if (b.location == base and b.gas_index == index
                and data.buildings[b.kind].gas_source):
            return f"{data.buildings[b.kind].display}{index}"
    default = "Extractor" if unit_race == "zerg" else "Refinery"
    return f"{default}{index}"


def _townhall_display(base: BaseId, buildings: list[ObservedBuilding],
                      data: GameData) -> str | None:
    for b in buildings:
        if (b.location == base and b.complete
                and data.buildings[b.kind].townhall):
            return data.buildings[b.kind].display
    return None


def _unit_entries(base: BaseId, units: list[ObservedUnit],
                  buildings: list[ObservedBuilding], data: GameData) -> list[str]:
    here = [u for u in units if u.location == base]
    hall = _townhall_display(base, buildings, data)
    halls_here = sum(
        1 for b in buildings
        if b.location == base and b.complete and data.buildings[b.kind].townhall
    )

    injecting = 0
    if halls_here:
        idle_queens = sum(
            1 for u in here
            if u.kind == "Queen" and u.activity == reflexnet.IDLE)
        injecting = min(idle_queens, halls_here)

    groups: dict[tuple[int, int, str], int] = {}
    order_of = {
        reflexnet.GATHER_MINERALS: 0,
        reflexnet.GATHER_GAS: 1,
        reflexnet.IDLE: 3,
        reflexnet.MOVING: 4,
        reflexnet.ATTACKING: 5,
        reflexnet.FLEEING: 6,
    }
    skipped_queens = injecting
    for u in sorted(here, key=lambda u: u.id):
        if (u.kind == "Queen" and u.activity == reflexnet.IDLE
                and skipped_queens > 0):
            skipped_queens -= 1
            continue
        rank = order_of.get(u.activity, 4)
        sub = u.gas_index if u.activity == reflexnet.GATHER_GAS else 0
        key = (rank, sub, u.kind)
        groups[key] = groups.get(key, 0) + 1

    entries: list[str] = []
    for (rank, sub, kind), count in sorted(
            groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        display = data.display(kind)
        race = data.units[kind].race
        if rank == 0:
            if hall:
                entries.append(
                    f"{count} {display} are gathering minerals in {hall}")
            else:
                entries.append(f"{count} {display} are gathering minerals")
        elif rank == 1:
            gas = _gas_display(base, sub, buildings, race, data)
            entries.append(f"{count} {display} are gathering gas in {gas}")
        elif rank == 3:
            entries.append(f"{count} {display} are idling")
        elif rank == 4:
            entries.append(f"{count} {display} are moving")
        elif rank == 5:
            entries.append(f"{count} {display} are attacking")
        else:
            entries.append(f"{count} {display} are fleeing")

    if injecting and hall:
        # The inject loop sits between the economy and the standing army.
        spot = 0
        for i, e in enumerate(entries):
            if " are gathering" in e:
                spot = i + 1
        entries.insert(
            spot, f"{injecting} Queen constantly injecting eggs into {hall}")
    return entries


def _building_entries(base: BaseId, buildings: list[ObservedBuilding],
                      data: GameData) -> list[str]:
    here = [b for b in buildings if b.location == base]
    groups: dict[str, int] = {}
    for b in sorted(here, key=lambda b: b.id):
        groups[b.kind] = groups.get(b.kind, 0) + 1
    return [
        f"{count} {data.display(kind)}"
        for kind, count in sorted(
            groups.items(), key=lambda kv: data.display(kv[0]))
    ]


def _section(bases: list[BaseId], entries_for, staleness=None) -> str:
    if not bases:
        return "Nothing"
    lines = []
    for base in sorted(bases):
        entries = entries_for(base)
        body = ", ".join(entries) if entries else "Nothing"
        line = f"At point {base}, there are: {body};"
        if staleness:
            k = staleness.get(base, 0)
            if k > STALE_AFTER:
                line += f" (last seen {k}s ago)"
        lines.append(line)
    return "\n".join(lines)


def render_situation_report(obs: Observation) -> SituationReport:
    """Five prose blocks: own units/buildings, unlocked research, and the
    fog-filtered enemy units/buildings (stale bases time-stamped)."""
    data = load_game_data()
    own_units = list(obs.own_units)
    own_buildings = list(obs.own_buildings)
    own_bases = sorted(
        {u.location for u in own_units} | {b.location for b in own_buildings})

    enemy_units = list(obs.enemy_units)
    enemy_buildings = list(obs.enemy_buildings)
    enemy_bases = sorted(obs.scouted)

    research_names = [
        name for name in data.research if name in obs.research_done]
    research_text = (
        "\n".join(f"{name}," for name in research_names)
        if research_names else "Nothing"
    )

    return SituationReport(
        own_units_text=_section(
            own_bases,
            lambda b: _unit_entries(b, own_units, own_buildings, data)),
        own_buildings_text=_section(
            own_bases, lambda b: _building_entries(b, own_buildings, data)),
        research_text=research_text,
        enemy_units_text=_section(
            enemy_bases,
            lambda b: _unit_entries(b, enemy_units, enemy_buildings, data),
            staleness=obs.staleness),
        enemy_buildings_text=_section(
            enemy_bases,
            lambda b: _building_entries(b, enemy_buildings, data),
            staleness=obs.staleness),
    )


# ---------------------------------------------------------------------------
# parsing the grammar back (inverse of the renderer)
# ---------------------------------------------------------------------------

_BASE_LINE = re.compile(
    r"^At point ([AB][1-8]), there are: (.*);"
    r"(?: \(last seen (\d+)s ago\))?$")
_GATHER_MIN = re.compile(r"^(\d+) (.+?) are gathering minerals(?: in (.+))?$")
_GATHER_GAS = re.compile(r"^(\d+) (.+?) are gathering gas in (.+?)(\d+)$")
_SIMPLE = re.compile(r"^(\d+) (.+?) are (idling|moving|attacking|fleeing)$")
_INJECT = re.compile(r"^(\d+) Queen constantly injecting eggs into (.+)$")
_COUNT_ONLY = re.compile(r"^(\d+) (.+)$")

_ACTIVITY_OF = {
    "idling": reflexnet.IDLE,
    "moving": reflexnet.MOVING,
    "attacking": reflexnet.ATTACKING,
    "fleeing": reflexnet.FLEEING,
}


def parse_report_blocks(text: str) -> dict[tuple[str, str, str], int]:
    """Per-(base, kind, activity) counts recovered from a units block.

    Injecting queens count as idle (that is what the engine calls them).
    Gas gatherers keep their extractor index in the activity as
    ``gathering-gas@N``. Unknown display names are kept verbatim.
    """
    data = load_game_data()
    counts: dict[tuple[str, str, str], int] = {}
    for raw in text.splitlines():
        m = _BASE_LINE.match(raw.strip())
        if not m:
            continue
        base, body = m.group(1), m.group(2)
        if body == "Nothing":
            continue
        for entry in body.split(", "):
            gm = _GATHER_MIN.match(entry)
            if gm:
                kind = data.resolve_kind(gm.group(2)) or gm.group(2)
                key = (base, kind, reflexnet.GATHER_MINERALS)
                counts[key] = counts.get(key, 0) + int(gm.group(1))
                continue
            gg = _GATHER_GAS.match(entry)
            if gg:
                kind = data.resolve_kind(gg.group(2)) or gg.group(2)
                key = (base, kind, f"{reflexnet.GATHER_GAS}@{gg.group(4)}")
                counts[key] = counts.get(key, 0) + int(gg.group(1))
                continue
            inj = _INJECT.match(entry)
            if inj:
                key = (base, "Queen", reflexnet.IDLE)
                counts[key] = counts.get(key, 0) + int(inj.group(1))
                continue
            sm = _SIMPLE.match(entry)
            if sm:
                kind = data.resolve_kind(sm.group(2)) or sm.group(2)
                key = (base, kind, _ACTIVITY_OF[sm.group(3)])
                counts[key] = counts.get(key, 0) + int(sm.group(1))
                continue
    return counts


def parse_building_blocks(text: str) -> dict[tuple[str, str], int]:
    """Per-(base, kind) counts recovered from a buildings block."""
    data = load_game_data()
    counts: dict[tuple[str, str], int] = {}
    for raw in text.splitlines():
        m = _BASE_LINE.match(raw.strip())
        if not m:
            continue
        base, body = m.group(1), m.group(2)
        if body == "Nothing":
            continue
        for entry in body.split(", "):
            cm = _COUNT_ONLY.match(entry)
            if cm:
                kind = data.resolve_kind(cm.group(2)) or cm.group(2)
                key = (base, kind)
                counts[key] = counts.get(key, 0) + int(cm.group(1))
    return counts


# ---------------------------------------------------------------------------
# critical events
# ---------------------------------------------------------------------------

def _conditions(obs: Observation) -> dict[tuple[str, str], CriticalEvent]:
    data = load_game_data()
    own_side = "A" if obs.player == "zerg" else "B"
    hall_bases = {
        b.location for b in obs.own_buildings
        if data.buildings[b.kind].townhall
    }
    armed: dict[BaseId, list[ObservedUnit]] = {}
    for u in obs.enemy_units:
        stats = data.units.get(u.kind)
        if stats is not None and stats.armed:
            armed.setdefault(u.location, []).append(u)

    found: dict[tuple[str, str], CriticalEvent] = {}
    threshold = data.combat.assembling_group_threshold
    for base, group in armed.items():
        if base in hall_bases:
            kind = UNDER_ATTACK
        elif len(group) >= threshold and base.side == own_side:
            kind = ARMY_DETECTED
        elif len(group) >= threshold:
            kind = ASSEMBLING
        else:
            continue
        tally: dict[str, int] = {}
        for u in group:
            tally[u.kind] = tally.get(u.kind, 0) + 1
        found[(kind, str(base))] = CriticalEvent(
            kind=kind,
            location=base,
            evidence=tuple(sorted(tally.items())),
            detector=_detector(obs, base, data),
        )
    return found


def _detector(obs: Observation, base: BaseId, data: GameData) -> str:
    here = [u.kind for u in obs.own_units if u.location == base]
    for favorite in ("Overlord", "Overseer"):
        if favorite in here:
            return favorite
    fighters = sorted(
        k for k in here if data.units[k].armed and not data.units[k].worker)
    if fighters:
        return fighters[0]
    workers = sorted(k for k in here if data.units[k].worker)
    if workers:
        return workers[0]
    return "Overlord"


def detect_critical_events(
        obs: Observation,
        previous_obs: Observation | None) -> list[CriticalEvent]:
    """Rising-edge emergencies: a condition fires once when it appears and
    stays silent while it persists."""
    now = _conditions(obs)
    before = _conditions(previous_obs) if previous_obs is not None else {}
    fresh = [now[key] for key in now if key not in before]
    return sorted(fresh, key=lambda e: (str(e.location), e.kind))


def render_critical_block(events: list[CriticalEvent],
                          enemy_race: str = "Terran") -> str:
    lines = ["Important!!!"]
    for event in events:
        if event.kind == ASSEMBLING:
            lines.append(
                f"{event.detector} have detected a group of {enemy_race} army "
                f"is assembling at {event.location}.")
        else:
            lines.append(
                f"{event.detector} have detected a group of {enemy_race} army "
                f"is ready to attack the {event.location} and destory our army.")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# prompt assembly
# ---------------------------------------------------------------------------

def _template(name: str) -> str:
    return (
        resources.files("zergmind.templates").joinpath(name)
        .read_text(encoding="utf-8")
    )


_DEFAULT_MATRIX_TEXT = (
    "[[0, A6, B7, B3, B2],\n"
    " [A5, 0, B8, B4, B1],\n"
    " [A1, A4, A8, 0, B5],\n"
    " [A2, A3, A7, B6, 0]]"
)


def assemble_overmind_prompt(
        mode: str,
        matrix_text: str,
        memory_text: str,
        report: SituationReport,
        events: list[CriticalEvent] | None = None) -> str:
    """Fill the strategic-planning template ('normal' or 'critical')."""
    if mode not in ("normal", "critical"):
        raise ValueError(f"unknown mode: {mode!r}")
    if mode == "critical" and not events:
        raise ValueError("critical mode needs at least one event")
    template = _template(
        "overmind_critical.txt" if mode == "critical" else "overmind_normal.txt")
    text = template.replace(_DEFAULT_MATRIX_TEXT, matrix_text)
    text = text.replace("<pre_thoughts>", memory_text or _EMPTY_MEMORY)
    text = text.replace("<cur_units>", report.own_units_text)
    text = text.replace("<cur_buildings>", report.own_buildings_text)
    text = text.replace("<cur_abilities>", report.research_text)
    text = text.replace("<enemy_units>", report.enemy_units_text)
    text = text.replace("<enemy_buildings>", report.enemy_buildings_text)
    if mode == "critical":
        text = text.replace(
            "<critical_battlefield_information>",
            render_critical_block(events or []))
    return text


def assemble_translation_prompt(thoughts: str) -> str:
    """Fill the plan-to-commands template with the planner's numbered list."""
    if not thoughts or not thoughts.strip():
        raise ValueError("empty-plan")
    return _template("translation.txt").replace("<cur_thoughts>", thoughts)
