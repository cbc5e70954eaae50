"""Typed access to the shipped stat/tech/verb tables.

All balance numbers live in the JSON data files; code never hardcodes them.
Hop times are derived from speed with exact decimal arithmetic so replays
hash identically across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources


@dataclass(frozen=True, slots=True)
class UnitStats:
    name: str
    race: str
    display: str
    max_hp: int
    ground_attack: int
    air_attack: int
    can_fly: bool
    speed: float
    mineral_cost: int
    gas_cost: int
    supply: int
    build_ticks: int
    melee: bool
    worker: bool
    supply_provided: int
    ticks_per_hop: int

    @property
    def armed(self) -> bool:
        return self.ground_attack > 0 or self.air_attack > 0

    @property
    def anti_air(self) -> bool:
        return self.air_attack > 0


@dataclass(frozen=True, slots=True)
class BuildingStats:
    name: str
    race: str
    display: str
    max_hp: int
    mineral_cost: int
    gas_cost: int
    build_ticks: int
    supply_provided: int
    townhall: bool
    gas_source: bool


@dataclass(frozen=True, slots=True)
class Producible:
    name: str
    type: str  # "unit" | "building"
    requires: tuple[str, ...]
    source: str  # larva | townhall | worker | morph:<Kind> | producer building kind

    @property
    def morph_source(self) -> str | None:
        if self.source.startswith("morph:"):
            return self.source.split(":", 1)[1]
        return None


@dataclass(frozen=True, slots=True)
class ResearchSpec:
    name: str
    building: str
    requires: tuple[str, ...]
    mineral_cost: int
    gas_cost: int
    ticks: int
    effect: dict


@dataclass(frozen=True, slots=True)
class EconomyConfig:
    mineral_rate_per_worker: int
    gas_rate_per_worker: int
    mineral_slots_per_base: int
    gas_slots_per_extractor: int
    max_extractors_per_base: int
    supply_cap_max: int
    starting_minerals: int
    starting_gas: int


@dataclass(frozen=True, slots=True)
class LarvaConfig:
    spawn_interval_ticks: int
    natural_cap: int
    inject_cooldown_ticks: int
    inject_larvae: int
    bank_cap: int


@dataclass(frozen=True, slots=True)
class CombatConfig:
    flank_damage_taken_multiplier: float
    flank_shooter_kinds: tuple[str, ...]
    medivac_heal_per_tick: int
    drone_marine_flee_threshold: int
    combat_flee_group_max: int
    assembling_group_threshold: int


def _hop_ticks(speed: float) -> int:
    # Fraction(str(speed)) reads the decimal literal exactly; ceil(1/speed)
    # then has no float wobble.
    return math.ceil(Fraction(1) / Fraction(str(speed)))


def _read_data(filename: str) -> dict:
    text = resources.files("zergmind.data").joinpath(filename).read_text("utf-8")
    return json.loads(text)


class GameData:
    """Immutable view over the stat, tech, and verb tables."""

    def __init__(self, stats: dict, tech: dict, verbs: dict) -> None:
        self.units: dict[str, UnitStats] = {}
        for name, rec in stats["units"].items():
            self.units[name] = UnitStats(
                name=name,
                race=rec["race"],
                display=rec["display"],
                max_hp=rec["max_hp"],
                ground_attack=rec["ground_attack"],
                air_attack=rec["air_attack"],
                can_fly=rec["can_fly"],
                speed=rec["speed"],
                mineral_cost=rec["mineral_cost"],
                gas_cost=rec["gas_cost"],
                supply=rec["supply"],
                build_ticks=rec["build_ticks"],
                melee=rec.get("melee", False),
                worker=rec.get("worker", False),
                supply_provided=rec.get("supply_provided", 0),
                ticks_per_hop=_hop_ticks(rec["speed"]),
            )
        self.buildings: dict[str, BuildingStats] = {}
        for name, rec in stats["buildings"].items():
            self.buildings[name] = BuildingStats(
                name=name,
                race=rec["race"],
                display=rec["display"],
                max_hp=rec["max_hp"],
                mineral_cost=rec["mineral_cost"],
                gas_cost=rec["gas_cost"],
                build_ticks=rec["build_ticks"],
                supply_provided=rec.get("supply_provided", 0),
                townhall=rec.get("townhall", False),
                gas_source=rec.get("gas_source", False),
            )
        self.economy = EconomyConfig(**stats["economy"])
        self.larva = LarvaConfig(**stats["larva"])
        combat = dict(stats["combat"])
        combat["flank_shooter_kinds"] = tuple(combat["flank_shooter_kinds"])
        self.combat = CombatConfig(**combat)

        self.producibles: dict[str, Producible] = {
            name: Producible(
                name=name,
                type=rec["type"],
                requires=tuple(rec["requires"]),
                source=rec["source"],
            )
            for name, rec in tech["producibles"].items()
        }
        self.research: dict[str, ResearchSpec] = {
            name: ResearchSpec(
                name=name,
                building=rec["building"],
                requires=tuple(rec["requires"]),
                mineral_cost=rec["mineral_cost"],
                gas_cost=rec["gas_cost"],
                ticks=rec["ticks"],
                effect=rec.get("effect", {}),
            )
            for name, rec in tech["research"].items()
        }

        self.verb_synonyms: dict[str, str] = dict(verbs["synonyms"])
        self.one_shot_verbs: frozenset[str] = frozenset(verbs["one_shot"])
        self.repeatable_verbs: frozenset[str] = frozenset(verbs["repeatable"])

        self._kind_lookup: dict[str, str] = {}
        for name, unit in self.units.items():
            self._kind_lookup[_fold(name)] = name
            self._kind_lookup[_fold(unit.display)] = name
        for name, bld in self.buildings.items():
            self._kind_lookup[_fold(name)] = name
            self._kind_lookup[_fold(bld.display)] = name

    # -- kind helpers ------------------------------------------------------

    def is_unit(self, kind: str) -> bool:
        return kind in self.units

    def is_building(self, kind: str) -> bool:
        return kind in self.buildings

    def display(self, kind: str) -> str:
        if kind in self.units:
            return self.units[kind].display
        return self.buildings[kind].display

    def resolve_kind(self, text: str) -> str | None:
        """Case/space-insensitive kind lookup with plural folding.

        "Roaches" -> "Roach", "Spine Crawlers" -> "SpineCrawler",
        "command center" -> "CommandCenter". None when nothing matches.
        """
        folded = _fold(text)
        for candidate in (folded, folded[:-1], folded[:-2]):
            if candidate and candidate in self._kind_lookup:
                return self._kind_lookup[candidate]
        return None

    def resolve_research(self, text: str) -> str | None:
        """Exact (case-insensitive) research id, else unique prefix match."""
        folded = _fold(text)
        for name in self.research:
            if _fold(name) == folded:
                return name
        prefixed = [n for n in self.research if _fold(n).startswith(folded)]
        if len(prefixed) == 1:
            return prefixed[0]
        return None

    def research_offered_by(self, building_kind: str) -> list[str]:
        """Research ids hosted by a building kind, in table order."""
        return [n for n, spec in self.research.items() if spec.building == building_kind]

    def unit_cost(self, kind: str) -> tuple[int, int, int]:
        s = self.units[kind]
        return s.mineral_cost, s.gas_cost, s.supply

    def building_cost(self, kind: str) -> tuple[int, int]:
        s = self.buildings[kind]
        return s.mineral_cost, s.gas_cost

    def hop_ticks_for(self, kind: str, research_done: frozenset[str] | set[str]) -> int:
        """Per-edge travel ticks, honoring research movement effects."""
        base = self.units[kind].ticks_per_hop
        for rid in research_done:
            spec = self.research.get(rid)
            if spec is None:
                continue
            override = spec.effect.get("ticks_per_hop", {}).get(kind)
            if override is not None:
                base = min(base, override)
        return base


def _fold(text: str) -> str:
    return "".join(ch for ch in text.lower() if ch.isalnum())


@lru_cache(maxsize=1)
def load_game_data() -> GameData:
    return GameData(
        _read_data("unit_stats.json"),
        _read_data("tech_tree.json"),
        _read_data("verbs.json"),
    )
