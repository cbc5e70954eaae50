"""Deterministic tick-based micro-RTS engine.

One tick is one game-second. Space is base-granular: a unit is at a base, or
counting down an integer number of ticks to its next hop along a path. The
engine never draws randomness; identical (state, orders) streams replay to
identical states bit for bit.

Per-tick phases inside `advance_tick`: apply orders, run per-unit reflex
machines (ascending unit id), accrue income, advance production/research,
advance movement, resolve combat at contested bases, remove the dead, record
fog-of-war intel, then increment the tick counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from zergmind import reflexnet
from zergmind.gamedata import GameData, load_game_data
from zergmind.mapmatrix import BaseId, MapMatrix, build_default_matrix
from zergmind.reflexnet import (
    ATTACKING,
    FLEEING,
    GATHER_GAS,
    GATHER_MINERALS,
    IDLE,
    MOVING,
)

ZERG = "zerg"
TERRAN = "terran"
PLAYERS = (ZERG, TERRAN)


class UnknownProducibleError(ValueError):
    """Producible name absent from the tech tree (parser/table mismatch)."""


class NotReadyError(ValueError):
    """spawn_order called without a Ready feasibility (dispatch bug upstream)."""


@dataclass(slots=True)
class Unit:
    id: int
    kind: str
    owner: str
    location: BaseId
    hp: int
    activity: str = IDLE
    gas_index: int = 0
    path: list[BaseId] = field(default_factory=list)
    hop_ticks_left: int = 0
    reflex_state: str = ""
    inject_ready_tick: int = 0
    recently_damaged: bool = False


@dataclass(slots=True)
class Building:
    id: int
    kind: str
    owner: str
    location: BaseId
    hp: int
    build_ticks_left: int = 0
    gas_index: int = 0
    larvae: int = 0
    larva_timer: int = 0
    morphing_to: str | None = None
    morph_ticks_left: int = 0

    @property
    def complete(self) -> bool:
        return self.build_ticks_left == 0


@dataclass(slots=True)
class PendingUnit:
    id: int
    kind: str
    owner: str
    location: BaseId
    ticks_left: int
    started: bool
    source: str  # "larva" | "producer" | "morph"
    producer_id: int | None = None


@dataclass(slots=True)
class ResearchJob:
    name: str
    owner: str
    ticks_left: int


# -- intel / observation -----------------------------------------------------

@dataclass(frozen=True, slots=True)
class ObservedUnit:
    id: int
    kind: str
    owner: str
    location: BaseId
    hp: int
    activity: str
    gas_index: int


@dataclass(frozen=True, slots=True)
class ObservedBuilding:
    id: int
    kind: str
    owner: str
    location: BaseId
    hp: int
    complete: bool
    gas_index: int


@dataclass(frozen=True, slots=True)
class IntelRecord:
    tick: int
    units: tuple[ObservedUnit, ...]
    buildings: tuple[ObservedBuilding, ...]


@dataclass(frozen=True, slots=True)
class Observation:
    player: str
    tick: int
    minerals: int
    gas: int
    supply_used: int
    supply_cap: int
    own_units: tuple[ObservedUnit, ...]
    own_buildings: tuple[ObservedBuilding, ...]
    research_done: frozenset[str]
    enemy_units: tuple[ObservedUnit, ...]
    enemy_buildings: tuple[ObservedBuilding, ...]
    staleness: dict[BaseId, int]  # per enemy-reported base; 0 = live this tick
    scouted: frozenset[BaseId]

    def enemy_units_at(self, base: BaseId) -> list[ObservedUnit]:
        return [u for u in self.enemy_units if u.location == base]

    def own_units_at(self, base: BaseId) -> list[ObservedUnit]:
        return [u for u in self.own_units if u.location == base]


# -- feasibility -------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Feasibility:
    status: str  # "ready" | "blocked" | "unaffordable"
    missing: tuple[str, ...] = ()
    resource: str = ""

    @property
    def ready(self) -> bool:
        return self.status == "ready"


READY = Feasibility("ready")


# -- engine orders -----------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ProduceOrder:
    player: str
    kind: str
    location: BaseId


@dataclass(frozen=True, slots=True)
class MorphUnitOrder:
    player: str
    kind: str
    location: BaseId


@dataclass(frozen=True, slots=True)
class BuildOrder:
    player: str
    kind: str
    location: BaseId


@dataclass(frozen=True, slots=True)
class MorphBuildingOrder:
    player: str
    kind: str
    location: BaseId


@dataclass(frozen=True, slots=True)
class ResearchStart:
    player: str
    name: str


@dataclass(frozen=True, slots=True)
class MoveOrder:
    player: str
    unit_ids: tuple[int, ...]
    destination: BaseId


@dataclass(frozen=True, slots=True)
class GatherOrder:
    player: str
    unit_ids: tuple[int, ...]
    resource: str  # "minerals" | "gas"
    gas_index: int = 0


@dataclass(frozen=True, slots=True)
class InjectOrder:
    player: str
    queen_id: int
    townhall_id: int


EngineOrder = (
    ProduceOrder | MorphUnitOrder | BuildOrder | MorphBuildingOrder
    | ResearchStart | MoveOrder | GatherOrder | InjectOrder
)


def order_record(order: EngineOrder) -> dict:
    rec = {"type": type(order).__name__}
    for name in order.__dataclass_fields__:
        value = getattr(order, name)
        if isinstance(value, BaseId):
            value = str(value)
        elif isinstance(value, tuple):
            value = list(value)
        rec[name] = value
    return rec


# -- per-tick event buffer ---------------------------------------------------

@dataclass(slots=True)
class TickEvents:
    tick: int
    orders: list[dict] = field(default_factory=list)
    transitions: list[dict] = field(default_factory=list)
    combat: list[dict] = field(default_factory=list)
    spawns: list[dict] = field(default_factory=list)
    deaths: list[dict] = field(default_factory=list)
    log: list[str] = field(default_factory=list)

    def as_record(self) -> dict:
        return {
            "tick": self.tick,
            "orders": self.orders,
            "transitions": self.transitions,
            "combat": self.combat,
            "spawns": self.spawns,
            "deaths": self.deaths,
            "log": self.log,
        }


# -- world state -------------------------------------------------------------

@dataclass(slots=True)
class WorldState:
    matrix: MapMatrix
    seed: int
    tick: int = 0
    next_id: int = 1
    units: dict[int, Unit] = field(default_factory=dict)
    buildings: dict[int, Building] = field(default_factory=dict)
    pending_units: list[PendingUnit] = field(default_factory=list)
    research_jobs: list[ResearchJob] = field(default_factory=list)
    research_done: dict[str, set[str]] = field(
        default_factory=lambda: {ZERG: set(), TERRAN: set()})
    minerals: dict[str, int] = field(default_factory=dict)
    gas: dict[str, int] = field(default_factory=dict)
    founded: dict[str, list[BaseId]] = field(
        default_factory=lambda: {ZERG: [], TERRAN: []})
    intel: dict[str, dict[BaseId, IntelRecord]] = field(
        default_factory=lambda: {ZERG: {}, TERRAN: {}})

    # ---- queries ----

    def units_at(self, base: BaseId, owner: str | None = None) -> list[Unit]:
        return [
            u for uid, u in sorted(self.units.items())
            if u.location == base and (owner is None or u.owner == owner)
        ]

    def buildings_at(self, base: BaseId, owner: str | None = None) -> list[Building]:
        return [
            b for bid, b in sorted(self.buildings.items())
            if b.location == base and (owner is None or b.owner == owner)
        ]

    def townhalls(self, player: str, completed_only: bool = False) -> list[Building]:
        data = load_game_data()
        out = []
        for _, b in sorted(self.buildings.items()):
            if b.owner != player or not data.buildings[b.kind].townhall:
                continue
            if completed_only and not b.complete:
                continue
            out.append(b)
        return out

    def townhall_at(self, player: str, base: BaseId,
                    completed_only: bool = True) -> Building | None:
        for b in self.townhalls(player, completed_only=completed_only):
            if b.location == base:
                return b
        return None

    def supply_used(self, player: str) -> int:
        data = load_game_data()
        used = sum(
            data.units[u.kind].supply
            for u in self.units.values() if u.owner == player
        )
        used += sum(
            data.units[p.kind].supply
            for p in self.pending_units if p.owner == player
        )
        return used

    def supply_cap(self, player: str) -> int:
        data = load_game_data()
        cap = sum(
            data.buildings[b.kind].supply_provided
            for b in self.buildings.values()
            if b.owner == player and b.complete
        )
        cap += sum(
            data.units[u.kind].supply_provided
            for u in self.units.values() if u.owner == player
        )
        return min(cap, data.economy.supply_cap_max)

    def worker_count(self, player: str) -> int:
        data = load_game_data()
        return sum(
            1 for u in self.units.values()
            if u.owner == player and data.units[u.kind].worker
        )

    def eliminated(self, player: str) -> bool:
        """A player is out when no town-hall-class building (built or in
        progress, morphing included) remains."""
        return not self.townhalls(player, completed_only=False)

    # ---- mutation helpers (engine internal) ----

    def new_id(self) -> int:
        nid = self.next_id
        self.next_id += 1
        return nid

    def add_unit(self, kind: str, owner: str, location: BaseId,
                 activity: str | None = None) -> Unit:
        data = load_game_data()
        stats = data.units[kind]
        if activity is None:
            activity = GATHER_MINERALS if stats.worker else IDLE
        unit = Unit(
            id=self.new_id(), kind=kind, owner=owner, location=location,
            hp=stats.max_hp, activity=activity,
            reflex_state=reflexnet.default_state(kind),
        )
        self.units[unit.id] = unit
        return unit

    def add_building(self, kind: str, owner: str, location: BaseId,
                     complete: bool = False, gas_index: int = 0) -> Building:
        data = load_game_data()
        stats = data.buildings[kind]
        b = Building(
            id=self.new_id(), kind=kind, owner=owner, location=location,
            hp=stats.max_hp,
            build_ticks_left=0 if complete else stats.build_ticks,
            gas_index=gas_index,
            larva_timer=data.larva.spawn_interval_ticks,
        )
        self.buildings[b.id] = b
        if stats.townhall and location not in self.founded[owner]:
            self.founded[owner].append(location)
        return b


def starting_state(matrix: MapMatrix | None = None, seed: int = 0) -> WorldState:
    """Standard opening: each side 12 workers plus a town hall at its home
    base; Zerg also gets the starting Overlord."""
    data = load_game_data()
    state = WorldState(matrix=matrix or build_default_matrix(), seed=seed)
    state.minerals = {
        ZERG: data.economy.starting_minerals,
        TERRAN: data.economy.starting_minerals,
    }
    state.gas = {ZERG: data.economy.starting_gas, TERRAN: data.economy.starting_gas}
    hatch = state.add_building("Hatchery", ZERG, state.matrix.home_a, complete=True)
    hatch.larvae = data.larva.natural_cap
    for _ in range(12):
        state.add_unit("Drone", ZERG, state.matrix.home_a)
    state.add_unit("Overlord", ZERG, state.matrix.home_a)
    state.add_building("CommandCenter", TERRAN, state.matrix.home_b, complete=True)
    for _ in range(12):
        state.add_unit("SCV", TERRAN, state.matrix.home_b)
    return state


# -- feasibility -------------------------------------------------------------

def check_prerequisites(state: WorldState, producible: str, player: str) -> Feasibility:
    """Tech/afford/supply gate for one producible or research id.

    Ready iff every prerequisite building/research is completed somewhere,
    the costs fit the bank, and (for units) supply fits. Blocked lists every
    missing prerequisite; affordability is reported only when not Blocked.
    """
    data = load_game_data()
    if producible in data.research:
        spec = data.research[producible]
        missing = _missing_prereqs(state, player, spec.requires, data)
        if missing:
            return Feasibility("blocked", missing=tuple(missing))
        if state.minerals[player] < spec.mineral_cost:
            return Feasibility("unaffordable", resource="minerals")
        if state.gas[player] < spec.gas_cost:
            return Feasibility("unaffordable", resource="gas")
        return READY
    if producible not in data.producibles:
        raise UnknownProducibleError(f"unknown-producible: {producible!r}")
    prod = data.producibles[producible]
    missing = _missing_prereqs(state, player, prod.requires, data)
    if missing:
        return Feasibility("blocked", missing=tuple(missing))
    if prod.type == "unit":
        mineral, gas_cost, supply = data.unit_cost(producible)
        extra = supply
        morph = prod.morph_source
        if morph is not None and morph in data.units:
            extra = supply - data.units[morph].supply
        if state.minerals[player] < mineral:
            return Feasibility("unaffordable", resource="minerals")
        if state.gas[player] < gas_cost:
            return Feasibility("unaffordable", resource="gas")
        if extra > 0 and state.supply_used(player) + extra > state.supply_cap(player):
            return Feasibility("unaffordable", resource="supply")
        return READY
    mineral, gas_cost = data.building_cost(producible)
    if state.minerals[player] < mineral:
        return Feasibility("unaffordable", resource="minerals")
    if state.gas[player] < gas_cost:
        return Feasibility("unaffordable", resource="gas")
    return READY


def _missing_prereqs(state: WorldState, player: str,
                     requires: tuple[str, ...], data: GameData) -> list[str]:
    missing = []
    done_buildings = {
        b.kind for b in state.buildings.values()
        if b.owner == player and b.complete
    }
    for req in requires:
        if req in data.buildings:
            if req not in done_buildings:
                missing.append(req)
        elif req not in state.research_done[player]:
            missing.append(req)
    return missing


def spawn_order(state: WorldState, player: str, producible: str,
                location: BaseId) -> EngineOrder:
    """Build the engine order for a Ready production/build/morph/research."""
    data = load_game_data()
    feas = check_prerequisites(state, producible, player)
    if not feas.ready:
        raise NotReadyError(f"not-ready: {producible} is {feas.status}")
    if producible in data.research:
        return ResearchStart(player, producible)
    prod = data.producibles[producible]
    if prod.type == "unit":
        if prod.morph_source is not None and prod.morph_source in data.units:
            return MorphUnitOrder(player, producible, location)
        return ProduceOrder(player, producible, location)
    if prod.morph_source is not None:
        return MorphBuildingOrder(player, producible, location)
    return BuildOrder(player, producible, location)


# -- observation / fog -------------------------------------------------------

def _snapshot_unit(u: Unit) -> ObservedUnit:
    return ObservedUnit(
        id=u.id, kind=u.kind, owner=u.owner, location=u.location,
        hp=u.hp, activity=u.activity, gas_index=u.gas_index,
    )


def _snapshot_building(b: Building) -> ObservedBuilding:
    return ObservedBuilding(
        id=b.id, kind=b.kind, owner=b.owner, location=b.location,
        hp=b.hp, complete=b.complete, gas_index=b.gas_index,
    )


def _presence_bases(state: WorldState, player: str) -> set[BaseId]:
    bases = {u.location for u in state.units.values() if u.owner == player}
    bases |= {b.location for b in state.buildings.values() if b.owner == player}
    return bases


def observe(state: WorldState, player: str) -> Observation:
    """Fog-filtered immutable snapshot: own assets fully, enemy assets at
    live-visible bases now, plus remembered (stale) intel elsewhere."""
    enemy = ZERG if player == TERRAN else TERRAN
    live = _presence_bases(state, player)
    remembered = state.intel[player]

    enemy_units: list[ObservedUnit] = []
    enemy_buildings: list[ObservedBuilding] = []
    staleness: dict[BaseId, int] = {}
    for base in sorted(live | set(remembered)):
        if base in live:
            staleness[base] = 0
            enemy_units.extend(
                _snapshot_unit(u) for u in state.units_at(base, enemy))
            enemy_buildings.extend(
                _snapshot_building(b) for b in state.buildings_at(base, enemy))
        else:
            record = remembered[base]
            staleness[base] = state.tick - record.tick
            enemy_units.extend(record.units)
            enemy_buildings.extend(record.buildings)

    return Observation(
        player=player,
        tick=state.tick,
        minerals=state.minerals[player],
        gas=state.gas[player],
        supply_used=state.supply_used(player),
        supply_cap=state.supply_cap(player),
        own_units=tuple(
            _snapshot_unit(u) for _, u in sorted(state.units.items())
            if u.owner == player
        ),
        own_buildings=tuple(
            _snapshot_building(b) for _, b in sorted(state.buildings.items())
            if b.owner == player
        ),
        research_done=frozenset(state.research_done[player]),
        enemy_units=tuple(enemy_units),
        enemy_buildings=tuple(enemy_buildings),
        staleness=staleness,
        scouted=frozenset(live | set(remembered)),
    )


def _record_intel(state: WorldState) -> None:
    for player in PLAYERS:
        enemy = ZERG if player == TERRAN else TERRAN
        for base in _presence_bases(state, player):
            state.intel[player][base] = IntelRecord(
                tick=state.tick,
                units=tuple(_snapshot_unit(u) for u in state.units_at(base, enemy)),
                buildings=tuple(
                    _snapshot_building(b) for b in state.buildings_at(base, enemy)),
            )


# -- order application -------------------------------------------------------

def _pick_worker(state: WorldState, player: str, base: BaseId) -> Unit | None:
    data = load_game_data()
    candidates = [
        u for u in state.units_at(base, player)
        if data.units[u.kind].worker and u.activity in (
            GATHER_MINERALS, GATHER_GAS, IDLE)
    ]
    return candidates[0] if candidates else None


def _apply_order(state: WorldState, order: EngineOrder, events: TickEvents) -> None:
    data = load_game_data()

    if isinstance(order, ProduceOrder):
        feas = check_prerequisites(state, order.kind, order.player)
        if not feas.ready:
            events.log.append(f"ignored {order.kind}: {feas.status}")
            return
        prod = data.producibles[order.kind]
        stats = data.units[order.kind]
        producer_id = None
        source = "larva"
        if prod.source == "townhall":
            hall = state.townhall_at(order.player, order.location)
            if hall is None:
                events.log.append(f"ignored {order.kind}: no townhall at {order.location}")
                return
            producer_id = hall.id
            source = "producer"
        elif prod.source not in ("larva",):
            producers = [
                b for b in state.buildings_at(order.location, order.player)
                if b.kind == prod.source and b.complete
            ]
            if not producers:
                events.log.append(
                    f"ignored {order.kind}: no {prod.source} at {order.location}")
                return
            producer_id = producers[0].id
            source = "producer"
        state.minerals[order.player] -= stats.mineral_cost
        state.gas[order.player] -= stats.gas_cost
        state.pending_units.append(PendingUnit(
            id=state.new_id(), kind=order.kind, owner=order.player,
            location=order.location, ticks_left=stats.build_ticks,
            started=False, source=source, producer_id=producer_id,
        ))
        return

    if isinstance(order, MorphUnitOrder):
        feas = check_prerequisites(state, order.kind, order.player)
        if not feas.ready:
            events.log.append(f"ignored {order.kind}: {feas.status}")
            return
        prod = data.producibles[order.kind]
        stats = data.units[order.kind]
        morph_kind = prod.morph_source
        sources = [
            u for u in state.units_at(order.location, order.player)
            if u.kind == morph_kind and u.activity != FLEEING
        ]
        if not sources:
            events.log.append(
                f"ignored {order.kind}: no {morph_kind} at {order.location}")
            return
        victim = sources[0]
        del state.units[victim.id]
        state.minerals[order.player] -= stats.mineral_cost
        state.gas[order.player] -= stats.gas_cost
        state.pending_units.append(PendingUnit(
            id=state.new_id(), kind=order.kind, owner=order.player,
            location=order.location, ticks_left=stats.build_ticks,
            started=True, source="morph",
        ))
        return

    if isinstance(order, BuildOrder):
        feas = check_prerequisites(state, order.kind, order.player)
        if not feas.ready:
            events.log.append(f"ignored {order.kind}: {feas.status}")
            return
        stats = data.buildings[order.kind]
        gas_index = 0
        if stats.gas_source:
            taken = {
                b.gas_index
                for b in state.buildings_at(order.location, order.player)
                if data.buildings[b.kind].gas_source
            }
            if len(taken) >= data.economy.max_extractors_per_base:
                events.log.append(
                    f"ignored {order.kind}: no free geyser at {order.location}")
                return
            gas_index = min(i for i in (1, 2) if i not in taken)
        if stats.race == ZERG:
            worker = _pick_worker(state, order.player, order.location)
            if worker is None:
                events.log.append(
                    f"ignored {order.kind}: no worker at {order.location}")
                return
            del state.units[worker.id]
        state.minerals[order.player] -= stats.mineral_cost
        state.gas[order.player] -= stats.gas_cost
        state.add_building(order.kind, order.player, order.location,
                           gas_index=gas_index)
        return

    if isinstance(order, MorphBuildingOrder):
        feas = check_prerequisites(state, order.kind, order.player)
        if not feas.ready:
            events.log.append(f"ignored {order.kind}: {feas.status}")
            return
        prod = data.producibles[order.kind]
        stats = data.buildings[order.kind]
        hosts = [
            b for b in state.buildings_at(order.location, order.player)
            if b.kind == prod.morph_source and b.complete and b.morphing_to is None
        ]
        if not hosts:
            events.log.append(
                f"ignored {order.kind}: no {prod.morph_source} at {order.location}")
            return
        state.minerals[order.player] -= stats.mineral_cost
        state.gas[order.player] -= stats.gas_cost
        hosts[0].morphing_to = order.kind
        hosts[0].morph_ticks_left = stats.build_ticks
        return

    if isinstance(order, ResearchStart):
        spec = data.research.get(order.name)
        if spec is None:
            events.log.append(f"ignored research {order.name}: unknown")
            return
        if order.name in state.research_done[order.player] or any(
                j.name == order.name and j.owner == order.player
                for j in state.research_jobs):
            events.log.append(f"ignored research {order.name}: duplicate")
            return
        feas = check_prerequisites(state, order.name, order.player)
        if not feas.ready:
            events.log.append(f"ignored research {order.name}: {feas.status}")
            return
        state.minerals[order.player] -= spec.mineral_cost
        state.gas[order.player] -= spec.gas_cost
        state.research_jobs.append(
            ResearchJob(name=order.name, owner=order.player, ticks_left=spec.ticks))
        return

    if isinstance(order, MoveOrder):
        for uid in order.unit_ids:
            unit = state.units.get(uid)
            if unit is None or unit.owner != order.player:
                continue
            path = state.matrix.path(unit.location, order.destination)
            unit.path = path[1:]
            if unit.path:
                unit.hop_ticks_left = data.hop_ticks_for(
                    unit.kind, state.research_done[order.player])
                unit.activity = MOVING
            else:
                unit.activity = IDLE if not data.units[unit.kind].worker else unit.activity
        return

    if isinstance(order, GatherOrder):
        for uid in order.unit_ids:
            unit = state.units.get(uid)
            if unit is None or unit.owner != order.player:
                continue
            if not data.units[unit.kind].worker:
                continue
            if order.resource == "gas":
                unit.activity = GATHER_GAS
                unit.gas_index = order.gas_index or 1
            else:
                unit.activity = GATHER_MINERALS
                unit.gas_index = 0
        return

    if isinstance(order, InjectOrder):
        hall = state.buildings.get(order.townhall_id)
        queen = state.units.get(order.queen_id)
        if hall is None or queen is None or not hall.complete:
            events.log.append("ignored inject: stale target")
            return
        larva = data.larva
        hall.larvae = min(larva.bank_cap, hall.larvae + larva.inject_larvae)
        return

    raise TypeError(f"unhandled order {order!r}")


# -- tick phases -------------------------------------------------------------

def _income_phase(state: WorldState) -> None:
    data = load_game_data()
    eco = data.economy
    for player in PLAYERS:
        for hall in state.townhalls(player, completed_only=True):
            base = hall.location
            workers = [
                u for u in state.units_at(base, player)
                if data.units[u.kind].worker
            ]
            mineral_workers = sum(
                1 for u in workers if u.activity == GATHER_MINERALS)
            state.minerals[player] += (
                min(mineral_workers, eco.mineral_slots_per_base)
                * eco.mineral_rate_per_worker
            )
            extractors = {
                b.gas_index: b
                for b in state.buildings_at(base, player)
                if data.buildings[b.kind].gas_source and b.complete
            }
            for index in extractors:
                gas_workers = sum(
                    1 for u in workers
                    if u.activity == GATHER_GAS and u.gas_index == index
                )
                state.gas[player] += (
                    min(gas_workers, eco.gas_slots_per_extractor)
                    * eco.gas_rate_per_worker
                )


def _production_phase(state: WorldState, events: TickEvents) -> None:
    data = load_game_data()

    for b in [b for _, b in sorted(state.buildings.items())]:
        if not b.complete:
            b.build_ticks_left -= 1
            if b.complete and data.buildings[b.kind].townhall:
                b.larva_timer = data.larva.spawn_interval_ticks
            continue
        if b.morphing_to is not None:
            b.morph_ticks_left -= 1
            if b.morph_ticks_left <= 0:
                b.kind = b.morphing_to
                b.morphing_to = None
                b.hp = data.buildings[b.kind].max_hp
            continue
        if data.buildings[b.kind].townhall:
            b.larva_timer -= 1
            if b.larva_timer <= 0:
                if b.larvae < data.larva.natural_cap:
                    b.larvae += 1
                b.larva_timer = data.larva.spawn_interval_ticks

    started_producers = {
        p.producer_id for p in state.pending_units
        if p.started and p.producer_id is not None
    }
    for p in state.pending_units:
        if p.started:
            continue
        if p.source == "larva":
            halls = [
                h for h in state.townhalls(p.owner, completed_only=True)
                if h.location == p.location and h.larvae > 0
            ]
            if halls:
                halls[0].larvae -= 1
                p.started = True
        else:
            producer = state.buildings.get(p.producer_id or -1)
            if producer is None:
                events.log.append(f"dropped pending {p.kind}: producer destroyed")
                p.ticks_left = -1
                continue
            if p.producer_id not in started_producers:
                p.started = True
                started_producers.add(p.producer_id)

    remaining: list[PendingUnit] = []
    for p in state.pending_units:
        if p.ticks_left < 0:
            continue
        if p.started:
            p.ticks_left -= 1
            if p.ticks_left <= 0:
                unit = state.add_unit(p.kind, p.owner, p.location)
                events.spawns.append(
                    {"id": unit.id, "kind": p.kind, "owner": p.owner,
                     "base": str(p.location)})
                continue
        remaining.append(p)
    state.pending_units = remaining

    finished: list[ResearchJob] = []
    for job in state.research_jobs:
        job.ticks_left -= 1
        if job.ticks_left <= 0:
            state.research_done[job.owner].add(job.name)
            finished.append(job)
    state.research_jobs = [j for j in state.research_jobs if j not in finished]


def _movement_phase(state: WorldState) -> None:
    data = load_game_data()
    for _, unit in sorted(state.units.items()):
        if not unit.path:
            continue
        unit.hop_ticks_left -= 1
        if unit.hop_ticks_left > 0:
            continue
        unit.location = unit.path.pop(0)
        if unit.path:
            unit.hop_ticks_left = data.hop_ticks_for(
                unit.kind, state.research_done[unit.owner])
        else:
            stats = data.units[unit.kind]
            if unit.activity == MOVING:
                unit.activity = GATHER_MINERALS if stats.worker else IDLE


def resolve_combat(state: WorldState, base: BaseId,
                   events: TickEvents | None = None) -> list[int]:
    """One tick of simultaneous damage at a contested base.

    Attackers are the units whose reflex machines are in an Attack state.
    Targets follow the reflex prioritization; damage lands simultaneously and
    the dead are removed afterwards. Returns removed unit/building ids.
    """
    data = load_game_data()
    units_here = state.units_at(base)
    if not units_here:
        return []
    damage: dict[tuple[str, int], int] = {}
    for attacker in units_here:
        if attacker.reflex_state != reflexnet.ATTACK:
            continue
        enemy = ZERG if attacker.owner == TERRAN else TERRAN
        target = reflexnet.choose_target(
            attacker.kind,
            [_snapshot_unit(u) for u in state.units_at(base, enemy)],
            [_snapshot_building(b) for b in state.buildings_at(base, enemy)],
            data,
        )
        if target is None:
            continue
        kind_stats = data.units[attacker.kind]
        if isinstance(target, ObservedUnit) and data.units[target.kind].can_fly:
            dealt = kind_stats.air_attack
        else:
            dealt = kind_stats.ground_attack
        if (isinstance(target, ObservedUnit)
                and attacker.kind in data.combat.flank_shooter_kinds
                and data.units[target.kind].melee):
            dealt = int(dealt * data.combat.flank_damage_taken_multiplier)
        key = ("unit", target.id) if isinstance(target, ObservedUnit) \
            else ("building", target.id)
        damage[key] = damage.get(key, 0) + dealt

    removed: list[int] = []
    for (kind, tid), dealt in sorted(damage.items()):
        if kind == "unit":
            victim = state.units.get(tid)
            if victim is None:
                continue
            victim.hp -= dealt
            victim.recently_damaged = True
            if victim.hp <= 0:
                removed.append(tid)
                if events is not None:
                    events.deaths.append(
                        {"id": tid, "kind": victim.kind, "owner": victim.owner,
                         "base": str(base)})
                del state.units[tid]
        else:
            victim_b = state.buildings.get(tid)
            if victim_b is None:
                continue
            victim_b.hp -= dealt
            if victim_b.hp <= 0:
                removed.append(tid)
                if events is not None:
                    events.deaths.append(
                        {"id": tid, "kind": victim_b.kind, "owner": victim_b.owner,
                         "base": str(base)})
                del state.buildings[tid]
    if events is not None and damage:
        events.combat.append({
            "base": str(base),
            "hits": {f"{k}:{t}": d for (k, t), d in sorted(damage.items())},
        })

    # Flat medivac support: patch up the most-damaged ground unit nearby.
    heal = data.combat.medivac_heal_per_tick
    for medivac in [u for u in state.units_at(base) if u.kind == "Medivac"]:
        hurt = [
            u for u in state.units_at(base, medivac.owner)
            if not data.units[u.kind].can_fly and u.hp < data.units[u.kind].max_hp
        ]
        if hurt:
            patient = min(hurt, key=lambda u: (u.hp, u.id))
            patient.hp = min(data.units[patient.kind].max_hp, patient.hp + heal)
    return removed


def _combat_phase(state: WorldState, events: TickEvents) -> None:
    contested = sorted({
        u.location
        for u in state.units.values()
        if state.units_at(u.location, ZERG) and state.units_at(u.location, TERRAN)
    })
    extra = sorted({
        u.location for u in state.units.values()
        if u.reflex_state == reflexnet.ATTACK
    } - set(contested))
    for base in list(contested) + list(extra):
        resolve_combat(state, base, events)


def advance_tick(state: WorldState, orders: list[EngineOrder],
                 events: TickEvents | None = None) -> TickEvents:
    """Advance one game-second. Mutates `state`; returns the tick's events."""
    if events is None:
        events = TickEvents(tick=state.tick)
    for order in orders:
        events.orders.append(order_record(order))
        _apply_order(state, order, events)
    reflexnet.step_all(state, events)
    _income_phase(state)
    _production_phase(state, events)
    _movement_phase(state)
    _combat_phase(state, events)
    _record_intel(state)
    state.tick += 1
    return events
