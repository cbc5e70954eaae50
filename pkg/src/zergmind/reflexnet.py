"""Per-unit reflex state machines.

Every unit carries a tiny finite-state machine that reacts to its immediate
surroundings every tick, independent of the strategic layer. Decisions are
pure functions of the unit, a per-base context snapshot, and the stats
tables; the engine applies the returned actions.

Archetypes and their states:

* worker     Gather / Attack / Flee - fights back in minimal numbers, runs
             from real pushes, returns to the mineral line when clear.
* transport  Idle / Flee - unarmed fliers bail out when actually hit.
* combat     Idle / Attack / Flee - engages anything present, retreats when
             a small group is caught under fire away from home.
* queen      Inject - larva injection on cooldown, nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from zergmind.gamedata import GameData, load_game_data
from zergmind.mapmatrix import BaseId, MapMatrix

if TYPE_CHECKING:  # pragma: no cover - annotations only
    from zergmind.world import TickEvents, WorldState

# Reflex states.
GATHER = "Gather"
ATTACK = "Attack"
FLEE = "Flee"
IDLE_STATE = "Idle"
INJECT = "Inject"

# Unit activity labels (what a unit is doing right now, reported outward).
GATHER_MINERALS = "gathering-minerals"
GATHER_GAS = "gathering-gas"
IDLE = "idle"
MOVING = "moving"
ATTACKING = "attacking"
FLEEING = "fleeing"

# Transition triggers, recorded into the replay stream.
ENEMY_SPOTTED = "enemy-spotted"
THREAT_CLEARED = "threat-cleared"
OVERWHELMED = "overwhelmed"
DAMAGE_TAKEN = "damage-taken"
REACHED_SAFETY = "reached-safety"

WORKER = "worker"
TRANSPORT = "transport"
COMBAT = "combat"
QUEEN = "queen"


def archetype_of(kind: str, data: GameData | None = None) -> str:
    data = data or load_game_data()
    stats = data.units[kind]
    if stats.worker:
        return WORKER
    if kind == "Queen":
        return QUEEN
    if not stats.armed:
        return TRANSPORT
    return COMBAT


def default_state(kind: str) -> str:
    return {
        WORKER: GATHER,
        TRANSPORT: IDLE_STATE,
        COMBAT: IDLE_STATE,
        QUEEN: INJECT,
    }[archetype_of(kind)]


@dataclass(frozen=True)
class BaseContext:
    """Everything a reflex decision may look at, frozen for one tick."""

    base: BaseId
    tick: int
    matrix: MapMatrix
    friendly_units: tuple
    enemy_units: tuple
    enemy_buildings: tuple
    own_townhall_bases: tuple[BaseId, ...]
    retreat_bases: tuple[BaseId, ...]  # own townhall bases free of armed enemies
    presence_bases: tuple[BaseId, ...]  # bases holding any friendly unit
    home: BaseId


def _armed_kind(kind: str, data: GameData) -> bool:
    stats = data.units.get(kind)
    return stats is not None and stats.armed


def assess_threat(friendly_units, enemy_units, data: GameData) -> tuple[int, int]:
    """(friendly, enemy) attack power at a base: sum of best per-hit damage
    over armed units on each side."""

    def power(units) -> int:
        total = 0
        for u in units:
            stats = data.units.get(u.kind)
            if stats is not None and stats.armed:
                total += max(stats.ground_attack, stats.air_attack)
        return total

    return power(friendly_units), power(enemy_units)


def _nearest(matrix: MapMatrix, origin: BaseId,
             candidates) -> BaseId | None:
    best: tuple[int, str] | None = None
    found: BaseId | None = None
    for base in candidates:
        if base == origin:
            continue
        key = (matrix.distance(origin, base), str(base))
        if best is None or key < best:
            best = key
            found = base
    return found


def choose_target(attacker_kind: str, enemy_units, enemy_buildings,
                  data: GameData):
    """Target prioritization shared by combat resolution.

    Dropship-class support fliers first (for anything that can shoot up),
    then military, then workers; buildings only once nothing else is
    targetable. Ties break toward lower hp, then lower id. Fliers are
    invisible to ground-only weapons.
    """
    stats = data.units[attacker_kind]
    targetable = []
    for e in enemy_units:
        es = data.units[e.kind]
        if es.can_fly and stats.air_attack <= 0:
            continue
        if not es.can_fly and stats.ground_attack <= 0:
            continue
        targetable.append(e)
    if targetable:
        def rank(e) -> tuple[int, int, int]:
            es = data.units[e.kind]
            if stats.air_attack > 0 and e.kind == "Medivac":
                tier = 0
            elif not es.worker:
                tier = 1
            else:
                tier = 2
            return (tier, e.hp, e.id)

        return min(targetable, key=rank)
    if stats.ground_attack > 0 and enemy_buildings:
        return min(enemy_buildings, key=lambda b: (b.hp, b.id))
    return None


# -- per-archetype decisions -------------------------------------------------

def worker_decision(unit, ctx: BaseContext, data: GameData):
    """Returns (new_state, action, trigger). Actions: ("gather",),
    ("engage",), ("flee", dest)."""
    stats = data.units[unit.kind]
    armed = [e for e in ctx.enemy_units if _armed_kind(e.kind, data)]
    state = unit.reflex_state or GATHER

    if not armed:
        if state != GATHER:
            return GATHER, ("gather",), THREAT_CLEARED
        if unit.activity in (IDLE, ATTACKING):
            return GATHER, ("gather",), None
        return GATHER, None, None

    _, enemy_power = assess_threat((), armed, data)
    per_worker = max(stats.ground_attack, stats.air_attack)
    workers_here = sorted(
        (u for u in ctx.friendly_units if data.units[u.kind].worker),
        key=lambda u: u.id)
    my_power = len(workers_here) * per_worker
    marines = sum(1 for e in armed if e.kind == "Marine")
    raiders = sum(1 for e in armed if e.kind in ("Hellion", "Hellbat"))
    must_flee = (
        my_power <= enemy_power
        or marines > data.combat.drone_marine_flee_threshold
        or raiders > 0
    )
    if must_flee:
        dest = _nearest(ctx.matrix, ctx.base, ctx.retreat_bases)
        if dest is not None:
            if state != FLEE:
                return FLEE, ("flee", dest), OVERWHELMED
            return FLEE, None, None
        # Nowhere safer to go: keep swinging.
        if state != ATTACK:
            return ATTACK, ("engage",), ENEMY_SPOTTED
        return ATTACK, None, None

    # Worth contesting: the smallest worker detail that out-damages the
    # raiders fights; the rest keep mining.
    needed = enemy_power // per_worker + 1 if per_worker else len(workers_here)
    rank = next(
        (i for i, u in enumerate(workers_here) if u.id == unit.id),
        len(workers_here))
    if rank < needed:
        if state != ATTACK:
            return ATTACK, ("engage",), ENEMY_SPOTTED
        return ATTACK, None, None
    if state != GATHER:
        return GATHER, ("gather",), THREAT_CLEARED
    return GATHER, None, None


def transport_decision(unit, ctx: BaseContext, data: GameData):
    state = unit.reflex_state or IDLE_STATE
    if state == FLEE:
        if not unit.path and not unit.recently_damaged:
            return IDLE_STATE, None, REACHED_SAFETY
        return FLEE, None, None
    if unit.recently_damaged:
        dest = _nearest(ctx.matrix, ctx.base, ctx.presence_bases)
        if dest is None:
            dest = _nearest(ctx.matrix, ctx.base, ctx.matrix.edge_bases())
        if dest is not None:
            return FLEE, ("flee", dest), DAMAGE_TAKEN
    return IDLE_STATE, None, None


def combat_decision(unit, ctx: BaseContext, data: GameData):
    state = unit.reflex_state or IDLE_STATE
    enemies_present = bool(ctx.enemy_units or ctx.enemy_buildings)
    group = [
        u for u in ctx.friendly_units
        if _armed_kind(u.kind, data) and not data.units[u.kind].worker
    ]
    away_from_home = ctx.base not in ctx.own_townhall_bases
    under_fire = unit.recently_damaged or any(
        getattr(u, "recently_damaged", False) for u in group)
    outnumbered = (
        len(group) <= data.combat.combat_flee_group_max
        and away_from_home
        and under_fire
    )

    if state == FLEE:
        armed = [e for e in ctx.enemy_units if _armed_kind(e.kind, data)]
        if not unit.path and not armed:
            return IDLE_STATE, None, REACHED_SAFETY
        return FLEE, None, None

    if outnumbered and enemies_present:
        dest = _nearest(ctx.matrix, ctx.base, ctx.retreat_bases)
        if dest is None:
            dest = ctx.home if ctx.base != ctx.home else None
        if dest is not None:
            return FLEE, ("flee", dest), OVERWHELMED

    if state == ATTACK:
        if not enemies_present:
            return IDLE_STATE, None, THREAT_CLEARED
        if unit.activity != ATTACKING:
            return ATTACK, ("engage",), None
        return ATTACK, None, None

    if enemies_present:
        return ATTACK, ("engage",), ENEMY_SPOTTED
    return IDLE_STATE, None, None


def queen_decision(unit, ctx: BaseContext, data: GameData):
    if ctx.tick >= unit.inject_ready_tick and ctx.base in ctx.own_townhall_bases:
        return INJECT, ("inject", ctx.base), None
    return INJECT, None, None


_DECIDERS = {
    WORKER: worker_decision,
    TRANSPORT: transport_decision,
    COMBAT: combat_decision,
    QUEEN: queen_decision,
}


def decide(unit, ctx: BaseContext, data: GameData):
    return _DECIDERS[archetype_of(unit.kind, data)](unit, ctx, data)


# -- engine hook -------------------------------------------------------------

def step_all(state: WorldState, events: TickEvents) -> None:
    """Run every unit's reflex machine for this tick, ascending unit id.

    Mutates unit reflex states/activities/paths directly and records state
    transitions into the tick's event buffer.
    """
    data = load_game_data()
    players = sorted({u.owner for u in state.units.values()})

    retreat: dict[str, tuple[BaseId, ...]] = {}
    presence: dict[str, tuple[BaseId, ...]] = {}
    hall_bases: dict[str, tuple[BaseId, ...]] = {}
    for owner in players:
        halls = [b.location for b in state.townhalls(owner, completed_only=True)]
        hall_bases[owner] = tuple(sorted(halls, key=str))
        retreat[owner] = tuple(sorted(
            (h for h in halls if not any(
                _armed_kind(u.kind, data)
                for u in state.units_at(h)
                if u.owner != owner)),
            key=str))
        presence[owner] = tuple(sorted(
            {u.location for u in state.units.values() if u.owner == owner},
            key=str))

    contexts: dict[tuple[str, BaseId], BaseContext] = {}

    def context_for(owner: str, base: BaseId) -> BaseContext:
        key = (owner, base)
        if key not in contexts:
            contexts[key] = BaseContext(
                base=base,
                tick=state.tick,
                matrix=state.matrix,
                friendly_units=tuple(state.units_at(base, owner)),
                enemy_units=tuple(
                    u for u in state.units_at(base) if u.owner != owner),
                enemy_buildings=tuple(
                    b for b in state.buildings_at(base) if b.owner != owner),
                own_townhall_bases=hall_bases[owner],
                retreat_bases=retreat[owner],
                presence_bases=presence[owner],
                home=(state.matrix.home_a if owner == "zerg"
                      else state.matrix.home_b),
            )
        return contexts[key]

    for uid in sorted(state.units):
        unit = state.units.get(uid)
        if unit is None:
            continue
        ctx = context_for(unit.owner, unit.location)
        new_state, action, trigger = decide(unit, ctx, data)
        if new_state != unit.reflex_state:
            events.transitions.append({
                "unit": unit.id,
                "kind": unit.kind,
                "owner": unit.owner,
                "base": str(unit.location),
                "from": unit.reflex_state,
                "to": new_state,
                "trigger": trigger or "",
            })
            unit.reflex_state = new_state
        if action is not None:
            verb = action[0]
            if verb == "gather":
                unit.activity = GATHER_MINERALS
                unit.gas_index = 0
            elif verb == "engage":
                unit.activity = ATTACKING
                unit.path.clear()
                unit.hop_ticks_left = 0
            elif verb == "flee":
                dest = action[1]
                path = state.matrix.path(unit.location, dest)
                unit.path = path[1:]
                if unit.path:
                    unit.activity = FLEEING
                    unit.hop_ticks_left = data.hop_ticks_for(
                        unit.kind, state.research_done[unit.owner])
                else:
                    unit.activity = IDLE
            elif verb == "inject":
                hall = state.townhall_at(unit.owner, unit.location)
                if hall is not None:
                    hall.larvae = min(
                        data.larva.bank_cap,
                        hall.larvae + data.larva.inject_larvae)
                    unit.inject_ready_tick = (
                        state.tick + data.larva.inject_cooldown_ticks)
                    events.log.append(
                        f"queen {unit.id} injected larvae at {unit.location}")

    # Damage markers describe last tick only; wipe them after the whole pass
    # so every machine this tick saw the same picture.
    for unit in state.units.values():
        unit.recently_damaged = False
