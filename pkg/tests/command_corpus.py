"""Command-line corpus with pinned outcomes, shared by tests.

The lines are the translator-output transcripts exercised by the test
suite, grouped by scenario. Each group runs against ``corpus_state()``
(a mid-game position with resources banked and a second army base at A4)
through ``process_command_list``; the expected status of every line was
worked out by hand against the dispatch rules and is frozen here.
"""

from __future__ import annotations

from zergmind.world import TERRAN, ZERG, WorldState, starting_state


def corpus_state() -> WorldState:
    """Mid-game position: banked resources, scouts out, army staged at A4."""
    state = starting_state()
    state.minerals[ZERG] = 1000
    state.gas[ZERG] = 500
    a1 = state.matrix.home_a
    a4 = a1.__class__.parse("A4")
    state.add_building("Extractor", ZERG, a1, complete=True, gas_index=1)
    for _ in range(2):
        state.add_unit("Zergling", ZERG, a1)
    state.add_building("Hatchery", ZERG, a4, complete=True)
    state.add_building("EvolutionChamber", ZERG, a4, complete=True)
    for _ in range(2):
        state.add_unit("Drone", ZERG, a4)
    for _ in range(6):
        state.add_unit("Zergling", ZERG, a4)
    for _ in range(4):
        state.add_unit("Roach", ZERG, a4)
    for _ in range(2):
        state.add_unit("Overlord", ZERG, a4)
    return state


# (line, expected status) per group; groups run on fresh corpus states.
TRANSLATOR_EXAMPLES = [
    ("'0': (Zergling, A1)->(Move)->(A4), //It means send Zerglings at A1 to A4",
     "dispatched"),
    ("'1': (Drone, A1)->(Gather gas)->(Extractor1, A1) // It means send "
     "Drones at A1 to gathering gas at Extractor1 at A1", "dispatched"),
    ("'2': (Zergling, A1)->(Morph)->(Baneling) //It means Zergling at A1 "
     "need to morph to Baneling", "suspended"),
]

PER_TAG_LISTING = [
    ("*(Unit(name='Zergling', tag=4362338305))->(Attack)->(B1)", "dispatched"),
    ("*(Unit(name='Zergling', tag=4361551873))->(Attack)->(B1)", "dispatched"),
    ("*(Unit(name='Zergling', tag=4359454722))->(Attack)->(B1)", "dispatched"),
    ("(Zergling, A1)->(Attack)->(B1)", "dispatched"),
]

OPENING_PLAN = [
    ("'0': (Overlord, A1)->(Move)->(B1)", "dispatched"),
    ("'1': (Drone, A1)->(Train)->(Drone)", "dispatched"),
    ("'2': (Drone, A1)->(Build)->(Spawning Pool, A1)", "dispatched"),
    ("'3': (Spawning Pool, A1)->(Train)->(Zergling)", "suspended"),
    ("'4': (Spawning Pool, A1)->(Research)->(Metabolic Boost)", "suspended"),
    ("'5': (Drone, A1)->(Build)->(Hatchery, A2)", "suspended"),
    ("'6': (Drone, A2)->(Build)->(Extractor, A2)", "suspended"),
    ("'7': (Hatchery, A1)->(Train)->(Queen)", "suspended"),
    ("'8': (Drone, A1)->(Build)->(Roach Warren)", "suspended"),
    ("'9': (Roach Warren, A1)->(Train)->(Roach)", "suspended"),
    ("'10': (Roach Warren, A1)->(Research)->(Roach Speed)", "rejected"),
    ("'11': (Drone, A1)->(Build)->(Evolution Chamber)", "dispatched"),
    # The A4 chamber already satisfies the player-wide prerequisite.
    ("'12': (Evolution Chamber, A1)->(Research)->(Missile Attacks)",
     "dispatched"),
    ("'13': (Hatchery, A1)->(Build)->(Lair)", "suspended"),
    ("'14': (Zergling, A1)->(Move)->(Opponent's expansions and map control)",
     "dispatched"),
    ("'15': (Hatchery, A1)->(Train)->(Overlord)", "dispatched"),
    ("'16': (Drone, A1)->(Build)->(Hatchery, A3)", "suspended"),
    ("'17': (Lair, A1)->(Build)->(Spire, A1)", "suspended"),
    ("'18': (Spire, A1)->(Research)->(Flyer Attacks)", "suspended"),
    ("'19': (Spire, A1)->(Train)->(Mutalisk)", "suspended"),
]

DEFENSE_PLAN = [
    ("'0': (Zerglings, A4)->(Reinforce)->(A4)", "dispatched"),
    ("'1': (Roaches, A4)->(Reinforce)->(A4)", "dispatched"),
    ("'2': (Evolution Chamber, A4)->(Research)->(Zerg upgrades)",
     "dispatched"),
    ("'3': (Larva, A4)->(Train)->(Zerglings)", "suspended"),
    ("'4': (Larva, A4)->(Train)->(Roaches)", "suspended"),
    ("'5': (Spine Crawlers, A4)->(Build)->(A4)", "suspended"),
    ("'6': (Spore Crawlers, A4)->(Build)->(A4)", "dispatched"),
    ("'7': (Larva, A4)->(Train)->(Hydralisks)", "suspended"),
    ("'8': (Overlords, A4)->(Coordinate)->(A4)", "dispatched"),
    ("'9': (Overlords, A4)->(Coordinate)->(B1)", "dispatched"),
    ("'10': (Overlords, A4)->(Coordinate)->(B2)", "dispatched"),
    ("'11': (Zerg units, A4)->(Launch counter-attack)->(Enemy base at B1)",
     "dispatched"),
    ("'12': (Zerg units, A4)->(Launch counter-attack)->(Enemy base at B2)",
     "dispatched"),
]

GROUPS = {
    "translator-examples": TRANSLATOR_EXAMPLES,
    "per-tag-listing": PER_TAG_LISTING,
    "opening-plan": OPENING_PLAN,
    "defense-plan": DEFENSE_PLAN,
}
