"""Report grammar, critical-event edges, and prompt golden files."""

from __future__ import annotations

import dataclasses
import random
from pathlib import Path

import pytest

import prompt_fixtures
from zergmind import perception
from zergmind.gamedata import load_game_data
from zergmind.mapmatrix import BaseId, render_prompt_matrix
from zergmind.reflexnet import (
    ATTACKING,
    FLEEING,
    GATHER_GAS,
    GATHER_MINERALS,
    IDLE,
    MOVING,
)
from zergmind.world import (
    TERRAN,
    ZERG,
    IntelRecord,
    ObservedBuilding,
    ObservedUnit,
    observe,
    starting_state,
)

GOLDEN = Path(__file__).parent / "golden"


def b(name: str) -> BaseId:
    return BaseId.parse(name)


# -- golden prompts ----------------------------------------------------------

def test_normal_prompt_matches_golden_bytes():
    expected = (GOLDEN / "overmind_normal_prompt.txt").read_bytes()
    assert prompt_fixtures.golden_normal_prompt().encode("utf-8") == expected


def test_critical_prompt_matches_golden_bytes():
    expected = (GOLDEN / "overmind_critical_prompt.txt").read_bytes()
    assert prompt_fixtures.golden_critical_prompt().encode("utf-8") == expected


def test_translation_prompt_matches_golden_bytes():
    expected = (GOLDEN / "translation_prompt.txt").read_bytes()
    assert prompt_fixtures.golden_translation_prompt().encode("utf-8") == expected


def test_prompt_templates_keep_verbatim_quirks():
    normal = prompt_fixtures.golden_normal_prompt()
    critical = prompt_fixtures.golden_critical_prompt()
    translation = prompt_fixtures.golden_translation_prompt()

    for text in (normal, critical):
        assert "Spawnling Pool" in text
        assert "‘0’: <IMMEDIATE_ACTION_TO_BE_EXECUTED_FIRST>," in text
        assert "4.1 Opponent's Units and Buildings" in text
        assert "4.1 Opponent's Tactical Plan" in text
        assert "opponent’s status you detected" in text

    assert "formulate 20 actionable" in normal
    assert "formulate many actionable" in critical
    assert "1. Current Stage of the Match;" in normal
    assert "1. Current Stage of the Match, but do not print it;" in critical
    assert "Important!!!" in critical
    assert "Important!!!" not in normal
    assert "destory our army." in critical

    assert "RESPONSE FROMAT:" in translation
    assert "makefileCopy json code" in translation
    assert "“Your current thoughts”" in translation
    assert "(Command Target)->(Action)->(Target)" in translation


def test_normal_prompt_renders_empty_memory_placeholder():
    assert "None (first round)." in prompt_fixtures.golden_normal_prompt()


def test_assemble_rejects_bad_modes_and_empty_inputs():
    _, report, matrix_text = prompt_fixtures.normal_inputs()
    with pytest.raises(ValueError):
        perception.assemble_overmind_prompt("calm", matrix_text, "", report)
    with pytest.raises(ValueError):
        perception.assemble_overmind_prompt("critical", matrix_text, "", report, [])
    with pytest.raises(ValueError, match="empty-plan"):
        perception.assemble_translation_prompt("")
    with pytest.raises(ValueError, match="empty-plan"):
        perception.assemble_translation_prompt("  \n ")


def test_no_placeholders_survive_assembly():
    for text in (
            prompt_fixtures.golden_normal_prompt(),
            prompt_fixtures.golden_critical_prompt(),
            prompt_fixtures.golden_translation_prompt()):
        assert "<pre_thoughts>" not in text
        assert "<cur_" not in text
        assert "<enemy_" not in text
        assert "<critical_battlefield_information>" not in text


def test_custom_matrix_text_is_substituted():
    _, report, _ = prompt_fixtures.normal_inputs()
    fake = "[[0, 0], [A1, B1]]"
    text = perception.assemble_overmind_prompt("normal", fake, "", report)
    assert fake in text
    assert "[[0, A6, B7, B3, B2]" not in text


# -- report grammar ----------------------------------------------------------

def test_report_lists_bases_in_ascending_order():
    state = starting_state()
    state.add_unit("Zergling", ZERG, b("B5"))
    state.add_unit("Zergling", ZERG, b("A4"))
    state.add_unit("Zergling", ZERG, b("A2"))
    report = perception.render_situation_report(observe(state, ZERG))
    lines = report.own_units_text.splitlines()
    assert [line.split(",")[0] for line in lines] == [
        "At point A1", "At point A2", "At point A4", "At point B5"]


def test_scouted_empty_base_reads_nothing_and_empty_section_is_bare():
    state = starting_state()
    report = perception.render_situation_report(observe(state, ZERG))
    assert report.enemy_units_text == "At point A1, there are: Nothing;"
    state.intel[ZERG].clear()
    # Without any intel the enemy sections collapse to a single word.
    stripped = perception.render_situation_report(dataclasses.replace(
        observe(state, ZERG), scouted=frozenset(),
        enemy_units=(), enemy_buildings=(), staleness={}))
    assert stripped.enemy_units_text == "Nothing"
    assert stripped.enemy_buildings_text == "Nothing"


def test_research_lines_end_with_commas():
    state = starting_state()
    state.research_done[ZERG].update({"Metabolic Boost", "Melee Attacks Level 1"})
    report = perception.render_situation_report(observe(state, ZERG))
    assert report.research_text == "Metabolic Boost,\nMelee Attacks Level 1,"


def test_queen_renders_one_inject_line_per_hall_and_rest_idle():
    state = starting_state()
    state.add_unit("Queen", ZERG, b("A1"), activity=IDLE)
    state.add_unit("Queen", ZERG, b("A1"), activity=IDLE)
    report = perception.render_situation_report(observe(state, ZERG))
    line = report.own_units_text
    assert "1 Queen constantly injecting eggs into Hatchery" in line
    assert "1 Queen are idling" in line


def test_queen_away_from_hall_just_idles():
    state = starting_state()
    state.add_unit("Queen", ZERG, b("A4"), activity=IDLE)
    report = perception.render_situation_report(observe(state, ZERG))
    assert "At point A4, there are: 1 Queen are idling;" in report.own_units_text
    assert "injecting" not in report.own_units_text.split("\n")[1]


def test_gas_line_names_the_extractor_by_index():
    state = starting_state()
    state.add_building("Extractor", ZERG, b("A1"), complete=True, gas_index=2)
    drone = state.add_unit("Drone", ZERG, b("A1"), activity=GATHER_GAS)
    drone.gas_index = 2
    report = perception.render_situation_report(observe(state, ZERG))
    assert "1 Drone are gathering gas in Extractor2" in report.own_units_text


def test_terran_buildings_use_display_names():
    state = starting_state()
    state.add_unit("Zergling", ZERG, b("B1"))
    state.tick += 1
    from zergmind.world import _record_intel
    _record_intel(state)
    report = perception.render_situation_report(observe(state, ZERG))
    assert "1 Command center" in report.enemy_buildings_text
    assert "12 SCV are gathering minerals in Command center" in report.enemy_units_text


def test_stale_intel_gets_a_last_seen_stamp_only_past_threshold():
    state = starting_state()
    base = b("B3")
    unit = ObservedUnit(900, "Marine", TERRAN, base, 45, IDLE, 0)
    for age, stamped in ((30, False), (31, True)):
        state.intel[ZERG][base] = IntelRecord(
            tick=state.tick - age, units=(unit,), buildings=())
        report = perception.render_situation_report(observe(state, ZERG))
        line = [ln for ln in report.enemy_units_text.splitlines()
                if ln.startswith("At point B3")][0]
        assert (f"(last seen {age}s ago)" in line) is stamped
    del state.intel[ZERG][base]


def test_incomplete_hall_does_not_host_mineral_or_inject_lines():
    state = starting_state()
    state.add_building("Hatchery", ZERG, b("A2"))  # still under construction
    state.add_unit("Drone", ZERG, b("A2"))
    state.add_unit("Queen", ZERG, b("A2"), activity=IDLE)
    report = perception.render_situation_report(observe(state, ZERG))
    a2 = [ln for ln in report.own_units_text.splitlines()
          if ln.startswith("At point A2")][0]
    assert "1 Drone are gathering minerals," in a2
    assert "injecting" not in a2
    assert "1 Queen are idling" in a2


# -- parse round trip --------------------------------------------------------

def test_parse_recovers_counts_from_random_states():
    rng = random.Random(77813)
    data = load_game_data()
    bases = [BaseId.parse(f"{side}{i}")
             for side in "AB" for i in range(1, 9)]
    fighters = ["Zergling", "Roach", "Hydralisk", "Overlord", "Mutalisk"]
    hall_kinds = ["Hatchery", "SpawningPool", "RoachWarren", "EvolutionChamber"]

    for _ in range(25):
        state = starting_state()
        for _ in range(rng.randrange(3, 8)):
            state.add_building(
                rng.choice(hall_kinds), ZERG, rng.choice(bases), complete=True)
        for _ in range(rng.randrange(5, 40)):
            base = rng.choice(bases)
            if rng.random() < 0.4:
                act = rng.choice([GATHER_MINERALS, GATHER_GAS, IDLE, MOVING])
                unit = state.add_unit("Drone", ZERG, base, activity=act)
                if act == GATHER_GAS:
                    unit.gas_index = rng.choice([1, 2])
            else:
                act = rng.choice([IDLE, MOVING, ATTACKING, FLEEING])
                state.add_unit(rng.choice(fighters), ZERG, base, activity=act)

        report = perception.render_situation_report(observe(state, ZERG))
        parsed = perception.parse_report_blocks(report.own_units_text)

        truth: dict[tuple[str, str, str], int] = {}
        for unit in state.units.values():
            if unit.owner != ZERG:
                continue
            act = unit.activity
            if act == GATHER_GAS:
                act = f"{GATHER_GAS}@{unit.gas_index}"
            key = (str(unit.location), unit.kind, act)
            truth[key] = truth.get(key, 0) + 1
        assert parsed == truth

        parsed_buildings = perception.parse_building_blocks(
            report.own_buildings_text)
        truth_b: dict[tuple[str, str], int] = {}
        for building in state.buildings.values():
            if building.owner != ZERG:
                continue
            key = (str(building.location), building.kind)
            truth_b[key] = truth_b.get(key, 0) + 1
        assert parsed_buildings == truth_b
        assert data.resolve_kind("Siege Tank") == "SiegeTank"


def test_parse_tolerates_stale_stamp_suffix():
    text = ("At point B1, there are: 8 SCV are gathering minerals in "
            "Command center, 2 Marine are idling; (last seen 45s ago)")
    parsed = perception.parse_report_blocks(text)
    assert parsed == {
        ("B1", "SCV", GATHER_MINERALS): 8,
        ("B1", "Marine", IDLE): 2,
    }


# -- critical events ---------------------------------------------------------

def _with_enemies(state, base, kind, count, activity=IDLE):
    for _ in range(count):
        state.add_unit(kind, TERRAN, b(base), activity=activity)


def test_armed_enemy_at_own_hall_base_is_under_attack():
    state = starting_state()
    _with_enemies(state, "A1", "Marine", 1)
    events = perception.detect_critical_events(observe(state, ZERG), None)
    assert [e.kind for e in events] == [perception.UNDER_ATTACK]
    assert str(events[0].location) == "A1"
    assert events[0].evidence == (("Marine", 1),)


def test_group_thresholds_split_detected_and_assembling():
    state = starting_state()
    state.add_unit("Zergling", ZERG, b("A2"))
    state.add_unit("Zergling", ZERG, b("B4"))
    _with_enemies(state, "A2", "Marine", 6)
    _with_enemies(state, "B4", "Marine", 6)
    events = perception.detect_critical_events(observe(state, ZERG), None)
    kinds = {str(e.location): e.kind for e in events}
    assert kinds == {
        "A2": perception.ARMY_DETECTED,
        "B4": perception.ASSEMBLING,
    }


def test_small_or_unarmed_groups_stay_quiet():
    state = starting_state()
    state.add_unit("Zergling", ZERG, b("B4"))
    state.add_unit("Zergling", ZERG, b("B5"))
    _with_enemies(state, "B4", "Marine", 5)
    _with_enemies(state, "B5", "Medivac", 8)
    assert perception.detect_critical_events(observe(state, ZERG), None) == []


def test_events_fire_on_rising_edge_only():
    state = starting_state()
    _with_enemies(state, "A1", "Marine", 2)
    first = observe(state, ZERG)
    assert len(perception.detect_critical_events(first, None)) == 1
    # Same condition next round: silent.
    assert perception.detect_critical_events(observe(state, ZERG), first) == []
    # A second condition appears elsewhere: only that one fires.
    state.add_unit("Zergling", ZERG, b("B4"))
    _with_enemies(state, "B4", "Marine", 7)
    events = perception.detect_critical_events(observe(state, ZERG), first)
    assert [(e.kind, str(e.location)) for e in events] == [
        (perception.ASSEMBLING, "B4")]


def test_detector_prefers_overlord_then_fighters_then_workers():
    state = starting_state()
    _with_enemies(state, "A1", "Marine", 1)
    data_obs = observe(state, ZERG)
    event = perception.detect_critical_events(data_obs, None)[0]
    assert event.detector == "Overlord"

    state2 = starting_state()
    for unit in list(state2.units.values()):
        if unit.kind == "Overlord":
            del state2.units[unit.id]
    state2.add_unit("Zergling", ZERG, b("A1"))
    _with_enemies(state2, "A1", "Marine", 1)
    event = perception.detect_critical_events(observe(state2, ZERG), None)[0]
    assert event.detector == "Zergling"

    state3 = starting_state()
    for unit in list(state3.units.values()):
        if unit.kind == "Overlord":
            del state3.units[unit.id]
    _with_enemies(state3, "A1", "Marine", 1)
    event = perception.detect_critical_events(observe(state3, ZERG), None)[0]
    assert event.detector == "Drone"


def test_critical_block_wording():
    state = starting_state()
    state.add_unit("Zergling", ZERG, b("B4"))
    _with_enemies(state, "A1", "Marine", 3)
    _with_enemies(state, "B4", "Marine", 6)
    events = perception.detect_critical_events(observe(state, ZERG), None)
    block = perception.render_critical_block(events)
    assert block.splitlines() == [
        "Important!!!",
        "Overlord have detected a group of Terran army is ready to attack "
        "the A1 and destory our army.",
        "Zergling have detected a group of Terran army is assembling at B4.",
    ]
