"""Planning loop: plan parsing, memory, dedup, brains, and latency."""

from __future__ import annotations

import http.server
import json
import random
import threading
from pathlib import Path
from unittest import mock

import pytest

import prompt_fixtures
from zergmind import overmind as om
from zergmind import perception
from zergmind.mapmatrix import BaseId, build_default_matrix, render_prompt_matrix
from zergmind.world import ZERG, observe, starting_state

REPLAY_PATH = Path(__file__).parent / "replays" / "opening_defense.json"


def starting_report() -> perception.SituationReport:
    return perception.render_situation_report(observe(starting_state(), ZERG))


def matrix_text() -> str:
    return render_prompt_matrix(build_default_matrix())


# -- plan parsing ------------------------------------------------------------

def test_parse_action_plan_on_recorded_opening_response():
    responses = json.loads(REPLAY_PATH.read_text(encoding="utf-8"))
    plan = om.parse_action_plan(responses[0])
    assert len(plan.entries) == 20
    assert plan.entries[0] == "Send an Overlord to scout the opponent's base B1"
    assert plan.entries[10] == "Upgrade Roach speed at the Roach Warren A1"
    assert plan.entries[19].endswith("harassment and map control.")
    assert plan.keyed()["0"] == plan.entries[0]


def test_parse_action_plan_prose_only_is_an_error():
    with pytest.raises(om.OvermindError) as err:
        om.parse_action_plan("All quiet on the western front.\nNo orders today.")
    assert err.value.kind == "unparseable-plan"


def test_parse_action_plan_renumbers_sparse_keys_densely():
    plan = om.parse_action_plan("{\n'0': first,\n'2': second,\n'3': third\n}")
    assert plan.entries == ("first", "second", "third")


def test_parse_action_plan_takes_the_last_keyed_block():
    text = ("Example:\n{\n'0': not this one\n}\n"
            "Final answer:\n{\n‘0’: \"take this\",\n‘1’: 'and this'\n}")
    plan = om.parse_action_plan(text)
    assert plan.entries == ("take this", "and this")


def test_parse_action_plan_keeps_commas_inside_values():
    responses = json.loads(REPLAY_PATH.read_text(encoding="utf-8"))
    plan = om.parse_action_plan(responses[2])
    assert len(plan.entries) == 7
    assert plan.entries[6] == ("If the defense is successful, launch a "
                               "counter-attack on the enemy base at B1 or B2")


# -- memory ------------------------------------------------------------------

def test_memory_capacity_evicts_oldest():
    memory = om.StrategyMemory(capacity=3)
    for i in range(4):
        om.record_round(memory, om.ActionPlan((f"plan {i}",), issued_tick=i),
                        ())
    assert [plan.entries[0] for _t, plan, _c in memory.rounds] == [
        "plan 1", "plan 2", "plan 3"]
    assert om.StrategyMemory().capacity == 1


def test_render_memory_text_matches_prompt_fixture_block():
    memory = om.StrategyMemory()
    om.record_round(memory, om.ActionPlan((
        "Build additional Drones in Hatchery A1",
        "Train Zerglings from the Spawning Pool A1")), ())
    assert om.render_memory_text(memory) == prompt_fixtures.MEMORY_TEXT
    assert om.render_memory_text(om.StrategyMemory()) == ""


def test_render_memory_text_contains_every_retained_decision():
    rng = random.Random(5521)
    memory = om.StrategyMemory(capacity=3)
    decisions = [
        f"Train {rng.randrange(1, 9)} Zerglings at A{rng.randrange(1, 9)}"
        for _ in range(9)]
    for i in range(0, 9, 3):
        om.record_round(memory, om.ActionPlan(tuple(decisions[i:i + 3])), ())
    rendered = om.render_memory_text(memory)
    for text in decisions:
        assert text in rendered


# -- dedup -------------------------------------------------------------------

def test_dedup_drops_remembered_one_shots_and_keeps_production():
    memory = om.StrategyMemory()
    om.record_round(memory, om.ActionPlan((
        "Build a Spawning Pool in Hatchery A1",
        "Research Metabolic Boost upgrade at the Spawning Pool A1",
        "Train Zerglings from the Spawning Pool A1")), ())
    plan = om.ActionPlan((
        "Build a Spawning Pool in Hatchery A1",
        "Research Metabolic Boost upgrade at the Spawning Pool A1",
        "Train Zerglings from the Spawning Pool A1",
        "Send an Overlord to scout the opponent's base B1"))
    filtered = om.dedup_filter(plan, memory)
    assert filtered.entries == (
        "Train Zerglings from the Spawning Pool A1",
        "Send an Overlord to scout the opponent's base B1")
    assert om.dedup_filter(filtered, memory) == filtered


def test_dedup_understands_command_notation_and_empty_memory():
    memory = om.StrategyMemory()
    om.record_round(memory, om.ActionPlan((
        "(Drone, A1)->(Build)->(Spawning Pool, A1)",
        "(Larva, A1)->(Train)->(Zergling)")), ())
    plan = om.ActionPlan((
        "(Drone, A1)->(Build)->(Spawning Pool, A1)",
        "(Larva, A1)->(Train)->(Zergling)"))
    assert om.dedup_filter(plan, memory).entries == (
        "(Larva, A1)->(Train)->(Zergling)",)
    assert om.dedup_filter(plan, om.StrategyMemory()) == plan


# -- brain ports and latency -------------------------------------------------

def test_request_plan_latency_and_busy():
    brain = om.scripted_brain("rush", latency_ticks=60)
    port = om.BrainPort(brain)
    pending = om.request_plan(port, _normal_prompt(), 100)
    assert pending.ready_tick == 160
    with pytest.raises(om.OvermindError) as err:
        om.request_plan(port, _normal_prompt(), 101)
    assert err.value.kind == "busy"
    assert not port.ready(159)
    with pytest.raises(om.OvermindError):
        port.collect(159)
    assert port.ready(160)
    done = port.collect(160)
    assert done.mode == om.NORMAL
    assert port.pending is None


def _normal_prompt() -> str:
    return perception.assemble_overmind_prompt(
        om.NORMAL, matrix_text(), "", starting_report())


@pytest.mark.parametrize("latency,per_minute", [(10, 6), (20, 3)])
def test_plans_per_simulated_minute(latency, per_minute):
    planner = om.Planner(om.scripted_brain("rush", latency_ticks=latency),
                         matrix_text())
    report = starting_report()
    for tick in range(0, 61):
        planner.step(report, tick)
    assert planner.rounds_completed == per_minute


def test_time_to_first_commands_is_monotone_in_latency():
    firsts = {}
    for latency in (10, 20):
        planner = om.Planner(om.scripted_brain("rush", latency_ticks=latency),
                             matrix_text())
        report = starting_report()
        for tick in range(0, 61):
            if planner.step(report, tick):
                firsts[latency] = tick
                break
    assert firsts[10] == 10
    assert firsts[20] == 20


def test_critical_events_switch_the_next_request_template():
    planner = om.Planner(om.scripted_brain("rush", latency_ticks=10),
                         matrix_text())
    report = starting_report()
    planner.step(report, 0)
    event = perception.CriticalEvent(
        kind=perception.UNDER_ATTACK, location=BaseId.parse("A1"),
        evidence=(("Marine", 7),), detector="Overlord")
    planner.note_events([event])
    planner.note_events([event])  # duplicates collapse
    for tick in range(1, 11):
        planner.step(report, tick)
    requests = [r for r in planner.log if r["event"] == "request"
                and r["mode"] != om.TRANSLATION]
    assert [r["mode"] for r in requests[:2]] == [om.NORMAL, om.CRITICAL]
    # The pending normal round still completed; nothing was cancelled.
    assert planner.rounds_completed == 1


# -- scripted brains ---------------------------------------------------------

def test_scripted_brain_policies_are_deterministic_and_distinct():
    prompt = _normal_prompt()
    for policy in ("rush", "macro", "turtle"):
        brain = om.scripted_brain(policy)
        assert brain.respond(prompt) == brain.respond(prompt)
    with pytest.raises(om.OvermindError) as err:
        om.scripted_brain("cheese")
    assert err.value.kind == "unknown-policy"


def test_rush_policy_opens_with_pool_before_attacking():
    brain = om.scripted_brain("rush")
    plan = om.parse_action_plan(brain.respond(_normal_prompt()))
    joined = "\n".join(plan.entries)
    assert "(Build)->(Spawning Pool" in joined
    assert "(Attack)" not in joined  # nothing to attack with yet


def test_scripted_brain_translation_is_identity_over_thoughts():
    brain = om.scripted_brain("rush")
    # Scripted policies think directly in command notation; translation
    # simply hands those lines back.
    thoughts = ("'0': (Larva, A1)->(Train)->(Drone),\n"
                "'1': (Zerg units, A1)->(Attack)->(B1)")
    prompt = perception.assemble_translation_prompt(thoughts)
    assert om.translation_commands(brain.respond(prompt)) == [
        "'0': (Larva, A1)->(Train)->(Drone),",
        "'1': (Zerg units, A1)->(Attack)->(B1)"]
    # Natural-language thoughts come back verbatim inside the braces.
    echoed = brain.respond(perception.assemble_translation_prompt(
        prompt_fixtures.THOUGHTS_TEXT))
    assert echoed == "{\n" + prompt_fixtures.THOUGHTS_TEXT + "\n}"


def test_planner_round_trip_produces_dispatchable_lines():
    planner = om.Planner(om.scripted_brain("rush", latency_ticks=1),
                         matrix_text())
    report = starting_report()
    commands: list[str] = []
    for tick in range(0, 3):
        commands.extend(planner.step(report, tick))
    assert any("(Build)->(Spawning Pool" in line for line in commands)
    from zergmind.command_center import parse_command
    for line in commands:
        parse_command(line)  # must not raise


# -- replay brains -----------------------------------------------------------

def test_replay_brain_runs_recorded_rounds_then_repeats_last():
    brain = om.ReplayBrain.from_file(REPLAY_PATH, latency_ticks=1)
    planner = om.Planner(brain, matrix_text())
    report = starting_report()
    rounds: list[list[str]] = []
    for tick in range(0, 3):
        got = planner.step(report, tick)
        if got:
            rounds.append(got)
    assert len(rounds) == 2
    assert any("(Overlord, A1)->(Move)->(B1)" in line for line in rounds[0])
    assert any("(Launch counter-attack)" in line for line in rounds[1])
    # Exhausted transcripts repeat their last response.
    assert brain.respond("anything") == brain.respond("anything")


def test_replay_brain_rejects_bad_files(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"not": "a list"}), encoding="utf-8")
    with pytest.raises(om.OvermindError) as err:
        om.ReplayBrain.from_file(path)
    assert err.value.kind == "brain-unavailable"


# -- remote brains -----------------------------------------------------------

class _ChatHandler(http.server.BaseHTTPRequestHandler):
    plan_text = "{\n'0': (Larva, A1)->(Train)->(Drone)\n}"

    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        body = json.loads(self.rfile.read(length))
        assert body["messages"][0]["role"] == "user"
        payload = json.dumps(
            {"choices": [{"message": {"content": self.plan_text}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def chat_server():
    server = http.server.HTTPServer(("127.0.0.1", 0), _ChatHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    finally:
        server.shutdown()
        thread.join()


def test_remote_brain_round_trip(chat_server):
    brain = om.RemoteBrain(chat_server, latency_ticks=5)
    text = brain.respond("hello")
    plan = om.parse_action_plan(text)
    assert plan.entries == ("(Larva, A1)->(Train)->(Drone)",)
    assert brain.latency_ticks == 5


def test_remote_brain_measures_wall_latency_in_ticks(chat_server):
    fake_clock = mock.Mock(side_effect=[100.0, 112.0])
    brain = om.RemoteBrain(chat_server, ticks_per_second=1.0,
                           clock=fake_clock)
    brain.respond("hello")
    assert brain.latency_ticks == 12


def test_remote_brain_unreachable_is_brain_unavailable():
    brain = om.RemoteBrain("http://127.0.0.1:9/nope", timeout=0.2)
    with pytest.raises(om.OvermindError) as err:
        brain.respond("hello")
    assert err.value.kind == "brain-unavailable"
