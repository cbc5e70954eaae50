"""Strategic planning loop: plan, remember, translate.

A pluggable "brain" (text in, text out, with a declared inference latency)
produces an ordered action plan; a bounded memory of previous rounds feeds
the next prompt and filters repeated one-shot decisions; a second brain call
translates the surviving decisions into command notation.  Responses are
never consumed before their ready tick, so the simulation keeps advancing
while a request is in flight.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import requests

from . import perception
from .command_center import CommandError, parse_command
from .gamedata import load_game_data

LATENCY_PROFILES = {"gpt-3.5": 10, "gpt-4": 20}

NORMAL = "normal"
CRITICAL = "critical"
TRANSLATION = "translation"

_TRANSLATION_MARKER = "RESPONSE FROMAT:"
_THOUGHTS_HEADER = "Your current thoughts:"

_UNIT_HEADER = "Your current Units consists of:"
_BUILDING_HEADER = "Your current Buildings consists of:"
_RESEARCH_HEADER = "Your Zerg has developed these technological research:"
_ENEMY_UNIT_HEADER = "You have detected enemy units in:"
_ENEMY_BUILDING_HEADER = "You have detected enemy buildings in:"


class OvermindError(RuntimeError):
    """Planner fault with a stable machine-readable ``kind``."""

    def __init__(self, kind: str, detail: str = "") -> None:
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail


# ---------------------------------------------------------------------------
# plans and memory
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ActionPlan:
    """Ordered decisions; index 0 is the most immediate action."""

    entries: tuple[str, ...]
    issued_tick: int = 0

    def keyed(self) -> dict[str, str]:
        return {str(i): text for i, text in enumerate(self.entries)}


@dataclass(slots=True)
class StrategyMemory:
    """Bounded chronological record of (tick, plan, commands) rounds."""

    capacity: int = 1
    rounds: list[tuple[int, ActionPlan, tuple[str, ...]]] = field(
        default_factory=list)


def record_round(memory: StrategyMemory, plan: ActionPlan,
                 commands: tuple[str, ...]) -> StrategyMemory:
    memory.rounds.append((plan.issued_tick, plan, tuple(commands)))
    while len(memory.rounds) > memory.capacity:
        memory.rounds.pop(0)
    return memory


def render_memory_text(memory: StrategyMemory) -> str:
    """Previous-round decisions as braced, order-keyed text ("" when empty)."""
    blocks = []
    for _tick, plan, _commands in memory.rounds:
        body = ",\n".join(
            f"'{i}': {text}" for i, text in enumerate(plan.entries))
        blocks.append("{\n" + body + "\n}")
    return "\n".join(blocks)


_ENTRY_KEY = re.compile(
    r"^[ \t]*['‘“\"]?(\d+)['’”\"]?[ \t]*:", re.M)
_QUOTE_PAIRS = {"'": "'", '"': '"', "‘": "’", "“": "”"}


def _clean_entry_value(raw: str) -> str:
    text = raw.strip()
    if text.endswith(","):
        text = text[:-1].rstrip()
    if len(text) >= 2 and _QUOTE_PAIRS.get(text[0]) == text[-1]:
        text = text[1:-1].strip()
    return text


def _brace_blocks(text: str) -> list[str]:
    """Top-level ``{...}`` block contents, in order of appearance."""
    blocks = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "{":
            if depth == 0:
                start = i + 1
            depth += 1
        elif ch == "}" and depth:
            depth -= 1
            if depth == 0:
                blocks.append(text[start:i])
    return blocks


def _block_entries(block: str) -> list[str]:
    matches = list(_ENTRY_KEY.finditer(block))
    entries = []
    for m, nxt in zip(matches, matches[1:] + [None]):
        end = nxt.start() if nxt is not None else len(block)
        value = _clean_entry_value(block[m.end():end])
        if value:
            entries.append(value)
    return entries


def parse_action_plan(response: str, issued_tick: int = 0) -> ActionPlan:
    """Extract the last order-keyed map in a response, keys renumbered dense.

    Raises ``OvermindError("unparseable-plan")`` when no brace-delimited
    block with at least one ``'N':`` entry exists.
    """
    best: list[str] | None = None
    for block in _brace_blocks(response):
        entries = _block_entries(block)
        if entries:
            best = entries
    if best is None:
        raise OvermindError("unparseable-plan")
    return ActionPlan(entries=tuple(best), issued_tick=issued_tick)


def render_plan_entries(plan: ActionPlan) -> str:
    """Decisions as bare ``'N': text`` lines for the translation prompt."""
    return ",\n".join(f"'{i}': {text}" for i, text in enumerate(plan.entries))


# ---------------------------------------------------------------------------
# one-shot deduplication
# ---------------------------------------------------------------------------

def _normalize_decision(text: str) -> str:
    return " ".join(text.casefold().split()).rstrip(".,")


def _decision_verb(text: str) -> str | None:
    """Canonical verb of a decision, from notation or leading words."""
    try:
        return parse_command(text).verb
    except CommandError:
        pass
    data = load_game_data()
    words = re.findall(r"[a-z-]+", text.casefold())
    for width in (2, 1):
        if len(words) >= width:
            phrase = " ".join(words[:width])
            verb = data.verb_synonyms.get(phrase)
            if verb:
                return verb
    return None


def dedup_filter(plan: ActionPlan, memory: StrategyMemory) -> ActionPlan:
    """Drop one-shot decisions already issued in a remembered round."""
    data = load_game_data()
    seen = {
        _normalize_decision(text)
        for _tick, old, _commands in memory.rounds
        for text in old.entries
    }
    kept = []
    for text in plan.entries:
        verb = _decision_verb(text)
        if (verb in data.one_shot_verbs
                and _normalize_decision(text) in seen):
            continue
        kept.append(text)
    return ActionPlan(entries=tuple(kept), issued_tick=plan.issued_tick)


# ---------------------------------------------------------------------------
# brains
# ---------------------------------------------------------------------------

class BrainAdapter(Protocol):
    """Text-in/text-out behavior with a declared inference latency."""

    latency_ticks: int
    name: str

    def respond(self, prompt: str) -> str: ...


@dataclass(slots=True)
class PendingRequest:
    prompt: str
    mode: str
    issued_tick: int
    ready_tick: int
    response: str


class BrainPort:
    """One-deep tick-stamped mailbox in front of a brain.

    The behavior runs when the request is filed (scripted brains are pure,
    remote ones block), but the response only becomes consumable once the
    brain's latency has elapsed in simulated time.
    """

    def __init__(self, brain: BrainAdapter) -> None:
        self.brain = brain
        self.pending: PendingRequest | None = None

    def request(self, prompt: str, now_tick: int,
                mode: str = NORMAL) -> PendingRequest:
        if self.pending is not None:
            raise OvermindError("busy")
        response = self.brain.respond(prompt)
        self.pending = PendingRequest(
            prompt=prompt, mode=mode, issued_tick=now_tick,
            ready_tick=now_tick + max(0, self.brain.latency_ticks),
            response=response)
        return self.pending

    def ready(self, now_tick: int) -> bool:
        return self.pending is not None and now_tick >= self.pending.ready_tick

    def collect(self, now_tick: int) -> PendingRequest:
        if self.pending is None:
            raise OvermindError("not-ready", "no outstanding request")
        if now_tick < self.pending.ready_tick:
            raise OvermindError(
                "not-ready", f"ready at {self.pending.ready_tick}")
        done = self.pending
        self.pending = None
        return done


def request_plan(port: BrainPort, prompt: str, now_tick: int,
                 mode: str = NORMAL) -> PendingRequest:
    """File a planning request; errors with "busy" while one is in flight."""
    return port.request(prompt, now_tick, mode)


# ---------------------------------------------------------------------------
# prompt-side view used by scripted policies
# ---------------------------------------------------------------------------

def _block_after(prompt: str, header: str) -> str:
    at = prompt.find(header)
    if at < 0:
        return ""
    open_at = prompt.find("{", at)
    if open_at < 0:
        return ""
    depth = 0
    for i in range(open_at, len(prompt)):
        if prompt[i] == "{":
            depth += 1
        elif prompt[i] == "}":
            depth -= 1
            if depth == 0:
                return prompt[open_at + 1:i].strip("\n")
    return ""


@dataclass(frozen=True, slots=True)
class PromptView:
    """Battle facts a scripted policy recovers from the prompt text alone."""

    units: dict[tuple[str, str, str], int]
    buildings: dict[tuple[str, str], int]
    research: tuple[str, ...]
    enemy_units: dict[tuple[str, str, str], int]
    enemy_buildings: dict[tuple[str, str], int]
    critical: bool

    @classmethod
    def from_prompt(cls, prompt: str) -> PromptView:
        research = tuple(
            line.strip().rstrip(",")
            for line in _block_after(prompt, _RESEARCH_HEADER).splitlines()
            if line.strip() and line.strip() != "Nothing")
        return cls(
            units=perception.parse_report_blocks(
                _block_after(prompt, _UNIT_HEADER)),
            buildings=perception.parse_building_blocks(
                _block_after(prompt, _BUILDING_HEADER)),
            research=research,
            enemy_units=perception.parse_report_blocks(
                _block_after(prompt, _ENEMY_UNIT_HEADER)),
            enemy_buildings=perception.parse_building_blocks(
                _block_after(prompt, _ENEMY_BUILDING_HEADER)),
            critical="Important!!!" in prompt,
        )

    def count(self, kind: str, base: str | None = None,
              activity: str | None = None) -> int:
        return sum(
            n for (b, k, act), n in self.units.items()
            if k == kind and (base is None or b == base)
            and (activity is None or act.startswith(activity)))

    def building_count(self, kind: str, base: str | None = None) -> int:
        return sum(
            n for (b, k), n in self.buildings.items()
            if k == kind and (base is None or b == base))

    def hall_bases(self) -> list[str]:
        data = load_game_data()
        bases = {
            b for (b, k), _n in self.buildings.items()
            if data.buildings[k].townhall}
        return sorted(bases)

    def supply_guess(self) -> tuple[float, int]:
        """(used, cap) estimated from visible units and buildings."""
        data = load_game_data()
        used = 0.0
        cap = 0
        for (_b, kind, _act), n in self.units.items():
            spec = data.units.get(kind)
            if spec is not None:
                used += n * spec.supply
                cap += n * spec.supply_provided
        for (_b, kind), n in self.buildings.items():
            spec = data.buildings.get(kind)
            if spec is not None:
                cap += n * spec.supply_provided
        return used, cap


# ---------------------------------------------------------------------------
# scripted brains
# ---------------------------------------------------------------------------

def _echo_thoughts(prompt: str) -> str:
    """Identity translation: return the numbered thoughts as the plan map."""
    body = _block_after(prompt, _THOUGHTS_HEADER)
    return "{\n" + body + "\n}"


def _render_plan_response(decisions: list[str]) -> str:
    if not decisions:
        return "{\n}"
    body = ",\n".join(f"'{i}': {text}" for i, text in enumerate(decisions))
    return "{\n" + body + "\n}"


def translation_commands(response: str) -> list[str]:
    """Command lines out of a translated response (one per ``->`` line)."""
    lines = []
    for raw in response.splitlines():
        line = raw.strip()
        if "->" in line and not line.startswith("//"):
            lines.append(line)
    return lines


def _rush_policy(view: PromptView) -> list[str]:
    """Speedling flood: pool and gas fast, stack hatcheries for larva
    throughput, then attack in large waves."""
    home = view.hall_bases()[0] if view.hall_bases() else "A1"
    plan: list[str] = []
    drones = view.count("Drone")
    lings_home = view.count("Zergling", base=home)
    used, cap = view.supply_guess()
    pool = view.building_count("SpawningPool") > 0
    halls_home = view.building_count("Hatchery", home)
    queens = view.count("Queen")

    # One round of production eats roughly a batch of lings plus drones;
    # train enough Overlords to stay ahead of that.
    planned = 6 + 4 * max(halls_home, 1)
    if cap < 200 and used + planned >= cap:
        deficit = int(used) + planned - cap
        plan.extend(
            [f"(Larva, {home})->(Train)->(Overlord)"]
            * min(3, max(1, -(-deficit // 8))))
    if not pool:
        plan.append(f"(Drone, {home})->(Build)->(Spawning Pool, {home})")
    if view.critical:
        # Reflexes already fight; fold every idle soldier into the defense.
        plan.append(f"(Zerg units, {home})->(Move)->({home})")
    if drones < 16:
        plan.extend([f"(Larva, {home})->(Train)->(Drone)"] * 2)
    if pool and view.building_count("Extractor", home) < 1:
        plan.append(f"(Drone, {home})->(Build)->(Extractor, {home})")
    elif pool and view.count("Drone", base=home, activity="gathering-gas") < 3:
        plan.append(f"(Drone, {home})->(Gather gas)->(Extractor1, {home})")
    if pool and drones >= 12 and halls_home < 3:
        # Extra hatcheries at home are pure larva throughput.
        plan.append(f"(Drone, {home})->(Build)->(Hatchery, {home})")
    if pool and queens < min(halls_home + 1, 3):
        plan.append(f"(Hatchery, {home})->(Train)->(Queen)")
    if pool and "Metabolic Boost" not in view.research:
        plan.append(f"(Spawning Pool, {home})->(Research)->(Metabolic Boost)")
    if pool:
        plan.extend(
            [f"(Larva, {home})->(Train)->(Zergling)"] * (4 * max(halls_home, 1)))
    if lings_home >= 20:
        plan.append(f"(Zerg units, {home})->(Attack)->(B1)")
    return plan


def _macro_policy(view: PromptView) -> list[str]:
    """Two-base economy into upgraded Roach/Zergling timing."""
    halls = view.hall_bases()
    home = halls[0] if halls else "A1"
    plan: list[str] = []
    drones = view.count("Drone")
    used, cap = view.supply_guess()
    pool = view.building_count("SpawningPool") > 0
    chamber = view.building_count("EvolutionChamber") > 0
    warren = view.building_count("RoachWarren") > 0

    if used + 6 >= cap and cap < 200:
        plan.append(f"(Larva, {home})->(Train)->(Overlord)")
    if not pool:
        plan.append(f"(Drone, {home})->(Build)->(Spawning Pool, {home})")
    if drones >= 14 and len(halls) < 2:
        plan.append(f"(Drone, {home})->(Build)->(Hatchery, A2)")
    if view.building_count("Extractor", home) < 1:
        plan.append(f"(Drone, {home})->(Build)->(Extractor, {home})")
    elif view.count("Drone", base=home, activity="gathering-gas") < 3:
        plan.append(f"(Drone, {home})->(Gather gas)->(Extractor1, {home})")
    if drones < 22:
        plan.extend([f"(Larva, {home})->(Train)->(Drone)"] * 2)
    if pool and not chamber:
        plan.append(f"(Drone, {home})->(Build)->(Evolution Chamber, {home})")
    if pool and not warren:
        plan.append(f"(Drone, {home})->(Build)->(Roach Warren, {home})")
    if pool and view.count("Queen") < len(halls):
        plan.append(f"(Hatchery, {home})->(Train)->(Queen)")
    if chamber and "Missile Attacks Level 1" not in view.research:
        plan.append(
            f"(Evolution Chamber, {home})->(Research)->(Missile Attacks Level 1)")
    if warren:
        plan.extend([f"(Larva, {home})->(Train)->(Roach)"] * 3)
    if pool:
        plan.extend([f"(Larva, {home})->(Train)->(Zergling)"] * 3)
    army = view.count("Roach", base=home) * 2 + view.count("Zergling", base=home)
    if army >= 24:
        plan.append(f"(Zerg units, {home})->(Attack)->(B1)")
    return plan


def _turtle_policy(view: PromptView) -> list[str]:
    """Static defense first, upgrades second, attacks only when maxed out."""
    home = view.hall_bases()[0] if view.hall_bases() else "A1"
    plan: list[str] = []
    drones = view.count("Drone")
    used, cap = view.supply_guess()
    pool = view.building_count("SpawningPool") > 0
    chamber = view.building_count("EvolutionChamber") > 0

    if used + 4 >= cap and cap < 200:
        plan.append(f"(Larva, {home})->(Train)->(Overlord)")
    if not pool:
        plan.append(f"(Drone, {home})->(Build)->(Spawning Pool, {home})")
    if pool and not chamber:
        plan.append(f"(Drone, {home})->(Build)->(Evolution Chamber, {home})")
    if pool and view.building_count("SpineCrawler", home) < 2:
        plan.append(f"(Drone, {home})->(Build)->(Spine Crawler, {home})")
    if chamber and view.building_count("SporeCrawler", home) < 1:
        plan.append(f"(Drone, {home})->(Build)->(Spore Crawler, {home})")
    if drones < 16:
        plan.extend([f"(Larva, {home})->(Train)->(Drone)"] * 2)
    if chamber and "Ground Carapace Level 1" not in view.research:
        plan.append(
            f"(Evolution Chamber, {home})->(Research)->(Ground Carapace Level 1)")
    if pool:
        plan.extend([f"(Larva, {home})->(Train)->(Zergling)"] * 3)
    if view.count("Zergling", base=home) >= 20:
        plan.append(f"(Zerg units, {home})->(Attack)->(B1)")
    return plan


_POLICIES: dict[str, Callable[[PromptView], list[str]]] = {
    "rush": _rush_policy,
    "macro": _macro_policy,
    "turtle": _turtle_policy,
}


@dataclass(slots=True)
class ScriptedBrain:
    """Deterministic brain driving a policy over the parsed prompt text."""

    policy: Callable[[PromptView], list[str]]
    latency_ticks: int = LATENCY_PROFILES["gpt-3.5"]
    name: str = "scripted"

    def respond(self, prompt: str) -> str:
        if _TRANSLATION_MARKER in prompt:
            return _echo_thoughts(prompt)
        return _render_plan_response(self.policy(PromptView.from_prompt(prompt)))


class ReplayBrain:
    """Replays recorded responses in order, repeating the last on exhaustion."""

    def __init__(self, responses: list[str],
                 latency_ticks: int = LATENCY_PROFILES["gpt-3.5"],
                 name: str = "replay") -> None:
        if not responses:
            raise OvermindError("brain-unavailable", "empty transcript")
        self.responses = list(responses)
        self.latency_ticks = latency_ticks
        self.name = name
        self._cursor = 0

    @classmethod
    def from_file(cls, path: str | Path,
                  latency_ticks: int = LATENCY_PROFILES["gpt-3.5"]) -> ReplayBrain:
        responses = json.loads(Path(path).read_text(encoding="utf-8"))
        if (not isinstance(responses, list)
                or not all(isinstance(r, str) for r in responses)):
            raise OvermindError(
                "brain-unavailable", f"{path}: expected a JSON array of strings")
        return cls(responses, latency_ticks=latency_ticks,
                   name=f"replay:{Path(path).name}")

    def respond(self, prompt: str) -> str:
        text = self.responses[min(self._cursor, len(self.responses) - 1)]
        self._cursor += 1
        return text


class RemoteBrain:
    """Chat-completion HTTP client; wall latency converts to ticks."""

    def __init__(self, endpoint: str, model: str = "gpt-3.5-turbo",
                 timeout: float = 30.0, ticks_per_second: float = 1.0,
                 latency_ticks: int | None = None,
                 clock: Callable[[], float] = time.monotonic) -> None:
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.ticks_per_second = ticks_per_second
        self._fixed_latency = latency_ticks
        self.latency_ticks = latency_ticks if latency_ticks is not None else 0
        self.clock = clock
        self.name = f"remote:{model}"

    def respond(self, prompt: str) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        start = self.clock()
        try:
            reply = requests.post(self.endpoint, json=body,
                                  timeout=self.timeout)
            reply.raise_for_status()
            content = reply.json()["choices"][0]["message"]["content"]
        except (requests.RequestException, KeyError, IndexError,
                TypeError, ValueError) as err:
            raise OvermindError("brain-unavailable", str(err)) from None
        if self._fixed_latency is None:
            elapsed = self.clock() - start
            self.latency_ticks = max(0, round(elapsed * self.ticks_per_second))
        return content


def scripted_brain(policy_id: str,
                   latency_ticks: int = LATENCY_PROFILES["gpt-3.5"]) -> ScriptedBrain:
    policy = _POLICIES.get(policy_id)
    if policy is None:
        raise OvermindError(
            "unknown-policy",
            f"{policy_id!r} (choose from {', '.join(sorted(_POLICIES))})")
    return ScriptedBrain(policy=policy, latency_ticks=latency_ticks,
                         name=f"scripted:{policy_id}")


# ---------------------------------------------------------------------------
# the planning loop
# ---------------------------------------------------------------------------

class Planner:
    """Per-tick driver for the plan -> memory -> translation round."""

    def __init__(self, brain: BrainAdapter, matrix_text: str,
                 memory: StrategyMemory | None = None) -> None:
        self.brain = brain
        self.port = BrainPort(brain)
        self.matrix_text = matrix_text
        self.memory = memory if memory is not None else StrategyMemory()
        self.queued_events: list[perception.CriticalEvent] = []
        self.log: list[dict] = []
        self.rounds_completed = 0
        self.parse_failures = 0

    def note_events(self, events: list[perception.CriticalEvent]) -> None:
        """Queue critical events; the next issued request goes out critical."""
        known = {(e.kind, str(e.location)) for e in self.queued_events}
        for event in events:
            if (event.kind, str(event.location)) not in known:
                self.queued_events.append(event)
                known.add((event.kind, str(event.location)))

    def step(self, report: perception.SituationReport,
             now_tick: int) -> list[str]:
        """Advance one tick; return newly translated command lines, if any."""
        commands: list[str] = []
        if self.port.pending is not None:
            if not self.port.ready(now_tick):
                return []
            done = self.port.collect(now_tick)
            self.log.append({"tick": now_tick, "event": "response",
                             "mode": done.mode})
            commands = self._finish_round(done, now_tick)
        self._issue(report, now_tick)
        return commands

    def _issue(self, report: perception.SituationReport,
               now_tick: int) -> None:
        mode = CRITICAL if self.queued_events else NORMAL
        events = list(self.queued_events) if mode == CRITICAL else None
        prompt = perception.assemble_overmind_prompt(
            mode, self.matrix_text, render_memory_text(self.memory),
            report, events)
        self.queued_events.clear()
        request_plan(self.port, prompt, now_tick, mode)
        self.log.append({"tick": now_tick, "event": "request", "mode": mode})

    def _finish_round(self, done: PendingRequest,
                      now_tick: int) -> list[str]:
        try:
            plan = parse_action_plan(done.response,
                                     issued_tick=done.issued_tick)
        except OvermindError:
            self.parse_failures += 1
            self.log.append({"tick": now_tick, "event": "skip",
                             "reason": "unparseable-plan"})
            return []
        plan = dedup_filter(plan, self.memory)
        if not plan.entries:
            self.log.append({"tick": now_tick, "event": "skip",
                             "reason": "empty-after-dedup"})
            return []
        prompt = perception.assemble_translation_prompt(
            render_plan_entries(plan))
        self.log.append({"tick": now_tick, "event": "request",
                         "mode": TRANSLATION})
        response = self.brain.respond(prompt)
        self.log.append({"tick": now_tick, "event": "response",
                         "mode": TRANSLATION})
        commands = translation_commands(response)
        record_round(self.memory, plan, tuple(commands))
        self.rounds_completed += 1
        return commands
