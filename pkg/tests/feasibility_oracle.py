"""Production-readiness oracle computed straight from the stats file.

Used to cross-check verify_and_dispatch: everything here is re-derived from
the raw JSON tables and the world state's plain fields, with none of the
package's feasibility code involved.
"""

from __future__ import annotations

import json
from pathlib import Path

_DATA_DIR = Path(__file__).parents[1] / "src" / "zergmind" / "data"
_STATS = json.loads((_DATA_DIR / "unit_stats.json").read_text(encoding="utf-8"))
_TECH = json.loads((_DATA_DIR / "tech_tree.json").read_text(encoding="utf-8"))

GATHERING = ("gathering-minerals", "gathering-gas", "idle")


def _completed_kinds(state, player: str) -> set[str]:
    return {
        b.kind for b in state.buildings.values()
        if b.owner == player and b.build_ticks_left == 0
        and b.morphing_to is None
    }


def _supply_numbers(state, player: str) -> tuple[int, int]:
    used = 0
    for unit in state.units.values():
        if unit.owner == player:
            used += _STATS["units"][unit.kind].get("supply", 0)
    for pending in state.pending_units:
        if pending.owner == player:
            used += _STATS["units"][pending.kind].get("supply", 0)
    cap = 0
    for unit in state.units.values():
        if unit.owner == player:
            cap += _STATS["units"][unit.kind].get("supply_provided", 0)
    for building in state.buildings.values():
        if building.owner == player and building.build_ticks_left == 0:
            cap += _STATS["buildings"][building.kind].get("supply_provided", 0)
    cap = min(cap, _STATS["economy"]["supply_cap_max"])
    return used, cap


def _has_free_worker(state, player: str, base) -> bool:
    worker_kinds = {
        k for k, rec in _STATS["units"].items() if rec.get("worker")}
    return any(
        u.owner == player and u.location == base and u.kind in worker_kinds
        and u.activity in GATHERING
        for u in state.units.values())


def expected_outcome(state, player: str, verb: str, kind: str,
                     base) -> tuple[str, str]:
    """(status, detail) the dispatcher must produce for one command.

    verb is "Train", "Build", or "Research"; kind is the produced unit,
    the building, or the research name; base is the production site.
    """
    done = _completed_kinds(state, player)

    if verb == "Research":
        rec = _TECH["research"][kind]
        if kind in state.research_done[player] or any(
                j.owner == player and j.name == kind
                for j in state.research_jobs):
            return "rejected", "duplicate-research"
        missing = [r for r in rec["requires"] if r not in done]
        if missing:
            return "suspended", "blocked"
        if state.minerals[player] < rec["mineral_cost"]:
            return "suspended", "minerals"
        if state.gas[player] < rec["gas_cost"]:
            return "suspended", "gas"
        return "dispatched", ""

    if verb == "Train":
        unit = _STATS["units"][kind]
        requires = _TECH["producibles"][kind]["requires"]
        missing = [r for r in requires if r not in done]
        if missing:
            return "suspended", "blocked"
        if state.minerals[player] < unit["mineral_cost"]:
            return "suspended", "minerals"
        if state.gas[player] < unit["gas_cost"]:
            return "suspended", "gas"
        used, cap = _supply_numbers(state, player)
        if unit.get("supply", 0) > 0 and used + unit["supply"] > cap:
            return "suspended", "supply"
        return "dispatched", ""

    building = _STATS["buildings"][kind]
    requires = _TECH["producibles"][kind]["requires"]
    missing = [r for r in requires if r not in done]
    if missing:
        return "suspended", "blocked"
    if state.minerals[player] < building["mineral_cost"]:
        return "suspended", "minerals"
    if state.gas[player] < building["gas_cost"]:
        return "suspended", "gas"
    if building.get("gas_source"):
        gas_kinds = {
            k for k, rec in _STATS["buildings"].items()
            if rec.get("gas_source")}
        taken = sum(
            1 for b in state.buildings.values()
            if b.owner == player and b.location == base
            and b.kind in gas_kinds)
        if taken >= _STATS["economy"]["max_extractors_per_base"]:
            return "rejected", "no-free-geyser"
    if not _has_free_worker(state, player, base):
        return "suspended", "worker"
    return "dispatched", ""
