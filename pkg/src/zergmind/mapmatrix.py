"""Base-location grid: 16 mineral-field bases on a 4x5 matrix with an adjacency graph.

The grid is the spatial model the planner prompt exposes; movement between
bases runs along the adjacency graph. The default layout mirrors the prompt's
matrix block byte for byte when rendered.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from collections import deque
from functools import lru_cache
from typing import Iterable, Sequence

GRID_ROWS = 4
GRID_COLS = 5


class DisconnectedError(ValueError):
    """Raised when no path exists between two bases (malformed custom map)."""


@dataclass(frozen=True, order=True, slots=True)
class BaseId:
    side: str  # "A" or "B"
    index: int  # 1..8

    def __post_init__(self) -> None:
        if self.side not in ("A", "B") or not 1 <= self.index <= 8:
            raise ValueError(f"invalid base id {self.side}{self.index}")

    def __str__(self) -> str:
        return f"{self.side}{self.index}"

    @classmethod
    def parse(cls, text: str) -> BaseId:
        text = text.strip()
        if len(text) != 2 or text[0] not in "AB" or not text[1].isdigit():
            raise ValueError(f"invalid base id {text!r}")
        return cls(text[0], int(text[1]))


ALL_BASES: tuple[BaseId, ...] = tuple(
    BaseId(side, i) for side in "AB" for i in range(1, 9)
)

# Row-major default layout; None marks the four holes in the grid.
_DEFAULT_LAYOUT: tuple[tuple[str, ...], ...] = (
    ("0", "A6", "B7", "B3", "B2"),
    ("A5", "0", "B8", "B4", "B1"),
    ("A1", "A4", "A8", "0", "B5"),
    ("A2", "A3", "A7", "B6", "0"),
)

# Links beyond the 4-neighborhood: the drawn connections bridging the grid's
# empty cells (see docs/map.md for the reading they encode). Symmetric under
# the layout's 180-degree rotation.
DEFAULT_EXTRA_LINKS: tuple[tuple[str, str], ...] = (
    ("A5", "B8"),
    ("A8", "B5"),
    ("A4", "A6"),
    ("B4", "B6"),
    ("A5", "A6"),
    ("B5", "B6"),
)


@dataclass(frozen=True, slots=True)
class MapMatrix:
    grid: tuple[tuple[BaseId | None, ...], ...]
    adjacency: frozenset[frozenset[BaseId]]
    home_a: BaseId
    home_b: BaseId

    def cell(self, row: int, col: int) -> BaseId | None:
        return self.grid[row][col]

    def position(self, base: BaseId) -> tuple[int, int]:
        for r, row in enumerate(self.grid):
            for c, cell in enumerate(row):
                if cell == base:
                    return (r, c)
        raise ValueError(f"base {base} not on map")

    def neighbors(self, base: BaseId) -> list[BaseId]:
        out = []
        for pair in self.adjacency:
            if base in pair:
                (other,) = pair - {base}
                out.append(other)
        return sorted(out)

    def edge_bases(self) -> list[BaseId]:
        """Bases on the outer boundary of the grid (flee fallback targets)."""
        out = []
        for r, row in enumerate(self.grid):
            for c, cell in enumerate(row):
                if cell is None:
                    continue
                if r in (0, GRID_ROWS - 1) or c in (0, GRID_COLS - 1):
                    out.append(cell)
        return sorted(out)

    def path(self, start: BaseId, goal: BaseId) -> list[BaseId]:
        """Shortest path, endpoints included.

        Tie-breaking is symmetric: the BFS (lexicographically smallest next
        hop) always runs from the smaller endpoint, and the result is reversed
        when the caller asked for the other direction, so
        path(x, y) == reversed(path(y, x)) holds for every pair.
        """
        if start == goal:
            return [start]
        if goal < start:
            return list(reversed(self.path(goal, start)))
        return list(self._bfs_path(start, goal))

    @lru_cache(maxsize=512)
    def _bfs_path(self, start: BaseId, goal: BaseId) -> tuple[BaseId, ...]:
        parent: dict[BaseId, BaseId] = {}
        frontier = deque([start])
        seen = {start}
        while frontier:
            node = frontier.popleft()
            if node == goal:
                back = [goal]
                while back[-1] != start:
                    back.append(parent[back[-1]])
                return tuple(reversed(back))
            for nxt in self.neighbors(node):  # sorted: smallest hop wins ties
                if nxt not in seen:
                    seen.add(nxt)
                    parent[nxt] = node
                    frontier.append(nxt)
        raise DisconnectedError(f"disconnected: no path {start} -> {goal}")

    def distance(self, start: BaseId, goal: BaseId) -> int:
        return len(self.path(start, goal)) - 1


def _build(grid_text: Sequence[Sequence[str]],
           links: Iterable[tuple[str, str]]) -> MapMatrix:
    if len(grid_text) != GRID_ROWS or any(len(r) != GRID_COLS for r in grid_text):
        raise ValueError(f"grid must be {GRID_ROWS}x{GRID_COLS}")
    grid: list[tuple[BaseId | None, ...]] = []
    seen: set[BaseId] = set()
    for row in grid_text:
        cells: list[BaseId | None] = []
        for token in row:
            if token == "0":
                cells.append(None)
                continue
            base = BaseId.parse(token)
            if base in seen:
                raise ValueError(f"base {base} appears twice")
            seen.add(base)
            cells.append(base)
        grid.append(tuple(cells))
    if seen != set(ALL_BASES):
        missing = sorted(set(ALL_BASES) - seen)
        raise ValueError(f"grid must contain all 16 bases; missing {missing}")

    pairs: set[frozenset[BaseId]] = set()
    for r in range(GRID_ROWS):
        for c in range(GRID_COLS):
            cell = grid[r][c]
            if cell is None:
                continue
            for dr, dc in ((0, 1), (1, 0)):
                rr, cc = r + dr, c + dc
                if rr < GRID_ROWS and cc < GRID_COLS:
                    other = grid[rr][cc]
                    if other is not None:
                        pairs.add(frozenset((cell, other)))
    for a, b in links:
        pair = frozenset((BaseId.parse(a), BaseId.parse(b)))
        if len(pair) != 2:
            raise ValueError(f"degenerate link {a}-{b}")
        pairs.add(pair)

    matrix = MapMatrix(
        grid=tuple(grid),
        adjacency=frozenset(pairs),
        home_a=BaseId("A", 1),
        home_b=BaseId("B", 1),
    )
    # Reject maps whose graph cannot route every army.
    reachable = {matrix.home_a}
    frontier = deque([matrix.home_a])
    while frontier:
        for nxt in matrix.neighbors(frontier.popleft()):
            if nxt not in reachable:
                reachable.add(nxt)
                frontier.append(nxt)
    if reachable != set(ALL_BASES):
        raise ValueError(f"map graph is disconnected; unreachable {sorted(set(ALL_BASES) - reachable)}")
    return matrix


def build_default_matrix() -> MapMatrix:
    return _build(_DEFAULT_LAYOUT, DEFAULT_EXTRA_LINKS)


def render_prompt_matrix(m: MapMatrix) -> str:
    rows = []
    for r, row in enumerate(m.grid):
        cells = ", ".join("0" if cell is None else str(cell) for cell in row)
        prefix = "[[" if r == 0 else " ["
        suffix = "]]" if r == GRID_ROWS - 1 else "],"
        rows.append(f"{prefix}{cells}{suffix}")
    return "\n".join(rows)


def parse_prompt_matrix(text: str,
                        links: Iterable[tuple[str, str]] = ()) -> MapMatrix:
    rows = []
    for line in text.strip().splitlines():
        line = line.strip().lstrip("[").rstrip("],").rstrip("]")
        rows.append([tok.strip() for tok in line.split(",") if tok.strip()])
    return _build(rows, links)


def load_map_file(path: str) -> MapMatrix:
    """Load a custom map: JSON with `grid` (4x5 of strings, "0" for a hole)
    and `links` (list of 2-element base-id lists)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "grid" not in data:
        raise ValueError(f"{path}: map file needs a `grid` key")
    links = [tuple(pair) for pair in data.get("links", [])]
    return _build(data["grid"], links)
