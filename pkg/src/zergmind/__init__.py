"""Two-tier Zerg agent over a deterministic micro-RTS engine.

Layers, bottom to top: `mapmatrix` (base grid + adjacency), `gamedata`
(stats/tech tables), `world` (tick engine), `perception` (report + prompt
assembly), `command_center` (command parsing/verification/dispatch),
`reflexnet` (per-unit state machines), `overmind` (planner loop + brains),
`agent`/`opponent`/`harness` (match pipeline), `cli`.
"""

from zergmind.mapmatrix import BaseId, MapMatrix, build_default_matrix

__all__ = ["BaseId", "MapMatrix", "build_default_matrix"]
__version__ = "0.1.0"
