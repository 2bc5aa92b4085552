"""Top-down plain-text frame rendering of the global game state."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Any

from arena.core import Game, GlobalState

N_TEAM_COLORS = 8

_HEADING_GLYPHS = {"N": "^", "E": ">", "S": "v", "W": "<"}


@dataclass
class FrameGrid:
    rows: list[str]
    agents: dict[str, dict[str, Any]]
    step_index: int

    def text(self) -> str:
        return "\n".join(self.rows)

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "rows": self.rows,
            "agents": {a: info for a, info in sorted(self.agents.items())},
            "step": self.step_index,
        }


def team_color(tree, agent: str) -> int:
    """Deterministic color index from the agent's top-level team node id."""
    if tree is None:
        return 0
    index = tree.agent_index().get(agent)
    if not index:
        return 0
    # Depth-1 ancestor when present, else the root itself.
    node_id = index[1] if len(index) > 1 else index[0]
    return zlib.crc32(node_id.encode()) % N_TEAM_COLORS


def agent_glyph(agent: str) -> str:
    digits = "".join(ch for ch in agent if ch.isdigit())
    return digits[-1] if digits else agent[-1]


def render_topdown(game: Game, state: GlobalState, tree=None) -> FrameGrid:
    payload = state.payload
    cells = game.base_rows(payload)
    agents: dict[str, dict[str, Any]] = {}
    for agent in game.spec.agent_ids:
        pose = payload.poses.get(agent)
        if pose is None:
            continue
        cells[pose.y][pose.x] = agent_glyph(agent)
        agents[agent] = {
            "x": pose.x,
            "y": pose.y,
            "heading": pose.heading,
            "glyph": _HEADING_GLYPHS[pose.heading],
            "color": team_color(tree, agent),
        }
    return FrameGrid(
        rows=["".join(row) for row in cells],
        agents=agents,
        step_index=state.step_index,
    )
