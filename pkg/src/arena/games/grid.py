"""Shared grid-world machinery: poses, simultaneous movement, pellets.

Movement conflicts resolve by mutual blocking with no priority order, so
agent relabeling never changes outcomes. Collision accounting:

  - each cell contested by two or more movers counts once,
  - each swap pair (A into B's cell, B into A's) counts once,
  - each mover blocked by an agent that stays put counts once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

HEADINGS = ("N", "E", "S", "W")
DELTAS = {"N": (0, -1), "E": (1, 0), "S": (0, 1), "W": (-1, 0)}
LEFT_OF = {"N": "W", "W": "S", "S": "E", "E": "N"}
RIGHT_OF = {"N": "E", "E": "S", "S": "W", "W": "N"}

FORWARD = "forward"
TURN_LEFT = "turn_left"
TURN_RIGHT = "turn_right"
PUSH = "push"

Cell = tuple[int, int]


@dataclass(frozen=True)
class Pose:
    x: int
    y: int
    heading: str

    @property
    def cell(self) -> Cell:
        return (self.x, self.y)

    def ahead(self) -> Cell:
        dx, dy = DELTAS[self.heading]
        return (self.x + dx, self.y + dy)

    def turned(self, action: str) -> "Pose":
        if action == TURN_LEFT:
            return Pose(self.x, self.y, LEFT_OF[self.heading])
        if action == TURN_RIGHT:
            return Pose(self.x, self.y, RIGHT_OF[self.heading])
        return self

    def moved_to(self, cell: Cell) -> "Pose":
        return Pose(cell[0], cell[1], self.heading)


@dataclass
class MoveOutcome:
    poses: dict[str, Pose | None]
    moved: set[str]
    blocked_by_agent: set[str]
    blocked_by_wall: set[str]
    collisions: int


def apply_turns(poses: Mapping[str, Pose | None], actions: Mapping[str, str]) -> dict[str, Pose | None]:
    return {
        agent: (pose.turned(actions.get(agent, "")) if pose is not None else None)
        for agent, pose in poses.items()
    }


def resolve_moves(
    poses: Mapping[str, Pose | None],
    actions: Mapping[str, str],
    passable: Callable[[Cell], bool],
) -> MoveOutcome:
    """Apply simultaneous forward moves with mutual blocking."""
    agents = [a for a, p in poses.items() if p is not None]
    proposals: dict[str, Cell] = {}
    blocked_wall: set[str] = set()
    collisions = 0
    for agent in agents:
        if actions.get(agent) != FORWARD:
            continue
        dest = poses[agent].ahead()
        if not passable(dest):
            blocked_wall.add(agent)
        else:
            proposals[agent] = dest

    blocked_agent: set[str] = set()

    # Contested destination cells: everyone aiming there is blocked.
    by_dest: dict[Cell, list[str]] = {}
    for agent, dest in proposals.items():
        by_dest.setdefault(dest, []).append(agent)
    for dest, group in sorted(by_dest.items()):
        if len(group) > 1:
            blocked_agent.update(group)
            collisions += 1

    # Swap pairs block each other.
    cell_of = {agent: poses[agent].cell for agent in agents}
    ordered = sorted(proposals)
    for i, agent in enumerate(ordered):
        for other in ordered[i + 1 :]:
            if agent in blocked_agent or other in blocked_agent:
                continue
            if proposals[agent] == cell_of[other] and proposals[other] == cell_of[agent]:
                blocked_agent.update((agent, other))
                collisions += 1

    # Movers aiming at a cell whose occupant stays put are blocked; a newly
    # blocked agent keeps its cell, which can cascade.
    changed = True
    while changed:
        changed = False
        staying_cells = {
            cell_of[a]
            for a in agents
            if a not in proposals or a in blocked_agent or a in blocked_wall
        }
        for agent in sorted(proposals):
            if agent in blocked_agent:
                continue
            if proposals[agent] in staying_cells:
                blocked_agent.add(agent)
                collisions += 1
                changed = True

    new_poses: dict[str, Pose | None] = {}
    moved: set[str] = set()
    for agent, pose in poses.items():
        if pose is None:
            new_poses[agent] = None
            continue
        if agent in proposals and agent not in blocked_agent:
            new_poses[agent] = pose.moved_to(proposals[agent])
            moved.add(agent)
        else:
            new_poses[agent] = pose
    return MoveOutcome(
        poses=new_poses,
        moved=moved,
        blocked_by_agent=blocked_agent,
        blocked_by_wall=blocked_wall,
        collisions=collisions,
    )


def collect_pellets(
    poses: Mapping[str, Pose | None],
    pellets: Iterable[Cell],
    pellet_value: float,
    collected: Mapping[str, float],
) -> tuple[tuple[Cell, ...], dict[str, float], dict[str, float]]:
    """Agents standing on pellet cells pick them up.

    Returns (remaining pellets, updated cumulative totals, this-step values).
    """
    remaining: list[Cell] = []
    gains: dict[str, float] = {}
    cell_to_agent = {p.cell: a for a, p in poses.items() if p is not None}
    for cell in pellets:
        agent = cell_to_agent.get(cell)
        if agent is None:
            remaining.append(cell)
        else:
            gains[agent] = gains.get(agent, 0.0) + pellet_value
    totals = dict(collected)
    for agent, value in gains.items():
        totals[agent] = totals.get(agent, 0.0) + value
    return tuple(remaining), totals, gains


def nearest_offset(
    poses: Mapping[str, Pose | None], agent: str, clamp: int = 3
) -> tuple[int, int] | None:
    """Offset to the nearest other on-board agent, clamped; ties by agent order."""
    me = poses.get(agent)
    if me is None:
        return None
    best: tuple[int, tuple[int, int]] | None = None
    for other, pose in sorted(poses.items()):
        if other == agent or pose is None:
            continue
        dx, dy = pose.x - me.x, pose.y - me.y
        dist = abs(dx) + abs(dy)
        if best is None or dist < best[0]:
            best = (dist, (dx, dy))
    if best is None:
        return None
    dx, dy = best[1]
    return (max(-clamp, min(clamp, dx)), max(-clamp, min(clamp, dy)))


@dataclass
class GridPayload:
    """Common state shared by the grid games; games extend it."""

    width: int
    height: int
    poses: dict[str, Pose | None]
    alive: dict[str, bool]
    pellets: tuple[Cell, ...]
    collected: dict[str, float]
    pellet_value: float

    def alive_map(self) -> dict[str, bool]:
        return dict(self.alive)

    def active(self, agent: str) -> bool:
        return self.alive.get(agent, False) and self.poses.get(agent) is not None

    def group_active(self, scope: frozenset[str]) -> bool:
        return any(self.active(a) for a in scope)

    def collected_total(self, agent: str) -> float:
        return self.collected.get(agent, 0.0)

    def death_order(self) -> tuple[str, ...]:
        return ()

    def completion_order(self) -> tuple[str, ...]:
        return ()

    def poses_jsonable(self) -> dict[str, list | None]:
        return {
            a: ([p.x, p.y, p.heading] if p is not None else None)
            for a, p in sorted(self.poses.items())
        }
