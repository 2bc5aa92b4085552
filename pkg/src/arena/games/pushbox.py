"""PushBox: each team shoves its two-cell box toward the target column.

A box advances one cell east only when enough teammates (default two) stand
against its rear face pushing forward together; the first box to reach the
target column wins for its team. Opponents may body-block the box's path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Mapping

import numpy as np

from arena.core import GameSpec, ObservationMode, TERMINAL_OBSERVATION, ValidationError
from arena.games.grid import (
    FORWARD,
    GridPayload,
    HEADINGS,
    Pose,
    apply_turns,
    collect_pellets,
    nearest_offset,
    resolve_moves,
)

ACTIONS = ("noop", "forward", "turn_left", "turn_right")


@dataclass
class PushBoxState(GridPayload):
    teams: tuple[tuple[str, ...], ...]
    boxes: tuple[tuple[int, int], ...]
    completed: tuple[str, ...]

    def box_cells(self, team_idx: int) -> tuple[tuple[int, int], tuple[int, int]]:
        bx, by = self.boxes[team_idx]
        return ((bx, by), (bx, by + 1))

    def all_box_cells(self) -> set[tuple[int, int]]:
        cells: set[tuple[int, int]] = set()
        for k in range(len(self.boxes)):
            cells.update(self.box_cells(k))
        return cells

    def team_of(self, agent: str) -> int:
        for k, team in enumerate(self.teams):
            if agent in team:
                return k
        raise KeyError(agent)

    def completion_order(self) -> tuple[str, ...]:
        return self.completed

    def progress(self, agent: str) -> float:
        return float(self.boxes[self.team_of(agent)][0])

    def team_metric(self, scope: frozenset[str]) -> float:
        total = 0.0
        for k, team in enumerate(self.teams):
            if any(a in scope for a in team):
                total += float(self.boxes[k][0])
        return total

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "poses": self.poses_jsonable(),
            "boxes": [list(b) for b in self.boxes],
            "completed": list(self.completed),
            "pellets": sorted(list(p) for p in self.pellets),
            "collected": dict(sorted(self.collected.items())),
        }


class PushBox:
    name = "pushbox"

    def __init__(self, params: Mapping[str, Any] | None = None):
        p = dict(params or {})
        self.params = p
        self.width = int(p.get("width", 11))
        self.height = int(p.get("height", 9))
        self.n_teams = int(p.get("n_teams", 2))
        self.team_size = int(p.get("team_size", 2))
        self.push_threshold = int(p.get("push_threshold", 2))
        self.randomize_spawns = bool(p.get("randomize_spawns", False))
        self.n_resources = int(p.get("n_resources", 0))
        self.resource_total = float(p.get("resource_total", 10.0))
        if self.n_teams != 2:
            raise ValidationError("pushbox supports exactly 2 teams")
        if not (1 <= self.team_size <= 3):
            raise ValidationError("team_size must be 1..3")
        if self.push_threshold < 1:
            raise ValidationError("push_threshold must be >= 1")
        agent_ids = tuple(
            f"a{t * self.team_size + i}" for t in range(self.n_teams) for i in range(self.team_size)
        )
        self.teams = tuple(
            tuple(agent_ids[t * self.team_size : (t + 1) * self.team_size])
            for t in range(self.n_teams)
        )
        self.target_x = self.width - 1
        self.spec = GameSpec(
            agent_ids=agent_ids,
            action_spaces={a: ACTIONS for a in agent_ids},
            observation_mode=ObservationMode(
                view="local", broadcast_global=bool(p.get("broadcast_global", False))
            ),
            max_steps=int(p.get("max_steps", 200)),
        )

    def _lane_rows(self) -> list[int]:
        # Two symmetric lanes around the horizontal center line.
        return [2, self.height - 4]

    def initial_payload(self, rng: np.random.Generator) -> PushBoxState:
        lanes = self._lane_rows()
        if self.randomize_spawns:
            lanes = [int(y + rng.integers(-1, 2)) for y in lanes]
        boxes = tuple((2, y) for y in lanes)
        poses: dict[str, Pose | None] = {}
        for t, team in enumerate(self.teams):
            members = list(team)
            if self.randomize_spawns:
                members = [members[int(i)] for i in rng.permutation(len(members))]
            by = lanes[t]
            slots = [(1, by), (1, by + 1), (0, by)]
            for agent, cell in zip(members, slots):
                heading = str(rng.choice(HEADINGS)) if self.randomize_spawns else "E"
                poses[agent] = Pose(cell[0], cell[1], heading)
        pellets: tuple[tuple[int, int], ...] = ()
        pellet_value = 0.0
        if self.n_resources > 0:
            box_cells = {c for k in range(self.n_teams) for c in ((boxes[k][0], boxes[k][1]), (boxes[k][0], boxes[k][1] + 1))}
            spawn_cells = {p.cell for p in poses.values() if p is not None}
            candidates = sorted(
                (x, y)
                for x in range(self.width)
                for y in range(self.height)
                if (x, y) not in box_cells and (x, y) not in spawn_cells
            )
            picks = rng.choice(len(candidates), size=self.n_resources, replace=False)
            pellets = tuple(candidates[int(i)] for i in sorted(picks))
            pellet_value = self.resource_total / self.n_resources
        return PushBoxState(
            width=self.width,
            height=self.height,
            poses=poses,
            alive={a: True for a in self.spec.agent_ids},
            pellets=pellets,
            collected={},
            pellet_value=pellet_value,
            teams=self.teams,
            boxes=boxes,
            completed=(),
        )

    def transition(
        self, payload: PushBoxState, actions: Mapping[str, str], rng: np.random.Generator
    ) -> tuple[PushBoxState, dict[str, Any]]:
        poses = apply_turns(payload.poses, actions)
        box_cells = payload.all_box_cells()

        def passable(cell: tuple[int, int]) -> bool:
            x, y = cell
            return 0 <= x < self.width and 0 <= y < self.height and cell not in box_cells

        outcome = resolve_moves(poses, actions, passable)
        poses = outcome.poses

        boxes = list(payload.boxes)
        pushed_teams: list[int] = []
        for k, team in enumerate(payload.teams):
            bx, by = boxes[k]
            rear = {(bx - 1, by), (bx - 1, by + 1)}
            pushers = [
                a
                for a in team
                if poses.get(a) is not None
                and poses[a].cell in rear
                and poses[a].heading == "E"
                and actions.get(a) == FORWARD
            ]
            front = [(bx + 1, by), (bx + 1, by + 1)]
            occupied = {p.cell for p in poses.values() if p is not None}
            front_clear = all(c not in occupied for c in front) and bx + 1 <= self.target_x
            if len(pushers) >= self.push_threshold and front_clear:
                boxes[k] = (bx + 1, by)
                for agent in pushers:
                    poses[agent] = poses[agent].moved_to((poses[agent].x + 1, poses[agent].y))
                pushed_teams.append(k)

        winners = [k for k in range(len(boxes)) if boxes[k][0] >= self.target_x]
        completions: list[str] = []
        if not payload.completed:
            for k in winners:
                completions.extend(payload.teams[k])
        pellets, collected, gains = collect_pellets(
            poses, payload.pellets, payload.pellet_value, payload.collected
        )
        info = {
            "collisions": outcome.collisions,
            "completions": completions,
            "collections": gains,
            "deaths": [],
            "pushed_teams": pushed_teams,
        }
        next_payload = replace(
            payload,
            poses=poses,
            boxes=tuple(boxes),
            completed=payload.completed + tuple(completions),
            pellets=pellets,
            collected=collected,
        )
        return next_payload, info

    def terminal(self, payload: PushBoxState) -> bool:
        return any(payload.boxes[k][0] >= self.target_x for k in range(len(payload.boxes)))

    def observe(self, payload: PushBoxState, agent: str) -> dict[str, Any]:
        pose = payload.poses.get(agent)
        if pose is None or not payload.alive.get(agent, False):
            return dict(TERMINAL_OBSERVATION)
        box = payload.boxes[payload.team_of(agent)]
        return {
            "pos": [pose.x, pose.y],
            "heading": pose.heading,
            "box": [box[0], box[1]],
            "nearest": nearest_offset(payload.poses, agent),
        }

    def base_rows(self, payload: PushBoxState) -> list[list[str]]:
        rows = [["." for _ in range(self.width)] for _ in range(self.height)]
        for y in range(self.height):
            rows[y][self.target_x] = "T"
        for k in range(len(payload.boxes)):
            for x, y in payload.box_cells(k):
                rows[y][x] = "B"
        for px, py in payload.pellets:
            rows[py][px] = "*"
        return rows

    def default_tree_config(self) -> dict[str, Any]:
        nodes = [
            {
                "id": "root",
                "children": [f"team{t}" for t in range(self.n_teams)],
                "bmars": "CP",
                "reward": {"kind": "completion_rank", "params": {}},
                "weight": 1.0,
            }
        ]
        for t, team in enumerate(self.teams):
            nodes.append(
                {
                    "id": f"team{t}",
                    "children": [{"agent": a} for a in team],
                    "bmars": "CL",
                    "reward": {"kind": "shared_progress", "params": {}},
                    "weight": 1.0,
                }
            )
        return {"nodes": nodes, "root": "root"}
