"""Platform survival: shove opponents off a bounded platform.

Agents cannot walk off the edge themselves; the only way to die is being
pushed over it. Free-for-all runs until at most one agent remains; the team
configuration runs until at most one team has a living member.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Mapping

import numpy as np

from arena.core import GameSpec, ObservationMode, TERMINAL_OBSERVATION, ValidationError
from arena.games.grid import (
    DELTAS,
    GridPayload,
    HEADINGS,
    PUSH,
    Pose,
    apply_turns,
    collect_pellets,
    nearest_offset,
    resolve_moves,
)

ACTIONS = ("noop", "forward", "turn_left", "turn_right", "push")

_FFA_SPAWNS = [(4, 4, "S"), (2, 2, "S"), (6, 2, "S"), (2, 6, "N"), (6, 6, "N")]


@dataclass
class SurvivalState(GridPayload):
    deaths: tuple[str, ...]
    teams: tuple[tuple[str, ...], ...] | None

    def death_order(self) -> tuple[str, ...]:
        return self.deaths

    def progress(self, agent: str) -> float:
        return 0.0 if self.alive.get(agent, False) else -1.0

    def team_metric(self, scope: frozenset[str]) -> float:
        return float(sum(1 for a in scope if self.alive.get(a, False)))

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "poses": self.poses_jsonable(),
            "deaths": list(self.deaths),
            "pellets": sorted(list(p) for p in self.pellets),
            "collected": dict(sorted(self.collected.items())),
        }


class PlatformSurvival:
    name = "platform_survival"

    def __init__(self, params: Mapping[str, Any] | None = None):
        p = dict(params or {})
        self.params = p
        self.width = int(p.get("width", 9))
        self.height = int(p.get("height", 9))
        team_shape = p.get("teams")  # e.g. [5, 5]; None = FFA
        self.randomize_spawns = bool(p.get("randomize_spawns", False))
        self.n_resources = int(p.get("n_resources", 0))
        self.resource_total = float(p.get("resource_total", 10.0))
        if team_shape is None:
            n = int(p.get("n_agents", 5))
            if not (2 <= n <= 12):
                raise ValidationError("n_agents must be 2..12")
            agent_ids = tuple(f"a{i}" for i in range(n))
            self.teams: tuple[tuple[str, ...], ...] | None = None
        else:
            sizes = [int(s) for s in team_shape]
            if len(sizes) < 2 or any(s < 1 for s in sizes):
                raise ValidationError("teams needs >= 2 teams of >= 1 agents")
            agent_ids = tuple(f"a{i}" for i in range(sum(sizes)))
            teams = []
            idx = 0
            for s in sizes:
                teams.append(tuple(agent_ids[idx : idx + s]))
                idx += s
            self.teams = tuple(teams)
        self.spec = GameSpec(
            agent_ids=agent_ids,
            action_spaces={a: ACTIONS for a in agent_ids},
            observation_mode=ObservationMode(
                view="local", broadcast_global=bool(p.get("broadcast_global", False))
            ),
            max_steps=int(p.get("max_steps", 200)),
        )

    def on_platform(self, cell: tuple[int, int]) -> bool:
        x, y = cell
        return 1 <= x <= self.width - 2 and 1 <= y <= self.height - 2

    def initial_payload(self, rng: np.random.Generator) -> SurvivalState:
        agents = self.spec.agent_ids
        poses: dict[str, Pose | None] = {}
        if self.randomize_spawns:
            cells = sorted(
                (x, y)
                for x in range(1, self.width - 1)
                for y in range(1, self.height - 1)
            )
            picks = rng.choice(len(cells), size=len(agents), replace=False)
            for agent, i in zip(agents, picks):
                x, y = cells[int(i)]
                poses[agent] = Pose(x, y, str(rng.choice(HEADINGS)))
        elif self.teams is None:
            if len(agents) > len(_FFA_SPAWNS):
                ring = sorted(
                    (x, y)
                    for x in range(1, self.width - 1)
                    for y in range(1, self.height - 1)
                    if x in (1, self.width - 2) or y in (1, self.height - 2)
                )
                spawns = [(x, y, "S") for x, y in ring]
            else:
                spawns = _FFA_SPAWNS
            for agent, (x, y, h) in zip(agents, spawns):
                poses[agent] = Pose(x, y, h)
        else:
            rows = [2, self.height - 3]
            for t, team in enumerate(self.teams):
                y = rows[t % len(rows)] + (t // len(rows))
                heading = "S" if y < self.height // 2 else "N"
                for i, agent in enumerate(team):
                    poses[agent] = Pose(1 + i, y, heading)
        pellets: tuple[tuple[int, int], ...] = ()
        pellet_value = 0.0
        if self.n_resources > 0:
            spawn_cells = {p.cell for p in poses.values() if p is not None}
            candidates = sorted(
                (x, y)
                for x in range(1, self.width - 1)
                for y in range(1, self.height - 1)
                if (x, y) not in spawn_cells
            )
            picks = rng.choice(len(candidates), size=self.n_resources, replace=False)
            pellets = tuple(candidates[int(i)] for i in sorted(picks))
            pellet_value = self.resource_total / self.n_resources
        return SurvivalState(
            width=self.width,
            height=self.height,
            poses=poses,
            alive={a: True for a in agents},
            pellets=pellets,
            collected={},
            pellet_value=pellet_value,
            deaths=(),
            teams=self.teams,
        )

    def transition(
        self, payload: SurvivalState, actions: Mapping[str, str], rng: np.random.Generator
    ) -> tuple[SurvivalState, dict[str, Any]]:
        poses = apply_turns(payload.poses, actions)
        outcome = resolve_moves(poses, actions, self.on_platform)
        poses = outcome.poses
        alive = dict(payload.alive)
        deaths: list[str] = []
        # Pushes resolve sequentially in agent order on the post-move board.
        for agent in self.spec.agent_ids:
            if actions.get(agent) != PUSH or poses.get(agent) is None or not alive[agent]:
                continue
            pusher = poses[agent]
            target_cell = pusher.ahead()
            victim = next(
                (a for a, p in poses.items() if p is not None and p.cell == target_cell),
                None,
            )
            if victim is None:
                continue
            dx, dy = DELTAS[pusher.heading]
            dest = (target_cell[0] + dx, target_cell[1] + dy)
            if not self.on_platform(dest):
                poses[victim] = None
                alive[victim] = False
                deaths.append(victim)
            elif all(p is None or p.cell != dest for p in poses.values()):
                poses[victim] = poses[victim].moved_to(dest)
        pellets, collected, gains = collect_pellets(
            poses, payload.pellets, payload.pellet_value, payload.collected
        )
        info = {
            "collisions": outcome.collisions,
            "completions": [],
            "collections": gains,
            "deaths": deaths,
        }
        next_payload = replace(
            payload,
            poses=poses,
            alive=alive,
            deaths=payload.deaths + tuple(deaths),
            pellets=pellets,
            collected=collected,
        )
        return next_payload, info

    def terminal(self, payload: SurvivalState) -> bool:
        if payload.teams is None:
            return sum(1 for a in self.spec.agent_ids if payload.alive[a]) <= 1
        living_teams = sum(
            1 for team in payload.teams if any(payload.alive[a] for a in team)
        )
        return living_teams <= 1

    def observe(self, payload: SurvivalState, agent: str) -> dict[str, Any]:
        pose = payload.poses.get(agent)
        if pose is None or not payload.alive.get(agent, False):
            return dict(TERMINAL_OBSERVATION)
        return {
            "pos": [pose.x, pose.y],
            "heading": pose.heading,
            "nearest": nearest_offset(payload.poses, agent),
            "alive_count": sum(1 for a in payload.alive.values() if a),
        }

    def base_rows(self, payload: SurvivalState) -> list[list[str]]:
        rows = [
            ["." if self.on_platform((x, y)) else "#" for x in range(self.width)]
            for y in range(self.height)
        ]
        for px, py in payload.pellets:
            rows[py][px] = "*"
        return rows

    def default_tree_config(self) -> dict[str, Any]:
        agents = self.spec.agent_ids
        if self.teams is None:
            return {
                "nodes": [
                    {
                        "id": "root",
                        "children": [{"agent": a} for a in agents],
                        "bmars": "CP",
                        "reward": {"kind": "death_order_rank", "params": {}},
                        "weight": 1.0,
                    }
                ],
                "root": "root",
            }
        nodes = [
            {
                "id": "root",
                "children": [f"team{t}" for t in range(len(self.teams))],
                "bmars": "CP",
                "reward": {"kind": "death_order_rank", "params": {}},
                "weight": 1.0,
            }
        ]
        for t, team in enumerate(self.teams):
            nodes.append(
                {
                    "id": f"team{t}",
                    "children": [{"agent": a} for a in team],
                    "bmars": "CL",
                    "reward": {"kind": "team_living_time", "params": {"sign": 1.0}},
                    "weight": 1.0,
                }
            )
        return {"nodes": nodes, "root": "root"}
