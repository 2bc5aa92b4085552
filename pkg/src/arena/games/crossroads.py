"""Crossroads: agents cross a plus-shaped intersection to opposite targets.

Actions: forward / turn_left / turn_right / noop. Conflicting moves into one
cell block every mover and count a collision, so greedy rushing produces
traffic jams at the center while coordinated crossings stay clean.

The "lanes" layout places each agent in its own walled corridor: agents can
neither touch nor observe each other, which makes per-agent reward functions
genuinely isolated there.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Mapping

import numpy as np

from arena.core import GameSpec, ObservationMode, TERMINAL_OBSERVATION, ValidationError
from arena.games.grid import (
    DELTAS,
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

_ARMS = ("N", "E", "S", "W")


@dataclass
class CrossroadsState(GridPayload):
    targets: dict[str, tuple[int, int]]
    arrived: tuple[str, ...]
    road: frozenset[tuple[int, int]]
    layout: str

    def completion_order(self) -> tuple[str, ...]:
        return self.arrived

    def progress(self, agent: str) -> float:
        pose = self.poses.get(agent)
        if pose is None:
            return 0.0
        tx, ty = self.targets[agent]
        return -float(abs(pose.x - tx) + abs(pose.y - ty))

    def team_metric(self, scope: frozenset[str]) -> float:
        return float(sum(1 for a in self.arrived if a in scope))

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "poses": self.poses_jsonable(),
            "targets": {a: list(t) for a, t in sorted(self.targets.items())},
            "arrived": list(self.arrived),
            "pellets": sorted(list(p) for p in self.pellets),
            "collected": dict(sorted(self.collected.items())),
        }


class Crossroads:
    name = "crossroads"

    def __init__(self, params: Mapping[str, Any] | None = None):
        p = dict(params or {})
        self.params = p
        self.width = int(p.get("width", 13))
        self.height = int(p.get("height", 13))
        self.layout = p.get("layout", "plus")
        n = int(p.get("n_agents", 4))
        if self.layout == "plus" and not (1 <= n <= 4):
            raise ValidationError("plus layout supports 1..4 agents")
        if self.layout == "lanes" and not (1 <= n <= (self.height - 1) // 2):
            raise ValidationError("too many agents for lanes layout")
        if self.layout not in ("plus", "lanes"):
            raise ValidationError(f"unknown layout {self.layout!r}")
        self.n_agents = n
        self.randomize_spawns = bool(p.get("randomize_spawns", False))
        self.n_resources = int(p.get("n_resources", 0))
        self.resource_total = float(p.get("resource_total", 10.0))
        self.slip = float(p.get("slip", 0.0))
        agent_ids = tuple(f"a{i}" for i in range(n))
        self.spec = GameSpec(
            agent_ids=agent_ids,
            action_spaces={a: ACTIONS for a in agent_ids},
            observation_mode=ObservationMode(
                view="local", broadcast_global=bool(p.get("broadcast_global", False))
            ),
            max_steps=int(p.get("max_steps", 200)),
        )
        self._road = self._build_road()

    def _build_road(self) -> frozenset[tuple[int, int]]:
        cells: set[tuple[int, int]] = set()
        if self.layout == "plus":
            cx, cy = self.width // 2, self.height // 2
            cells.update((x, cy) for x in range(self.width))
            cells.update((cx, y) for y in range(self.height))
        else:
            for i in range(self.n_agents):
                y = 1 + 2 * i
                cells.update((x, y) for x in range(self.width))
        return frozenset(cells)

    def _arm_layout(self) -> list[tuple[tuple[int, int], tuple[int, int], str]]:
        """(spawn, target, inward heading) per arm, N/E/S/W order."""
        cx, cy = self.width // 2, self.height // 2
        w, h = self.width, self.height
        return [
            ((cx, 0), (cx, h - 1), "S"),
            ((w - 1, cy), (0, cy), "W"),
            ((cx, h - 1), (cx, 0), "N"),
            ((0, cy), (w - 1, cy), "E"),
        ]

    def initial_payload(self, rng: np.random.Generator) -> CrossroadsState:
        agents = self.spec.agent_ids
        poses: dict[str, Pose | None] = {}
        targets: dict[str, tuple[int, int]] = {}
        if self.layout == "plus":
            arms = self._arm_layout()[: self.n_agents]
            order = list(range(len(arms)))
            if self.randomize_spawns:
                order = [int(i) for i in rng.permutation(len(arms))]
            for agent, arm_idx in zip(agents, order):
                spawn, target, inward = arms[arm_idx]
                offset = int(rng.integers(0, 3)) if self.randomize_spawns else 0
                dx, dy = DELTAS[inward]
                cell = (spawn[0] + dx * offset, spawn[1] + dy * offset)
                heading = (
                    str(rng.choice(HEADINGS)) if self.randomize_spawns else inward
                )
                poses[agent] = Pose(cell[0], cell[1], heading)
                targets[agent] = target
        else:
            for i, agent in enumerate(agents):
                y = 1 + 2 * i
                offset = int(rng.integers(0, 3)) if self.randomize_spawns else 0
                poses[agent] = Pose(offset, y, "E")
                targets[agent] = (self.width - 1, y)
        pellets: tuple[tuple[int, int], ...] = ()
        pellet_value = 0.0
        if self.n_resources > 0:
            spawn_cells = {p.cell for p in poses.values()}
            candidates = sorted(
                c for c in self._road if c not in spawn_cells and c not in set(targets.values())
            )
            picks = rng.choice(len(candidates), size=self.n_resources, replace=False)
            pellets = tuple(candidates[int(i)] for i in sorted(picks))
            pellet_value = self.resource_total / self.n_resources
        return CrossroadsState(
            width=self.width,
            height=self.height,
            poses=poses,
            alive={a: True for a in agents},
            pellets=pellets,
            collected={},
            pellet_value=pellet_value,
            targets=targets,
            arrived=(),
            road=self._road,
            layout=self.layout,
        )

    def transition(
        self, payload: CrossroadsState, actions: Mapping[str, str], rng: np.random.Generator
    ) -> tuple[CrossroadsState, dict[str, Any]]:
        acts = dict(actions)
        if self.slip > 0.0:
            for agent in self.spec.agent_ids:
                if rng.random() < self.slip and acts.get(agent) == FORWARD:
                    acts[agent] = "noop"
        poses = apply_turns(payload.poses, acts)
        outcome = resolve_moves(poses, acts, lambda c: c in payload.road)
        poses = outcome.poses
        pellets, collected, gains = collect_pellets(
            poses, payload.pellets, payload.pellet_value, payload.collected
        )
        arrivals = [
            a
            for a in self.spec.agent_ids
            if poses.get(a) is not None and poses[a].cell == payload.targets[a]
        ]
        for agent in arrivals:
            poses[agent] = None
        info = {
            "collisions": outcome.collisions,
            "completions": arrivals,
            "collections": gains,
            "deaths": [],
        }
        next_payload = replace(
            payload,
            poses=poses,
            pellets=pellets,
            collected=collected,
            arrived=payload.arrived + tuple(arrivals),
        )
        return next_payload, info

    def terminal(self, payload: CrossroadsState) -> bool:
        return all(payload.poses[a] is None for a in self.spec.agent_ids)

    def observe(self, payload: CrossroadsState, agent: str) -> dict[str, Any]:
        pose = payload.poses.get(agent)
        if pose is None or not payload.alive.get(agent, False):
            return dict(TERMINAL_OBSERVATION)
        obs: dict[str, Any] = {
            "pos": [pose.x, pose.y],
            "heading": pose.heading,
            "target": list(payload.targets[agent]),
        }
        # Corridor walls block line of sight in the lanes layout.
        obs["nearest"] = (
            None if payload.layout == "lanes" else nearest_offset(payload.poses, agent)
        )
        return obs

    def base_rows(self, payload: CrossroadsState) -> list[list[str]]:
        rows = [
            ["." if (x, y) in payload.road else "#" for x in range(self.width)]
            for y in range(self.height)
        ]
        for tx, ty in payload.targets.values():
            rows[ty][tx] = "T"
        for px, py in payload.pellets:
            rows[py][px] = "*"
        return rows

    def default_tree_config(self) -> dict[str, Any]:
        agents = self.spec.agent_ids
        nodes = [
            {
                "id": "root",
                "children": [f"n_{a}" for a in agents],
                "bmars": "NL",
                "reward": None,
                "weight": 1.0,
            }
        ]
        for a in agents:
            nodes.append(
                {
                    "id": f"n_{a}",
                    "children": [{"agent": a}],
                    "bmars": "IS",
                    "reward": {"kind": "own_progress", "params": {}},
                    "weight": 1.0,
                }
            )
        return {"nodes": nodes, "root": "root"}
