"""Trajectory branch counting: the determinism/stochasticity benchmark.

Replays one fixed open-loop action sequence many times and counts distinct
trajectory hashes. With injection off every run pins the same seed, so a
deterministic engine must produce exactly one branch; with injection on each
run draws a fresh seed and randomizes the map layout and spawns.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from arena.core import canonical_json, reset, step
from arena.seeding import Seed
from arena.tree import SocialTree, tree_from_config


@dataclass
class BranchReport:
    repeats: int
    distinct_branches: int
    injection: bool

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "repeats": self.repeats,
            "distinct_branches": self.distinct_branches,
            "injection": "on" if self.injection else "off",
        }


def _zero_tree(agent_ids: Sequence[str]) -> SocialTree:
    return tree_from_config(
        {
            "nodes": [
                {
                    "id": "root",
                    "children": [{"agent": a} for a in agent_ids],
                    "bmars": "NL",
                    "reward": {"kind": "constant", "params": {"value": 0.0}},
                    "weight": 1.0,
                }
            ],
            "root": "root",
        }
    )


def random_action_sequence(actions: Sequence[str], length: int, seed: Seed) -> list[str]:
    rng = seed.stream("actions")
    return [str(actions[int(i)]) for i in rng.integers(0, len(actions), size=length)]


def _replay_hash(game, tree, sequence: Sequence[str], seed: Seed) -> str:
    state, _ = reset(game, tree, seed)
    rng = seed.stream("transition")
    digest = hashlib.sha256(canonical_json(state.to_jsonable()).encode())
    for action in sequence:
        if game.terminal(state.payload) or state.step_index >= game.spec.max_steps:
            break
        joint = {a: action for a in game.spec.agent_ids}
        result = step(game, tree, state, joint, rng)
        state = result.next_state
        digest.update(canonical_json(state.to_jsonable()).encode())
    return digest.hexdigest()


def count_branches(
    make_game,
    name: str,
    params: Mapping[str, Any] | None,
    action_sequence: Sequence[str],
    repeats: int,
    injection: bool,
    seed: Seed,
) -> BranchReport:
    params = dict(params or {})
    params["randomize_spawns"] = bool(injection)
    game = make_game(name, params)
    tree = _zero_tree(game.spec.agent_ids)
    hashes: set[str] = set()
    for r in range(repeats):
        run_seed = seed.child("branch-run", r) if injection else seed.child("branch-pinned")
        hashes.add(_replay_hash(game, tree, action_sequence, run_seed))
    return BranchReport(repeats=repeats, distinct_branches=len(hashes), injection=injection)
