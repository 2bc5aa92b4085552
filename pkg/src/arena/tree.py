"""Social tree: the agent/team hierarchy that composes per-agent rewards.

Leaves are agents; every internal node may carry a reward function over its
descendant agents, a declared scheme class, and a weight. An agent's step
reward is the weighted sum of all its ancestor nodes' reward values,
accumulated root-to-leaf in a fixed order so composition is exact.

Trees are immutable values: edits return new trees. Broadcast boards are
session-local mutable state created from a tree, never stored in it.

Config file format (canonical form round-trips byte-exactly):

    {
      "game": {"name": ..., "params": {...}},        # optional sibling section
      "nodes": [
        {"id": "root",
         "children": ["team_a", {"agent": "a2"}],    # node ids or agent leaves
         "bmars": "CP",
         "reward": {"kind": "completion_rank", "params": {}},
         "weight": 1.0},
        ...
      ],
      "root": "root"
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Mapping

from arena.core import ArenaError, GameSpec, RewardContext, ValidationError
from arena.rewards import JointRewardFunction, RewardClass, RewardFunction, make_reward


class BoardAccessError(ArenaError):
    """Board access attempted by a non-descendant agent."""


@dataclass(frozen=True)
class AgentLeaf:
    agent_id: str


@dataclass(frozen=True)
class TreeNode:
    node_id: str
    children: tuple["TreeNode | AgentLeaf", ...]
    scheme: RewardClass
    reward: RewardFunction | None
    weight: float = 1.0

    def descendant_agents(self) -> tuple[str, ...]:
        agents: list[str] = []
        for child in self.children:
            if isinstance(child, AgentLeaf):
                agents.append(child.agent_id)
            else:
                agents.extend(child.descendant_agents())
        return tuple(agents)

    def walk(self) -> Iterator["TreeNode"]:
        yield self
        for child in self.children:
            if isinstance(child, TreeNode):
                yield from child.walk()


@dataclass(frozen=True)
class SocialTree:
    root: TreeNode
    # When False (default), single-agent nodes stop paying an agent once it
    # is dead; team/global nodes keep scoring dead agents.
    dead_agents_keep_agent_level_rewards: bool = False

    def nodes(self) -> list[TreeNode]:
        return list(self.root.walk())

    def find(self, node_id: str) -> TreeNode | None:
        for node in self.root.walk():
            if node.node_id == node_id:
                return node
        return None

    def agent_ids(self) -> tuple[str, ...]:
        return self.root.descendant_agents()

    def agent_index(self) -> dict[str, tuple[str, ...]]:
        """Map agent -> ancestor node-id path, root first."""
        index: dict[str, tuple[str, ...]] = {}

        def visit(node: TreeNode, path: tuple[str, ...]) -> None:
            here = path + (node.node_id,)
            for child in node.children:
                if isinstance(child, AgentLeaf):
                    index.setdefault(child.agent_id, here)
                else:
                    visit(child, here)

        visit(self.root, ())
        return index

    def validate_against(self, spec: GameSpec) -> None:
        violations = validate_tree(self, spec)
        if violations:
            raise ValidationError("; ".join(violations))

    def joint_reward(self) -> JointRewardFunction:
        components = [
            (node.weight, node.reward) for node in self.root.walk() if node.reward is not None
        ]
        return JointRewardFunction(components=components, agents=self.agent_ids())

    def step_rewards(self, ctx: RewardContext) -> dict[str, float]:
        totals, _ = self.step_rewards_breakdown(ctx)
        return totals

    def step_rewards_breakdown(
        self, ctx: RewardContext
    ) -> tuple[dict[str, float], dict[str, dict[str, float]]]:
        """Composed rewards plus the per-node contribution map."""
        agents = self.agent_ids()
        totals = {a: 0.0 for a in agents}
        breakdown: dict[str, dict[str, float]] = {}
        alive = ctx.state.alive_flags
        for node in self.root.walk():
            if node.reward is None:
                continue
            values = node.reward.step_rewards(ctx)
            contributions: dict[str, float] = {}
            agent_level = len(node.reward.scope) == 1
            for agent, value in values.items():
                if (
                    agent_level
                    and not self.dead_agents_keep_agent_level_rewards
                    and not alive.get(agent, True)
                ):
                    value = 0.0
                contribution = node.weight * value
                contributions[agent] = contribution
                if agent not in totals:
                    raise ValidationError(f"reward scope agent {agent!r} not in tree population")
                totals[agent] += contribution
            breakdown[node.node_id] = contributions
        return totals, breakdown


def validate_tree(tree: SocialTree, spec: GameSpec | None = None) -> list[str]:
    """Structural violation report; the tree is valid iff the report is empty."""
    violations: list[str] = []
    seen_ids: set[str] = set()
    seen_agents: set[str] = set()
    for node in tree.root.walk():
        if node.node_id in seen_ids:
            violations.append(f"duplicate node id {node.node_id!r}")
        seen_ids.add(node.node_id)
        if node.weight < 0:
            violations.append(f"negative weight on node {node.node_id!r}")
        if not node.children:
            violations.append(f"node {node.node_id!r} has no descendants")
        for child in node.children:
            if isinstance(child, AgentLeaf):
                if child.agent_id in seen_agents:
                    violations.append(f"duplicate leaf for agent {child.agent_id!r}")
                seen_agents.add(child.agent_id)
        if node.reward is not None:
            scope = tuple(node.reward.scope)
            descendants = node.descendant_agents()
            if sorted(scope) != sorted(descendants):
                violations.append(
                    f"reward scope of node {node.node_id!r} does not match its descendants"
                )
    if spec is not None:
        tree_agents = set(tree.agent_ids())
        spec_agents = set(spec.agent_ids)
        for orphan in sorted(spec_agents - tree_agents):
            violations.append(f"orphan agent {orphan!r} missing from tree")
        for extra in sorted(tree_agents - spec_agents):
            violations.append(f"tree agent {extra!r} not in game spec")
    return violations


# ---------------------------------------------------------------------------
# Config file format


def _node_to_config(node: TreeNode) -> dict[str, Any]:
    children: list[Any] = []
    for child in node.children:
        if isinstance(child, AgentLeaf):
            children.append({"agent": child.agent_id})
        else:
            children.append(child.node_id)
    return {
        "id": node.node_id,
        "children": children,
        "bmars": node.scheme.value,
        "reward": None if node.reward is None else node.reward.to_jsonable(),
        "weight": node.weight,
    }


def tree_to_config(tree: SocialTree, game: dict[str, Any] | None = None) -> dict[str, Any]:
    config: dict[str, Any] = {}
    if game is not None:
        config["game"] = game
    config["nodes"] = [_node_to_config(node) for node in tree.root.walk()]
    config["root"] = tree.root.node_id
    return config


def dumps_config(config: Mapping[str, Any]) -> str:
    return json.dumps(config, indent=2) + "\n"


def tree_from_config(config: Mapping[str, Any]) -> SocialTree:
    """Build a tree from the file format; raises on unbuildable structure."""
    raw_nodes = config.get("nodes")
    root_id = config.get("root")
    if not raw_nodes or root_id is None:
        raise ValidationError("config requires 'nodes' and 'root'")
    by_id: dict[str, Mapping[str, Any]] = {}
    for raw in raw_nodes:
        if raw["id"] in by_id:
            raise ValidationError(f"duplicate node id {raw['id']!r} in config")
        by_id[raw["id"]] = raw
    if root_id not in by_id:
        raise ValidationError(f"root node {root_id!r} not defined")

    building: set[str] = set()

    def build(node_id: str) -> TreeNode:
        if node_id in building:
            raise ValidationError(f"cycle through node {node_id!r}")
        raw = by_id.get(node_id)
        if raw is None:
            raise ValidationError(f"child node {node_id!r} not defined")
        building.add(node_id)
        children: list[TreeNode | AgentLeaf] = []
        for entry in raw.get("children", []):
            if isinstance(entry, str):
                children.append(build(entry))
            elif isinstance(entry, Mapping) and "agent" in entry:
                children.append(AgentLeaf(agent_id=entry["agent"]))
            else:
                raise ValidationError(f"bad child entry {entry!r} in node {node_id!r}")
        building.discard(node_id)
        node = TreeNode(
            node_id=node_id,
            children=tuple(children),
            scheme=RewardClass.NL,
            reward=None,
            weight=float(raw.get("weight", 1.0)),
        )
        reward_cfg = raw.get("reward")
        reward = None
        if reward_cfg is not None:
            scope = node.descendant_agents()
            reward = make_reward(reward_cfg["kind"], reward_cfg.get("params", {}), scope)
        scheme_tag = raw.get("bmars")
        if scheme_tag is None:
            scheme = reward.declared_class if reward is not None else RewardClass.NL
        else:
            try:
                scheme = RewardClass(scheme_tag)
            except ValueError:
                raise ValidationError(f"unknown bmars tag {scheme_tag!r}") from None
        return replace(node, reward=reward, scheme=scheme)

    root = build(root_id)
    referenced = {n.node_id for n in root.walk()}
    unreferenced = sorted(set(by_id) - referenced)
    if unreferenced:
        raise ValidationError(f"nodes not reachable from root: {unreferenced}")
    return SocialTree(root=root)


def validate_config(config: Mapping[str, Any], spec: GameSpec | None = None) -> list[str]:
    """Report-returning validation straight from config data."""
    try:
        tree = tree_from_config(config)
    except (ValidationError, KeyError, TypeError) as exc:
        return [str(exc)]
    return validate_tree(tree, spec)


def load_config_file(path: str) -> tuple[SocialTree, dict[str, Any] | None]:
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    return tree_from_config(config), config.get("game")


def save_config_file(path: str, tree: SocialTree, game: dict[str, Any] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_config(tree_to_config(tree, game)))


# ---------------------------------------------------------------------------
# Edits


def _fresh_id(base: str, taken: set[str]) -> str:
    candidate = f"{base}_copy"
    n = 2
    while candidate in taken:
        candidate = f"{base}_copy{n}"
        n += 1
    return candidate


def _rebuild(node: TreeNode, fn) -> TreeNode:
    """Apply fn bottom-up; fn may return a replacement node or None to drop."""
    children: list[TreeNode | AgentLeaf] = []
    for child in node.children:
        if isinstance(child, AgentLeaf):
            children.append(child)
        else:
            rebuilt = _rebuild(child, fn)
            if rebuilt is not None:
                children.append(rebuilt)
    return fn(replace(node, children=tuple(children)))


def _rescope(node: TreeNode) -> TreeNode:
    """Refresh reward scopes after a structural change."""
    children = tuple(
        child if isinstance(child, AgentLeaf) else _rescope(child) for child in node.children
    )
    node = replace(node, children=children)
    if node.reward is not None:
        node = replace(
            node, reward=replace(node.reward, scope=node.descendant_agents())
        )
    return node


def _clone_subtree(node: TreeNode, taken_ids: set[str], taken_agents: set[str]) -> TreeNode:
    children: list[TreeNode | AgentLeaf] = []
    for child in node.children:
        if isinstance(child, AgentLeaf):
            fresh_agent = _fresh_id(child.agent_id, taken_agents)
            taken_agents.add(fresh_agent)
            children.append(AgentLeaf(agent_id=fresh_agent))
        else:
            children.append(_clone_subtree(child, taken_ids, taken_agents))
    fresh = _fresh_id(node.node_id, taken_ids)
    taken_ids.add(fresh)
    return replace(node, node_id=fresh, children=tuple(children))


def edit_tree(tree: SocialTree, edit: Mapping[str, Any]) -> SocialTree:
    """Apply one move/duplicate/delete/add edit; rejects invalid results atomically.

    Edit payloads:
      {"op": "move", "node": id, "new_parent": id}
      {"op": "duplicate", "node": id}
      {"op": "delete", "node": id}
      {"op": "add", "parent": id, "node": {node config fragment}}
      {"op": "set_weight", "node": id, "weight": w}
    """
    op = edit.get("op")
    root = tree.root
    if op == "delete":
        target = edit["node"]
        if target == root.node_id:
            raise ValidationError("cannot delete root")
        if tree.find(target) is None:
            raise ValidationError(f"no node {target!r}")
        new_root = _rebuild(root, lambda n: None if n.node_id == target else n)
    elif op == "duplicate":
        target_id = edit["node"]
        target = tree.find(target_id)
        if target is None:
            raise ValidationError(f"no node {target_id!r}")
        if target_id == root.node_id:
            raise ValidationError("cannot duplicate root")
        taken_ids = {n.node_id for n in root.walk()}
        taken_agents = set(tree.agent_ids())
        clone = _clone_subtree(target, taken_ids, taken_agents)

        def add_clone(n: TreeNode) -> TreeNode:
            if any(isinstance(c, TreeNode) and c.node_id == target_id for c in n.children):
                return replace(n, children=n.children + (clone,))
            return n

        new_root = _rebuild(root, add_clone)
    elif op == "move":
        target_id = edit["node"]
        parent_id = edit["new_parent"]
        target = tree.find(target_id)
        if target is None or tree.find(parent_id) is None:
            raise ValidationError("move target or parent missing")
        if target_id == root.node_id:
            raise ValidationError("cannot move root")
        if any(n.node_id == parent_id for n in target.walk()):
            raise ValidationError("cannot move a node under its own subtree")
        pruned = _rebuild(root, lambda n: None if n.node_id == target_id else n)

        def attach(n: TreeNode) -> TreeNode:
            if n.node_id == parent_id:
                return replace(n, children=n.children + (target,))
            return n

        new_root = _rebuild(pruned, attach)
    elif op == "add":
        parent_id = edit["parent"]
        if tree.find(parent_id) is None:
            raise ValidationError(f"no node {parent_id!r}")
        fragment = dict(edit["node"])
        fragment.setdefault("children", [])
        sub = tree_from_config({"nodes": [fragment], "root": fragment["id"]}).root

        def attach_new(n: TreeNode) -> TreeNode:
            if n.node_id == parent_id:
                return replace(n, children=n.children + (sub,))
            return n

        new_root = _rebuild(root, attach_new)
    elif op == "set_weight":
        target_id = edit["node"]
        if tree.find(target_id) is None:
            raise ValidationError(f"no node {target_id!r}")
        weight = float(edit["weight"])

        def set_w(n: TreeNode) -> TreeNode:
            return replace(n, weight=weight) if n.node_id == target_id else n

        new_root = _rebuild(root, set_w)
    else:
        raise ValidationError(f"unknown edit op {op!r}")

    edited = replace(tree, root=_rescope(new_root))
    violations = validate_tree(edited)
    if violations:
        raise ValidationError("edit rejected: " + "; ".join(violations))
    return edited


# ---------------------------------------------------------------------------
# Broadcast boards

BOARD_CAPACITY = 16


@dataclass
class BoardSlot:
    author: str
    payload: Any
    step: int


@dataclass
class BroadcastBoard:
    capacity: int = BOARD_CAPACITY
    slots: list[BoardSlot] = field(default_factory=list)

    def append(self, slot: BoardSlot) -> None:
        self.slots.append(slot)
        if len(self.slots) > self.capacity:
            del self.slots[0 : len(self.slots) - self.capacity]


class Boards:
    """Per-session message boards, one per tree node, descendant-gated."""

    def __init__(self, tree: SocialTree, capacity: int = BOARD_CAPACITY):
        self._tree = tree
        self._boards = {node.node_id: BroadcastBoard(capacity) for node in tree.nodes()}

    def _check_access(self, node_id: str, agent_id: str) -> None:
        node = self._tree.find(node_id)
        if node is None:
            raise ValidationError(f"no node {node_id!r}")
        if agent_id not in node.descendant_agents():
            raise BoardAccessError(f"agent {agent_id!r} is not a descendant of {node_id!r}")

    def write(self, node_id: str, agent_id: str, payload: Any, step: int = 0) -> None:
        self._check_access(node_id, agent_id)
        self._boards[node_id].append(BoardSlot(author=agent_id, payload=payload, step=step))

    def read(self, node_id: str, agent_id: str) -> list[BoardSlot]:
        self._check_access(node_id, agent_id)
        return list(self._boards[node_id].slots)
