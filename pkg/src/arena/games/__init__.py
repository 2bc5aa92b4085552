"""Desk-scale games: crossroads, pushbox, platform survival."""

from __future__ import annotations

from typing import Any, Mapping

from arena.core import ValidationError
from arena.games.branches import BranchReport, count_branches, random_action_sequence
from arena.games.crossroads import Crossroads
from arena.games.pushbox import PushBox
from arena.games.render import FrameGrid, render_topdown
from arena.games.survival import PlatformSurvival
from arena.tree import SocialTree, tree_from_config

GAMES = {
    "crossroads": Crossroads,
    "pushbox": PushBox,
    "platform_survival": PlatformSurvival,
}


def make_game(name: str, params: Mapping[str, Any] | None = None):
    """Instantiate a named game with validated parameters."""
    cls = GAMES.get(name)
    if cls is None:
        raise ValidationError(f"unknown game {name!r}; choose from {sorted(GAMES)}")
    return cls(params)


def default_tree(game) -> SocialTree:
    return tree_from_config(game.default_tree_config())


__all__ = [
    "BranchReport",
    "Crossroads",
    "FrameGrid",
    "GAMES",
    "PlatformSurvival",
    "PushBox",
    "count_branches",
    "default_tree",
    "make_game",
    "random_action_sequence",
    "render_topdown",
]
