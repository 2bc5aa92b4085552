"""Abstract Markov game: specs, states, episode execution.

A game supplies dynamics (initial layout, transition, observation,
termination); this module owns the episode lifecycle around them and the
determinism contract: every run is fully reproducible from
(game, tree, policies, seed).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Protocol, Sequence

import numpy as np

from arena.seeding import Seed

NOOP = "noop"


class ArenaError(Exception):
    """Base class for toolkit errors."""


class ValidationError(ArenaError):
    """A spec or config value violates its invariants."""


class ConfigurationError(ArenaError):
    """Objects that must agree (tree vs. game spec) do not."""


class ActionError(ArenaError):
    """A live agent submitted an action outside its action set."""


class LifecycleError(ArenaError):
    """An operation was applied in the wrong episode phase."""


def canonical_json(obj: Any) -> str:
    """Deterministic JSON used for hashing and byte-stable reports."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ObservationMode:
    """Per-agent view descriptor plus the global-state broadcast flag."""

    view: str = "local"
    broadcast_global: bool = False


@dataclass(frozen=True)
class GameSpec:
    agent_ids: tuple[str, ...]
    action_spaces: Mapping[str, tuple[str, ...]]
    observation_mode: ObservationMode = ObservationMode()
    max_steps: int = 200

    def validate(self) -> None:
        if not self.agent_ids:
            raise ValidationError("agent_ids must be non-empty")
        if len(set(self.agent_ids)) != len(self.agent_ids):
            raise ValidationError("agent_ids must be unique")
        for agent in self.agent_ids:
            if not self.action_spaces.get(agent):
                raise ValidationError(f"agent {agent!r} has an empty action set")
        if self.max_steps <= 0:
            raise ValidationError("max_steps must be positive")


class Payload(Protocol):
    """Game-specific state payload consumed by reward functions."""

    def alive_map(self) -> dict[str, bool]: ...
    def active(self, agent: str) -> bool: ...
    def progress(self, agent: str) -> float: ...
    def team_metric(self, scope: frozenset[str]) -> float: ...
    def group_active(self, scope: frozenset[str]) -> bool: ...
    def to_jsonable(self) -> Any: ...


@dataclass
class GlobalState:
    payload: Any
    step_index: int
    alive_flags: dict[str, bool]

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "step": self.step_index,
            "alive": dict(sorted(self.alive_flags.items())),
            "payload": self.payload.to_jsonable(),
        }


@dataclass
class StepResult:
    next_state: GlobalState
    observations: dict[str, Any]
    step_rewards: dict[str, float]
    done: bool
    info: dict[str, Any]


@dataclass
class RewardContext:
    """Inputs a reward function may read for one transition."""

    state: GlobalState
    actions: dict[str, str]
    next_state: GlobalState
    info: dict[str, Any]
    done: bool


class RewardComposer(Protocol):
    """What a social tree provides to the episode loop."""

    def agent_ids(self) -> tuple[str, ...]: ...
    def validate_against(self, spec: GameSpec) -> None: ...
    def step_rewards(self, ctx: RewardContext) -> dict[str, float]: ...


class PolicyLike(Protocol):
    def act(self, observation: Any, rng: np.random.Generator) -> str: ...


class Game(Protocol):
    """Dynamics bundle returned by the games module."""

    name: str
    spec: GameSpec
    params: dict[str, Any]

    def initial_payload(self, rng: np.random.Generator) -> Any: ...
    def transition(
        self, payload: Any, actions: Mapping[str, str], rng: np.random.Generator
    ) -> tuple[Any, dict[str, Any]]: ...
    def observe(self, payload: Any, agent: str) -> dict[str, Any]: ...
    def terminal(self, payload: Any) -> bool: ...


TERMINAL_OBSERVATION = {"terminal": True}


@dataclass
class EpisodeTrace:
    states: list[GlobalState]
    joint_actions: list[dict[str, str]]
    step_rewards: dict[str, list[float]]
    returns: dict[str, float]
    length: int
    seed: Seed
    infos: list[dict[str, Any]] = field(default_factory=list)

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "seed": self.seed.value,
            "length": self.length,
            "states": [s.to_jsonable() for s in self.states],
            "joint_actions": self.joint_actions,
            "step_rewards": {a: r for a, r in sorted(self.step_rewards.items())},
            "returns": {a: r for a, r in sorted(self.returns.items())},
        }

    def trace_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_jsonable()).encode()).hexdigest()


def _observations(game: Game, state: GlobalState) -> dict[str, Any]:
    spec = game.spec
    obs: dict[str, Any] = {}
    global_view = state.to_jsonable() if spec.observation_mode.broadcast_global else None
    for agent in spec.agent_ids:
        view = game.observe(state.payload, agent)
        if global_view is not None:
            view = dict(view)
            view["global"] = global_view
        obs[agent] = view
    return obs


def reset(game: Game, tree: RewardComposer | None, seed: Seed) -> tuple[GlobalState, dict[str, Any]]:
    """Draw the initial state from the game's layout rule under `seed`."""
    game.spec.validate()
    if tree is not None:
        tree.validate_against(game.spec)
    payload = game.initial_payload(seed.stream("map"))
    state = GlobalState(payload=payload, step_index=0, alive_flags=payload.alive_map())
    return state, _observations(game, state)


def step(
    game: Game,
    tree: RewardComposer,
    state: GlobalState,
    joint_action: Mapping[str, str],
    rng: np.random.Generator,
) -> StepResult:
    """Advance one lockstep transition and compose per-agent rewards."""
    spec = game.spec
    if game.terminal(state.payload) or state.step_index >= spec.max_steps:
        raise LifecycleError("step() called on a terminal state")
    actions: dict[str, str] = {}
    for agent in spec.agent_ids:
        action = joint_action.get(agent, NOOP)
        if not state.payload.active(agent):
            # Dead/finished agents cannot influence the transition.
            actions[agent] = NOOP
            continue
        if action not in spec.action_spaces[agent]:
            raise ActionError(f"action {action!r} not in action set of agent {agent!r}")
        actions[agent] = action
    next_payload, info = game.transition(state.payload, actions, rng)
    next_state = GlobalState(
        payload=next_payload,
        step_index=state.step_index + 1,
        alive_flags=next_payload.alive_map(),
    )
    done = game.terminal(next_payload) or next_state.step_index >= spec.max_steps
    info["episode_done"] = done
    ctx = RewardContext(state=state, actions=actions, next_state=next_state, info=info, done=done)
    rewards = tree.step_rewards(ctx)
    return StepResult(
        next_state=next_state,
        observations=_observations(game, next_state),
        step_rewards=rewards,
        done=done,
        info=info,
    )


def run_episode(
    game: Game,
    tree: RewardComposer,
    policies: Mapping[str, PolicyLike],
    seed: Seed,
    observer=None,
) -> EpisodeTrace:
    """Execute reset-then-step until done; returns the full trace.

    Per-agent action sampling uses independent substreams so that one
    agent's behavior never perturbs another's random draws (required by
    the paired-episode verification primitive).
    """
    spec = game.spec
    missing = [a for a in spec.agent_ids if a not in policies]
    if missing:
        raise ConfigurationError(f"no policy for agents: {missing}")
    state, observations = reset(game, tree, seed)
    transition_rng = seed.stream("transition")
    agent_rngs = {agent: seed.stream(f"policy/{agent}") for agent in spec.agent_ids}

    states = [state]
    joint_actions: list[dict[str, str]] = []
    infos: list[dict[str, Any]] = []
    step_rewards: dict[str, list[float]] = {agent: [] for agent in spec.agent_ids}

    done = game.terminal(state.payload) or spec.max_steps == 0
    while not done:
        actions = {
            agent: policies[agent].act(observations[agent], agent_rngs[agent])
            for agent in spec.agent_ids
        }
        result = step(game, tree, state, actions, transition_rng)
        state = result.next_state
        observations = result.observations
        states.append(state)
        joint_actions.append(actions)
        infos.append(result.info)
        for agent in spec.agent_ids:
            step_rewards[agent].append(result.step_rewards[agent])
        if observer is not None:
            observer(result)
        done = result.done

    returns = {agent: float(sum(step_rewards[agent])) for agent in spec.agent_ids}
    return EpisodeTrace(
        states=states,
        joint_actions=joint_actions,
        step_rewards=step_rewards,
        returns=returns,
        length=len(joint_actions),
        seed=seed,
        infos=infos,
    )
