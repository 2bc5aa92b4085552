"""Reward-scheme classes and the library of ready-to-use reward kinds.

Five classes partition joint reward functions by how episode returns respond
to policy changes:

  NL  non-learnable   — no agent can change its own return
  IS  isolated        — no agent can change another agent's return
  CP  competitive     — the population's summed return is constant
  CL  collaborative   — no pair of agents has conflicting interests
  CC  mixed           — anything else (catch-all)

Each shipped kind declares the class it is designed to occupy; the verifier
checks the declaration by sampling (see arena.verifier).

Kinds that promise exact conservation (the rank ladders, resource splits)
are built from dyadic values so per-episode sums are float-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable

from arena.core import NOOP, RewardContext, ValidationError


class RewardClass(str, Enum):
    NL = "NL"
    IS = "IS"
    CP = "CP"
    CL = "CL"
    CC = "CC"


TURN_ACTIONS = ("turn_left", "turn_right")


def _ladder(n: int) -> list[float]:
    """Zero-centered rank values with 1/2 spacing: summing to zero exactly."""
    return [(2 * i - (n - 1)) / 2 for i in range(n)]


def _rank_payments(
    ctx: RewardContext,
    scope: tuple[str, ...],
    event_order: list[str],
    events_now: list[str],
    first_is_best: bool,
    sign: float,
) -> dict[str, float]:
    """Pay ladder values as ordering events land; settle stragglers at the end.

    Agents tied in one step share the exact mean of their ladder positions;
    agents with no event by episode end share the remaining positions.
    """
    n = len(scope)
    ladder = _ladder(n)
    if first_is_best:
        ladder = ladder[::-1]
    scoped_order = [a for a in event_order if a in scope]
    now = [a for a in events_now if a in scope]
    before = len(scoped_order) - len(now)
    rewards = {a: 0.0 for a in scope}
    if now:
        values = ladder[before : before + len(now)]
        share = (values[0] + values[-1]) / 2  # exact mean of an arithmetic run
        for agent in now:
            rewards[agent] = sign * share
    if ctx.done:
        placed = set(scoped_order)
        stragglers = [a for a in scope if a not in placed]
        if stragglers:
            values = ladder[len(scoped_order) :]
            share = (values[0] + values[-1]) / 2
            for agent in stragglers:
                rewards[agent] += sign * share
    return rewards


def _constant(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    # One-time payout: per-step payment would leak episode length, which is
    # policy-dependent in games with early termination.
    value = float(params["value"]) if ctx.state.step_index == 0 else 0.0
    return {a: value for a in scope}


def _step_schedule(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    series = params["values"]
    t = ctx.state.step_index
    value = float(series[t]) if t < len(series) else 0.0
    if ctx.done and ctx.next_state.step_index < len(series):
        # Settle the undelivered tail so the episode total stays frozen.
        value += float(sum(series[ctx.next_state.step_index :]))
    return {a: value for a in scope}


def _own_progress(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    gain = float(params.get("gain", 1.0))
    return {
        a: gain * (ctx.next_state.payload.progress(a) - ctx.state.payload.progress(a))
        for a in scope
    }


def _action_cost(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    cost = float(params.get("cost", 0.1))
    return {a: (-cost if ctx.actions.get(a, NOOP) != NOOP else 0.0) for a in scope}


def _steady_motion(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    penalty = float(params.get("penalty", 0.1))
    return {a: (-penalty if ctx.actions.get(a) in TURN_ACTIONS else 0.0) for a in scope}


def _team_living_time(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    sign = float(params.get("sign", 1.0))
    alive = ctx.state.payload.group_active(frozenset(scope))
    value = sign if alive else 0.0
    return {a: value for a in scope}


def _shared_progress(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    gain = float(params.get("gain", 1.0))
    fs = frozenset(scope)
    delta = gain * (ctx.next_state.payload.team_metric(fs) - ctx.state.payload.team_metric(fs))
    return {a: delta for a in scope}


def _resource_share(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    total = float(params["total"])
    collections = ctx.info.get("collections", {})
    rewards = {a: float(collections.get(a, 0.0)) for a in scope}
    if ctx.done:
        collected = sum(ctx.next_state.payload.collected_total(a) for a in scope)
        remainder = total - collected
        share = remainder / len(scope)
        for a in scope:
            rewards[a] += share
    return rewards


def _death_order_rank(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    sign = float(params.get("sign", 1.0))
    return _rank_payments(
        ctx,
        scope,
        event_order=list(ctx.next_state.payload.death_order()),
        events_now=list(ctx.info.get("deaths", [])),
        first_is_best=False,
        sign=sign,
    )


def _completion_rank(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    sign = float(params.get("sign", 1.0))
    return _rank_payments(
        ctx,
        scope,
        event_order=list(ctx.next_state.payload.completion_order()),
        events_now=list(ctx.info.get("completions", [])),
        first_is_best=True,
        sign=sign,
    )


def _mixture(ctx: RewardContext, scope: tuple[str, ...], params: dict) -> dict[str, float]:
    rewards = {a: 0.0 for a in scope}
    for part in params["parts"]:
        fn = make_reward(part["kind"], part.get("params", {}), scope)
        weight = float(part.get("weight", 1.0))
        for agent, value in fn.step_rewards(ctx).items():
            rewards[agent] += weight * value
    return rewards


_KindFn = Callable[[RewardContext, tuple[str, ...], dict], dict[str, float]]

KINDS: dict[str, tuple[RewardClass, _KindFn]] = {
    "constant": (RewardClass.NL, _constant),
    "step_schedule": (RewardClass.NL, _step_schedule),
    "own_progress": (RewardClass.IS, _own_progress),
    "action_cost": (RewardClass.IS, _action_cost),
    "steady_motion": (RewardClass.IS, _steady_motion),
    "team_living_time": (RewardClass.CL, _team_living_time),
    "shared_progress": (RewardClass.CL, _shared_progress),
    "resource_share": (RewardClass.CP, _resource_share),
    "death_order_rank": (RewardClass.CP, _death_order_rank),
    "completion_rank": (RewardClass.CP, _completion_rank),
    "mixture": (RewardClass.CC, _mixture),
}


@dataclass
class RewardFunction:
    """A deterministic per-step reward over a fixed agent scope."""

    kind: str
    params: dict[str, Any]
    declared_class: RewardClass
    scope: tuple[str, ...]

    def step_rewards(self, ctx: RewardContext) -> dict[str, float]:
        _, fn = KINDS[self.kind]
        return fn(ctx, self.scope, self.params)

    def to_jsonable(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": self.params}


def _validate_params(kind: str, params: dict[str, Any]) -> None:
    if kind == "constant" and "value" not in params:
        raise ValidationError("constant requires params.value")
    if kind == "step_schedule" and not params.get("values"):
        raise ValidationError("step_schedule requires a non-empty params.values")
    if kind == "resource_share":
        if float(params.get("total", 0.0)) <= 0.0:
            raise ValidationError("resource_share requires params.total > 0")
    if kind == "mixture":
        parts = params.get("parts")
        if not parts:
            raise ValidationError("mixture requires a non-empty params.parts")
        for part in parts:
            if part["kind"] not in KINDS:
                raise ValidationError(f"unknown mixture part kind {part['kind']!r}")
    if kind in ("action_cost",) and float(params.get("cost", 0.1)) < 0:
        raise ValidationError("action_cost requires cost >= 0")


def make_reward(kind: str, params: dict[str, Any] | None, scope: Iterable[str]) -> RewardFunction:
    """Build a shipped reward kind with its designed class declaration."""
    if kind not in KINDS:
        raise ValidationError(f"unknown reward kind {kind!r}")
    params = dict(params or {})
    _validate_params(kind, params)
    scope_t = tuple(scope)
    if not scope_t:
        raise ValidationError("reward scope must be non-empty")
    declared, _ = KINDS[kind]
    return RewardFunction(kind=kind, params=params, declared_class=declared, scope=scope_t)


@dataclass
class JointRewardFunction:
    """Weighted assembly of reward functions covering a population."""

    components: list[tuple[float, RewardFunction]]
    agents: tuple[str, ...]

    def evaluate(self, ctx: RewardContext) -> dict[str, float]:
        totals = {a: 0.0 for a in self.agents}
        for weight, fn in self.components:
            missing = [a for a in fn.scope if a not in totals]
            if missing:
                raise ValidationError(f"reward scope not covered by population: {missing}")
            for agent, value in fn.step_rewards(ctx).items():
                totals[agent] += weight * value
        return totals
