"""Softmax policies over bucketed observations.

The observation bucketing (stable hash of position/heading/neighbor fields
into a fixed index space) keeps every policy a finite parameter matrix of
shape (buckets, actions). Both training and reward-scheme verification
perturb policies from this family.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from arena.core import canonical_json

DEFAULT_BUCKETS = 64


def observation_bucket(obs: Any, n_buckets: int) -> int:
    return zlib.crc32(canonical_json(obs).encode()) % n_buckets


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - np.max(scores)
    exp = np.exp(shifted)
    return exp / exp.sum()


@dataclass
class SoftmaxPolicy:
    """Linear softmax policy; draws exactly one sample per act() call."""

    actions: tuple[str, ...]
    theta: np.ndarray  # (n_buckets, n_actions)
    temperature: float = 1.0

    @property
    def n_buckets(self) -> int:
        return int(self.theta.shape[0])

    def bucket(self, obs: Any) -> int:
        return observation_bucket(obs, self.n_buckets)

    def probs(self, bucket: int) -> np.ndarray:
        return softmax(self.theta[bucket] / self.temperature)

    def act(self, obs: Any, rng: np.random.Generator) -> str:
        p = self.probs(self.bucket(obs))
        idx = int(rng.choice(len(self.actions), p=p))
        return self.actions[idx]

    def copy(self) -> "SoftmaxPolicy":
        return SoftmaxPolicy(
            actions=self.actions, theta=self.theta.copy(), temperature=self.temperature
        )

    def to_jsonable(self) -> dict[str, Any]:
        return {
            "actions": list(self.actions),
            "theta": [[float(v) for v in row] for row in self.theta],
            "temperature": self.temperature,
        }

    @classmethod
    def from_jsonable(cls, data: dict[str, Any]) -> "SoftmaxPolicy":
        return cls(
            actions=tuple(data["actions"]),
            theta=np.array(data["theta"], dtype=float),
            temperature=float(data.get("temperature", 1.0)),
        )


def uniform_policy(actions: tuple[str, ...], n_buckets: int = DEFAULT_BUCKETS) -> SoftmaxPolicy:
    return SoftmaxPolicy(actions=actions, theta=np.zeros((n_buckets, len(actions))))


@dataclass
class ConstantPolicy:
    """Always plays one action; still consumes one draw for stream parity."""

    action: str

    def act(self, obs: Any, rng: np.random.Generator) -> str:
        rng.random()
        return self.action

    def to_jsonable(self) -> dict[str, Any]:
        return {"constant": self.action}


@dataclass
class PolicyFamily:
    """Sampling rule for verification: parameters uniform in [-1, 1]."""

    n_buckets: int = 32
    temperature: float = 1.0

    def dimension(self, n_actions: int) -> int:
        return self.n_buckets * n_actions

    def sample(self, actions: tuple[str, ...], rng: np.random.Generator) -> SoftmaxPolicy:
        theta = rng.uniform(-1.0, 1.0, size=(self.n_buckets, len(actions)))
        return SoftmaxPolicy(actions=actions, theta=theta, temperature=self.temperature)

    def to_jsonable(self) -> dict[str, Any]:
        return {"n_buckets": self.n_buckets, "temperature": self.temperature}
