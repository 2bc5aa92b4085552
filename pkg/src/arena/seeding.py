"""Deterministic seeding with labeled substreams.

Every sampling operation in the toolkit draws from a substream derived by
hashing (seed value, stream label, counter). Substreams never contaminate
each other: a component that draws more samples from its own stream leaves
all sibling streams untouched.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

U64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    """A 64-bit master seed from which labeled substreams are derived."""

    value: int

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or not (0 <= self.value <= U64_MAX):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.value!r}")

    def child(self, label: str, counter: int = 0) -> "Seed":
        """Derive a child seed for the substream (label, counter)."""
        digest = hashlib.sha256(f"{self.value}:{label}:{counter}".encode()).digest()
        return Seed(int.from_bytes(digest[:8], "big"))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.value)

    def stream(self, label: str, counter: int = 0) -> np.random.Generator:
        """Generator for the substream (label, counter); stable across calls."""
        return self.child(label, counter).rng()
