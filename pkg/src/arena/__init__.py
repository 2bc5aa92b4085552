"""arena: a multi-agent Markov-game toolkit.

Composable team/reward hierarchies over seeded grid games, sample-based
verification of reward-scheme classes, simplified multi-agent training
baselines, population ranking, and a lockstep session server with human
play slots.
"""

from arena.seeding import Seed

__all__ = ["Seed"]
__version__ = "0.1.0"
