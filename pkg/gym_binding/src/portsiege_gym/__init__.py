"""Standard reset/step RL-environment views over the portsiege game."""

from .core import (
    AttackerEnv,
    BoxSpace,
    DefenderEnv,
    DiscreteSpace,
    TRUNCATION_TOKEN,
    TwoAgentEnv,
    from_checkpoint,
    resolve_opponent,
)

__all__ = [
    "AttackerEnv",
    "BoxSpace",
    "DefenderEnv",
    "DiscreteSpace",
    "TRUNCATION_TOKEN",
    "TwoAgentEnv",
    "from_checkpoint",
    "resolve_opponent",
]
