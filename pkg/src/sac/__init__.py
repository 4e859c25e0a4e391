"""Soft actor-critic optimizer for the joint power and impropriety allocation."""

from .agent import SacAgent, SacConfig
from .environment import (
    ScenarioSampler,
    StateScaler,
    action_to_allocation,
    rate_violation,
    reward,
)
from .networks import MLP, Adam, soft_update
from .replay_buffer import ReplayBuffer, Transition
from .trainer import GreedyPolicy, TrainingLog, evaluate_policy, train

__all__ = [
    "Adam",
    "GreedyPolicy",
    "MLP",
    "ReplayBuffer",
    "SacAgent",
    "SacConfig",
    "ScenarioSampler",
    "StateScaler",
    "TrainingLog",
    "Transition",
    "action_to_allocation",
    "evaluate_policy",
    "rate_violation",
    "reward",
    "soft_update",
    "train",
]
