"""
Training loop for the sum-rate agent.

Each episode draws a scenario, then for ``steps_per_episode`` steps proposes
an allocation, stores the penalized sum rate and, once the replay buffer
holds a full batch, runs one update.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .agent import SacAgent, SacConfig
from .environment import (
    STATE_FEATURES,
    ScenarioSampler,
    StateScaler,
    action_to_allocation,
    observe,
    penalized_sum_rate,
    rate_violation,
)
from .networks import MLP
from .replay_buffer import ReplayBuffer, Transition
from ..channel.models import Allocation, RateReport, Scenario
from ..channel.rate_engine import full_report
from ..utils.logger import get_logger

logger = get_logger(__name__)

LOG_COLUMNS = (
    "mean_reward",
    "sum_rate",
    "violation",
    "alpha",
    "critic1_loss",
    "critic2_loss",
    "actor_loss",
    "alpha_loss",
)


@dataclass
class TrainingLog:
    """Per-episode training traces; every column has one entry per episode."""

    columns: Dict[str, List[float]] = field(default_factory=lambda: {name: [] for name in LOG_COLUMNS})
    updates: int = 0

    def record(self, **values: float) -> None:
        for name in LOG_COLUMNS:
            self.columns[name].append(float(values[name]))

    def __len__(self) -> int:
        return len(self.columns["mean_reward"])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.columns, columns=list(LOG_COLUMNS))
        frame.index.name = "episode"
        return frame


class GreedyPolicy:
    """
    Frozen mean-action policy.

    Holds its own copy of the actor weights; evaluating it mutates nothing,
    so one instance can be shared between threads.
    """

    def __init__(self, actor: MLP, action_dim: int, scaler: StateScaler, pgs: bool = False):
        self._actor = actor.copy()
        for param in self._actor.params:
            param.setflags(write=False)
        self.action_dim = action_dim
        self.scaler = scaler
        self.pgs = pgs

    @classmethod
    def from_agent(cls, agent: SacAgent, scaler: StateScaler) -> "GreedyPolicy":
        return cls(agent.actor, agent.action_dim, scaler, agent.config.pgs)

    @classmethod
    def from_checkpoint(cls, path) -> "GreedyPolicy":
        agent, scaler = SacAgent.load(path)
        return cls.from_agent(agent, StateScaler.from_dict(scaler))

    def raw_action(self, scenario: Scenario) -> np.ndarray:
        """tanh of the policy mean at the scenario's state."""
        state = observe(scenario, self.scaler)[None, :]
        mean = self._actor(state)[0, : self.action_dim]
        return np.tanh(mean)

    def __call__(self, scenario: Scenario) -> Allocation:
        return action_to_allocation(self.raw_action(scenario), scenario, self.pgs)


def _mean_or_nan(values: List[float]) -> float:
    return float(np.mean(values)) if values else float("nan")


def train(
    sampler: ScenarioSampler,
    config: SacConfig,
    agent: Optional[SacAgent] = None,
    buffer: Optional[ReplayBuffer] = None,
    progress: bool = False,
) -> Tuple[GreedyPolicy, TrainingLog]:
    """
    Train an agent on scenarios drawn from ``sampler``.

    Args:
        sampler: Source of per-episode scenarios
        config: Hyperparameters
        agent: Agent to keep training (a fresh one seeded from ``config.seed`` if omitted)
        buffer: Replay buffer to fill (a fresh one of ``config.buffer_capacity`` if omitted)
        progress: Show a tqdm progress bar over episodes

    Returns:
        Tuple of (greedy policy, training log)
    """
    if agent is None:
        agent = SacAgent(len(STATE_FEATURES), config, np.random.default_rng(config.seed))
    rng = agent.rng
    scaler = sampler.scaler()
    if buffer is None:
        buffer = ReplayBuffer(config.buffer_capacity, agent.state_dim, agent.action_dim)
    log = TrainingLog()

    episodes = tqdm(range(config.episodes), desc="Training", unit="ep", disable=not progress)
    for episode in episodes:
        scenario = sampler.sample(rng)
        state = observe(scenario, scaler)
        rewards, sum_rates, violations = [], [], []
        stats = []

        for step in range(config.steps_per_episode):
            raw = agent.act(state[None, :])
            alloc = action_to_allocation(raw, scenario, config.pgs)
            report = full_report(scenario, alloc)
            r = penalized_sum_rate(scenario, report, config.psi)
            done = step == config.steps_per_episode - 1
            buffer.add(Transition(state, raw, r, state, done))

            rewards.append(r)
            sum_rates.append(report.r_tot)
            violations.append(rate_violation(scenario, report.r1, report.r2))

            if len(buffer) >= config.batch_size:
                stats.append(agent.update(buffer.sample(config.batch_size, rng)))

        log.record(
            mean_reward=np.mean(rewards),
            sum_rate=np.mean(sum_rates),
            violation=np.mean(violations),
            alpha=agent.alpha,
            critic1_loss=_mean_or_nan([s.critic1_loss for s in stats]),
            critic2_loss=_mean_or_nan([s.critic2_loss for s in stats]),
            actor_loss=_mean_or_nan([s.actor_loss for s in stats]),
            alpha_loss=_mean_or_nan([s.alpha_loss for s in stats]),
        )
        log.updates += len(stats)

        if (episode + 1) % config.log_interval == 0:
            logger.info(
                f"episode {episode + 1}/{config.episodes}: reward={log.columns['mean_reward'][-1]:.4f}, "
                f"sum rate={log.columns['sum_rate'][-1]:.4f}, alpha={agent.alpha:.4g}"
            )

    logger.debug(f"training finished after {log.updates} updates, buffer size {len(buffer)}")
    return GreedyPolicy.from_agent(agent, scaler), log


def evaluate_policy(policy: GreedyPolicy, scenario: Scenario) -> Tuple[Allocation, RateReport]:
    """Greedy allocation for ``scenario`` and its rates."""
    alloc = policy(scenario)
    return alloc, full_report(scenario, alloc)
