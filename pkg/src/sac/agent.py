"""
Soft actor-critic agent.

The actor outputs the mean and log standard deviation of a diagonal Gaussian
that is squashed by tanh into [-1, 1]. Two critics and their targets score
(state, action) pairs and the entropy temperature is adapted towards a
target entropy. All sampling goes through one generator so a seeded agent
is reproducible bit for bit.
"""

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import joblib
import numpy as np

from .networks import MLP, Adam, Params, soft_update
from ..utils.errors import CheckpointError, DomainError
from ..utils.logger import get_logger

logger = get_logger(__name__)

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class SacConfig:
    """Hyperparameters of the agent and of the training loop."""

    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    alpha_lr: float = 3e-4
    alpha0: float = 0.2
    tau: float = 0.005
    gamma_discount: float = 0.99
    buffer_capacity: int = 1_000_000
    batch_size: int = 256
    hidden_sizes: Tuple[int, ...] = (256, 256)
    target_entropy: Optional[float] = None
    psi: float = 10.0
    episodes: int = 2000
    steps_per_episode: int = 200
    seed: int = 0
    pgs: bool = False
    log_interval: int = 100

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        positive = (
            "actor_lr", "critic_lr", "alpha_lr", "alpha0", "psi",
            "buffer_capacity", "batch_size", "episodes", "steps_per_episode", "log_interval",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError(f"tau must lie in [0, 1], got {self.tau}")
        if not 0.0 <= self.gamma_discount < 1.0:
            raise DomainError(f"gamma_discount must lie in [0, 1), got {self.gamma_discount}")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise DomainError(f"hidden_sizes must be positive, got {self.hidden_sizes}")

    @property
    def action_dim(self) -> int:
        """Four actions (p_c, share, split, kappa), three when kappa is frozen at 0."""
        return 3 if self.pgs else 4

    @property
    def entropy_target(self) -> float:
        return -float(self.action_dim) if self.target_entropy is None else float(self.target_entropy)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hidden_sizes"] = list(self.hidden_sizes)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SacConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown SAC settings: {sorted(unknown)}")
        return cls(**data)


class PolicySample(NamedTuple):
    """Reparameterized draw from the squashed Gaussian policy."""

    action: np.ndarray
    log_prob: np.ndarray
    pre_tanh: np.ndarray
    std: np.ndarray
    noise: np.ndarray
    clamp_mask: np.ndarray
    cache: List[np.ndarray]


class UpdateStats(NamedTuple):
    critic1_loss: float
    critic2_loss: float
    actor_loss: float
    alpha_loss: float
    alpha: float


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def squash_log_det(pre_tanh: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2), evaluated without cancellation for large |u|."""
    return 2.0 * (math.log(2.0) - pre_tanh - _softplus(-2.0 * pre_tanh))


class SacAgent:
    """Actor, twin critics, their targets and the entropy temperature."""

    def __init__(self, state_dim: int, config: SacConfig, rng: Optional[np.random.Generator] = None):
        """
        Initialize agent.

        Args:
            state_dim: Length of the (normalized) state vector
            config: Hyperparameters; ``config.action_dim`` fixes the action size
            rng: Generator for weight init and policy noise (seeded from config if omitted)
        """
        self.config = config
        self.state_dim = int(state_dim)
        self.action_dim = config.action_dim
        self.target_entropy = config.entropy_target
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)

        hidden = list(config.hidden_sizes)
        self.actor = MLP([self.state_dim, *hidden, 2 * self.action_dim], self.rng, zero_output=True)
        self.critic1 = MLP([self.state_dim + self.action_dim, *hidden, 1], self.rng)
        self.critic2 = MLP([self.state_dim + self.action_dim, *hidden, 1], self.rng)
        self.target1 = self.critic1.copy()
        self.target2 = self.critic2.copy()
        self.log_alpha = np.array([math.log(config.alpha0)])

        self._build_optimizers()
        self.updates = 0

    def _build_optimizers(self) -> None:
        self.actor_opt = Adam(self.actor.params, self.config.actor_lr)
        self.critic1_opt = Adam(self.critic1.params, self.config.critic_lr)
        self.critic2_opt = Adam(self.critic2.params, self.config.critic_lr)
        self.alpha_opt = Adam([self.log_alpha], self.config.alpha_lr)

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))

    # ------------------------------------------------------------------
    # policy

    def _heads(self, states: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, List[np.ndarray]]:
        out, cache = self.actor.forward(np.atleast_2d(states))
        mean = out[:, : self.action_dim]
        raw_log_std = out[:, self.action_dim :]
        log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
        mask = ((raw_log_std >= LOG_STD_MIN) & (raw_log_std <= LOG_STD_MAX)).astype(float)
        return mean, log_std, mask, cache

    def sample_policy(self, states: np.ndarray, noise: Optional[np.ndarray] = None) -> PolicySample:
        """
        Draw squashed actions with their log-densities.

        Args:
            states: Batch of states, shape (B, state_dim)
            noise: Standard normal draws of shape (B, action_dim); drawn from the agent's rng if omitted

        Returns:
            PolicySample with everything the actor gradient needs
        """
        mean, log_std, mask, cache = self._heads(states)
        if noise is None:
            noise = self.rng.standard_normal(mean.shape)
        std = np.exp(log_std)
        pre_tanh = mean + std * noise
        action = np.tanh(pre_tanh)
        log_prob = np.sum(
            -0.5 * noise ** 2 - log_std - HALF_LOG_2PI - squash_log_det(pre_tanh), axis=1
        )
        return PolicySample(action, log_prob, pre_tanh, std, noise, mask, cache)

    def act(self, state: np.ndarray, deterministic: bool = False) -> np.ndarray:
        """Single action in [-1, 1]^action_dim; the greedy action is tanh(mean)."""
        if deterministic:
            mean, _, _, _ = self._heads(state)
            return np.tanh(mean[0])
        return self.sample_policy(state).action[0]

    # ------------------------------------------------------------------
    # losses

    def _q_values(self, critic: MLP, states: np.ndarray, actions: np.ndarray):
        return critic.forward(np.concatenate([states, actions], axis=1))

    def bellman_target(self, batch: Dict[str, np.ndarray], next_noise: Optional[np.ndarray] = None) -> np.ndarray:
        """y = r + gamma (1 - done) (min_j target_j(s', a') - alpha log pi(a'|s'))."""
        nxt = self.sample_policy(batch["next_state"], next_noise)
        q1, _ = self._q_values(self.target1, batch["next_state"], nxt.action)
        q2, _ = self._q_values(self.target2, batch["next_state"], nxt.action)
        soft_value = np.minimum(q1[:, 0], q2[:, 0]) - self.alpha * nxt.log_prob
        return batch["reward"] + self.config.gamma_discount * (1.0 - batch["done"]) * soft_value

    def critic_loss(self, critic: MLP, batch: Dict[str, np.ndarray], target: np.ndarray) -> Tuple[float, Params]:
        """Mean squared Bellman residual of one critic and its parameter gradients."""
        q, cache = self._q_values(critic, batch["state"], batch["action"])
        residual = q[:, 0] - target
        dout = (2.0 * residual / len(target))[:, None]
        grads, _ = critic.backward(cache, dout)
        return float(np.mean(residual ** 2)), grads

    def actor_loss(self, states: np.ndarray, noise: Optional[np.ndarray] = None) -> Tuple[float, Params, PolicySample]:
        """
        mean(alpha log pi(a|s) - min_i Q_i(s, a)) with a reparameterized.

        Returns:
            Tuple of (loss, actor gradients, the policy sample used)
        """
        sample = self.sample_policy(states, noise)
        batch = len(states)
        alpha = self.alpha

        q1, cache1 = self._q_values(self.critic1, states, sample.action)
        q2, cache2 = self._q_values(self.critic2, states, sample.action)
        ones = np.ones_like(q1)
        _, dx1 = self.critic1.backward(cache1, ones)
        _, dx2 = self.critic2.backward(cache2, ones)
        use_first = (q1[:, 0] <= q2[:, 0])[:, None]
        dq_da = np.where(use_first, dx1, dx2)[:, self.state_dim :]
        q_min = np.minimum(q1[:, 0], q2[:, 0])

        loss = float(np.mean(alpha * sample.log_prob - q_min))

        d_pre = (alpha * 2.0 * np.tanh(sample.pre_tanh) - dq_da * (1.0 - sample.action ** 2)) / batch
        d_mean = d_pre
        d_log_std = (d_pre * sample.std * sample.noise - alpha / batch) * sample.clamp_mask
        grads, _ = self.actor.backward(sample.cache, np.concatenate([d_mean, d_log_std], axis=1))
        return loss, grads, sample

    def temperature_loss(self, log_prob: np.ndarray) -> Tuple[float, np.ndarray]:
        """L = mean(-alpha (log pi + H0)) and its gradient in log alpha."""
        terms = -self.alpha * (np.asarray(log_prob) + self.target_entropy)
        value = float(np.mean(terms))
        return value, np.array([value])

    # ------------------------------------------------------------------
    # updates

    def critic_update(self, batch: Dict[str, np.ndarray]) -> Tuple[float, float]:
        """One gradient step per critic; returns both losses."""
        target = self.bellman_target(batch)
        loss1, grads1 = self.critic_loss(self.critic1, batch, target)
        loss2, grads2 = self.critic_loss(self.critic2, batch, target)
        self.critic1_opt.step(grads1)
        self.critic2_opt.step(grads2)
        return loss1, loss2

    def actor_update(self, batch: Dict[str, np.ndarray]) -> Tuple[float, np.ndarray]:
        """One gradient step on the actor; returns the loss and the batch log-densities."""
        loss, grads, sample = self.actor_loss(batch["state"])
        self.actor_opt.step(grads)
        return loss, sample.log_prob

    def temperature_update(self, log_prob: np.ndarray) -> Tuple[float, float]:
        """One gradient step on log alpha; returns (loss, new alpha)."""
        loss, grad = self.temperature_loss(log_prob)
        self.alpha_opt.step([grad])
        return loss, self.alpha

    def update_targets(self) -> None:
        self.target1.set_params(soft_update(self.critic1.params, self.target1.params, self.config.tau))
        self.target2.set_params(soft_update(self.critic2.params, self.target2.params, self.config.tau))

    def update(self, batch: Dict[str, np.ndarray]) -> UpdateStats:
        """Critics, actor, temperature, then the soft target update."""
        loss1, loss2 = self.critic_update(batch)
        actor_loss, log_prob = self.actor_update(batch)
        alpha_loss, alpha = self.temperature_update(log_prob)
        self.update_targets()
        self.updates += 1
        return UpdateStats(loss1, loss2, actor_loss, alpha_loss, alpha)

    # ------------------------------------------------------------------
    # persistence

    def save(self, path: Union[str, Path], scaler: Optional[Dict[str, list]] = None) -> None:
        """
        Write a versioned checkpoint with joblib.

        Args:
            path: Output file
            scaler: State scaler constants (``StateScaler.to_dict()``)
        """
        payload = {
            "format_version": CHECKPOINT_VERSION,
            "config": self.config.to_dict(),
            "action_dim": self.action_dim,
            "state_dim": self.state_dim,
            "state_scaler": scaler or {"offset": [0.0] * self.state_dim, "scale": [1.0] * self.state_dim},
            "actor": [p.copy() for p in self.actor.params],
            "critic1": [p.copy() for p in self.critic1.params],
            "critic2": [p.copy() for p in self.critic2.params],
            "target1": [p.copy() for p in self.target1.params],
            "target2": [p.copy() for p in self.target2.params],
            "log_alpha": float(self.log_alpha[0]),
        }
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        joblib.dump(payload, path)
        logger.info(f"Checkpoint saved to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> Tuple["SacAgent", Dict[str, list]]:
        """
        Restore an agent written by ``save``.

        Returns:
            Tuple of (agent, state scaler dict)

        Raises:
            CheckpointError: unreadable file or unsupported format version
        """
        try:
            payload = joblib.load(path)
        except Exception as e:
            raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e

        version = payload.get("format_version") if isinstance(payload, dict) else None
        if version != CHECKPOINT_VERSION:
            logger.warning(f"Checkpoint {path} has format version {version}")
            raise CheckpointError(
                f"unsupported checkpoint format version {version}, expected {CHECKPOINT_VERSION}"
            )

        try:
            config = SacConfig.from_dict(payload["config"])
            agent = cls(int(payload["state_dim"]), config)
            if agent.action_dim != payload["action_dim"]:
                raise CheckpointError("checkpoint action_dim does not match its config")
            for name in ("actor", "critic1", "critic2", "target1", "target2"):
                getattr(agent, name).set_params(payload[name])
            agent.log_alpha[0] = payload["log_alpha"]
        except (KeyError, DomainError) as e:
            raise CheckpointError(f"malformed checkpoint {path}: {e}") from e

        logger.info(f"Checkpoint loaded from {path}")
        return agent, payload["state_scaler"]
