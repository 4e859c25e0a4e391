"""Experience replay buffer with FIFO eviction and uniform sampling."""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..utils.errors import DomainError

INITIAL_ROWS = 1024


@dataclass(frozen=True)
class Transition:
    """One environment step (s, a, r, s', done)."""

    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool

    def __post_init__(self):
        if not np.isfinite(self.reward):
            raise DomainError(f"transition reward must be finite, got {self.reward}")


class ReplayBuffer:
    """
    Ring buffer of transitions.

    Storage grows geometrically up to ``capacity``; once full, the oldest
    transition is overwritten first.
    """

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise DomainError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.idx = 0
        self.size = 0
        self._allocate(min(INITIAL_ROWS, self.capacity))

    def _allocate(self, rows: int) -> None:
        fresh = {
            "state": np.zeros((rows, self.state_dim)),
            "action": np.zeros((rows, self.action_dim)),
            "reward": np.zeros(rows),
            "next_state": np.zeros((rows, self.state_dim)),
            "done": np.zeros(rows),
        }
        if self.size:
            for name, array in fresh.items():
                array[: self.size] = self.storage[name][: self.size]
        self.storage: Dict[str, np.ndarray] = fresh

    def __len__(self) -> int:
        return self.size

    def add(self, transition: Transition) -> None:
        """Append a transition, evicting the oldest one at capacity."""
        rows = len(self.storage["reward"])
        if self.size == rows and rows < self.capacity:
            self._allocate(min(2 * rows, self.capacity))

        self.storage["state"][self.idx] = transition.state
        self.storage["action"][self.idx] = transition.action
        self.storage["reward"][self.idx] = transition.reward
        self.storage["next_state"][self.idx] = transition.next_state
        self.storage["done"][self.idx] = float(transition.done)

        self.idx = (self.idx + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        """
        Uniformly sample a batch (with replacement).

        Args:
            batch_size: Number of transitions
            rng: Random generator, so sampled indices are reproducible

        Returns:
            Dict of stacked arrays keyed state/action/reward/next_state/done
        """
        if self.size == 0:
            raise DomainError("cannot sample from an empty replay buffer")
        indices = rng.integers(0, self.size, size=batch_size)
        return {name: array[indices] for name, array in self.storage.items()}
