"""Ring replay buffer with uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Batch:
    state: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    next_state: np.ndarray
    done: np.ndarray

    def __len__(self):
        return len(self.reward)


class ReplayBuffer:
    """Stores up to ``capacity`` transitions, overwriting the oldest.

    Storage grows on demand (starting from ``reserve`` rows) so that a large
    nominal capacity does not allocate memory that is never used.
    """

    def __init__(self, capacity: int, state_dim: int, action_dim: int = 2,
                 reserve: int = 4096, dtype=np.float32):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.size = 0
        self._next = 0
        n = min(self.capacity, max(1, reserve))
        self._s = np.zeros((n, state_dim), dtype)
        self._a = np.zeros((n, action_dim), dtype)
        self._r = np.zeros(n, dtype)
        self._s2 = np.zeros((n, state_dim), dtype)
        self._d = np.zeros(n, bool)

    def __len__(self):
        return self.size

    def _grow(self):
        n = min(self.capacity, 2 * len(self._r))
        for name in ("_s", "_a", "_r", "_s2", "_d"):
            old = getattr(self, name)
            new = np.zeros((n,) + old.shape[1:], old.dtype)
            new[:len(old)] = old
            setattr(self, name, new)

    def add(self, state, action, reward, next_state, done) -> None:
        if not np.isfinite(reward):
            raise ValueError(f"non-finite reward {reward}")
        if self._next >= len(self._r):
            self._grow()
        i = self._next
        self._s[i] = state
        self._a[i] = action
        self._r[i] = reward
        self._s2[i] = next_state
        self._d[i] = done
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if self.size < batch_size:
            raise ValueError(f"buffer holds {self.size} transitions, need {batch_size}")
        return rng.integers(0, self.size, size=batch_size)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        idx = self.sample_indices(batch_size, rng)
        return Batch(self._s[idx], self._a[idx], self._r[idx], self._s2[idx], self._d[idx])
