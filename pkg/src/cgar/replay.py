"""FIFO replay buffer with uniform sampling (with replacement)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn_core import ContractError


class InsufficientDataError(RuntimeError):
    pass


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    def __len__(self):
        return len(self.rewards)


class ReplayBuffer:
    """Ring buffer over preallocated arrays.

    Storage is allocated lazily on the first push so the buffer does not need
    to know the state/action dimensions up front.
    """

    def __init__(self, capacity: int = 100_000):
        if capacity <= 0:
            raise ContractError("capacity must be positive")
        self.capacity = int(capacity)
        self.cursor = 0
        self.size = 0
        self._s = self._a = self._r = self._s2 = self._d = None

    def __len__(self):
        return self.size

    def _allocate(self, obs_dim, act_dim):
        n = self.capacity
        self._s = np.zeros((n, obs_dim))
        self._a = np.zeros((n, act_dim))
        self._r = np.zeros(n)
        self._s2 = np.zeros((n, obs_dim))
        self._d = np.zeros(n, dtype=bool)

    def push(self, t: Transition) -> None:
        s = np.asarray(t.state, dtype=np.float64)
        a = np.asarray(t.action, dtype=np.float64)
        s2 = np.asarray(t.next_state, dtype=np.float64)
        if s.shape != s2.shape:
            raise ContractError("state and next_state differ in shape")
        if np.any(np.abs(a) > 1.0):
            raise ContractError("action outside [-1, 1]")
        if not np.isfinite(t.reward):
            raise ContractError("non-finite reward")
        if self._s is None:
            self._allocate(s.shape[0], a.shape[0])
        i = self.cursor
        self._s[i], self._a[i], self._r[i], self._s2[i], self._d[i] = s, a, t.reward, s2, t.done
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _ordered_indices(self):
        if self.size < self.capacity:
            return np.arange(self.size)
        return (np.arange(self.capacity) + self.cursor) % self.capacity

    def __getitem__(self, k: int) -> Transition:
        """k-th stored transition, oldest first."""
        i = self._ordered_indices()[k]
        return Transition(self._s[i].copy(), self._a[i].copy(), float(self._r[i]), self._s2[i].copy(), bool(self._d[i]))

    def transitions(self) -> list[Transition]:
        return [self[k] for k in range(self.size)]

    def sample_indices(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 0:
            raise ContractError("batch size must be non-negative")
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        # draws are with replacement, so only an empty buffer cannot serve a batch
        if self.size == 0:
            raise InsufficientDataError(f"empty buffer cannot serve a batch of {n}")
        return rng.integers(0, self.size, size=n)

    def sample_batch(self, n: int, rng: np.random.Generator) -> Batch:
        # physical slots < size are exactly the live entries, so uniform
        # over [0, size) never touches an evicted transition
        idx = self.sample_indices(n, rng)
        if self._s is None:
            return Batch(np.zeros((0, 0)), np.zeros((0, 0)), np.zeros(0), np.zeros((0, 0)), np.zeros(0, dtype=bool))
        return Batch(self._s[idx], self._a[idx], self._r[idx], self._s2[idx], self._d[idx])

    def sample_transitions(self, n: int, rng: np.random.Generator) -> list[Transition]:
        b = self.sample_batch(n, rng)
        return [
            Transition(b.states[i], b.actions[i], float(b.rewards[i]), b.next_states[i], bool(b.dones[i]))
            for i in range(len(b))
        ]
