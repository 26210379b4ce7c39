import numpy as np

from ..errors import ParameterError


class NotReady(Exception):
    """Raised when a batch is requested before the buffer holds enough data."""


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform sampling."""

    def __init__(self, obs_dim, action_dim, capacity=100_000):
        if capacity < 1:
            raise ParameterError("capacity must be positive")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.dones = np.zeros(capacity)
        self.size = 0
        self._head = 0

    def __len__(self):
        return self.size

    def add(self, obs, action, reward, next_obs, done):
        k = self._head
        self.obs[k] = obs
        self.actions[k] = action
        self.rewards[k] = reward
        self.next_obs[k] = next_obs
        self.dones[k] = float(done)
        self._head = (k + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size, rng):
        if self.size < batch_size:
            raise NotReady(f"buffer holds {self.size} < {batch_size} transitions")
        idx = rng.integers(0, self.size, size=batch_size)
        return dict(
            obs=self.obs[idx],
            actions=self.actions[idx],
            rewards=self.rewards[idx],
            next_obs=self.next_obs[idx],
            dones=self.dones[idx],
        )
