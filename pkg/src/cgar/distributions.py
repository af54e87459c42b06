"""Squashed diagonal Gaussian, softmax and categorical sampling.

Everything here works on a single action vector ``(d,)`` or a leading batch
``(..., d)``; log-densities reduce over the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn_core import ContractError, NumericError

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_LOG2 = np.log(2.0)


@dataclass
class PolicyDistribution:
    """Diagonal Gaussian over pre-tanh actions."""

    mean: np.ndarray
    log_std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.log_std = np.clip(np.asarray(self.log_std, dtype=np.float64), LOG_STD_MIN, LOG_STD_MAX)
        if self.mean.shape != self.log_std.shape:
            raise ContractError(f"mean {self.mean.shape} and log_std {self.log_std.shape} differ")

    @property
    def action_dim(self) -> int:
        return self.mean.shape[-1]

    def mode(self) -> np.ndarray:
        """Deterministic action tanh(mean), used for evaluation."""
        return np.tanh(self.mean)


@dataclass
class DiscreteDistribution:
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 1 or self.probs.size == 0:
            raise ContractError("probabilities must be a non-empty vector")
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ContractError("probabilities must be non-negative and sum to 1")


def sample_squashed(dist: PolicyDistribution, noise):
    """Reparameterized draw. Returns ``(tanh(u), u)`` with ``u = mean + std * noise``."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape[-1] != dist.action_dim:
        raise ContractError(f"noise has {noise.shape[-1]} dims, distribution has {dist.action_dim}")
    u = dist.mean + np.exp(dist.log_std) * noise
    return np.tanh(u), u


def softplus(x):
    return np.logaddexp(0.0, x)


def tanh_log_det(u):
    """Elementwise log(1 - tanh(u)^2) in a form that does not underflow."""
    return 2.0 * (_LOG2 - u - softplus(-2.0 * u))


def gaussian_log_prob(dist: PolicyDistribution, u):
    z = (u - dist.mean) * np.exp(-dist.log_std)
    return np.sum(-0.5 * z * z - dist.log_std - _HALF_LOG_2PI, axis=-1)


def log_prob_squashed(dist: PolicyDistribution, presquash):
    """Log-density of ``a = tanh(u)`` under the squashed Gaussian."""
    u = np.asarray(presquash, dtype=np.float64)
    if u.shape[-1] != dist.action_dim:
        raise ContractError(f"presquash has {u.shape[-1]} dims, distribution has {dist.action_dim}")
    lp = gaussian_log_prob(dist, u) - np.sum(tanh_log_det(u), axis=-1)
    if not np.all(np.isfinite(lp)):
        raise NumericError("non-finite squashed log-probability")
    return lp


def softmax(scores) -> DiscreteDistribution:
    s = np.asarray(scores, dtype=np.float64).ravel()
    if s.size == 0:
        raise ContractError("softmax of an empty score vector")
    if not np.all(np.isfinite(s)):
        raise NumericError("softmax scores must be finite")
    e = np.exp(s - s.max())
    return DiscreteDistribution(e / e.sum())


def sample_categorical(dist: DiscreteDistribution, rng: np.random.Generator) -> int:
    """Inverse-CDF draw over the given order; consumes one uniform from ``rng``."""
    cdf = np.cumsum(dist.probs)
    u = rng.random() * cdf[-1]
    i = int(np.searchsorted(cdf, u, side="right"))
    # guards against u landing exactly on the last edge through rounding
    return min(i, len(cdf) - 1)
