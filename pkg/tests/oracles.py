"""Independent reference computations used by the tests."""

import math

import numpy as np
from scipy.special import ndtri

DENSITY_POINTS = [
    # (mean, log_std, presquash u)
    (0.5, -0.5, 1.2),
    (0.0, 0.0, 0.0),
    (-0.3, 0.4, -0.8),
    (1.0, -1.0, 1.5),
    (0.2, 0.7, 2.0),
]


def binned_density(mean, log_std, a_center, n=10**7, width=0.001):
    """Density of a = tanh(mean + std * z) at ``a_center`` from bin counts.

    The z draws are stratified normal quantiles, so the count in a bin is
    within one of its expectation; only the forward sampling map is used.
    """
    z = ndtri((np.arange(n) + 0.5) / n)
    a = np.tanh(mean + np.exp(log_std) * z)
    lo, hi = a_center - width / 2, a_center + width / 2
    count = np.count_nonzero((a >= lo) & (a < hi))
    return count / (n * width)


def pendulum_rollout(theta, theta_dot, actions):
    """Swing-up pendulum written out longhand; returns (observations, rewards)."""
    g, m, l, dt = 10.0, 1.0, 1.0, 0.05
    obs, rewards = [], []
    for act in actions:
        u = 2.0 * min(max(act, -1.0), 1.0)
        wrapped = ((theta + np.pi) % (2 * np.pi)) - np.pi
        rewards.append(-(wrapped**2 + 0.1 * theta_dot**2 + 0.001 * u**2))
        acc = 3 * g / (2 * l) * np.sin(theta) + 3.0 / (m * l * l) * u
        theta_dot = min(max(theta_dot + acc * dt, -8.0), 8.0)
        theta = theta + theta_dot * dt
        obs.append([np.cos(theta), np.sin(theta), theta_dot])
    return np.array(obs), np.array(rewards)


def pointmass_rollout(pos, actions):
    """Damped point mass written out longhand."""
    x, y = pos
    vx = vy = 0.0
    obs, rewards = [], []
    for ax, ay in actions:
        rewards.append(-(x * x + y * y) - 0.01 * (ax * ax + ay * ay))
        vx = 0.95 * vx + 0.1 * ax
        vy = 0.95 * vy + 0.1 * ay
        x, y = x + vx, y + vy
        if abs(x) > 2.0:
            x, vx = math.copysign(2.0, x), 0.0
        if abs(y) > 2.0:
            y, vy = math.copysign(2.0, y), 0.0
        obs.append([x, y, vx, vy])
    return np.array(obs), np.array(rewards)
