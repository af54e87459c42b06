"""Two small continuous-control tasks: pendulum swing-up and a 2-d point mass.

Actions live in [-1, 1]^d. Episodes only end at the horizon, and the final
step reports ``done=True``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .nn_core import ContractError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnvSpec:
    name: str
    observation_dim: int
    action_dim: int
    max_episode_steps: int


@dataclass
class StepResult:
    next_state: np.ndarray
    reward: float
    done: bool


def wrap_angle(theta):
    """Map to (-pi, pi]."""
    w = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


class _Env:
    spec: EnvSpec

    def __init__(self):
        self.t = 0
        self.done = True

    def _clip_action(self, action):
        a = np.asarray(action, dtype=np.float64).reshape(self.spec.action_dim)
        if np.any(np.abs(a) > 1.0):
            log.warning("%s: action %s outside [-1, 1], clipping", self.spec.name, a)
            a = np.clip(a, -1.0, 1.0)
        return a

    def _advance(self):
        if self.done:
            raise ContractError("step() called on a finished episode; call reset() first")
        self.t += 1
        self.done = self.t >= self.spec.max_episode_steps
        return self.done


class Pendulum(_Env):
    """Classic swing-up; theta = 0 is upright."""

    spec = EnvSpec("pendulum", 3, 1, 200)
    g, m, l, dt = 10.0, 1.0, 1.0, 0.05
    max_speed = 8.0
    max_torque = 2.0

    def __init__(self):
        super().__init__()
        self.theta = 0.0
        self.theta_dot = 0.0

    def set_state(self, theta, theta_dot):
        self.theta, self.theta_dot = float(theta), float(theta_dot)
        self.t, self.done = 0, False
        return self.observe()

    def observe(self):
        return np.array([np.cos(self.theta), np.sin(self.theta), self.theta_dot])

    def reset(self, rng: np.random.Generator):
        theta = rng.uniform(-np.pi, np.pi)
        theta_dot = rng.uniform(-1.0, 1.0)
        return self.set_state(theta, theta_dot)

    def step(self, action) -> StepResult:
        u = self.max_torque * self._clip_action(action)[0]
        th, thd = self.theta, self.theta_dot
        reward = -(float(wrap_angle(th)) ** 2 + 0.1 * thd**2 + 0.001 * u**2)
        thdd = 3.0 * self.g / (2.0 * self.l) * np.sin(th) + 3.0 / (self.m * self.l**2) * u
        thd = float(np.clip(thd + thdd * self.dt, -self.max_speed, self.max_speed))
        self.theta = th + thd * self.dt
        self.theta_dot = thd
        done = self._advance()
        return StepResult(self.observe(), reward, done)


class PointMass(_Env):
    """Damped 2-d point mass pushed toward the origin.

    The arena is the box [-2, 2]^2; hitting a wall stops motion along that axis.
    """

    spec = EnvSpec("pointmass", 4, 2, 100)
    force_scale = 0.1
    damping = 0.95
    arena = 2.0

    def __init__(self):
        super().__init__()
        self.pos = np.zeros(2)
        self.vel = np.zeros(2)

    def set_state(self, pos, vel):
        self.pos = np.array(pos, dtype=np.float64)
        self.vel = np.array(vel, dtype=np.float64)
        self.t, self.done = 0, False
        return self.observe()

    def observe(self):
        return np.concatenate([self.pos, self.vel])

    def reset(self, rng: np.random.Generator):
        return self.set_state(rng.uniform(-1.0, 1.0, size=2), np.zeros(2))

    def step(self, action) -> StepResult:
        a = self._clip_action(action)
        reward = -float(self.pos @ self.pos) - 0.01 * float(a @ a)
        vel = self.damping * self.vel + self.force_scale * a
        pos = self.pos + vel
        hit = np.abs(pos) > self.arena
        self.pos = np.clip(pos, -self.arena, self.arena)
        self.vel = np.where(hit, 0.0, vel)
        done = self._advance()
        return StepResult(self.observe(), reward, done)


ENVS = {"pendulum": Pendulum, "pointmass": PointMass}


def make_env(name: str) -> _Env:
    try:
        return ENVS[name]()
    except KeyError:
        raise ContractError(f"unknown environment {name!r}; choose from {sorted(ENVS)}") from None
