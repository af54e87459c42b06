"""Critic guided action redistribution.

Instead of acting with a single policy sample, draw K candidates from the
policy, score them with the critic, and pick one from the softmax over those
scores. Used only while interacting during training; evaluation keeps the
deterministic ``tanh(mean)`` action.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agent import AgentState, q_values
from .distributions import (
    DiscreteDistribution,
    PolicyDistribution,
    sample_categorical,
    sample_squashed,
    softmax,
)
from .nn_core import ContractError


@dataclass
class ActionCandidates:
    actions: np.ndarray  # (K, d)
    presquash: np.ndarray  # (K, d)
    q_scores: np.ndarray  # (K,)
    probs: DiscreteDistribution
    chosen_index: int

    @property
    def k(self) -> int:
        return len(self.q_scores)


def sample_action_set(policy_dist: PolicyDistribution, k: int, rng: np.random.Generator):
    """K reparameterized draws for one state; consumes a ``(K, d)`` normal block."""
    if k < 1:
        raise ContractError("k must be >= 1")
    noise = rng.standard_normal((k, policy_dist.action_dim))
    return sample_squashed(policy_dist, noise)


def score_actions(agent: AgentState, state, actions, critic: str = "min") -> np.ndarray:
    actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    if len(actions) == 0:
        raise ContractError("no candidate actions to score")
    states = np.broadcast_to(np.asarray(state, dtype=np.float64), (len(actions), agent.obs_dim))
    if critic == "critic1":
        return q_values(agent, states, actions, which=("critic1",))[0]
    q1, q2 = q_values(agent, states, actions)
    return np.minimum(q1, q2)


def redistribute(q_scores, temperature: float = 1.0) -> DiscreteDistribution:
    if not temperature > 0:
        raise ContractError("temperature must be positive")
    q = np.asarray(q_scores, dtype=np.float64)
    return softmax(q if temperature == 1.0 else q / temperature)


def cgar_select(
    agent: AgentState,
    policy_dist: PolicyDistribution,
    state,
    k: int,
    temperature: float,
    rng: np.random.Generator,
    critic: str = "min",
):
    """Returns ``(action, ActionCandidates)``.

    With ``k == 1`` no categorical draw is made, so the RNG stream advances
    exactly as for a single plain policy sample.
    """
    actions, presquash = sample_action_set(policy_dist, k, rng)
    scores = score_actions(agent, state, actions, critic)
    probs = redistribute(scores, temperature)
    idx = 0 if k == 1 else sample_categorical(probs, rng)
    return actions[idx], ActionCandidates(actions, presquash, scores, probs, idx)
