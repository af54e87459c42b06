"""Soft actor-critic with twin critics, Polyak targets and a learned temperature.

All losses are minibatch means. Each loss function returns its value
together with analytic gradients; nothing here mutates the agent except
``polyak_update`` and ``train_step``.

RNG consumption inside ``train_step`` is fixed: batch indices, then the
bootstrap-action noise ``(B, d)``, then the actor-loss noise ``(B, d)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .distributions import PolicyDistribution, LOG_STD_MAX, LOG_STD_MIN, log_prob_squashed
from .nn_core import (
    AdamState,
    ContractError,
    GradBuffer,
    MlpParams,
    NumericError,
    adam_step,
    adam_update,
    init_mlp,
    mlp_backward,
    mlp_forward,
    mlp_trace,
)
from .replay import Batch, ReplayBuffer

CHECKPOINT_VERSION = 1


@dataclass
class AgentState:
    actor: MlpParams
    critic1: MlpParams
    critic2: MlpParams
    target1: MlpParams
    target2: MlpParams
    log_alpha: float
    actor_opt: AdamState
    critic1_opt: AdamState
    critic2_opt: AdamState
    alpha_opt: AdamState

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))

    @property
    def action_dim(self) -> int:
        return self.actor.n_out // 2

    @property
    def obs_dim(self) -> int:
        return self.actor.n_in


def init_agent(obs_dim: int, action_dim: int, rng: np.random.Generator, hidden=(64, 64), init_alpha=0.1) -> AgentState:
    """Actor first, then critic1, critic2; targets start as exact copies."""
    hidden = list(hidden)
    actor = init_mlp([obs_dim, *hidden, 2 * action_dim], rng)
    c1 = init_mlp([obs_dim + action_dim, *hidden, 1], rng)
    c2 = init_mlp([obs_dim + action_dim, *hidden, 1], rng)
    return AgentState(
        actor=actor,
        critic1=c1,
        critic2=c2,
        target1=c1.copy(),
        target2=c2.copy(),
        log_alpha=float(np.log(init_alpha)),
        actor_opt=AdamState.for_params(actor),
        critic1_opt=AdamState.for_params(c1),
        critic2_opt=AdamState.for_params(c2),
        alpha_opt=AdamState.for_arrays([np.zeros(())]),
    )


def agent_for_config(obs_dim, action_dim, config: TrainConfig, rng) -> AgentState:
    return init_agent(obs_dim, action_dim, rng, config.hidden, config.init_alpha)


def _split_head(agent: AgentState, out):
    d = agent.action_dim
    return out[..., :d], out[..., d:]


def policy(agent: AgentState, states) -> PolicyDistribution:
    mean, log_std = _split_head(agent, mlp_forward(agent.actor, states))
    return PolicyDistribution(mean, log_std)


def sample_policy_action(dist: PolicyDistribution, rng: np.random.Generator):
    """Plain SAC interaction sample for one state: one ``(d,)`` normal draw."""
    noise = rng.standard_normal(dist.action_dim)
    u = dist.mean + np.exp(dist.log_std) * noise
    return np.tanh(u), u


def _critic_input(states, actions):
    return np.concatenate([states, actions], axis=-1)


def q_values(agent: AgentState, states, actions, which=("critic1", "critic2")):
    x = _critic_input(states, actions)
    return [mlp_forward(getattr(agent, w), x)[..., 0] for w in which]


def q_min(agent: AgentState, states, actions):
    q1, q2 = q_values(agent, states, actions)
    return np.minimum(q1, q2)


def value_target(agent: AgentState, next_states, rng=None, noise=None):
    """Single-sample soft value ``min(target Q)(s', a') - alpha * log pi(a'|s')``."""
    dist = policy(agent, next_states)
    if noise is None:
        noise = rng.standard_normal(dist.mean.shape)
    u = dist.mean + np.exp(dist.log_std) * noise
    a = np.tanh(u)
    logp = log_prob_squashed(dist, u)
    tq1, tq2 = q_values(agent, next_states, a, which=("target1", "target2"))
    return np.minimum(tq1, tq2) - agent.alpha * logp


@dataclass
class CriticLoss:
    loss: float
    grads1: GradBuffer
    grads2: GradBuffer
    targets: np.ndarray
    q1: np.ndarray
    q2: np.ndarray


def critic_loss(agent: AgentState, batch: Batch, rng=None, gamma=0.99, noise=None) -> CriticLoss:
    n = len(batch)
    if n == 0:
        raise ContractError("critic_loss on an empty batch")
    v = value_target(agent, batch.next_states, rng, noise)
    y = batch.rewards + gamma * (1.0 - batch.dones) * v
    x = _critic_input(batch.states, batch.actions)
    t1, t2 = mlp_trace(agent.critic1, x), mlp_trace(agent.critic2, x)
    q1, q2 = t1.output[:, 0], t2.output[:, 0]
    d1, d2 = q1 - y, q2 - y
    loss = float(0.5 * np.mean(d1 * d1) + 0.5 * np.mean(d2 * d2))
    if not np.isfinite(loss):
        raise NumericError("non-finite critic loss")
    g1 = mlp_backward(agent.critic1, x, (d1 / n)[:, None], trace=t1)
    g2 = mlp_backward(agent.critic2, x, (d2 / n)[:, None], trace=t2)
    return CriticLoss(loss, g1, g2, y, q1, q2)


@dataclass
class ActorLoss:
    loss: float
    grads: GradBuffer
    log_probs: np.ndarray
    q: np.ndarray


def actor_loss(agent: AgentState, batch: Batch, rng=None, noise=None) -> ActorLoss:
    """Mean of ``alpha * log pi(a|s) - min Q(s, a)`` with ``a`` reparameterized."""
    states = batch.states
    n = len(states)
    if n == 0:
        raise ContractError("actor_loss on an empty batch")
    d = agent.action_dim
    alpha = agent.alpha
    actor_trace = mlp_trace(agent.actor, states)
    mean, raw_log_std = _split_head(agent, actor_trace.output)
    dist = PolicyDistribution(mean, raw_log_std)
    if noise is None:
        noise = rng.standard_normal(mean.shape)
    std = np.exp(dist.log_std)
    u = mean + std * noise
    a = np.tanh(u)
    logp = log_prob_squashed(dist, u)

    x = _critic_input(states, a)
    t1, t2 = mlp_trace(agent.critic1, x), mlp_trace(agent.critic2, x)
    q1, q2 = t1.output[:, 0], t2.output[:, 0]
    pick1 = q1 <= q2
    q = np.where(pick1, q1, q2)
    loss = float(np.mean(alpha * logp - q))
    if not np.isfinite(loss):
        raise NumericError("non-finite actor loss")

    # dq/da through whichever critic attains the min, per sample
    gx = mlp_backward(agent.critic1, x, pick1[:, None].astype(float), trace=t1, param_grads=False).input
    gx = gx + mlp_backward(agent.critic2, x, (~pick1)[:, None].astype(float), trace=t2, param_grads=False).input
    dq_da = gx[:, -d:]
    # d log pi / du = 2 tanh(u); the Gaussian term is constant in u given the noise
    dl_du = (alpha * 2.0 * a - dq_da * (1.0 - a * a)) / n
    dl_dmean = dl_du
    dl_dlogstd = -alpha / n + dl_du * std * noise
    dl_dlogstd = dl_dlogstd * ((raw_log_std > LOG_STD_MIN) & (raw_log_std < LOG_STD_MAX))
    grads = mlp_backward(agent.actor, states, np.concatenate([dl_dmean, dl_dlogstd], axis=-1), trace=actor_trace)
    return ActorLoss(loss, grads, logp, q)


def alpha_loss(agent: AgentState, batch: Batch, rng=None, target_entropy=None, log_probs=None, noise=None):
    """Mean of ``-alpha * (log pi + H)``; returns ``(loss, d loss / d log_alpha)``.

    ``log_probs`` lets the caller reuse the actor-step sample instead of
    drawing a fresh one.
    """
    if target_entropy is None:
        target_entropy = -float(agent.action_dim)
    if log_probs is None:
        dist = policy(agent, batch.states)
        if noise is None:
            noise = rng.standard_normal(dist.mean.shape)
        log_probs = log_prob_squashed(dist, dist.mean + np.exp(dist.log_std) * noise)
    if len(log_probs) == 0:
        raise ContractError("alpha_loss on an empty batch")
    gap = float(np.mean(log_probs + target_entropy))
    alpha = agent.alpha
    return -alpha * gap, -alpha * gap


def polyak_update(agent: AgentState, tau: float) -> None:
    if not 0.0 < tau <= 1.0:
        raise ContractError("tau must lie in (0, 1]")
    for src, dst in (("critic1", "target1"), ("critic2", "target2")):
        online, target = getattr(agent, src), getattr(agent, dst)
        blended = [tau * o + (1.0 - tau) * t for o, t in zip(online.arrays(), target.arrays())]
        setattr(agent, dst, target.with_arrays(blended))


def train_step(agent: AgentState, buffer: ReplayBuffer, config: TrainConfig, rng: np.random.Generator) -> dict:
    """Critic, actor, alpha, then Polyak; all-or-nothing on numeric failure."""
    batch = buffer.sample_batch(config.batch_size, rng)
    H = config.resolved_target_entropy(agent.action_dim)

    cl = critic_loss(agent, batch, rng, config.gamma)
    c1, c1_opt = adam_step(agent.critic1, cl.grads1, agent.critic1_opt, config.lr_q)
    c2, c2_opt = adam_step(agent.critic2, cl.grads2, agent.critic2_opt, config.lr_q)

    staged = replace(agent, critic1=c1, critic2=c2)
    al = actor_loss(staged, batch, rng)
    actor, actor_opt = adam_step(agent.actor, al.grads, agent.actor_opt, config.lr_pi)

    a_loss, a_grad = alpha_loss(staged, batch, target_entropy=H, log_probs=al.log_probs)
    (new_log_alpha,), alpha_opt = adam_update(
        [np.asarray(agent.log_alpha)], [np.asarray(a_grad)], agent.alpha_opt, config.lr_alpha
    )
    if not np.isfinite(new_log_alpha):
        raise NumericError("non-finite log_alpha")

    agent.critic1, agent.critic1_opt = c1, c1_opt
    agent.critic2, agent.critic2_opt = c2, c2_opt
    agent.actor, agent.actor_opt = actor, actor_opt
    agent.log_alpha, agent.alpha_opt = float(new_log_alpha), alpha_opt
    polyak_update(agent, config.tau)
    return {
        "critic_loss": cl.loss,
        "actor_loss": al.loss,
        "alpha_loss": a_loss,
        "alpha": agent.alpha,
        "mean_q": float(np.mean(np.minimum(cl.q1, cl.q2))),
    }


_NETS = ("actor", "critic1", "critic2", "target1", "target2")
_OPTS = ("actor_opt", "critic1_opt", "critic2_opt", "alpha_opt")


def save_checkpoint(agent: AgentState, path, config: TrainConfig | None = None) -> None:
    """Write every parameter and optimizer array to an ``.npz`` file."""
    arrays = {"log_alpha": np.asarray(agent.log_alpha)}
    meta = {"version": CHECKPOINT_VERSION, "nets": {}, "opts": {}}
    for name in _NETS:
        p = getattr(agent, name)
        meta["nets"][name] = {"layer_sizes": p.layer_sizes, "activation": p.activation}
        for i, a in enumerate(p.arrays()):
            arrays[f"{name}/{i}"] = a
    for name in _OPTS:
        s = getattr(agent, name)
        meta["opts"][name] = {"t": s.t, "beta1": s.beta1, "beta2": s.beta2, "eps": s.eps, "n": len(s.m)}
        for i, (m, v) in enumerate(zip(s.m, s.v)):
            arrays[f"{name}/m{i}"] = m
            arrays[f"{name}/v{i}"] = v
    if config is not None:
        meta["config"] = config.to_dict()
        meta["config_hash"] = config.config_hash()
    arrays["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    with open(Path(path), "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path):
    """Returns ``(agent, config_or_None)``."""
    with np.load(Path(path)) as data:
        meta = json.loads(data["meta"].tobytes().decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ContractError(f"unsupported checkpoint version {meta.get('version')}")
        kw = {"log_alpha": float(data["log_alpha"])}
        for name, info in meta["nets"].items():
            n = 2 * (len(info["layer_sizes"]) - 1)
            arrays = [data[f"{name}/{i}"] for i in range(n)]
            kw[name] = MlpParams(info["layer_sizes"], arrays[0::2], arrays[1::2], info["activation"])
        for name, info in meta["opts"].items():
            m = [data[f"{name}/m{i}"] for i in range(info["n"])]
            v = [data[f"{name}/v{i}"] for i in range(info["n"])]
            kw[name] = AdamState(m, v, info["t"], info["beta1"], info["beta2"], info["eps"])
    config = TrainConfig.from_dict(meta["config"]) if "config" in meta else None
    if config is not None and config.config_hash() != meta["config_hash"]:
        raise ContractError("checkpoint config hash mismatch")
    return AgentState(**kw), config
