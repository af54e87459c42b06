from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

from .nn_core import ContractError

ALGOS = ("sac", "cgar-sac")
SCORE_CRITICS = ("min", "critic1")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one training run.

    ``n_train`` counts policy-driven environment steps after the ``n_init``
    random warm-up steps. ``target_entropy=None`` means ``-action_dim``.
    """

    algo: str = "sac"
    env: str = "pendulum"
    seed: int = 0
    gamma: float = 0.99
    tau: float = 0.005
    lr_q: float = 3e-4
    lr_pi: float = 3e-4
    lr_alpha: float = 3e-4
    k: int = 10
    softmax_temperature: float = 1.0
    score_critic: str = "min"
    n_init: int = 1000
    n_train: int = 30_000
    batch_size: int = 256
    buffer_capacity: int = 100_000
    hidden: tuple = (64, 64)
    init_alpha: float = 0.1
    target_entropy: float | None = None
    eval_interval: int = 1000
    eval_episodes: int = 10
    log_interval: int = 100

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.algo not in ALGOS:
            raise ContractError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        if self.score_critic not in SCORE_CRITICS:
            raise ContractError(f"score_critic must be one of {SCORE_CRITICS}")
        if not 0.0 < self.gamma < 1.0:
            raise ContractError("gamma must lie in (0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ContractError("tau must lie in (0, 1]")
        for name in ("lr_q", "lr_pi", "lr_alpha", "softmax_temperature", "init_alpha"):
            if not getattr(self, name) > 0:
                raise ContractError(f"{name} must be positive")
        if self.k < 1:
            raise ContractError("k must be >= 1")
        if self.n_init < 0 or self.n_train < 0:
            raise ContractError("step counts must be non-negative")
        for name in ("batch_size", "buffer_capacity", "eval_interval", "eval_episodes", "log_interval"):
            if getattr(self, name) < 1:
                raise ContractError(f"{name} must be >= 1")

    @property
    def total_steps(self) -> int:
        return self.n_init + self.n_train

    def resolved_target_entropy(self, action_dim: int) -> float:
        return -float(action_dim) if self.target_entropy is None else float(self.target_entropy)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def label(self) -> str:
        """Group name used in summaries."""
        if self.algo == "sac":
            return "sac"
        if (self.k, self.softmax_temperature, self.score_critic) == (10, 1.0, "min"):
            return "cgar-sac"
        extra = f"k={self.k},T={self.softmax_temperature:g}"
        if self.score_critic != "min":
            extra += f",critic={self.score_critic}"
        return f"cgar-sac[{extra}]"
