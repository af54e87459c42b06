"""Soft actor-critic with critic-guided action redistribution, in plain numpy."""

from .agent import AgentState, init_agent, load_checkpoint, policy, save_checkpoint, train_step
from .config import TrainConfig
from .envs import PointMass, Pendulum, make_env
from .harness import RunRecord, evaluate, learning_curve_export, load_run, run_sweep, run_training, summarize
from .nn_core import ContractError, NumericError
from .redistribution import cgar_select, redistribute
from .replay import InsufficientDataError, ReplayBuffer, Transition

__version__ = "0.1.0"

__all__ = [
    "AgentState", "ContractError", "InsufficientDataError", "NumericError", "Pendulum", "PointMass",
    "ReplayBuffer", "RunRecord", "TrainConfig", "Transition", "cgar_select", "evaluate", "init_agent",
    "learning_curve_export", "load_checkpoint", "load_run", "make_env", "policy", "redistribute",
    "run_sweep", "run_training", "save_checkpoint", "summarize", "train_step",
]
