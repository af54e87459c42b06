"""Training driver, evaluation protocol and result aggregation.

A run draws everything from one ``np.random.Generator`` seeded with
``config.seed``, in this order:

1. agent initialisation (actor, critic1, critic2);
2. the first environment reset;
3. per environment step: the action (a uniform draw during warm-up, else
   the policy noise and, for CGAR with K > 1, one categorical uniform),
   then an env reset if the episode ended, then ``train_step`` consumption.

Evaluation uses its own generator seeded from ``(seed, EVAL_STREAM)`` and
re-created for every evaluation, so it never perturbs training.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agent import AgentState, agent_for_config, policy, sample_policy_action, train_step
from .config import TrainConfig
from .envs import make_env
from .nn_core import ContractError, NumericError
from .redistribution import cgar_select
from .replay import ReplayBuffer, Transition

log = logging.getLogger(__name__)

EVAL_STREAM = 7_919
METRICS_HEADER = ["step", "event", "mean_return", "ep_returns", "critic_loss", "actor_loss", "alpha_loss", "alpha", "mean_q"]
SUMMARY_HEADER = ["algo", "env", "seeds", "mean_avg_return", "std_avg_return"]
CURVE_HEADER = ["algo", "env", "step", "seeds", "mean", "min", "max"]
CANDIDATE_HEADER = ["step", "k", "chosen_index", "q_scores", "probs"]
TRAIN_KEYS = ("critic_loss", "actor_loss", "alpha_loss", "alpha", "mean_q")


class AggregationError(ValueError):
    pass


@dataclass
class EvalRow:
    step: int
    mean_return: float
    returns: list[float]


@dataclass
class RunRecord:
    config: TrainConfig
    evals: list[EvalRow] = field(default_factory=list)
    train: list[dict] = field(default_factory=list)
    candidates: list[tuple] = field(default_factory=list)
    failed_at: int | None = None
    error: str | None = None
    buffer: ReplayBuffer | None = field(default=None, repr=False, compare=False)
    agent: AgentState | None = field(default=None, repr=False, compare=False)

    @property
    def completed(self) -> bool:
        return self.failed_at is None

    @property
    def eval_steps(self) -> list[int]:
        return [e.step for e in self.evals]

    @property
    def eval_means(self) -> np.ndarray:
        return np.array([e.mean_return for e in self.evals])

    def average_return(self) -> float:
        """Mean of the evaluation returns over the whole run."""
        return float(np.mean(self.eval_means))

    def final_third_return(self) -> float:
        m = self.eval_means
        return float(np.mean(m[len(m) - max(1, len(m) // 3):]))

    def metric_rows(self) -> list[list[str]]:
        """Rows of the metrics CSV, in step order (train before eval at a tie)."""
        rows = [(r["step"], 0, _train_row(r)) for r in self.train]
        rows += [(e.step, 1, _eval_row(e)) for e in self.evals]
        rows.sort(key=lambda x: (x[0], x[1]))
        return [r for _, _, r in rows]


def _fmt(x) -> str:
    return repr(float(x))


def _train_row(r: dict) -> list[str]:
    return [str(r["step"]), "train", "", ""] + [_fmt(r[k]) for k in TRAIN_KEYS]


def _eval_row(e: EvalRow) -> list[str]:
    return [str(e.step), "eval", _fmt(e.mean_return), ";".join(_fmt(x) for x in e.returns)] + [""] * len(TRAIN_KEYS)


class _RowWriter:
    """CSV file where each row goes out in one write followed by a flush."""

    def __init__(self, path: Path, header):
        self.fh = open(path, "w", newline="")
        self.write(header)

    def write(self, row):
        self.fh.write(",".join(row) + "\n")
        self.fh.flush()

    def close(self):
        self.fh.close()


def evaluate(agent: AgentState, env, episodes: int, rng: np.random.Generator):
    """Undiscounted returns of the deterministic ``tanh(mean)`` policy."""
    if episodes < 1:
        raise ContractError("episodes must be >= 1")
    if isinstance(env, str):
        env = make_env(env)
    returns = []
    for _ in range(episodes):
        s = env.reset(rng)
        total, done = 0.0, False
        while not done:
            res = env.step(policy(agent, s).mode())
            total += res.reward
            s, done = res.next_state, res.done
        returns.append(total)
    return float(np.mean(returns)), returns


def eval_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), EVAL_STREAM])


def run_training(config: TrainConfig, out_dir=None, verbose: bool = False) -> RunRecord:
    """Warm-up with uniform random actions, then act-and-train for ``n_train`` steps."""
    rng = np.random.default_rng(config.seed)
    env = make_env(config.env)
    spec = env.spec
    agent = agent_for_config(spec.observation_dim, spec.action_dim, config, rng)
    buffer = ReplayBuffer(config.buffer_capacity)
    record = RunRecord(config, buffer=buffer, agent=agent)

    writer = cand_writer = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.json").write_text(
            json.dumps({**config.to_dict(), "config_hash": config.config_hash()}, indent=2, sort_keys=True)
        )
        _write_status(out_dir, "running")
        writer = _RowWriter(out_dir / "metrics.csv", METRICS_HEADER)
        if verbose and config.algo == "cgar-sac":
            cand_writer = _RowWriter(out_dir / "candidates.csv", CANDIDATE_HEADER)

    state = env.reset(rng)
    step = 0
    try:
        for step in range(1, config.total_steps + 1):
            if step <= config.n_init:
                action = rng.uniform(-1.0, 1.0, size=spec.action_dim)
            else:
                dist = policy(agent, state)
                if config.algo == "sac":
                    action, _ = sample_policy_action(dist, rng)
                else:
                    action, cand = cgar_select(
                        agent, dist, state, config.k, config.softmax_temperature, rng, config.score_critic
                    )
                    if verbose:
                        row = (step, cand.k, cand.chosen_index, cand.q_scores.tolist(), cand.probs.probs.tolist())
                        record.candidates.append(row)
                        if cand_writer:
                            cand_writer.write(
                                [str(step), str(cand.k), str(cand.chosen_index)]
                                + [";".join(_fmt(x) for x in v) for v in row[3:]]
                            )
            res = env.step(action)
            buffer.push(Transition(state, action, res.reward, res.next_state, res.done))
            state = env.reset(rng) if res.done else res.next_state

            if step > config.n_init and len(buffer) >= config.batch_size:
                metrics = train_step(agent, buffer, config, rng)
                if step % config.log_interval == 0:
                    row = {"step": step, **metrics}
                    record.train.append(row)
                    if writer:
                        writer.write(_train_row(row))

            if step % config.eval_interval == 0:
                mean, rets = evaluate(agent, config.env, config.eval_episodes, eval_rng(config.seed))
                e = EvalRow(step, mean, rets)
                record.evals.append(e)
                if writer:
                    writer.write(_eval_row(e))
                log.info("%s %s seed=%d step=%d eval=%.2f", config.label(), config.env, config.seed, step, mean)
    except NumericError as exc:
        record.failed_at, record.error = step, str(exc)
        log.error("run failed at step %d: %s", step, exc)
    finally:
        if writer:
            writer.close()
        if cand_writer:
            cand_writer.close()
    if out_dir is not None:
        _write_status(out_dir, "complete" if record.completed else "failed", record.failed_at, record.error)
    return record


def _write_status(out_dir: Path, status, failed_at=None, error=None):
    tmp = out_dir / "status.json.tmp"
    tmp.write_text(json.dumps({"status": status, "failed_at": failed_at, "error": error}))
    os.replace(tmp, out_dir / "status.json")


def run_dir_name(config: TrainConfig) -> str:
    if config.algo == "sac":
        tag = "sac"
    else:
        tag = f"cgar-sac_k{config.k}_T{config.softmax_temperature:g}"
        if config.score_critic != "min":
            tag += f"_{config.score_critic}"
    return f"{config.env}_{tag}_seed{config.seed}"


def _run_job(args):
    config, out_root, verbose = args
    out = Path(out_root) / run_dir_name(config)
    rec = run_training(config, out, verbose)
    return str(out), rec.completed


def run_sweep(configs, out_root, jobs: int = 1, verbose: bool = False):
    """Run independent jobs, optionally in separate processes; returns run dirs."""
    tasks = [(c, str(out_root), verbose) for c in configs]
    if jobs <= 1:
        results = [_run_job(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_job, tasks))
    return [Path(p) for p, _ in results]


def load_run(run_dir) -> RunRecord:
    run_dir = Path(run_dir)
    cfg = json.loads((run_dir / "config.json").read_text())
    cfg.pop("config_hash", None)
    record = RunRecord(TrainConfig.from_dict(cfg))
    status_file = run_dir / "status.json"
    status = json.loads(status_file.read_text()) if status_file.exists() else {"status": "running"}
    if status["status"] != "complete":
        record.failed_at = status.get("failed_at") or -1
        record.error = status.get("error") or status["status"]
    with open(run_dir / "metrics.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["event"] == "eval":
                rets = [float(x) for x in row["ep_returns"].split(";") if x]
                record.evals.append(EvalRow(int(row["step"]), float(row["mean_return"]), rets))
            elif row["event"] == "train":
                record.train.append({"step": int(row["step"]), **{k: float(row[k]) for k in TRAIN_KEYS}})
    return record


def find_runs(root) -> list[Path]:
    return sorted(p.parent for p in Path(root).rglob("metrics.csv"))


def _group(records):
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.config.label(), r.config.env), []).append(r)
    for key, runs in groups.items():
        steps = runs[0].eval_steps
        if not steps:
            raise AggregationError(f"{key}: run without evaluations")
        for r in runs[1:]:
            if r.eval_steps != steps:
                raise AggregationError(f"{key}: evaluation schedules differ between seeds")
    return groups


@dataclass
class SummaryRow:
    algo: str
    env: str
    seeds: int
    mean_avg_return: float
    std_avg_return: float

    def as_csv(self) -> list[str]:
        return [self.algo, self.env, str(self.seeds), _fmt(self.mean_avg_return), _fmt(self.std_avg_return)]


def summarize(records) -> list[SummaryRow]:
    """Per (algo, env): mean and population std over seeds of each run's average eval return."""
    done = [r for r in records if r.completed]
    rows = []
    for (label, env), runs in sorted(_group(done).items()):
        avgs = np.array([r.average_return() for r in runs])
        rows.append(SummaryRow(label, env, len(runs), float(avgs.mean()), float(avgs.std())))
    return rows


def learning_curve_export(records) -> list[dict]:
    """One row per (algo, env, eval step): mean, min and max over seeds."""
    out = []
    for (label, env), runs in sorted(_group([r for r in records if r.completed]).items()):
        m = np.stack([r.eval_means for r in runs])
        for j, step in enumerate(runs[0].eval_steps):
            col = m[:, j]
            out.append({"algo": label, "env": env, "step": step, "seeds": len(runs),
                        "mean": float(col.mean()), "min": float(col.min()), "max": float(col.max())})
    return out


def write_summary(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        w.writerows(r.as_csv() for r in rows)


def read_summary(path) -> list[SummaryRow]:
    with open(path, newline="") as fh:
        return [
            SummaryRow(r["algo"], r["env"], int(r["seeds"]), float(r["mean_avg_return"]), float(r["std_avg_return"]))
            for r in csv.DictReader(fh)
        ]


def write_curves(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for r in rows:
            w.writerow([r["algo"], r["env"], r["step"], r["seeds"], _fmt(r["mean"]), _fmt(r["min"]), _fmt(r["max"])])


def read_curves(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {"algo": r["algo"], "env": r["env"], "step": int(r["step"]), "seeds": int(r["seeds"]),
             "mean": float(r["mean"]), "min": float(r["min"]), "max": float(r["max"])}
            for r in csv.DictReader(fh)
        ]


def summarize_dir(root):
    """Aggregate every completed run under ``root``; writes summary.csv and curves.csv there."""
    root = Path(root)
    records = [load_run(d) for d in find_runs(root)]
    rows = summarize(records)
    write_summary(rows, root / "summary.csv")
    write_curves(learning_curve_export(records), root / "curves.csv")
    return rows


def pooled_standard_error(a, b) -> float:
    """Standard error of the difference of two seed means."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    var = 0.0
    for x in (a, b):
        if len(x) > 1:
            var += x.var(ddof=1) / len(x)
    return math.sqrt(var)
