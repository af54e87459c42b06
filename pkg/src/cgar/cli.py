"""Command line entry point: ``cgar train|sweep|summarize|distill``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import distill
from .agent import save_checkpoint
from .config import ALGOS, TrainConfig
from .envs import ENVS
from .harness import run_dir_name, run_sweep, run_training, summarize_dir
from .nn_core import ContractError


def _add_run_args(p, multi=False):
    nargs = "+" if multi else None
    p.add_argument("--algo", choices=ALGOS, nargs=nargs, default=["sac"] if multi else "sac")
    p.add_argument("--env", choices=sorted(ENVS), nargs=nargs, default=["pendulum"] if multi else "pendulum")
    p.add_argument("--k", type=int, default=10, help="candidate actions per step (cgar-sac)")
    p.add_argument("--temperature", type=float, default=1.0, help="softmax temperature over candidate Q scores")
    p.add_argument("--steps", type=int, default=30_000, help="policy-driven steps after warm-up")
    p.add_argument("--init-steps", type=int, default=1000, help="uniform random warm-up steps")
    p.add_argument("--eval-interval", type=int, default=1000)
    p.add_argument("--eval-episodes", type=int, default=10)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--verbose", action="store_true", help="also log every CGAR candidate set")


def _config(args, algo, env, seed) -> TrainConfig:
    return TrainConfig(
        algo=algo, env=env, seed=seed, k=args.k, softmax_temperature=args.temperature,
        n_train=args.steps, n_init=args.init_steps, eval_interval=args.eval_interval,
        eval_episodes=args.eval_episodes,
    )


def _print_summary(rows):
    print(f"{'algo':<20} {'env':<10} {'seeds':>5} {'mean_avg_return':>15} {'std_avg_return':>14}")
    for r in rows:
        print(f"{r.algo:<20} {r.env:<10} {r.seeds:>5} {r.mean_avg_return:>15.2f} {r.std_avg_return:>14.2f}")


def cmd_train(args) -> int:
    cfg = _config(args, args.algo, args.env, args.seed)
    out = args.out / run_dir_name(cfg)
    rec = run_training(cfg, out, verbose=args.verbose)
    save_checkpoint(rec.agent, out / "agent.npz", cfg)
    if not rec.completed:
        print(f"run failed at step {rec.failed_at}: {rec.error}", file=sys.stderr)
        return 1
    print(f"{cfg.label()} {cfg.env} seed={cfg.seed}: average return {rec.average_return():.2f}, "
          f"final eval {rec.evals[-1].mean_return:.2f} -> {out}")
    return 0


def cmd_sweep(args) -> int:
    configs = [_config(args, a, e, s) for e in args.env for a in args.algo for s in range(args.seed0, args.seed0 + args.seeds)]
    dirs = run_sweep(configs, args.out, jobs=args.jobs, verbose=args.verbose)
    print(f"{len(dirs)} runs written to {args.out}")
    _print_summary(summarize_dir(args.out))
    return 0


def cmd_summarize(args) -> int:
    rows = summarize_dir(args.dir)
    if not rows:
        print(f"no completed runs under {args.dir}", file=sys.stderr)
        return 1
    _print_summary(rows)
    return 0


def cmd_distill(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    status = 0
    for variant in args.variant:
        rows = distill.run_demo(variant, seeds=range(args.seeds), epochs=args.epochs)
        path = args.out / f"distill_{variant}.csv"
        distill.write_csv(rows, path)
        epochs, m1, m2 = distill.mean_curves(rows)
        print(f"{variant}: mean eval accuracy over {args.seeds} seeds -> {path}")
        print("epoch  acc_m1  acc_m2")
        for e, a, b in zip(epochs, m1, m2):
            print(f"{e:5d}  {a:.3f}   {b:.3f}")
        if len(epochs) < args.epochs + 1:
            status = 1
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgar", description=__doc__)
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="one training run")
    _add_run_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="seeds x algos x envs, then summarize")
    _add_run_args(p, multi=True)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed0", type=int, default=0, help="first seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("summarize", help="aggregate the runs under DIR into summary.csv and curves.csv")
    p.add_argument("dir", type=Path)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("distill", help="teacher/student lag demo")
    p.add_argument("--variant", choices=distill.VARIANTS, nargs="+", default=["ce"])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_distill)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
